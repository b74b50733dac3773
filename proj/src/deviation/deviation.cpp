#include "avghb/deviation/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "avghb/error.hpp"

namespace avghb::deviation {

namespace {

constexpr std::size_t kMinScan = 64;
constexpr double kTailFraction = 1e-6;

// Bottom row of T^k for k = 0, 1, 2, ...: (U_k, b U_{k-1}), with (0, 1)
// at k = 0.
class BottomRows {
 public:
  explicit BottomRows(const Mode& mode)
      : b_(mode.transition(0, 1)), sum_(mode.transition(0, 0), b_) {}

  Eigen::Vector2d next() {
    Eigen::Vector2d row;
    if (k_ == 0) {
      row << 0.0, 1.0;
    } else {
      const double u = sum_(k_);
      row << u, b_ * prev_;
      prev_ = u;
    }
    ++k_;
    return row;
  }

 private:
  double b_;
  RootSum sum_;
  double prev_ = 0.0;  // U_{k-1}
  std::size_t k_ = 0;
};

// t r^{t-1} (|T| + 1) bounds |C T^t| for t >= 1.
double tail_bound(const Mode& mode, std::size_t t) {
  const double r = mode.radius;
  const double td = static_cast<double>(t);
  return td * std::pow(r, td - 1.0) * (mode.norm2 + 1.0);
}

// The bound is nonincreasing for t >= 1 / (-ln r).
bool bound_decreasing_from(const Mode& mode, std::size_t t) {
  const double r = mode.radius;
  if (r == 0.0) return true;
  return static_cast<double>(t) >= -1.0 / std::log(r);
}

}  // namespace

DeviationReport dev_measure(const DeviationQuery& query) {
  const ModalSystem sys = ModalSystem::build(query.spectrum, query.params);
  const std::size_t n = sys.modes.size();
  const bool stable = sys.stable();

  double log_growth = 0.0;
  if (query.scheme == DevScheme::weighted_avg) log_growth = query.weight_log_growth;
  optim::WeightRatio ratio(log_growth);

  std::vector<BottomRows> rows;
  rows.reserve(n);
  for (const Mode& mode : sys.modes) rows.emplace_back(mode);
  std::vector<Eigen::Vector2d> means(n, Eigen::Vector2d::Zero());

  DeviationReport report;
  if (query.keep_curves) report.per_mode_curves.emplace(n);

  for (std::size_t k = 0; k <= query.K_cap; ++k) {
    const double r = query.scheme == DevScheme::raw ? 1.0 : ratio.next();
    bool finite = true;
    for (std::size_t j = 0; j < n; ++j) {
      const Eigen::Vector2d row = rows[j].next();
      double value = 0.0;
      if (query.scheme == DevScheme::raw) {
        value = row.norm();
      } else {
        if (k == 0) {
          means[j] = row;
        } else {
          means[j] += r * (row - means[j]);
        }
        value = means[j].norm();
      }
      if (!std::isfinite(value)) finite = false;
      if (report.per_mode_curves) (*report.per_mode_curves)[j].push_back(value);
      if (value > report.dev_value) {
        report.dev_value = value;
        report.argmax_k = k;
        report.argmax_mode = j;
      }
    }
    report.truncation_K = k;
    if (!finite) break;

    if (stable && k >= kMinScan) {
      const double threshold = kTailFraction * report.dev_value;
      const bool done = std::all_of(sys.modes.begin(), sys.modes.end(), [&](const Mode& mode) {
        return bound_decreasing_from(mode, k + 1) && tail_bound(mode, k + 1) < threshold;
      });
      if (done) {
        report.converged = true;
        break;
      }
    }
  }
  return report;
}

double theorem3_ratio_bound(double F) {
  if (!(F > 14.0)) throw DomainError("hypothesis F > 14 fails (F = " + std::to_string(F) + ")");
  return 2.0 * std::numbers::e * std::sqrt(6.0) / std::sqrt(F * F - 1.0);
}

Theorem3Result theorem3_compare(std::span<const double> spectrum, double F, std::size_t K_cap) {
  std::vector<double> lam(spectrum.begin(), spectrum.end());
  std::sort(lam.begin(), lam.end());
  if (lam.size() < 2) throw DomainError("spectrum needs at least two eigenvalues");
  if (!(lam.front() > 0.0)) throw DomainError("spectrum must be positive");
  const double l1 = lam.front();
  const double l2 = lam[1];
  const double ln = lam.back();

  Theorem3Result res;
  res.ratio_bound = theorem3_ratio_bound(F);
  if (!(l2 >= F * F * l1)) {
    throw DomainError("hypothesis lambda_2 >= F^2 lambda_1 fails");
  }
  if (!(F <= std::sqrt(ln / l1))) {
    throw DomainError("hypothesis F <= sqrt(lambda_n / lambda_1) fails");
  }
  if (!(ln >= 10000.0 * l1)) throw DomainError("hypothesis lambda_n >= 10000 lambda_1 fails");

  const double lo_root = 1.0 - std::sqrt(l2 / ln);
  const double hi_root = 1.0 - F * std::sqrt(l1 / ln);
  res.beta_lo = lo_root * lo_root;
  res.beta_hi = hi_root * hi_root;
  res.interval_empty = !(res.beta_lo < res.beta_hi);
  res.averaged_params = {1.0 / ln, res.beta_hi};
  res.optimal_params = optim::optimal_hb_params(ln, l1);

  DeviationQuery q;
  q.spectrum = lam;
  q.K_cap = K_cap;
  q.params = res.averaged_params;
  q.scheme = DevScheme::uniform_avg;
  const DeviationReport avg = dev_measure(q);
  q.scheme = DevScheme::raw;
  const DeviationReport raw = dev_measure(q);
  q.params = res.optimal_params;
  const DeviationReport opt = dev_measure(q);

  res.measured_lhs = avg.dev_value;
  res.measured_hb = raw.dev_value;
  res.measured_rhs = opt.dev_value;
  res.converged = avg.converged && raw.converged && opt.converged;
  res.holds = res.measured_lhs <= res.ratio_bound * res.measured_rhs;
  return res;
}

double hb_peak_lower_bound(double kappa) {
  if (!(kappa >= 1.0)) throw DomainError("condition number must be >= 1");
  return std::sqrt(kappa) / (2.0 * std::numbers::e);
}

}  // namespace avghb::deviation
