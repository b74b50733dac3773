// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "avghb/deviation/deviation.hpp"
#include "avghb/optim/runner.hpp"
#include "avghb/optim/stepper.hpp"
#include "avghb/problems/libsvm.hpp"
#include "avghb/problems/logreg.hpp"
#include "avghb/problems/quadratic.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace {

using namespace avghb;
using namespace avghb::optim;
using deviation::DevScheme;
using testing::fd_gradient;
using testing::gaussian_vector;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// mu = 1, L = 1e4, n = 50 with 48 interior eigenvalues spread geometrically
// over [10, 1e4].
problems::QuadraticProblem peak_family() {
  const Vector interior = problems::geometric_grid(10.0, 1e4, 48);
  return problems::make_diag_quadratic(1.0, {interior.data(), static_cast<std::size_t>(interior.size())},
                                       1e4);
}

Outcome peak_effect() {
  const auto q = peak_family();
  const auto& m = q.meta();
  const auto p = optimal_hb_params(m.smooth_L, m.strong_mu);
  const auto t = run(q, p, AveragingScheme::none(), Vector::Ones(50), X1Rule::copy_x0, 5000);
  double peak = 0.0;
  for (const auto& r : t.rows) peak = std::max(peak, r.inf_norm_raw);
  const double bound = deviation::hb_peak_lower_bound(m.kappa());
  return {peak >= bound, fmt("max |x_k|_inf = %.4f, lower bound %.4f", peak, bound)};
}

Outcome averaged_bounded() {
  const auto q = peak_family();
  const double mu = q.meta().strong_mu, L = q.meta().smooth_L;
  const double s = std::sqrt(mu / L);
  double worst = 0.0;
  bool ok = true;
  for (double beta : {(1 - 3 * s) * (1 - 3 * s), (1 - 2 * s) * (1 - 2 * s)}) {
    const auto t = run(q, {1.0 / L, beta}, AveragingScheme::uniform(), Vector::Ones(50),
                       X1Rule::copy_x0, 100000);
    for (const auto& r : t.rows) worst = std::max(worst, r.inf_norm_avg);
    ok = ok && !t.diverged;
  }
  return {ok && worst <= 2.0 + 1e-9, fmt("max |xbar_k|_inf = %.6f over 1e5 iterations, both betas", worst)};
}

Outcome deviation_ordering() {
  Rng rng(20240601);
  std::size_t checks = 0, violations = 0, unconverged = 0;
  double worst_ratio = 0.0;
  for (int s = 0; s < 20; ++s) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 19);
    const double kappa = std::exp(1.0 + rng.uniform() * std::log(1e4));
    std::vector<double> spec(n);
    for (auto& v : spec) v = std::exp(rng.uniform() * std::log(kappa));
    spec.front() = 1.0;
    spec.back() = kappa;
    std::sort(spec.begin(), spec.end());
    for (int pair = 0; pair < 5; ++pair) {
      const double beta = rng.uniform() * 0.95;
      const double alpha = (0.3 + 1.2 * rng.uniform()) / kappa;
      deviation::DeviationQuery q{.params = {alpha, beta}, .spectrum = spec, .K_cap = 2'000'000};
      q.scheme = DevScheme::raw;
      const auto hb = deviation::dev_measure(q);
      q.scheme = DevScheme::uniform_avg;
      const auto ahb = deviation::dev_measure(q);
      q.scheme = DevScheme::weighted_avg;
      q.weight_log_growth = std::log(1.01);
      const auto wahb = deviation::dev_measure(q);
      unconverged += !hb.converged + !ahb.converged + !wahb.converged;
      for (double v : {ahb.dev_value, wahb.dev_value}) {
        ++checks;
        if (v > hb.dev_value + 1e-12) ++violations;
        worst_ratio = std::max(worst_ratio, v / hb.dev_value);
      }
    }
  }
  return {violations == 0 && unconverged == 0,
          fmt("%zu comparisons, %zu violations, %zu unconverged, max ratio %.6f", checks, violations,
              unconverged, worst_ratio)};
}

Outcome theorem3_desk() {
  const std::vector<double> spec{1.0, 2500.0, 1e6};
  const auto r = deviation::theorem3_compare(spec, 50.0, 20'000'000);
  const double rhs = r.ratio_bound * r.measured_rhs;
  const bool desk = r.measured_lhs <= rhs && r.converged;

  const double F = 200.0, kappa = 1e8;
  const double beta = std::pow(1 - F / std::sqrt(kappa), 2);
  const double factor = deviation::theorem3_ratio_bound(F);
  const bool headline = std::abs(beta - 0.9604) < 1e-12 && std::abs(factor - 0.067) < 5e-4;
  return {desk && headline,
          fmt("dev_AHB = %.4f <= %.5f * %.4f = %.4f (beta = %.6f%s, converged = %d); "
              "headline beta = %.4f, factor = %.4f",
              r.measured_lhs, r.ratio_bound, r.measured_rhs, rhs, r.averaged_params.beta,
              r.interval_empty ? ", empty interval" : "", r.converged, beta, factor)};
}

// Worst value of (gap - envelope) / delta0 along a theorem-weighted run.
double envelope_excess(const problems::Objective& f, double beta, const Vector& x0, std::size_t K) {
  const auto& m = f.meta();
  const HBParams p{wahb_stepsize(m.smooth_L, beta), beta};
  const auto t = run(f, p, AveragingScheme::theorem_weights(), x0, X1Rule::one_grad_step, K);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : t.rows) {
    if (!r.bound_envelope) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, (r.f_gap_avg - *r.bound_envelope) / t.delta0);
  }
  return t.diverged ? std::numeric_limits<double>::infinity() : worst;
}

Outcome wahb_envelope() {
  const auto nest = problems::make_nesterov(100, 1e3, 1.0);
  auto data = problems::make_synthetic_dataset(4000, 123, 7, 0.11);
  const double l2 = 1e-2 * problems::max_singular_value_squared(data.features) / (4.0 * 4000);
  const problems::LogRegProblem lr(std::move(data), l2);
  Rng rng(5);
  double worst = -std::numeric_limits<double>::infinity();
  for (double beta : {0.0, 0.5, 0.9}) {
    worst = std::max(worst, envelope_excess(nest, beta, Vector::Ones(100), 10000));
    worst = std::max(worst, envelope_excess(lr, beta, gaussian_vector(rng, 123), 10000));
  }
  return {worst <= 1e-9,
          fmt("max (gap - envelope) / delta0 = %.3e over K <= 1e4, nesterov and logreg, 3 betas", worst)};
}

Outcome convex_rate() {
  const auto base = std::make_shared<problems::QuadraticProblem>(problems::make_nesterov(100, 1e3, 1.0));
  const auto f = problems::with_declared_mu(base, 0.0);
  const Vector x0 = Vector::Ones(100);
  const double L = f->meta().smooth_L;
  double worst = 0.0;
  for (double beta : {0.0, 0.5, 0.9, 0.99}) {
    const double alpha = wahb_stepsize(L, beta);
    const auto t = run(*f, {alpha, beta}, AveragingScheme::uniform(), x0, X1Rule::one_grad_step, 10000);
    for (const auto& r : t.rows) {
      if (r.k == 0) continue;
      const double bound = 4 * (1 - beta) * t.R0 * t.R0 / (alpha * static_cast<double>(r.k));
      worst = std::max(worst, r.f_gap_avg / bound);
    }
  }
  return {worst <= 1.0, fmt("max gap / (4(1-beta)R0^2/(alpha K)) = %.4f over K in [1, 1e4], 4 betas", worst)};
}

Outcome restart_accuracy() {
  std::vector<problems::QuadraticProblem> probs;
  probs.push_back(problems::make_diag_quadratic(1.0, std::vector<double>{2.0, 5.0, 20.0, 50.0}, 100.0));
  probs.push_back(problems::make_random_quadratic(20, 11, problems::SpectrumTarget{0.5, 50.0}));
  probs.push_back(problems::make_nesterov(50, 100.0, 1.0));
  Rng rng(9);
  std::size_t runs = 0, failures = 0;
  double worst_final = 0.0, worst_stage = 0.0;
  for (const auto& q : probs) {
    const double mu = q.meta().strong_mu;
    for (double beta : {0.0, 0.5}) {
      const Vector x0 = gaussian_vector(rng, q.dim());
      const double R0 = (x0 - q.meta().x_star).norm();
      const double eps = 1e-6 * mu * R0 * R0;
      const auto [traj, sched] = run_rahb(q, beta, eps, R0, x0);
      ++runs;
      const double final_ratio = q.gap(sched.x_hat) / eps;
      worst_final = std::max(worst_final, final_ratio);
      bool ok = final_ratio <= 1.0 && sched.stage_gaps.size() == sched.tau;
      for (std::size_t t = 0; t < sched.stage_gaps.size(); ++t) {
        const double target = mu * R0 * R0 / std::pow(2.0, static_cast<double>(t + 2));
        worst_stage = std::max(worst_stage, sched.stage_gaps[t] / target);
        ok = ok && sched.stage_gaps[t] <= target;
      }
      failures += !ok;
    }
  }
  return {failures == 0, fmt("%zu runs, %zu failures, max final gap/eps = %.3e, max stage gap/target = %.3e",
                             runs, failures, worst_final, worst_stage)};
}

Outcome modal_oracle() {
  Rng rng(17);
  double worst_power = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto t = oracles::random_stable(rng);
    worst_power = std::max(worst_power, oracles::worst_power_error(oracles::companion(t.lambda, t.params), 500));
  }
  double worst_dev = 0.0;
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<double> spec(n);
    for (auto& v : spec) v = std::exp(rng.uniform() * std::log(50.0));
    std::sort(spec.begin(), spec.end());
    const HBParams p{0.9 / spec.back(), 0.6};
    for (auto [scheme, g] : {std::pair{DevScheme::raw, 0.0}, std::pair{DevScheme::uniform_avg, 0.0},
                             std::pair{DevScheme::weighted_avg, std::log(1.01)}}) {
      deviation::DeviationQuery q{.scheme = scheme, .weight_log_growth = g, .params = p, .spectrum = spec};
      const auto r = deviation::dev_measure(q);
      const double ref = oracles::full_recurrence_dev(spec, p, scheme, g, r.truncation_K, rng);
      worst_dev = std::max(worst_dev, std::abs(r.dev_value - ref) / ref);
    }
  }
  return {worst_power <= 1e-10 && worst_dev <= 1e-8,
          fmt("power error %.3e over 100 triples, dev error %.3e vs full recurrence (n <= 5)", worst_power,
              worst_dev)};
}

Outcome form_identities() {
  Rng rng(23);
  double worst_form = 0.0, worst_virtual = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto q = problems::make_random_quadratic(15, 300 + trial, problems::SpectrumTarget{1.0, 200.0});
    const HBParams p{1.0 / 200.0, 0.2 + 0.15 * trial};
    const Vector x0 = gaussian_vector(rng, 15);
    OptState direct = initial_state(x0, x0 - p.alpha * q.gradient(x0));
    MomentumState mom{x0, Vector::Zero(15), 0};
    momentum_step(mom, p, q.gradient(mom.x));
    for (int k = 1; k <= 500; ++k) {
      worst_form = std::max(worst_form, testing::rel_err(direct.x_curr, mom.x));
      hb_step(direct, p, q.gradient(direct.x_curr));
      momentum_step(mom, p, q.gradient(mom.x));
    }

    RunOptions opt{.x1_rule = X1Rule::one_grad_step, .iters = 500, .record_states = true};
    const auto t = run(q, p, AveragingScheme::none(), x0, opt);
    const auto tilde = virtual_iterates(*t.states, p);
    double scale = 0.0;
    for (const auto& v : tilde) scale = std::max(scale, v.norm());
    for (double r : virtual_recurrence_residuals(*t.states, p)) worst_virtual = std::max(worst_virtual, r / scale);
  }
  return {worst_form <= 1e-12 && worst_virtual <= 1e-10,
          fmt("form disagreement %.3e over 500 steps, virtual residual %.3e", worst_form, worst_virtual)};
}

Outcome gradients() {
  Rng rng(29);
  std::vector<std::pair<std::string, std::shared_ptr<const problems::Objective>>> fams;
  fams.emplace_back("random", std::make_shared<problems::QuadraticProblem>(problems::make_random_quadratic(
                                  30, 4, problems::SpectrumTarget{0.1, 10.0})));
  fams.emplace_back("nesterov", std::make_shared<problems::QuadraticProblem>(problems::make_nesterov(30, 10.0, 0.1)));
  fams.emplace_back("toeplitz", std::make_shared<problems::QuadraticProblem>(problems::make_toeplitz(30, 0.01)));
  fams.emplace_back("logreg", std::make_shared<problems::LogRegProblem>(problems::make_synthetic_dataset(200, 30, 3, 0.5),
                                                                        1e-3));
  std::string detail;
  bool ok = true;
  for (const auto& [name, f] : fams) {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Vector x = gaussian_vector(rng, f->dim());
      worst = std::max(worst, testing::rel_err(f->gradient(x), fd_gradient(*f, x)));
    }
    ok = ok && worst <= 1e-5;
    detail += fmt("%s%s %.2e", detail.empty() ? "" : ", ", name.c_str(), worst);
  }
  return {ok, "max relative error: " + detail};
}

Outcome parser() {
  std::filesystem::path a9a;
  if (const char* env = std::getenv("AVGHB_A9A")) a9a = env;
  else if (std::filesystem::exists(AVGHB_SOURCE_DIR "/data/a9a")) a9a = AVGHB_SOURCE_DIR "/data/a9a";
  if (!a9a.empty()) {
    const auto d = problems::parse_libsvm(a9a);
    return {d.samples() == 32561 && d.features_dim() == 123,
            fmt("a9a at %s: m = %zu, d = %zu", a9a.c_str(), d.samples(), d.features_dim())};
  }
  const auto data = problems::make_synthetic_dataset(500, 40, 31, 0.2);
  std::stringstream io;
  problems::write_libsvm(data, io);
  const auto back = problems::parse_libsvm(io, data.features_dim());
  const bool exact = back.samples() == data.samples() && back.features_dim() == data.features_dim() &&
                     back.labels == data.labels &&
                     Matrix(back.features) == Matrix(data.features);
  return {exact, fmt("a9a not supplied (set AVGHB_A9A); synthetic %zu x %zu round trip %s", data.samples(),
                     data.features_dim(), exact ? "exact" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"peak effect of optimally tuned heavy ball", peak_effect},
      {"averaged iterates stay bounded", averaged_bounded},
      {"averaging never increases deviation", deviation_ordering},
      {"averaged vs optimal deviation at desk scale", theorem3_desk},
      {"weighted average envelope", wahb_envelope},
      {"convex 1/K rate with declared mu = 0", convex_rate},
      {"restarted averaging accuracy", restart_accuracy},
      {"modal power and full recurrence oracles", modal_oracle},
      {"iterate forms and virtual recurrence", form_identities},
      {"gradients vs finite differences", gradients},
      {"libsvm parser", parser},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("AC%-2zu %s  %s: %s [%.2fs]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
