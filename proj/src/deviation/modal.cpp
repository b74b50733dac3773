#include "avghb/deviation/modal.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "avghb/error.hpp"

namespace avghb::deviation {

namespace {

bool is_companion(const Mat2& T) { return T(1, 0) == 1.0 && T(1, 1) == 0.0; }

bool near_confluent(Complex r1, Complex r2) {
  return std::abs(r1 - r2) < kConfluenceTol * (std::abs(r1) + std::abs(r2)) || r1 == r2;
}

}  // namespace

std::pair<Complex, Complex> companion_roots(const Mat2& T) {
  const double a = T(0, 0);
  const double b = T(0, 1);
  const double disc = std::fma(a, a, 4.0 * b);
  if (disc < 0.0) {
    const double im = 0.5 * std::sqrt(-disc);
    return {Complex(0.5 * a, im), Complex(0.5 * a, -im)};
  }
  // Larger root without cancellation, smaller one from the product -b.
  const double q = 0.5 * (a + std::copysign(std::sqrt(disc), a));
  if (q == 0.0) return {Complex(0.0), Complex(0.0)};
  return {Complex(q), Complex(-b / q)};
}

RootSum::RootSum(double a, double b) {
  mid_ = 0.5 * a;
  const double disc = std::fma(a, a, 4.0 * b);
  const Mat2 T = (Mat2() << a, b, 1.0, 0.0).finished();
  const auto [r1, r2] = companion_roots(T);
  confluent_ = near_confluent(r1, r2);
  if (disc < 0.0) {
    regime_ = Regime::complex;
    // |r|^2 = -b exactly.
    log_r_ = 0.5 * std::log(-b);
    theta_ = std::atan2(0.5 * std::sqrt(-disc), mid_);
    sin_theta_ = std::sin(theta_);
    return;
  }
  regime_ = disc == 0.0 ? Regime::repeated : Regime::real_distinct;
  if (confluent_) return;
  const double root1 = r1.real();
  log_r_ = std::log(std::abs(root1));
  sign_r_ = root1 < 0.0 ? -1.0 : 1.0;
  q_ = r2.real() / root1;
  // r2 - r1 = -sign(a) sqrt(disc) with no cancellation.
  if (q_ > 0.5) log_q_ = std::log1p(-std::copysign(std::sqrt(disc), a) / root1);
}

double RootSum::operator()(std::size_t k) const {
  if (k == 0) return 0.0;
  const double km1 = static_cast<double>(k - 1);
  const double kd = static_cast<double>(k);
  if (confluent_) return kd * std::pow(mid_, km1);
  if (regime_ == Regime::complex) {
    return std::exp(km1 * log_r_) * std::sin(kd * theta_) / sin_theta_;
  }
  double geometric;
  if (q_ > 0.5) {
    geometric = std::expm1(kd * log_q_) / std::expm1(log_q_);
  } else {
    geometric = (1.0 - std::pow(q_, kd)) / (1.0 - q_);
  }
  const double sign = (sign_r_ < 0.0 && (k - 1) % 2 == 1) ? -1.0 : 1.0;
  return sign * std::exp(km1 * log_r_) * geometric;
}

Mat2 modal_power(const Mat2& T, std::size_t k) {
  if (k == 0) throw DomainError("modal_power needs k >= 1");
  if (!is_companion(T)) throw DomainError("modal_power expects [[a, b], [1, 0]]");
  const double b = T(0, 1);
  const RootSum U(T(0, 0), b);
  Mat2 out;
  out << U(k + 1), b * U(k), U(k), b * U(k - 1);
  return out;
}

double spectral_norm(const Mat2& M) {
  const double fro2 = M.squaredNorm();
  const double det = M.determinant();
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
  return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

Mode make_mode(double lambda, const optim::HBParams& params) {
  Mode mode;
  mode.lambda = lambda;
  const double a = 1.0 + params.beta - params.alpha * lambda;
  mode.transition << a, -params.beta, 1.0, 0.0;
  std::tie(mode.root1, mode.root2) = companion_roots(mode.transition);
  const double disc = std::fma(a, a, -4.0 * params.beta);
  mode.regime = disc < 0.0 ? Regime::complex : disc == 0.0 ? Regime::repeated : Regime::real_distinct;
  mode.radius = std::max(std::abs(mode.root1), std::abs(mode.root2));
  mode.norm2 = spectral_norm(mode.transition);
  mode.confluent = near_confluent(mode.root1, mode.root2);
  return mode;
}

ModalSystem ModalSystem::build(std::span<const double> eigenvalues,
                               const optim::HBParams& params) {
  params.validate();
  if (eigenvalues.empty()) throw DomainError("spectrum is empty");
  ModalSystem sys;
  sys.eigenvalues.assign(eigenvalues.begin(), eigenvalues.end());
  std::sort(sys.eigenvalues.begin(), sys.eigenvalues.end());
  if (!(sys.eigenvalues.front() > 0.0) || !std::isfinite(sys.eigenvalues.back())) {
    throw DomainError("spectrum must be positive and finite");
  }
  sys.params = params;
  sys.modes.reserve(sys.eigenvalues.size());
  for (double lambda : sys.eigenvalues) sys.modes.push_back(make_mode(lambda, params));
  return sys;
}

bool ModalSystem::stable() const {
  return std::all_of(modes.begin(), modes.end(), [](const Mode& m) { return m.radius < 1.0; });
}

}  // namespace avghb::deviation
