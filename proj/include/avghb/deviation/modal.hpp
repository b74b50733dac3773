#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "avghb/optim/params.hpp"

namespace avghb::deviation {

using Mat2 = Eigen::Matrix2d;
using Complex = std::complex<double>;

enum class Regime { real_distinct, repeated, complex };

// Roots closer than this (relative to |rho_1| + |rho_2|) use the
// repeated-root power formula.
inline constexpr double kConfluenceTol = 1e-9;

// Eigenvalues of a companion matrix [[a, b], [1, 0]]: roots of
// rho^2 - a rho - b. `first` has the larger modulus (positive imaginary part
// when complex).
std::pair<Complex, Complex> companion_roots(const Mat2& T);

// T^k for T = [[a, b], [1, 0]] from the root formulas
//   distinct: 1/(r2 - r1) [[r2^{k+1} - r1^{k+1}, r1 r2 (r1^k - r2^k)],
//                          [r2^k - r1^k,         r1 r2 (r1^{k-1} - r2^{k-1})]]
//   repeated: [[(k+1) r^k, -k r^{k+1}], [k r^{k-1}, (1-k) r^k]]
// Both are [[U_{k+1}, b U_k], [U_k, b U_{k-1}]] with
// U_k = (r2^k - r1^k) / (r2 - r1), which is what gets evaluated (see
// RootSum) so that nearly equal roots lose no accuracy. Requires k >= 1 and
// the companion structure.
Mat2 modal_power(const Mat2& T, std::size_t k);

// U_k = (r2^k - r1^k) / (r2 - r1) for the roots of rho^2 - a rho - b, or
// k r^{k-1} when the roots are (nearly) equal.
//   complex roots r e^{+-i theta}: r^{k-1} sin(k theta) / sin(theta)
//   real roots, q = r2 / r1:       r1^{k-1} (1 - q^k) / (1 - q), the last
//                                  factor through expm1/log1p when q ~ 1
class RootSum {
 public:
  RootSum(double a, double b);

  double operator()(std::size_t k) const;
  Regime regime() const noexcept { return regime_; }

 private:
  Regime regime_ = Regime::real_distinct;
  bool confluent_ = false;
  double mid_ = 0.0;        // (r1 + r2) / 2
  double log_r_ = 0.0;      // log |r1|
  double sign_r_ = 1.0;     // sign of r1 (real roots)
  double theta_ = 0.0;      // complex roots
  double sin_theta_ = 1.0;
  double q_ = 0.0;          // r2 / r1
  double log_q_ = 0.0;      // log q when q > 1/2
};

// One Hessian eigen-direction of the heavy-ball recurrence.
struct Mode {
  double lambda = 0.0;
  Mat2 transition;  // [[1 + beta - alpha lambda, -beta], [1, 0]]
  Complex root1;
  Complex root2;
  Regime regime = Regime::real_distinct;
  double radius = 0.0;     // max(|root1|, |root2|)
  double norm2 = 0.0;      // spectral norm of the transition
  bool confluent = false;  // roots within kConfluenceTol
};

Mode make_mode(double lambda, const optim::HBParams& params);

struct ModalSystem {
  std::vector<double> eigenvalues;  // ascending
  optim::HBParams params;
  std::vector<Mode> modes;

  // Throws DomainError for an empty or non-positive spectrum.
  static ModalSystem build(std::span<const double> eigenvalues, const optim::HBParams& params);

  // Every mode has spectral radius < 1.
  bool stable() const;
};

// Spectral norm of a 2x2 matrix.
double spectral_norm(const Mat2& M);

}  // namespace avghb::deviation
