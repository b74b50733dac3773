#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "avghb/problems/objective.hpp"

namespace avghb::problems {

// f(x) = 1/2 x^T A x - b^T x with A symmetric positive definite.
//
// The spectrum is computed once at construction; meta().smooth_L and
// meta().strong_mu are its extreme values and x_star solves A x = b.
class QuadraticProblem final : public Objective {
 public:
  // `x_star` may be supplied when b was built as A x_star; otherwise the
  // minimizer is obtained from a Cholesky solve.
  QuadraticProblem(Matrix A, Vector b, std::string family,
                   std::optional<Vector> x_star = std::nullopt, double diag_shift = 0.0);

  const Matrix& matrix() const noexcept { return A_; }
  const Vector& linear() const noexcept { return b_; }
  // Ascending.
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  // Multiple of the identity added to make the matrix definite (toeplitz only).
  double diag_shift() const noexcept { return diag_shift_; }
  bool is_diagonal() const noexcept { return diagonal_; }

  Vector hessian_times(const Vector& v) const;

  std::string family() const override { return family_; }

 protected:
  Evaluation do_eval(const Vector& x) const override;
  // 1/2 (x - x*)^T A (x - x*), exact and nonnegative.
  double do_gap(const Vector& x) const override;

 private:
  Matrix A_;
  Vector b_;
  Vector eigenvalues_;
  Vector diag_;
  bool diagonal_ = false;
  std::string family_;
  double diag_shift_ = 0.0;
};

// diag(mu, interior..., L) with b = 0. Throws DomainError naming the first
// interior index that breaks mu <= interior[0] <= ... <= L.
QuadraticProblem make_diag_quadratic(double mu, std::span<const double> interior, double L);

// `count` values geometrically spaced over [lo, hi] inclusive.
Vector geometric_grid(double lo, double hi, std::size_t count);

struct SpectrumTarget {
  double mu;
  double L;
};

// A = Ahat^T Ahat with Ahat filled row-major from Rng(seed).normal(); then x*
// is drawn from the same stream and b = A x*. With a target, the spectrum of
// A is mapped affinely onto [mu, L] keeping its eigenvectors.
QuadraticProblem make_random_quadratic(std::size_t dim, std::uint64_t seed,
                                       std::optional<SpectrumTarget> target = std::nullopt);

// (L - mu)/8 (x_1^2 + sum (x_i - x_{i+1})^2 - 2 x_1) + mu/2 |x|^2.
QuadraticProblem make_nesterov(std::size_t dim, double L, double mu);

// Symmetric Toeplitz matrix with first row (2, -1, 1, 0, ..., 0), b = 0.
// The matrix is indefinite for large dim; with `pd_shift` set the identity
// multiple (|lambda_1| + pd_shift) is added and recorded, otherwise an
// indefinite matrix is an error.
QuadraticProblem make_toeplitz(std::size_t dim, std::optional<double> pd_shift = std::nullopt);

}  // namespace avghb::problems
