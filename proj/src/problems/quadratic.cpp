#include "avghb/problems/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "avghb/error.hpp"
#include "avghb/rng.hpp"

namespace avghb::problems {

namespace {

bool is_diagonal_matrix(const Matrix& A) {
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      if (i != j && A(i, j) != 0.0) return false;
  return true;
}

Vector symmetric_eigenvalues(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(A, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw DomainError("eigensolve failed");
  return solver.eigenvalues();
}

}  // namespace

QuadraticProblem::QuadraticProblem(Matrix A, Vector b, std::string family,
                                   std::optional<Vector> x_star, double diag_shift)
    : A_(std::move(A)), b_(std::move(b)), family_(std::move(family)), diag_shift_(diag_shift) {
  const auto n = A_.rows();
  if (n == 0 || A_.cols() != n) throw DomainError("quadratic matrix must be square and nonempty");
  if (b_.size() != n) throw DimensionError(n, b_.size());
  if (!A_.allFinite() || !b_.allFinite()) throw DomainError("quadratic data must be finite");

  const double scale = std::max(1.0, A_.cwiseAbs().maxCoeff());
  if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("quadratic matrix is not symmetric");
  }

  diagonal_ = is_diagonal_matrix(A_);
  if (diagonal_) {
    diag_ = A_.diagonal();
    eigenvalues_ = diag_;
    std::sort(eigenvalues_.begin(), eigenvalues_.end());
  } else {
    eigenvalues_ = symmetric_eigenvalues(A_);
  }
  if (!(eigenvalues_(0) > 0.0)) {
    throw DomainError(family_ + ": matrix is not positive definite (lambda_1 = " +
                      std::to_string(eigenvalues_(0)) + ")");
  }

  meta_.dim = static_cast<std::size_t>(n);
  meta_.smooth_L = eigenvalues_(n - 1);
  meta_.strong_mu = eigenvalues_(0);
  meta_.optimum_known = true;
  if (x_star) {
    if (x_star->size() != n) throw DimensionError(n, x_star->size());
    meta_.x_star = std::move(*x_star);
  } else if (diagonal_) {
    meta_.x_star = b_.cwiseQuotient(diag_);
  } else {
    meta_.x_star = A_.llt().solve(b_);
  }
  meta_.f_star = -0.5 * b_.dot(meta_.x_star);
  meta_.validate();

  const Vector residual = hessian_times(meta_.x_star) - b_;
  if (residual.norm() > 1e-10 * b_.norm()) {
    throw DomainError(family_ + ": minimizer solve is inaccurate (residual " +
                      std::to_string(residual.norm()) + ")");
  }
}

Vector QuadraticProblem::hessian_times(const Vector& v) const {
  if (diagonal_) return diag_.cwiseProduct(v);
  return A_ * v;
}

Evaluation QuadraticProblem::do_eval(const Vector& x) const {
  Vector Ax = hessian_times(x);
  Evaluation out;
  out.value = 0.5 * x.dot(Ax) - b_.dot(x);
  out.gradient = std::move(Ax) - b_;
  return out;
}

double QuadraticProblem::do_gap(const Vector& x) const {
  const Vector d = x - meta_.x_star;
  return 0.5 * d.dot(hessian_times(d));
}

QuadraticProblem make_diag_quadratic(double mu, std::span<const double> interior, double L) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("diag: mu must be positive");
  if (!(L >= mu) || !std::isfinite(L)) throw DomainError("diag: L must satisfy L >= mu");
  double prev = mu;
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const double v = interior[i];
    if (!(v >= prev) || !(v <= L)) {
      throw DomainError("diag: interior eigenvalue at index " + std::to_string(i) + " (" +
                        std::to_string(v) + ") breaks mu <= lambda_2 <= ... <= L ordering");
    }
    prev = v;
  }
  const auto n = static_cast<Eigen::Index>(interior.size() + 2);
  Vector d(n);
  d(0) = mu;
  for (std::size_t i = 0; i < interior.size(); ++i) d(static_cast<Eigen::Index>(i + 1)) = interior[i];
  d(n - 1) = L;
  Matrix A = d.asDiagonal();
  return QuadraticProblem(std::move(A), Vector::Zero(n), "diag", Vector::Zero(n));
}

Vector geometric_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("geometric_grid: need 0 < lo <= hi");
  Vector out(static_cast<Eigen::Index>(count));
  if (count == 0) return out;
  if (count == 1) {
    out(0) = lo;
    return out;
  }
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < count; ++i) {
    out(static_cast<Eigen::Index>(i)) =
        lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out(0) = lo;
  out(static_cast<Eigen::Index>(count - 1)) = hi;
  return out;
}

QuadraticProblem make_random_quadratic(std::size_t dim, std::uint64_t seed,
                                       std::optional<SpectrumTarget> target) {
  if (dim < 2) throw DomainError("random: dimension must be at least 2");
  const auto n = static_cast<Eigen::Index>(dim);
  Rng rng(seed);
  Matrix Ahat(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) Ahat(i, j) = rng.normal();
  Vector x_star(n);
  for (Eigen::Index i = 0; i < n; ++i) x_star(i) = rng.normal();

  Matrix A = Ahat.transpose() * Ahat;
  A = 0.5 * (A + A.transpose()).eval();

  if (target) {
    if (!(target->mu > 0.0) || !(target->L >= target->mu)) {
      throw DomainError("random: spectrum target needs 0 < mu <= L");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(A);
    if (solver.info() != Eigen::Success) throw DomainError("random: eigensolve failed");
    const Vector& lam = solver.eigenvalues();
    const double lo = lam(0);
    const double hi = lam(n - 1);
    Vector mapped(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = hi > lo ? (lam(i) - lo) / (hi - lo) : 0.0;
      mapped(i) = target->mu + t * (target->L - target->mu);
    }
    mapped(0) = target->mu;
    mapped(n - 1) = target->L;
    const Matrix& V = solver.eigenvectors();
    A = V * mapped.asDiagonal() * V.transpose();
    A = 0.5 * (A + A.transpose()).eval();
  } else {
    const Vector lam = symmetric_eigenvalues(A);
    if (lam(0) <= 1e-12 * lam(n - 1)) {
      throw DomainError(
          "random: sampled matrix is numerically singular; supply a spectrum target (mu, L)");
    }
  }
  Vector b = A * x_star;
  return QuadraticProblem(std::move(A), std::move(b), "random", std::move(x_star));
}

QuadraticProblem make_nesterov(std::size_t dim, double L, double mu) {
  if (dim < 2) throw DomainError("nesterov: dimension must be at least 2");
  if (!(mu > 0.0) || !(L > mu)) throw DomainError("nesterov: need L > mu > 0");
  const auto n = static_cast<Eigen::Index>(dim);
  const double c = (L - mu) / 4.0;
  // Hessian of x_1^2 + sum (x_i - x_{i+1})^2 is 2*M with M tridiagonal:
  // diag (2, ..., 2, 1), off-diagonal -1.
  Matrix A = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, i) = c * (i + 1 < n ? 2.0 : 1.0) + mu;
    if (i + 1 < n) {
      A(i, i + 1) = -c;
      A(i + 1, i) = -c;
    }
  }
  Vector b = Vector::Zero(n);
  b(0) = c;
  return QuadraticProblem(std::move(A), std::move(b), "nesterov");
}

QuadraticProblem make_toeplitz(std::size_t dim, std::optional<double> pd_shift) {
  if (dim < 3) throw DomainError("toeplitz: dimension must be at least 3");
  const auto n = static_cast<Eigen::Index>(dim);
  const double band[3] = {2.0, -1.0, 1.0};
  Matrix A = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < 3 && i + k < n; ++k) {
      A(i, i + k) = band[k];
      A(i + k, i) = band[k];
    }

  const Vector lam = symmetric_eigenvalues(A);
  double shift = 0.0;
  if (lam(0) <= 0.0) {
    if (!pd_shift) {
      throw DomainError("toeplitz: matrix is indefinite (lambda_1 = " + std::to_string(lam(0)) +
                        "); pass a positive-definiteness shift to proceed");
    }
    if (!(*pd_shift > 0.0)) throw DomainError("toeplitz: shift must be positive");
    shift = std::abs(lam(0)) + *pd_shift;
    A.diagonal().array() += shift;
  }
  return QuadraticProblem(std::move(A), Vector::Zero(n), "toeplitz", Vector::Zero(n), shift);
}

}  // namespace avghb::problems
