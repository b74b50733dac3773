#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>

#include <Eigen/Core>

namespace avghb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace problems {

// Certified constants of an objective. `smooth_L` bounds the Lipschitz
// constant of the gradient, `strong_mu` is a valid strong convexity modulus
// (0 for merely convex). x_star / f_star are meaningful iff optimum_known.
struct ObjectiveMeta {
  std::size_t dim = 0;
  double smooth_L = 0.0;
  double strong_mu = 0.0;
  bool optimum_known = false;
  Vector x_star;
  double f_star = 0.0;

  // L / mu, or +infinity when mu == 0.
  double kappa() const {
    return strong_mu > 0.0 ? smooth_L / strong_mu : std::numeric_limits<double>::infinity();
  }

  // Throws DomainError when L >= mu >= 0 fails or x_star has the wrong size.
  void validate() const;
};

struct Evaluation {
  double value = 0.0;
  Vector gradient;
};

// Value/gradient oracle. Implementations are immutable after construction
// and every const member is safe to call concurrently.
class Objective {
 public:
  virtual ~Objective() = default;

  // Throws DimensionError on size mismatch and DomainError on non-finite x.
  Evaluation eval(const Vector& x) const;
  double value(const Vector& x) const { return eval(x).value; }
  Vector gradient(const Vector& x) const { return eval(x).gradient; }

  // f(x) - f*. Requires meta().optimum_known. Families with an exact
  // reformulation (quadratics) override this to avoid cancellation.
  double gap(const Vector& x) const;

  const ObjectiveMeta& meta() const noexcept { return meta_; }
  std::size_t dim() const noexcept { return meta_.dim; }

  // Registered family name: diag, random, nesterov, toeplitz, logreg.
  virtual std::string family() const = 0;

 protected:
  void check_point(const Vector& x) const;
  virtual Evaluation do_eval(const Vector& x) const = 0;
  virtual double do_gap(const Vector& x) const;

  ObjectiveMeta meta_;
};

// View of `base` whose declared strong convexity modulus is lowered to `mu`
// (0 <= mu <= base mu). Used to drive the convex (mu = 0) code paths on a
// problem that happens to be strongly convex.
std::shared_ptr<const Objective> with_declared_mu(std::shared_ptr<const Objective> base,
                                                  double mu);

}  // namespace problems
}  // namespace avghb
