#include "avghb/problems/objective.hpp"

#include <cmath>
#include <utility>

#include "avghb/error.hpp"

namespace avghb::problems {

void ObjectiveMeta::validate() const {
  if (dim == 0) throw DomainError("objective dimension must be positive");
  if (!(strong_mu >= 0.0) || !(smooth_L >= strong_mu) || !std::isfinite(smooth_L)) {
    throw DomainError("certified constants must satisfy L >= mu >= 0 (L=" +
                      std::to_string(smooth_L) + ", mu=" + std::to_string(strong_mu) + ")");
  }
  if (optimum_known && static_cast<std::size_t>(x_star.size()) != dim) {
    throw DimensionError(dim, static_cast<std::size_t>(x_star.size()));
  }
}

void Objective::check_point(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != meta_.dim) {
    throw DimensionError(meta_.dim, static_cast<std::size_t>(x.size()));
  }
  if (!x.allFinite()) throw DomainError("evaluation point has non-finite entries");
}

Evaluation Objective::eval(const Vector& x) const {
  check_point(x);
  return do_eval(x);
}

double Objective::gap(const Vector& x) const {
  if (!meta_.optimum_known) throw DomainError(family() + ": optimum is not certified");
  check_point(x);
  return do_gap(x);
}

double Objective::do_gap(const Vector& x) const { return do_eval(x).value - meta_.f_star; }

namespace {

class DeclaredMuView final : public Objective {
 public:
  DeclaredMuView(std::shared_ptr<const Objective> base, double mu) : base_(std::move(base)) {
    meta_ = base_->meta();
    meta_.strong_mu = mu;
    meta_.validate();
  }

  std::string family() const override { return base_->family(); }

 protected:
  Evaluation do_eval(const Vector& x) const override { return base_->eval(x); }
  double do_gap(const Vector& x) const override { return base_->gap(x); }

 private:
  std::shared_ptr<const Objective> base_;
};

}  // namespace

std::shared_ptr<const Objective> with_declared_mu(std::shared_ptr<const Objective> base,
                                                  double mu) {
  if (!base) throw DomainError("with_declared_mu: null objective");
  if (!(mu >= 0.0) || mu > base->meta().strong_mu) {
    throw DomainError("declared mu must lie in [0, certified mu]");
  }
  return std::make_shared<DeclaredMuView>(std::move(base), mu);
}

}  // namespace avghb::problems
