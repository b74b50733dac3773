#include "avghb/optim/params.hpp"

#include <cmath>
#include <limits>

#include "avghb/error.hpp"

namespace avghb::optim {

void HBParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("stepsize alpha must be positive and finite");
  }
  if (!(beta >= 0.0) || !(beta < 1.0)) throw DomainError("momentum beta must lie in [0, 1)");
}

HBParams optimal_hb_params(double L, double mu) {
  if (!(mu > 0.0)) throw DomainError("optimal parameters need mu > 0");
  if (!(L >= mu) || !std::isfinite(L)) throw DomainError("optimal parameters need L >= mu");
  const double sl = std::sqrt(L);
  const double sm = std::sqrt(mu);
  const double ratio = (sl - sm) / (sl + sm);
  return {4.0 / ((sl + sm) * (sl + sm)), ratio * ratio};
}

double wahb_stepsize(double L, double beta) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("stepsize cap needs L > 0");
  if (!(beta >= 0.0) || !(beta < 1.0)) throw DomainError("stepsize cap needs beta in [0, 1)");
  const double first = (1.0 - beta) / (4.0 * L);
  if (beta == 0.0) return first;
  const double second = (1.0 - beta) * (1.0 - beta) / (4.0 * L * std::sqrt(3.0 * beta));
  return std::min(first, second);
}

AveragingScheme AveragingScheme::geometric(double rho) {
  if (!(rho >= 1.0) || !std::isfinite(rho)) throw DomainError("geometric weights need rho >= 1");
  return {SchemeKind::geometric, rho, 0};
}

AveragingScheme AveragingScheme::tail(std::size_t s) {
  if (s == 0) throw DomainError("tail averaging needs a positive window");
  return {SchemeKind::tail, 1.0, s};
}

std::string AveragingScheme::name() const {
  switch (kind) {
    case SchemeKind::none: return "none";
    case SchemeKind::uniform: return "uniform";
    case SchemeKind::geometric: return "geometric";
    case SchemeKind::theorem_weights: return "theorem";
    case SchemeKind::tail: return "tail";
  }
  return "unknown";
}

double log_weight_growth(const AveragingScheme& scheme, const HBParams& params, double mu) {
  switch (scheme.kind) {
    case SchemeKind::uniform: return 0.0;
    case SchemeKind::geometric: return std::log(scheme.rho);
    case SchemeKind::theorem_weights: {
      if (!(mu >= 0.0)) throw DomainError("theorem weights need mu >= 0");
      const double shrink = params.alpha * mu / (2.0 * (1.0 - params.beta));
      if (!(shrink < 1.0)) {
        throw DomainError("theorem weights need alpha mu / (2 (1 - beta)) < 1");
      }
      return -std::log1p(-shrink);
    }
    case SchemeKind::none:
    case SchemeKind::tail: break;
  }
  throw DomainError("scheme '" + scheme.name() + "' has no weight rule");
}

WeightRatio::WeightRatio(double log_growth) : decay_(std::exp(-log_growth)) {
  if (!(log_growth >= 0.0) || !std::isfinite(log_growth)) {
    throw DomainError("weights must be nondecreasing (log growth >= 0)");
  }
}

double WeightRatio::next() {
  inverse_ = inverse_ * decay_ + 1.0;
  return 1.0 / inverse_;
}

}  // namespace avghb::optim
