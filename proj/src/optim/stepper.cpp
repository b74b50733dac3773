#include "avghb/optim/stepper.hpp"

#include <cmath>

#include "avghb/error.hpp"

namespace avghb::optim {

namespace {

void check_divergence(const Vector& x, std::size_t k) {
  const double norm = x.norm();
  if (!std::isfinite(norm) || !x.allFinite() || norm > kDivergenceNorm) {
    throw DivergenceError(k, norm);
  }
}

}  // namespace

OptState initial_state(const Vector& x0, const Vector& x1) {
  if (x0.size() != x1.size()) throw DimensionError(x0.size(), x1.size());
  return {x1, x0, x0 - x1, 1};
}

void hb_step(OptState& state, const HBParams& params, const Vector& grad) {
  if (grad.size() != state.x_curr.size()) throw DimensionError(state.x_curr.size(), grad.size());
  Vector next = state.x_curr - params.alpha * grad + params.beta * (state.x_curr - state.x_prev);
  state.m_prev = params.beta * state.m_prev + params.alpha * grad;
  state.x_prev = std::move(state.x_curr);
  state.x_curr = std::move(next);
  ++state.k;
  check_divergence(state.x_curr, state.k);
}

OptState hb_step(const OptState& state, const HBParams& params, const Vector& grad) {
  OptState next = state;
  hb_step(next, params, grad);
  return next;
}

void momentum_step(MomentumState& state, const HBParams& params, const Vector& grad) {
  if (grad.size() != state.x.size()) throw DimensionError(state.x.size(), grad.size());
  state.m_prev = params.beta * state.m_prev + params.alpha * grad;
  state.x -= state.m_prev;
  ++state.k;
  check_divergence(state.x, state.k);
}

Averager::Averager(const AveragingScheme& scheme, double log_growth)
    : scheme_(scheme), ratio_(scheme.is_weighted() ? log_growth : 0.0) {
  if (scheme_.kind == SchemeKind::tail) {
    if (scheme_.window == 0) throw DomainError("tail averaging needs a positive window");
    ring_.reserve(scheme_.window);
  }
}

void Averager::push(const Vector& x) {
  switch (scheme_.kind) {
    case SchemeKind::none:
      mean_ = x;
      break;
    case SchemeKind::uniform:
    case SchemeKind::geometric:
    case SchemeKind::theorem_weights: {
      const double r = ratio_.next();
      if (count_ == 0) {
        mean_ = x;
      } else {
        mean_ += r * (x - mean_);
      }
      break;
    }
    case SchemeKind::tail: {
      if (ring_.size() < scheme_.window) {
        ring_.push_back(x);
      } else {
        ring_[count_ % scheme_.window] = x;
      }
      mean_ = ring_.front();
      for (std::size_t i = 1; i < ring_.size(); ++i) mean_ += ring_[i];
      mean_ /= static_cast<double>(ring_.size());
      break;
    }
  }
  ++count_;
}

}  // namespace avghb::optim
