#pragma once

#include <cstddef>
#include <vector>

#include "avghb/optim/params.hpp"
#include "avghb/problems/objective.hpp"

namespace avghb::optim {

// Iterates above this norm are treated as divergence.
inline constexpr double kDivergenceNorm = 1e12;

// Two-step heavy-ball state at iteration k: x_curr = x_k, x_prev = x_{k-1},
// m_prev = m_{k-1}. Between steps m_prev equals x_prev - x_curr up to
// rounding.
struct OptState {
  Vector x_curr;
  Vector x_prev;
  Vector m_prev;
  std::size_t k = 1;
};

// State at k = 1 from explicit starting points; m_0 = x_0 - x_1.
OptState initial_state(const Vector& x0, const Vector& x1);

// x_{k+1} = x_k - alpha grad + beta (x_k - x_{k-1}) and
// m_k = beta m_{k-1} + alpha grad. Throws DivergenceError when the new
// iterate is non-finite or its norm exceeds kDivergenceNorm.
void hb_step(OptState& state, const HBParams& params, const Vector& grad);
OptState hb_step(const OptState& state, const HBParams& params, const Vector& grad);

// Momentum form only: x_{k+1} = x_k - m_k with m_k = beta m_{k-1} + alpha grad.
struct MomentumState {
  Vector x;
  Vector m_prev;
  std::size_t k = 0;
};

void momentum_step(MomentumState& state, const HBParams& params, const Vector& grad);

// Running average of x_0, x_1, ... under an averaging scheme.
class Averager {
 public:
  // `log_growth` is read only for weighted schemes (see log_weight_growth).
  Averager(const AveragingScheme& scheme, double log_growth);

  void push(const Vector& x);
  const Vector& mean() const noexcept { return mean_; }
  std::size_t count() const noexcept { return count_; }

 private:
  AveragingScheme scheme_;
  WeightRatio ratio_;
  Vector mean_;
  std::vector<Vector> ring_;
  std::size_t count_ = 0;
};

}  // namespace avghb::optim
