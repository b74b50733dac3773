#pragma once

#include <cstddef>
#include <string>

namespace avghb::optim {

struct HBParams {
  double alpha = 0.0;  // stepsize, > 0
  double beta = 0.0;   // momentum, in [0, 1)

  // Throws DomainError unless alpha > 0 and 0 <= beta < 1.
  void validate() const;
};

// alpha* = 4 / (sqrt L + sqrt mu)^2, beta* = ((sqrt L - sqrt mu) / (sqrt L + sqrt mu))^2.
HBParams optimal_hb_params(double L, double mu);

// min{(1 - beta) / (4L), (1 - beta)^2 / (4L sqrt(3 beta))}; the second cap is
// +inf at beta = 0.
double wahb_stepsize(double L, double beta);

enum class SchemeKind { none, uniform, geometric, theorem_weights, tail };

// Weight rule for the averaged iterate.
//   none             x_bar_k = x_k
//   uniform          w_k = 1
//   geometric        w_k = rho^k, rho >= 1
//   theorem_weights  w_k = (1 - alpha mu / (2 (1 - beta)))^-(k+1)
//   tail             mean of the last s iterates (all of them while k + 1 < s)
struct AveragingScheme {
  SchemeKind kind = SchemeKind::none;
  double rho = 1.0;
  std::size_t window = 0;

  static AveragingScheme none() { return {}; }
  static AveragingScheme uniform() { return {SchemeKind::uniform, 1.0, 0}; }
  static AveragingScheme geometric(double rho);
  static AveragingScheme theorem_weights() { return {SchemeKind::theorem_weights, 1.0, 0}; }
  static AveragingScheme tail(std::size_t s);

  bool is_weighted() const noexcept {
    return kind == SchemeKind::uniform || kind == SchemeKind::geometric ||
           kind == SchemeKind::theorem_weights;
  }
  std::string name() const;
};

// log(w_{k+1} / w_k) of a weighted scheme; the ratio is the same for every k.
// `mu` is only read by theorem_weights.
double log_weight_growth(const AveragingScheme& scheme, const HBParams& params, double mu);

// Sequence r_k = w_k / W_k for weights with constant log growth g, computed
// through W_{k+1} / w_{k+1} = (W_k / w_k) e^{-g} + 1 so the raw weights are
// never formed. r_0 = 1; for g = 0 the inverse ratios are the integers k + 1.
class WeightRatio {
 public:
  explicit WeightRatio(double log_growth);

  double next();

 private:
  double decay_;
  double inverse_ = 0.0;
};

}  // namespace avghb::optim
