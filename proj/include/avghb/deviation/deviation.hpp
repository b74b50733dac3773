#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "avghb/deviation/modal.hpp"
#include "avghb/optim/params.hpp"

namespace avghb::deviation {

enum class DevScheme { raw, uniform_avg, weighted_avg };

// sup_k of |C T^k| (raw) or of the running (weighted) mean of C T^t, t <= k.
struct DeviationQuery {
  DevScheme scheme = DevScheme::raw;
  // log(w_{k+1} / w_k) for weighted_avg (log rho for w_k = rho^k).
  double weight_log_growth = 0.0;
  optim::HBParams params;
  std::vector<double> spectrum;
  std::size_t K_cap = 1'000'000;
  bool keep_curves = false;
};

struct DeviationReport {
  double dev_value = 0.0;
  std::size_t argmax_k = 0;
  std::size_t argmax_mode = 0;  // index into the ascending spectrum
  std::size_t truncation_K = 0;
  bool converged = false;
  // per_mode_curves[j][k]: the measured norm of mode j at iteration k.
  std::optional<std::vector<std::vector<double>>> per_mode_curves;
};

// Per-mode evaluation exploiting |C T^k| = max_j |C_j T_j^k|. The scan stops
// at the first k >= 64 past which every mode's bound
// t r_j^{t-1} (|T_j| + 1) is decreasing and below 1e-6 of the running max;
// no later k can then exceed the reported value. Unstable parameters give
// converged = false instead of an error.
DeviationReport dev_measure(const DeviationQuery& query);

struct Theorem3Result {
  double ratio_bound = 0.0;  // 2 e sqrt(6) / sqrt(F^2 - 1)
  double beta_lo = 0.0;      // (1 - sqrt(lambda_2 / lambda_n))^2, excluded
  double beta_hi = 0.0;      // (1 - F sqrt(lambda_1 / lambda_n))^2
  bool interval_empty = false;
  optim::HBParams averaged_params;  // alpha = 1 / lambda_n, beta = beta_hi
  optim::HBParams optimal_params;
  double measured_lhs = 0.0;     // dev of uniform averaging at averaged_params
  double measured_hb = 0.0;      // dev of plain heavy ball at averaged_params
  double measured_rhs = 0.0;     // dev of plain heavy ball at optimal_params
  bool holds = false;            // measured_lhs <= ratio_bound * measured_rhs
  bool converged = false;
};

// Checks the spectral-gap hypotheses (F > 14, lambda_2 >= F^2 lambda_1,
// F <= sqrt(lambda_n / lambda_1), lambda_n >= 10^4 lambda_1) and evaluates
// both sides of the averaged-versus-optimal comparison at the upper end of
// the admissible momentum interval. A violated hypothesis throws
// DomainError naming it. When lambda_2 = F^2 lambda_1 exactly the interval
// collapses to its excluded lower end; the comparison is still evaluated
// there and interval_empty is set.
Theorem3Result theorem3_compare(std::span<const double> spectrum, double F,
                                std::size_t K_cap = 1'000'000);

// Just the parameter arithmetic of theorem3_compare (no hypothesis checks
// beyond F > 14 and a valid spectrum).
double theorem3_ratio_bound(double F);

// sqrt(kappa) / (2e): lower bound on max_k |x_k|_inf for the optimal
// parameters on diag(mu, ..., L) from x_0 = x_1 = ones.
double hb_peak_lower_bound(double kappa);

}  // namespace avghb::deviation
