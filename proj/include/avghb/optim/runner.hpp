#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "avghb/optim/params.hpp"
#include "avghb/optim/stepper.hpp"
#include "avghb/problems/objective.hpp"

namespace avghb::optim {

enum class X1Rule { copy_x0, one_grad_step };

struct TrajectoryRow {
  std::size_t k = 0;
  double f_gap_raw = 0.0;
  double f_gap_avg = 0.0;
  double dist_raw = 0.0;
  double dist_avg = 0.0;
  double inf_norm_raw = 0.0;
  double inf_norm_avg = 0.0;  // not part of the CSV schema
  std::optional<double> bound_envelope;
};

// Per-iteration internals kept when RunOptions::record_states is set.
// Index k holds x_k, m_{k-1} (zero at k = 0) and grad f(x_k).
struct RecordedStates {
  std::vector<Vector> x;
  std::vector<Vector> m_prev;
  std::vector<Vector> grad;
};

// When the optimum is not certified, f_gap_* hold f(x) and dist_* are NaN.
struct Trajectory {
  std::string method;
  std::string problem_id;
  HBParams params;
  AveragingScheme scheme;
  X1Rule x1_rule = X1Rule::copy_x0;
  double R0 = 0.0;      // |x_0 - x*|
  double delta0 = 0.0;  // f(x_0) - f*
  bool gaps_certified = false;

  std::vector<TrajectoryRow> rows;
  bool diverged = false;
  std::optional<std::size_t> diverged_at;
  std::vector<std::size_t> stage_starts;  // row indices where restart stages begin

  Vector x_last;
  Vector x_avg_last;
  std::optional<RecordedStates> states;
};

struct RunOptions {
  X1Rule x1_rule = X1Rule::copy_x0;
  std::size_t iters = 1;
  bool record_states = false;
  // Divergence ends the run with Trajectory::diverged set instead of throwing.
  bool stop_on_divergence = false;
};

// Runs x_0 .. x_iters and reports rows k = 0 .. iters. Weighted averages use
// WeightRatio, so geometric or theorem weights never overflow.
Trajectory run(const problems::Objective& problem, const HBParams& params,
               const AveragingScheme& scheme, const Vector& x0, const RunOptions& options);

Trajectory run(const problems::Objective& problem, const HBParams& params,
               const AveragingScheme& scheme, const Vector& x0, X1Rule x1_rule,
               std::size_t iters);

// Default x_1 convention of a method name (hb, ahb, tahb: copy; wahb: step).
X1Rule default_x1_rule(const std::string& method);

// Right-hand side of the weighted-averaging rate bound at iteration k:
//   mu > 0: (1 - alpha mu / (2 (1 - beta)))^k 4 (1 - beta) R0^2 / alpha
//   mu = 0: 4 (1 - beta) R0^2 / (alpha k), k >= 1
// Only defined for theorem weights (or uniform weights when mu = 0) and
// alpha <= wahb_stepsize(L, beta); otherwise throws DomainError.
double bound_envelope(const HBParams& params, const AveragingScheme& scheme,
                      const problems::ObjectiveMeta& meta, double R0, std::size_t k);

// Whether bound_envelope is defined for this combination.
bool envelope_applies(const HBParams& params, const AveragingScheme& scheme,
                      const problems::ObjectiveMeta& meta);

struct RestartSchedule {
  std::size_t tau = 0;
  std::size_t inner_N = 0;
  std::vector<HBParams> stages;
  std::vector<double> stage_gaps;  // f(x_hat_t) - f*, t = 1 .. tau
  Vector x_hat;                    // final output
};

// tau = max{ceil(log2(mu R0^2 / eps)) - 1, 1}.
std::size_t restart_count(double mu, double R0, double eps);
// N = ceil(16 (1 - beta) / (alpha mu)).
std::size_t restart_inner_iters(const HBParams& params, double mu);

// Restarted uniform averaging. Every stage runs `inner_N` iterations from
// (x_hat, x_hat - alpha grad f(x_hat)) and hands its average to the next.
std::pair<Trajectory, RestartSchedule> run_rahb(const problems::Objective& problem, double beta,
                                                double eps, double R0, const Vector& x0);

// x~_k = x_k - beta / (1 - beta) m_{k-1}.
std::vector<Vector> virtual_iterates(const RecordedStates& states, const HBParams& params);

// |x~_{k+1} - x~_k + alpha / (1 - beta) grad f(x_k)| for k = 0 .. size-2.
std::vector<double> virtual_recurrence_residuals(const RecordedStates& states,
                                                 const HBParams& params);

}  // namespace avghb::optim
