#include "avghb/optim/runner.hpp"

#include <cmath>
#include <limits>

#include "avghb/error.hpp"

namespace avghb::optim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Relative slack when comparing alpha against the stepsize cap.
constexpr double kCapSlack = 1e-12;

double averaging_growth(const AveragingScheme& scheme, const HBParams& params, double mu) {
  return scheme.is_weighted() ? log_weight_growth(scheme, params, mu) : 0.0;
}

class RowRecorder {
 public:
  RowRecorder(const problems::Objective& problem, Trajectory& traj)
      : problem_(problem), traj_(traj), certified_(problem.meta().optimum_known) {}

  void record(std::size_t k, const Vector& x, const Vector& avg, double value,
              std::optional<double> envelope) {
    TrajectoryRow row;
    row.k = k;
    row.inf_norm_raw = x.lpNorm<Eigen::Infinity>();
    row.inf_norm_avg = avg.lpNorm<Eigen::Infinity>();
    if (certified_) {
      const Vector& xs = problem_.meta().x_star;
      row.f_gap_raw = problem_.gap(x);
      row.f_gap_avg = &avg == &x ? row.f_gap_raw : problem_.gap(avg);
      row.dist_raw = (x - xs).norm();
      row.dist_avg = (avg - xs).norm();
    } else {
      row.f_gap_raw = value;
      row.f_gap_avg = &avg == &x ? value : problem_.value(avg);
      row.dist_raw = kNaN;
      row.dist_avg = kNaN;
    }
    row.bound_envelope = envelope;
    traj_.rows.push_back(row);
  }

 private:
  const problems::Objective& problem_;
  Trajectory& traj_;
  bool certified_;
};

void run_into(const problems::Objective& problem, const HBParams& params,
              const AveragingScheme& scheme, const Vector& x0, const RunOptions& options,
              Trajectory& traj, std::size_t k_offset) {
  const auto& meta = problem.meta();
  const double mu = meta.strong_mu;
  Averager averager(scheme, averaging_growth(scheme, params, mu));
  const bool with_envelope = meta.optimum_known && options.x1_rule == X1Rule::one_grad_step &&
                             envelope_applies(params, scheme, meta);
  const double R0 = meta.optimum_known ? (x0 - meta.x_star).norm() : kNaN;
  auto envelope_at = [&](std::size_t k) -> std::optional<double> {
    if (!with_envelope || (mu == 0.0 && k == 0)) return std::nullopt;
    return bound_envelope(params, scheme, meta, R0, k);
  };

  RowRecorder recorder(problem, traj);
  RecordedStates* states = traj.states ? &*traj.states : nullptr;
  const bool same_avg = scheme.kind == SchemeKind::none;

  problems::Evaluation e0 = problem.eval(x0);
  averager.push(x0);
  recorder.record(k_offset, x0, same_avg ? x0 : averager.mean(), e0.value, envelope_at(0));
  if (states) {
    states->x.push_back(x0);
    states->m_prev.push_back(Vector::Zero(x0.size()));
    states->grad.push_back(e0.gradient);
  }

  Vector x1 = options.x1_rule == X1Rule::one_grad_step ? Vector(x0 - params.alpha * e0.gradient)
                                                        : x0;
  OptState state = initial_state(x0, x1);
  try {
    if (options.x1_rule == X1Rule::one_grad_step) {
      const double norm = x1.norm();
      if (!std::isfinite(norm) || norm > kDivergenceNorm) throw DivergenceError(1, norm);
    }
    for (std::size_t k = 1; k <= options.iters; ++k) {
      problems::Evaluation e = problem.eval(state.x_curr);
      averager.push(state.x_curr);
      recorder.record(k_offset + k, state.x_curr, same_avg ? state.x_curr : averager.mean(),
                      e.value, envelope_at(k));
      if (states) {
        states->x.push_back(state.x_curr);
        states->m_prev.push_back(state.m_prev);
        states->grad.push_back(e.gradient);
      }
      if (k == options.iters) break;
      hb_step(state, params, e.gradient);
    }
  } catch (const DivergenceError& err) {
    if (!options.stop_on_divergence) throw;
    traj.diverged = true;
    traj.diverged_at = k_offset + err.iteration();
  }
  traj.x_last = state.x_curr;
  traj.x_avg_last = same_avg ? state.x_curr : averager.mean();
}

}  // namespace

X1Rule default_x1_rule(const std::string& method) {
  return method == "wahb" || method == "rahb" ? X1Rule::one_grad_step : X1Rule::copy_x0;
}

Trajectory run(const problems::Objective& problem, const HBParams& params,
               const AveragingScheme& scheme, const Vector& x0, const RunOptions& options) {
  params.validate();
  if (options.iters < 1) throw DomainError("run needs at least one iteration");
  if (scheme.kind == SchemeKind::tail && scheme.window > options.iters) {
    throw DomainError("tail window exceeds the iteration budget");
  }
  if (static_cast<std::size_t>(x0.size()) != problem.dim()) {
    throw DimensionError(problem.dim(), static_cast<std::size_t>(x0.size()));
  }

  Trajectory traj;
  traj.problem_id = problem.family();
  traj.params = params;
  traj.scheme = scheme;
  traj.x1_rule = options.x1_rule;
  traj.gaps_certified = problem.meta().optimum_known;
  if (traj.gaps_certified) {
    traj.R0 = (x0 - problem.meta().x_star).norm();
    traj.delta0 = problem.gap(x0);
  } else {
    traj.R0 = kNaN;
    traj.delta0 = kNaN;
  }
  if (options.record_states) traj.states.emplace();
  traj.rows.reserve(options.iters + 1);
  run_into(problem, params, scheme, x0, options, traj, 0);
  return traj;
}

Trajectory run(const problems::Objective& problem, const HBParams& params,
               const AveragingScheme& scheme, const Vector& x0, X1Rule x1_rule,
               std::size_t iters) {
  RunOptions options;
  options.x1_rule = x1_rule;
  options.iters = iters;
  return run(problem, params, scheme, x0, options);
}

bool envelope_applies(const HBParams& params, const AveragingScheme& scheme,
                      const problems::ObjectiveMeta& meta) {
  if (!(params.alpha > 0.0) || !(params.beta >= 0.0) || !(params.beta < 1.0)) return false;
  if (!(meta.smooth_L > 0.0)) return false;
  if (params.alpha > wahb_stepsize(meta.smooth_L, params.beta) * (1.0 + kCapSlack)) return false;
  if (scheme.kind == SchemeKind::theorem_weights) return true;
  return scheme.kind == SchemeKind::uniform && meta.strong_mu == 0.0;
}

double bound_envelope(const HBParams& params, const AveragingScheme& scheme,
                      const problems::ObjectiveMeta& meta, double R0, std::size_t k) {
  params.validate();
  if (!(R0 >= 0.0)) throw DomainError("envelope needs R0 >= 0");
  if (params.alpha > wahb_stepsize(meta.smooth_L, params.beta) * (1.0 + kCapSlack)) {
    throw DomainError("stepsize exceeds min{(1-beta)/(4L), (1-beta)^2/(4L sqrt(3 beta))}");
  }
  const bool theorem = scheme.kind == SchemeKind::theorem_weights;
  const bool uniform_convex = scheme.kind == SchemeKind::uniform && meta.strong_mu == 0.0;
  if (!theorem && !uniform_convex) {
    throw DomainError("envelope holds for theorem weights (or uniform weights when mu = 0)");
  }
  const double scale = 4.0 * (1.0 - params.beta) * R0 * R0 / params.alpha;
  if (meta.strong_mu > 0.0) {
    const double shrink = params.alpha * meta.strong_mu / (2.0 * (1.0 - params.beta));
    return std::exp(static_cast<double>(k) * std::log1p(-shrink)) * scale;
  }
  if (k == 0) throw DomainError("convex envelope needs k >= 1");
  return scale / static_cast<double>(k);
}

std::size_t restart_count(double mu, double R0, double eps) {
  if (!(mu > 0.0)) throw DomainError("restart schedule needs mu > 0");
  if (!(eps > 0.0)) throw DomainError("restart schedule needs eps > 0");
  const double stages = std::ceil(std::log2(mu * R0 * R0 / eps)) - 1.0;
  return stages > 1.0 ? static_cast<std::size_t>(stages) : 1;
}

std::size_t restart_inner_iters(const HBParams& params, double mu) {
  if (!(mu > 0.0)) throw DomainError("restart schedule needs mu > 0");
  return static_cast<std::size_t>(std::ceil(16.0 * (1.0 - params.beta) / (params.alpha * mu)));
}

std::pair<Trajectory, RestartSchedule> run_rahb(const problems::Objective& problem, double beta,
                                                double eps, double R0, const Vector& x0) {
  const auto& meta = problem.meta();
  if (!(meta.strong_mu > 0.0)) {
    throw DomainError("restarted averaging needs mu > 0; use plain uniform averaging instead");
  }
  if (!(eps > 0.0)) throw DomainError("restarted averaging needs eps > 0");
  if (static_cast<std::size_t>(x0.size()) != problem.dim()) {
    throw DimensionError(problem.dim(), static_cast<std::size_t>(x0.size()));
  }
  if (meta.optimum_known && (x0 - meta.x_star).norm() > R0 * (1.0 + 1e-12)) {
    throw DomainError("R0 must bound |x0 - x*|");
  }

  const HBParams params{wahb_stepsize(meta.smooth_L, beta), beta};
  params.validate();

  RestartSchedule schedule;
  schedule.tau = restart_count(meta.strong_mu, R0, eps);
  schedule.inner_N = restart_inner_iters(params, meta.strong_mu);
  schedule.stages.assign(schedule.tau, params);

  Trajectory traj;
  traj.method = "rahb";
  traj.problem_id = problem.family();
  traj.params = params;
  traj.scheme = AveragingScheme::uniform();
  traj.x1_rule = X1Rule::one_grad_step;
  traj.gaps_certified = meta.optimum_known;
  traj.R0 = meta.optimum_known ? (x0 - meta.x_star).norm() : kNaN;
  traj.delta0 = meta.optimum_known ? problem.gap(x0) : kNaN;
  traj.rows.reserve(schedule.tau * (schedule.inner_N + 1));

  RunOptions options;
  options.x1_rule = X1Rule::one_grad_step;
  options.iters = schedule.inner_N;

  Vector x_hat = x0;
  for (std::size_t t = 0; t < schedule.tau; ++t) {
    traj.stage_starts.push_back(traj.rows.size());
    run_into(problem, params, AveragingScheme::uniform(), x_hat, options, traj, traj.rows.size());
    x_hat = traj.x_avg_last;
    schedule.stage_gaps.push_back(meta.optimum_known ? problem.gap(x_hat) : kNaN);
  }
  schedule.x_hat = x_hat;
  return {std::move(traj), std::move(schedule)};
}

std::vector<Vector> virtual_iterates(const RecordedStates& states, const HBParams& params) {
  params.validate();
  const double shift = params.beta / (1.0 - params.beta);
  std::vector<Vector> out;
  out.reserve(states.x.size());
  for (std::size_t k = 0; k < states.x.size(); ++k) {
    out.push_back(states.x[k] - shift * states.m_prev[k]);
  }
  return out;
}

std::vector<double> virtual_recurrence_residuals(const RecordedStates& states,
                                                 const HBParams& params) {
  const auto tilde = virtual_iterates(states, params);
  const double step = params.alpha / (1.0 - params.beta);
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < tilde.size(); ++k) {
    out.push_back((tilde[k + 1] - tilde[k] + step * states.grad[k]).norm());
  }
  return out;
}

}  // namespace avghb::optim
