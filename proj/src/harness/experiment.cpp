#include "avghb/harness/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "avghb/problems/libsvm.hpp"
#include "avghb/problems/logreg.hpp"
#include "avghb/problems/quadratic.hpp"
#include "avghb/rng.hpp"

namespace avghb::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::shared_ptr<const problems::Objective> build_base(const ProblemSpec& spec,
                                                      const std::filesystem::path& base_dir) {
  using namespace problems;
  if (spec.family == "diag") {
    std::vector<double> interior = spec.interior;
    if (interior.empty() && spec.dim > 2) {
      const Vector grid = geometric_grid(spec.lambda2, spec.L, spec.dim - 2);
      interior.assign(grid.data(), grid.data() + grid.size());
    }
    return std::make_shared<QuadraticProblem>(make_diag_quadratic(spec.mu, interior, spec.L));
  }
  if (spec.family == "random") {
    std::optional<SpectrumTarget> target;
    if (spec.has_target) target = SpectrumTarget{spec.mu, spec.L};
    return std::make_shared<QuadraticProblem>(make_random_quadratic(spec.dim, spec.seed, target));
  }
  if (spec.family == "nesterov") {
    return std::make_shared<QuadraticProblem>(make_nesterov(spec.dim, spec.L, spec.mu));
  }
  if (spec.family == "toeplitz") {
    return std::make_shared<QuadraticProblem>(make_toeplitz(spec.dim, spec.shift));
  }
  if (spec.family == "logreg") {
    Dataset data;
    if (spec.data == "synthetic") {
      data = make_synthetic_dataset(spec.samples, spec.dim, spec.seed, spec.density);
    } else {
      std::filesystem::path path = spec.data;
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      data = parse_libsvm(path);
    }
    double l2 = spec.l2.value_or(0.0);
    if (spec.l2_rel) {
      const double data_L =
          max_singular_value_squared(data.features) / (4.0 * static_cast<double>(data.samples()));
      l2 = *spec.l2_rel * data_L;
    }
    return std::make_shared<LogRegProblem>(std::move(data), l2, ReferenceOptions::from_env());
  }
  throw ConfigError(spec.line, "family", "unregistered problem family '" + spec.family + "'");
}

double resolve_mu_rule(const MethodSpec& m, const problems::ObjectiveMeta& meta,
                       const char* what) {
  if (!(meta.strong_mu > 0.0)) {
    throw ConfigError(m.line, what, "rule needs a strongly convex problem (mu > 0)");
  }
  return meta.strong_mu;
}

std::string hex_seed(std::uint64_t s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(s));
  return buf;
}

CellResult run_cell(const ExperimentConfig& config, const problems::Objective& problem,
                    const Vector& x0, const Cell& cell) {
  const MethodSpec& m = config.methods[cell.method_index];
  const auto& meta = problem.meta();
  CellResult result;
  result.cell = cell;
  const auto t0 = Clock::now();
  if (m.name == "rahb") {
    const double R0 = (x0 - meta.x_star).norm();
    result.eps = m.eps_rel * meta.strong_mu * R0 * R0;
    auto [traj, schedule] = optim::run_rahb(problem, cell.params.beta, result.eps, R0, x0);
    result.trajectory = std::move(traj);
    result.restart = std::move(schedule);
  } else {
    optim::RunOptions options;
    options.x1_rule = m.x1_rule;
    options.iters = config.iters;
    options.stop_on_divergence = true;
    result.trajectory = optim::run(problem, cell.params, m.scheme, x0, options);
  }
  result.trajectory.method = m.name;
  result.wall_seconds = seconds_since(t0);
  result.diverged = result.trajectory.diverged;
  if (result.diverged || result.trajectory.rows.empty()) {
    result.final_gap = std::numeric_limits<double>::quiet_NaN();
  } else {
    const auto& last = result.trajectory.rows.back();
    result.final_gap =
        m.scheme.kind == optim::SchemeKind::none ? last.f_gap_raw : last.f_gap_avg;
    if (!std::isfinite(result.final_gap)) result.diverged = true;
  }
  return result;
}

std::string scheme_label(const optim::AveragingScheme& s) { return s.name(); }

const char* x1_label(optim::X1Rule r) {
  return r == optim::X1Rule::one_grad_step ? "one_grad_step" : "copy_x0";
}

const char* alpha_label(AlphaRule r) {
  switch (r) {
    case AlphaRule::explicit_value: return "explicit";
    case AlphaRule::one_over_L: return "one_over_L";
    case AlphaRule::optimal: return "optimal";
    case AlphaRule::wahb_cap: return "wahb_cap";
  }
  return "";
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

const char* const kTrajectoryHeader =
    "k,f_gap_raw,f_gap_avg,dist_raw,dist_avg,inf_norm_raw,bound_envelope";

std::string format_value(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::shared_ptr<const problems::Objective> build_problem(const ProblemSpec& spec,
                                                         const std::filesystem::path& base_dir) {
  auto base = build_base(spec, base_dir);
  if (spec.declared_mu) {
    if (*spec.declared_mu > base->meta().strong_mu) {
      throw ConfigError(spec.line, "declared_mu", "exceeds the certified modulus " +
                                                      format_value(base->meta().strong_mu));
    }
    return problems::with_declared_mu(base, *spec.declared_mu);
  }
  return base;
}

Vector start_point(StartRule rule, std::size_t dim, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(dim);
  switch (rule) {
    case StartRule::ones: return Vector::Ones(n);
    case StartRule::zeros: return Vector::Zero(n);
    case StartRule::gaussian: {
      Rng rng(derive_seed(seed, 0x5EED));
      Vector x(n);
      for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.normal();
      return x;
    }
  }
  return Vector::Zero(n);
}

std::vector<Cell> expand_cells(const ExperimentConfig& config,
                               const problems::ObjectiveMeta& meta) {
  std::vector<Cell> cells;
  const double L = meta.smooth_L;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const MethodSpec& m = config.methods[mi];
    double beta = m.beta;
    if (m.beta_optimal) {
      beta = optim::optimal_hb_params(L, resolve_mu_rule(m, meta, "beta")).beta;
    }
    if (m.name == "rahb") resolve_mu_rule(m, meta, "name");

    std::vector<std::optional<double>> multipliers;
    if (m.grid.empty()) {
      multipliers.push_back(std::nullopt);
    } else {
      multipliers.assign(m.grid.begin(), m.grid.end());
    }
    for (const auto& mult : multipliers) {
      Cell cell;
      cell.index = cells.size();
      cell.method_index = mi;
      cell.method = m.name;
      cell.multiplier = mult;
      cell.params.beta = beta;
      if (mult) {
        cell.params.alpha = *mult / L;
      } else {
        switch (m.alpha_rule) {
          case AlphaRule::explicit_value: cell.params.alpha = m.alpha_value; break;
          case AlphaRule::one_over_L: cell.params.alpha = 1.0 / L; break;
          case AlphaRule::optimal:
            cell.params.alpha =
                optim::optimal_hb_params(L, resolve_mu_rule(m, meta, "alpha")).alpha;
            break;
          case AlphaRule::wahb_cap: cell.params.alpha = optim::wahb_stepsize(L, beta); break;
        }
      }
      std::string key = config.experiment_canonical + m.canonical;
      if (mult) key += "multiplier=" + format_value(*mult) + "\n";
      cell.hash = hash_hex(key);
      cell.seed = derive_seed(config.seed, std::stoull(cell.hash, nullptr, 16));
      cell.file = m.name + "_" + cell.hash + ".csv";
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

bool RunRecord::all_diverged() const {
  if (cells.empty()) return false;
  for (const auto& c : cells)
    if (!c.diverged) return false;
  return true;
}

bool RunRecord::any_selection_failed() const {
  for (const auto& s : selections)
    if (!s.best_cell) return true;
  return false;
}

void write_trajectory_csv(std::ostream& out, const optim::Trajectory& traj) {
  out << kTrajectoryHeader << '\n';
  for (const auto& r : traj.rows) {
    out << r.k << ',' << format_value(r.f_gap_raw) << ',' << format_value(r.f_gap_avg) << ','
        << format_value(r.dist_raw) << ',' << format_value(r.dist_avg) << ','
        << format_value(r.inf_norm_raw) << ','
        << (r.bound_envelope ? format_value(*r.bound_envelope) : std::string()) << '\n';
  }
  if (traj.diverged && traj.diverged_at) {
    out << *traj.diverged_at << ",nan,nan,nan,nan,nan,\n";
  }
}

void write_tuning_csv(std::ostream& out, const RunRecord& record) {
  out << "method,section,multiplier,alpha,beta,diverged,final_gap,selected,file\n";
  for (const auto& sel : record.selections) {
    for (const auto& c : record.cells) {
      if (c.cell.method_index != sel.method_index) continue;
      out << c.cell.method << ',' << c.cell.method_index << ','
          << format_value(c.cell.multiplier.value_or(0.0)) << ','
          << format_value(c.cell.params.alpha) << ',' << format_value(c.cell.params.beta) << ','
          << (c.diverged ? 1 : 0) << ',' << format_value(c.final_gap) << ','
          << (sel.best_cell == c.cell.index ? 1 : 0) << ',' << c.cell.file << '\n';
    }
  }
}

std::string manifest_json(const ExperimentConfig& config, const RunRecord& record) {
  using nlohmann::json;
  json j;
  j["config_hash"] = record.config_hash;
  j["seed"] = config.seed;
  j["iters"] = config.iters;
  j["problem"] = {{"family", config.problem.family}, {"id", record.problem_id}};
  j["csv_header"] = kTrajectoryHeader;
  json cells = json::array();
  for (const auto& c : record.cells) {
    const MethodSpec& m = config.methods[c.cell.method_index];
    json e = {{"index", c.cell.index},
              {"method", c.cell.method},
              {"section", c.cell.method_index},
              {"section_line", m.line},
              {"alpha", c.cell.params.alpha},
              {"beta", c.cell.params.beta},
              {"alpha_rule", c.cell.multiplier ? "grid" : alpha_label(m.alpha_rule)},
              {"scheme", scheme_label(c.trajectory.scheme)},
              {"x1", x1_label(c.trajectory.x1_rule)},
              {"cell_hash", c.cell.hash},
              {"seed", hex_seed(c.cell.seed)},
              {"file", c.cell.file},
              {"rows", c.trajectory.rows.size()},
              {"diverged", c.diverged},
              {"final_gap", number_or_null(c.final_gap)},
              {"R0", number_or_null(c.trajectory.R0)},
              {"wall_seconds", c.wall_seconds}};
    if (c.cell.multiplier) e["multiplier"] = *c.cell.multiplier;
    if (m.scheme.kind == optim::SchemeKind::geometric) e["rho"] = m.scheme.rho;
    if (m.scheme.kind == optim::SchemeKind::tail) e["window"] = m.scheme.window;
    if (c.trajectory.diverged_at) e["diverged_at"] = *c.trajectory.diverged_at;
    if (c.restart) {
      json gaps = json::array();
      for (double g : c.restart->stage_gaps) gaps.push_back(number_or_null(g));
      e["restart"] = {{"tau", c.restart->tau},
                      {"inner_N", c.restart->inner_N},
                      {"eps", c.eps},
                      {"stage_starts", c.trajectory.stage_starts},
                      {"stage_gaps", gaps}};
    }
    cells.push_back(std::move(e));
  }
  j["cells"] = std::move(cells);
  json sels = json::array();
  for (const auto& s : record.selections) {
    json e = {{"method", s.method}, {"section", s.method_index}};
    e["best_cell"] = s.best_cell ? json(*s.best_cell) : json(nullptr);
    e["best_multiplier"] = s.best_multiplier ? json(*s.best_multiplier) : json(nullptr);
    e["best_alpha"] = s.best_alpha ? json(*s.best_alpha) : json(nullptr);
    sels.push_back(std::move(e));
  }
  j["selections"] = std::move(sels);
  j["extra_files"] = record.extra_files;
  j["all_diverged"] = record.all_diverged();
  j["wall_seconds"] = record.wall_seconds;
  return j.dump(2) + "\n";
}

RunRecord run_experiment(const ExperimentConfig& config, const RunOutputs& outputs) {
  const auto t0 = Clock::now();
  RunRecord record;
  record.config_hash = config.hash;
  record.problem_id = config.problem.family + "_" + hash_hex(config.problem.canonical);

  const auto problem = build_problem(config.problem, config.base_dir);
  if (!problem->meta().optimum_known) {
    throw ConfigError(config.problem.line, "family", "problem has no certified optimum");
  }
  const Vector x0 = start_point(config.x0, problem->dim(), config.seed);
  const std::vector<Cell> cells = expand_cells(config, problem->meta());

  if (outputs.write_csv || outputs.write_manifest || outputs.write_tuning) {
    std::filesystem::create_directories(config.output_dir);
  }

  record.cells.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        record.cells[i] = run_cell(config, *problem, x0, cells[i]);
        record.cells[i].trajectory.problem_id = record.problem_id;
        if (outputs.write_csv) {
          std::ofstream out(config.output_dir / cells[i].file);
          write_trajectory_csv(out, record.cells[i].trajectory);
          if (!out) throw Error("cannot write " + (config.output_dir / cells[i].file).string());
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = cells.size();
      }
    }
  };
  const std::size_t threads = std::min(config.parallelism, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    if (config.methods[mi].grid.empty()) continue;
    Selection sel;
    sel.method_index = mi;
    sel.method = config.methods[mi].name;
    for (const auto& c : record.cells) {
      if (c.cell.method_index != mi || c.diverged) continue;
      if (!sel.best_cell || c.final_gap < record.cells[*sel.best_cell].final_gap) {
        sel.best_cell = c.cell.index;
        sel.best_multiplier = c.cell.multiplier;
        sel.best_alpha = c.cell.params.alpha;
      }
    }
    record.selections.push_back(sel);
  }
  record.wall_seconds = seconds_since(t0);

  if (outputs.write_tuning) {
    std::ofstream out(config.output_dir / "tuning.csv");
    write_tuning_csv(out, record);
    record.extra_files.push_back("tuning.csv");
  }
  if (outputs.write_manifest) {
    std::ofstream out(config.output_dir / "manifest.json");
    out << manifest_json(config, record);
  }
  return record;
}

}  // namespace avghb::harness
