#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "avghb/harness/config.hpp"
#include "avghb/optim/runner.hpp"
#include "avghb/problems/objective.hpp"

namespace avghb::harness {

// Instantiates the configured problem family. Relative data paths resolve
// against `base_dir`. A declared_mu wraps the result in a lowered-mu view.
std::shared_ptr<const problems::Objective> build_problem(const ProblemSpec& spec,
                                                         const std::filesystem::path& base_dir = {});

Vector start_point(StartRule rule, std::size_t dim, std::uint64_t seed);

// One (method section, stepsize) combination.
struct Cell {
  std::size_t index = 0;
  std::size_t method_index = 0;
  std::string method;
  std::optional<double> multiplier;  // grid entry, alpha = multiplier / L
  optim::HBParams params;
  std::uint64_t seed = 0;
  std::string hash;
  std::string file;  // <method>_<hash>.csv
};

// Resolves alpha and beta rules against the problem constants. Throws
// ConfigError when a rule needs mu > 0 and the problem declares mu = 0.
std::vector<Cell> expand_cells(const ExperimentConfig& config,
                               const problems::ObjectiveMeta& meta);

struct CellResult {
  Cell cell;
  optim::Trajectory trajectory;
  std::optional<optim::RestartSchedule> restart;
  double eps = 0.0;  // rahb target accuracy
  double wall_seconds = 0.0;
  bool diverged = false;
  double final_gap = 0.0;  // f_gap_avg, or f_gap_raw when the scheme is none
};

struct Selection {
  std::size_t method_index = 0;
  std::string method;
  std::optional<std::size_t> best_cell;  // empty when every grid cell diverged
  std::optional<double> best_multiplier;
  std::optional<double> best_alpha;
};

struct RunRecord {
  std::string config_hash;
  std::string problem_id;
  std::vector<CellResult> cells;
  std::vector<Selection> selections;  // one per method section with a grid
  std::vector<std::string> extra_files;  // tuning.csv when written
  double wall_seconds = 0.0;

  bool all_diverged() const;
  bool any_selection_failed() const;
};

struct RunOutputs {
  bool write_csv = true;
  bool write_manifest = true;
  bool write_tuning = false;
};

// Runs every cell, up to config.parallelism at a time, and writes one CSV
// per cell plus manifest.json (and tuning.csv) into config.output_dir.
RunRecord run_experiment(const ExperimentConfig& config, const RunOutputs& outputs = {});

// CSV of a trajectory in the fixed column order. A diverged run ends with
// a row of `nan` at the divergence iteration.
extern const char* const kTrajectoryHeader;
void write_trajectory_csv(std::ostream& out, const optim::Trajectory& traj);
void write_tuning_csv(std::ostream& out, const RunRecord& record);
std::string manifest_json(const ExperimentConfig& config, const RunRecord& record);

// %.17g, with non-finite values written as `nan`.
std::string format_value(double v);

}  // namespace avghb::harness
