#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avghb/error.hpp"
#include "avghb/optim/params.hpp"
#include "avghb/optim/runner.hpp"

namespace avghb::harness {

// Invalid experiment configuration; `line` is 1-based (0 when unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, std::string field, const std::string& what)
      : Error((line ? "line " + std::to_string(line) + ": " : std::string()) +
              (field.empty() ? std::string() : "'" + field + "': ") + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

// Flat key-value text with section headers:
//
//   # comment
//   [section]
//   key = value
//
// Keys are unique within a section; sections may repeat ([method]).
struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct ConfigSection {
  std::string name;
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(std::string_view key) const;
};

struct RawConfig {
  std::vector<ConfigSection> sections;
};

RawConfig parse_config_text(std::string_view text);

// Sections in file order, keys sorted inside each section, whitespace and
// comments dropped.
std::string canonical_text(const RawConfig& config);
std::string canonical_text(const ConfigSection& section);

// 64-bit FNV-1a of `text` as 16 hex digits.
std::string hash_hex(std::string_view text);

enum class AlphaRule { explicit_value, one_over_L, optimal, wahb_cap };

struct MethodSpec {
  std::string name;  // hb, ahb, wahb, tahb, rahb
  std::size_t section_index = 0;
  std::size_t line = 0;
  AlphaRule alpha_rule = AlphaRule::one_over_L;
  double alpha_value = 0.0;
  bool beta_optimal = false;
  double beta = 0.0;
  optim::AveragingScheme scheme;
  optim::X1Rule x1_rule = optim::X1Rule::copy_x0;
  std::vector<double> grid;  // stepsize multipliers of 1/L
  double eps_rel = 1e-6;     // rahb: eps = eps_rel mu R0^2
  std::string canonical;
};

struct ProblemSpec {
  std::string family;  // diag, random, nesterov, toeplitz, logreg
  std::size_t line = 0;
  std::size_t dim = 0;
  double mu = 0.0;
  double L = 0.0;
  double lambda2 = 0.0;                 // diag: smallest interior eigenvalue
  std::vector<double> interior;         // diag: explicit interior list
  bool has_target = false;              // random: spectrum target given
  std::optional<double> shift;          // toeplitz
  std::string data;                     // logreg: path or "synthetic"
  std::optional<double> l2;             // logreg: absolute l2
  std::optional<double> l2_rel;         // logreg: l2 as a fraction of the data L
  std::size_t samples = 0;              // synthetic logreg
  double density = 1.0;                 // synthetic logreg
  std::uint64_t seed = 0;
  std::optional<double> declared_mu;    // override certified mu (e.g. 0)
  std::string canonical;
};

enum class StartRule { ones, zeros, gaussian };

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<MethodSpec> methods;
  std::size_t iters = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::size_t parallelism = 1;
  StartRule x0 = StartRule::ones;
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::string canonical;
  std::string hash;
  std::string experiment_canonical;
};

// Validates names, values and cross-field constraints; throws ConfigError
// pointing at the offending line and key.
ExperimentConfig parse_experiment(std::string_view text,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);

const std::vector<std::string>& registered_families();
const std::vector<std::string>& registered_methods();

}  // namespace avghb::harness
