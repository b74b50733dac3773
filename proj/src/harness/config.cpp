#include "avghb/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace avghb::harness {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

double to_double(const ConfigEntry& e) {
  std::string_view s = e.value;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(e.line, e.key, "expected a finite number, got '" + e.value + "'");
  }
  return v;
}

std::uint64_t to_uint(const ConfigEntry& e) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) {
    throw ConfigError(e.line, e.key, "expected a nonnegative integer, got '" + e.value + "'");
  }
  return v;
}

std::vector<double> to_list(const ConfigEntry& e) {
  std::vector<double> out;
  std::string_view rest = e.value;
  while (true) {
    const auto comma = rest.find(',');
    ConfigEntry item{e.key, std::string(trim(rest.substr(0, comma))), e.line};
    out.push_back(to_double(item));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

void check_keys(const ConfigSection& sec, const std::set<std::string>& allowed) {
  for (const auto& e : sec.entries) {
    if (!allowed.count(e.key)) {
      throw ConfigError(e.line, e.key, "unknown key in [" + sec.name + "]");
    }
  }
}

const ConfigEntry& require(const ConfigSection& sec, std::string_view key) {
  const ConfigEntry* e = sec.find(key);
  if (!e) throw ConfigError(sec.line, std::string(key), "required key missing in [" + sec.name + "]");
  return *e;
}

double positive(const ConfigEntry& e) {
  const double v = to_double(e);
  if (!(v > 0.0)) throw ConfigError(e.line, e.key, "must be positive");
  return v;
}

ProblemSpec parse_problem(const ConfigSection& sec, std::uint64_t seed) {
  check_keys(sec, {"family", "dim", "mu", "L", "lambda2", "interior", "shift", "data", "l2",
                   "l2_rel", "m", "density", "seed", "declared_mu"});
  ProblemSpec p;
  p.line = sec.line;
  p.seed = seed;
  p.canonical = canonical_text(sec);
  const auto& fam = require(sec, "family");
  p.family = fam.value;
  const auto& fams = registered_families();
  if (std::find(fams.begin(), fams.end(), p.family) == fams.end()) {
    throw ConfigError(fam.line, "family", "unregistered problem family '" + p.family + "'");
  }
  if (const auto* e = sec.find("seed")) p.seed = to_uint(*e);
  if (const auto* e = sec.find("declared_mu")) {
    p.declared_mu = to_double(*e);
    if (*p.declared_mu < 0.0) throw ConfigError(e->line, e->key, "must be nonnegative");
  }
  auto dim_at_least = [&](std::size_t lo) {
    const auto& e = require(sec, "dim");
    p.dim = to_uint(e);
    if (p.dim < lo) {
      throw ConfigError(e.line, "dim", "must be at least " + std::to_string(lo));
    }
  };

  if (p.family == "diag") {
    p.mu = positive(require(sec, "mu"));
    p.L = positive(require(sec, "L"));
    if (const auto* e = sec.find("interior")) {
      p.interior = to_list(*e);
      p.dim = p.interior.size() + 2;
    } else {
      dim_at_least(2);
      if (p.dim > 2) p.lambda2 = positive(require(sec, "lambda2"));
    }
  } else if (p.family == "random") {
    dim_at_least(2);
    const auto* mu = sec.find("mu");
    const auto* L = sec.find("L");
    if ((mu == nullptr) != (L == nullptr)) {
      throw ConfigError(sec.line, mu ? "L" : "mu", "spectrum target needs both mu and L");
    }
    if (mu) {
      p.has_target = true;
      p.mu = positive(*mu);
      p.L = positive(*L);
      if (p.L < p.mu) throw ConfigError(L->line, "L", "must be >= mu");
    }
  } else if (p.family == "nesterov") {
    dim_at_least(2);
    p.mu = positive(require(sec, "mu"));
    const auto& L = require(sec, "L");
    p.L = positive(L);
    if (!(p.L > p.mu)) throw ConfigError(L.line, "L", "must exceed mu");
  } else if (p.family == "toeplitz") {
    dim_at_least(3);
    if (const auto* e = sec.find("shift")) p.shift = positive(*e);
  } else if (p.family == "logreg") {
    p.data = require(sec, "data").value;
    const auto* l2 = sec.find("l2");
    const auto* rel = sec.find("l2_rel");
    if ((l2 == nullptr) == (rel == nullptr)) {
      throw ConfigError(sec.line, "l2", "give exactly one of l2 or l2_rel");
    }
    if (l2) p.l2 = positive(*l2);
    if (rel) p.l2_rel = positive(*rel);
    if (p.data == "synthetic") {
      p.samples = to_uint(require(sec, "m"));
      dim_at_least(1);
      if (p.samples == 0) throw ConfigError(require(sec, "m").line, "m", "must be positive");
      if (const auto* e = sec.find("density")) {
        p.density = positive(*e);
        if (p.density > 1.0) throw ConfigError(e->line, "density", "must not exceed 1");
      }
    }
  }
  return p;
}

MethodSpec parse_method(const ConfigSection& sec, std::size_t index, std::size_t iters) {
  check_keys(sec, {"name", "alpha", "beta", "scheme", "rho", "window", "x1", "grid", "eps_rel",
                   "label"});
  MethodSpec m;
  m.section_index = index;
  m.line = sec.line;
  m.canonical = canonical_text(sec);
  const auto& name = require(sec, "name");
  m.name = name.value;
  const auto& methods = registered_methods();
  if (std::find(methods.begin(), methods.end(), m.name) == methods.end()) {
    throw ConfigError(name.line, "name", "unregistered method '" + m.name + "'");
  }

  const auto* alpha = sec.find("alpha");
  const auto* grid = sec.find("grid");
  if (alpha && grid) throw ConfigError(grid->line, "grid", "alpha and grid are mutually exclusive");
  if (m.name == "rahb") {
    if (alpha && alpha->value != "wahb_cap") {
      throw ConfigError(alpha->line, "alpha", "rahb always uses the wahb_cap stepsize");
    }
    if (grid) throw ConfigError(grid->line, "grid", "rahb does not support stepsize tuning");
    m.alpha_rule = AlphaRule::wahb_cap;
  } else if (alpha) {
    if (alpha->value == "one_over_L") {
      m.alpha_rule = AlphaRule::one_over_L;
    } else if (alpha->value == "optimal") {
      m.alpha_rule = AlphaRule::optimal;
    } else if (alpha->value == "wahb_cap") {
      m.alpha_rule = AlphaRule::wahb_cap;
    } else {
      m.alpha_rule = AlphaRule::explicit_value;
      m.alpha_value = positive(*alpha);
    }
  }
  if (grid) {
    m.grid = to_list(*grid);
    for (double g : m.grid) {
      if (!(g > 0.0)) throw ConfigError(grid->line, "grid", "entries must be positive");
    }
  }

  if (const auto* beta = sec.find("beta")) {
    if (beta->value == "optimal") {
      m.beta_optimal = true;
    } else {
      m.beta = to_double(*beta);
      if (!(m.beta >= 0.0 && m.beta < 1.0)) throw ConfigError(beta->line, "beta", "must lie in [0, 1)");
    }
  } else if (m.alpha_rule == AlphaRule::optimal) {
    m.beta_optimal = true;
  } else {
    throw ConfigError(sec.line, "beta", "required key missing in [method]");
  }

  const auto* rho = sec.find("rho");
  const auto* window = sec.find("window");
  std::string scheme;
  if (const auto* s = sec.find("scheme")) {
    scheme = s->value;
  } else if (m.name == "hb") {
    scheme = "none";
  } else if (m.name == "ahb" || m.name == "rahb") {
    scheme = "uniform";
  } else if (m.name == "wahb") {
    scheme = rho ? "geometric" : "theorem";
  } else if (m.name == "tahb") {
    scheme = "tail";
  }
  const std::size_t scheme_line = sec.find("scheme") ? sec.find("scheme")->line : sec.line;
  if (m.name == "rahb" && scheme != "uniform") {
    throw ConfigError(scheme_line, "scheme", "rahb stages always use uniform averaging");
  }
  if (scheme == "none") {
    m.scheme = optim::AveragingScheme::none();
  } else if (scheme == "uniform") {
    m.scheme = optim::AveragingScheme::uniform();
  } else if (scheme == "theorem") {
    m.scheme = optim::AveragingScheme::theorem_weights();
  } else if (scheme == "geometric") {
    if (!rho) throw ConfigError(sec.line, "rho", "geometric weights need rho");
    const double r = to_double(*rho);
    if (!(r >= 1.0)) throw ConfigError(rho->line, "rho", "must be >= 1");
    m.scheme = optim::AveragingScheme::geometric(r);
  } else if (scheme == "tail") {
    if (!window) throw ConfigError(sec.line, "window", "tail averaging needs a window");
    const auto s = to_uint(*window);
    if (s == 0) throw ConfigError(window->line, "window", "must be positive");
    if (s > iters) throw ConfigError(window->line, "window", "exceeds the iteration budget");
    m.scheme = optim::AveragingScheme::tail(s);
  } else {
    throw ConfigError(scheme_line, "scheme", "unknown averaging scheme '" + scheme + "'");
  }

  m.x1_rule = optim::default_x1_rule(m.name);
  if (const auto* x1 = sec.find("x1")) {
    if (m.name == "rahb" && x1->value != "one_grad_step") {
      throw ConfigError(x1->line, "x1", "rahb stages always start with one gradient step");
    }
    if (x1->value == "copy_x0") {
      m.x1_rule = optim::X1Rule::copy_x0;
    } else if (x1->value == "one_grad_step") {
      m.x1_rule = optim::X1Rule::one_grad_step;
    } else {
      throw ConfigError(x1->line, "x1", "expected copy_x0 or one_grad_step");
    }
  }
  if (const auto* eps = sec.find("eps_rel")) {
    if (m.name != "rahb") throw ConfigError(eps->line, "eps_rel", "only meaningful for rahb");
    m.eps_rel = positive(*eps);
  }
  return m;
}

}  // namespace

const ConfigEntry* ConfigSection::find(std::string_view key) const {
  for (const auto& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

RawConfig parse_config_text(std::string_view text) {
  RawConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) throw ConfigError(line_no, "", "invalid section name");
      cfg.sections.push_back({std::string(name), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!valid_name(key)) throw ConfigError(line_no, std::string(key), "invalid key");
    if (value.empty()) throw ConfigError(line_no, std::string(key), "empty value");
    if (cfg.sections.empty()) {
      throw ConfigError(line_no, std::string(key), "entry appears before any section header");
    }
    auto& sec = cfg.sections.back();
    if (sec.find(key)) throw ConfigError(line_no, std::string(key), "duplicate key");
    sec.entries.push_back({std::string(key), std::string(value), line_no});
  }
  return cfg;
}

std::string canonical_text(const ConfigSection& section) {
  std::vector<const ConfigEntry*> sorted;
  for (const auto& e : section.entries) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const ConfigEntry* a, const ConfigEntry* b) { return a->key < b->key; });
  std::string out = "[" + section.name + "]\n";
  for (const auto* e : sorted) out += e->key + "=" + e->value + "\n";
  return out;
}

std::string canonical_text(const RawConfig& config) {
  std::string out;
  for (const auto& sec : config.sections) out += canonical_text(sec);
  return out;
}

std::string hash_hex(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const std::vector<std::string>& registered_families() {
  static const std::vector<std::string> names{"diag", "random", "nesterov", "toeplitz", "logreg"};
  return names;
}

const std::vector<std::string>& registered_methods() {
  static const std::vector<std::string> names{"hb", "ahb", "wahb", "tahb", "rahb"};
  return names;
}

ExperimentConfig parse_experiment(std::string_view text, const std::filesystem::path& base_dir) {
  const RawConfig raw = parse_config_text(text);
  const ConfigSection* experiment = nullptr;
  const ConfigSection* problem = nullptr;
  std::vector<const ConfigSection*> methods;
  for (const auto& sec : raw.sections) {
    if (sec.name == "experiment") {
      if (experiment) throw ConfigError(sec.line, "", "duplicate [experiment] section");
      experiment = &sec;
    } else if (sec.name == "problem") {
      if (problem) throw ConfigError(sec.line, "", "duplicate [problem] section");
      problem = &sec;
    } else if (sec.name == "method") {
      methods.push_back(&sec);
    } else {
      throw ConfigError(sec.line, "", "unknown section [" + sec.name + "]");
    }
  }
  if (!experiment) throw ConfigError(0, "", "missing [experiment] section");
  if (!problem) throw ConfigError(0, "", "missing [problem] section");

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  check_keys(*experiment, {"seed", "iters", "output", "parallelism", "x0"});
  if (const auto* e = experiment->find("seed")) cfg.seed = to_uint(*e);
  if (const auto* e = experiment->find("iters")) {
    cfg.iters = to_uint(*e);
    if (cfg.iters == 0) throw ConfigError(e->line, "iters", "must be positive");
  }
  if (const auto* e = experiment->find("parallelism")) {
    cfg.parallelism = to_uint(*e);
    if (cfg.parallelism == 0) throw ConfigError(e->line, "parallelism", "must be positive");
  }
  if (const auto* e = experiment->find("x0")) {
    if (e->value == "ones") {
      cfg.x0 = StartRule::ones;
    } else if (e->value == "zeros") {
      cfg.x0 = StartRule::zeros;
    } else if (e->value == "gaussian") {
      cfg.x0 = StartRule::gaussian;
    } else {
      throw ConfigError(e->line, "x0", "expected ones, zeros or gaussian");
    }
  }
  const auto& out = require(*experiment, "output");
  cfg.output_dir = out.value;
  if (cfg.output_dir.is_relative() && !base_dir.empty()) cfg.output_dir = base_dir / cfg.output_dir;

  cfg.problem = parse_problem(*problem, cfg.seed);
  if (methods.empty()) throw ConfigError(0, "", "no [method] sections: the experiment is empty");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    cfg.methods.push_back(parse_method(*methods[i], i, cfg.iters));
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.methods[j].canonical == cfg.methods[i].canonical) {
        throw ConfigError(methods[i]->line, "", "duplicate [method] section (same as line " +
                                                    std::to_string(methods[j]->line) + ")");
      }
    }
  }

  cfg.canonical = canonical_text(raw);
  cfg.hash = hash_hex(cfg.canonical);
  ConfigSection run_keys{experiment->name, experiment->line, {}};
  for (const auto& e : experiment->entries)
    if (e.key != "output" && e.key != "parallelism") run_keys.entries.push_back(e);
  cfg.experiment_canonical = canonical_text(run_keys) + cfg.problem.canonical;
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment(buffer.str(), path.parent_path());
}

}  // namespace avghb::harness
