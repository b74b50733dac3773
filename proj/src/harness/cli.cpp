#include "avghb/harness/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "avghb/deviation/deviation.hpp"
#include "avghb/harness/experiment.hpp"
#include "avghb/problems/libsvm.hpp"
#include "avghb/problems/logreg.hpp"
#include "avghb/problems/quadratic.hpp"

namespace avghb::harness {

namespace {

// Bad command-line input; maps to the config exit code.
class UsageError : public Error {
 public:
  using Error::Error;
};

double parse_number(std::string_view s, const std::string& what) {
  s = s.substr(0, s.find_last_not_of(' ') + 1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw UsageError(what + ": expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::vector<double> split_numbers(const std::string& text, char sep, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(sep, pos);
    out.push_back(parse_number(std::string_view(text).substr(pos, next == std::string::npos
                                                                      ? std::string::npos
                                                                      : next - pos),
                               what));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

// mu:lambda2:L:n -> mu, n - 2 geometric values from lambda2 to L, L.
std::vector<double> diag_spectrum(const std::string& text) {
  const auto parts = split_numbers(text, ':', "--diag");
  if (parts.size() != 4) throw UsageError("--diag expects mu:lambda2:L:n");
  const double mu = parts[0], l2 = parts[1], L = parts[2];
  const double n = parts[3];
  if (!(n >= 2) || n != std::floor(n)) throw UsageError("--diag: n must be an integer >= 2");
  if (!(mu > 0 && mu <= l2 && l2 <= L)) throw UsageError("--diag: need 0 < mu <= lambda2 <= L");
  std::vector<double> spec{mu};
  if (n > 2) {
    const Vector grid = problems::geometric_grid(l2, L, static_cast<std::size_t>(n) - 2);
    spec.insert(spec.end(), grid.data(), grid.data() + grid.size());
  }
  spec.push_back(L);
  return spec;
}

std::ostream& open_or(std::ofstream& file, const std::string& path, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw Error("cannot write '" + path + "'");
  return file;
}

struct DeviationArgs {
  std::string spectrum;
  std::string diag;
  std::optional<double> alpha;
  std::optional<double> beta;
  bool optimal = false;
  std::string scheme = "raw";
  std::optional<double> F;
  std::size_t kcap = 1'000'000;
  std::string curves;
  std::string out;
};

int cmd_deviation(const DeviationArgs& a, std::ostream& out) {
  if (a.spectrum.empty() == a.diag.empty()) {
    throw UsageError("give exactly one of --spectrum or --diag");
  }
  std::vector<double> spectrum =
      a.spectrum.empty() ? diag_spectrum(a.diag) : split_numbers(a.spectrum, ',', "--spectrum");
  std::sort(spectrum.begin(), spectrum.end());
  if (!(spectrum.front() > 0.0)) throw UsageError("--spectrum: eigenvalues must be positive");

  std::ofstream file;
  std::ostream& sink = open_or(file, a.out, out);

  if (a.F) {
    if (a.alpha || a.beta || a.optimal) {
      throw UsageError("--f fixes alpha and beta itself; drop --alpha/--beta/--optimal");
    }
    const auto r = deviation::theorem3_compare(spectrum, *a.F, a.kcap);
    sink << "F,ratio_bound,beta_lo,beta_hi,interval_empty,alpha,beta,dev_ahb,dev_hb,"
            "alpha_opt,beta_opt,dev_hb_opt,rhs,holds,converged\n";
    sink << format_value(*a.F) << ',' << format_value(r.ratio_bound) << ','
         << format_value(r.beta_lo) << ',' << format_value(r.beta_hi) << ','
         << (r.interval_empty ? 1 : 0) << ',' << format_value(r.averaged_params.alpha) << ','
         << format_value(r.averaged_params.beta) << ',' << format_value(r.measured_lhs) << ','
         << format_value(r.measured_hb) << ',' << format_value(r.optimal_params.alpha) << ','
         << format_value(r.optimal_params.beta) << ',' << format_value(r.measured_rhs) << ','
         << format_value(r.ratio_bound * r.measured_rhs) << ',' << (r.holds ? 1 : 0) << ','
         << (r.converged ? 1 : 0) << '\n';
    return kExitOk;
  }

  optim::HBParams params;
  if (a.optimal) {
    if (a.alpha || a.beta) throw UsageError("--optimal conflicts with --alpha/--beta");
    params = optim::optimal_hb_params(spectrum.back(), spectrum.front());
  } else {
    if (!a.alpha || !a.beta) throw UsageError("need --alpha and --beta, or --optimal");
    params = {*a.alpha, *a.beta};
  }
  params.validate();

  deviation::DeviationQuery q;
  q.params = params;
  q.spectrum = spectrum;
  q.K_cap = a.kcap;
  q.keep_curves = !a.curves.empty();
  if (a.scheme == "raw") {
    q.scheme = deviation::DevScheme::raw;
  } else if (a.scheme == "uniform") {
    q.scheme = deviation::DevScheme::uniform_avg;
  } else if (a.scheme == "theorem") {
    q.scheme = deviation::DevScheme::weighted_avg;
    q.weight_log_growth = optim::log_weight_growth(optim::AveragingScheme::theorem_weights(),
                                                   params, spectrum.front());
  } else if (a.scheme.rfind("geometric:", 0) == 0) {
    const double rho = parse_number(std::string_view(a.scheme).substr(10), "--scheme rho");
    q.scheme = deviation::DevScheme::weighted_avg;
    q.weight_log_growth = optim::log_weight_growth(optim::AveragingScheme::geometric(rho),
                                                   params, spectrum.front());
  } else {
    throw UsageError("--scheme must be raw, uniform, theorem or geometric:<rho>");
  }

  const auto r = deviation::dev_measure(q);
  sink << "scheme,alpha,beta,dev_value,argmax_k,argmax_mode,argmax_lambda,truncation_K,converged\n";
  sink << a.scheme << ',' << format_value(params.alpha) << ',' << format_value(params.beta) << ','
       << format_value(r.dev_value) << ',' << r.argmax_k << ',' << r.argmax_mode << ','
       << format_value(spectrum[r.argmax_mode]) << ',' << r.truncation_K << ','
       << (r.converged ? 1 : 0) << '\n';
  if (r.per_mode_curves) {
    std::ofstream curves(a.curves);
    if (!curves) throw Error("cannot write '" + a.curves + "'");
    curves << "j,lambda,k,value\n";
    for (std::size_t j = 0; j < r.per_mode_curves->size(); ++j) {
      const auto& c = (*r.per_mode_curves)[j];
      for (std::size_t k = 0; k < c.size(); ++k) {
        curves << j << ',' << format_value(spectrum[j]) << ',' << k << ',' << format_value(c[k])
               << '\n';
      }
    }
  }
  return kExitOk;
}

int cmd_run(const std::string& path, std::optional<std::string> output, bool tune,
            std::ostream& out) {
  ExperimentConfig config = load_experiment(path);
  if (output) config.output_dir = *output;
  if (tune && std::none_of(config.methods.begin(), config.methods.end(),
                           [](const MethodSpec& m) { return !m.grid.empty(); })) {
    throw ConfigError(0, "grid", "tune needs at least one [method] with a stepsize grid");
  }
  RunOutputs outputs;
  outputs.write_tuning = tune;
  const RunRecord record = run_experiment(config, outputs);

  out << "config " << record.config_hash << ", " << record.cells.size() << " cells in "
      << config.output_dir.string() << '\n';
  for (const auto& c : record.cells) {
    out << "  " << c.cell.file << "  alpha=" << format_value(c.cell.params.alpha)
        << " beta=" << format_value(c.cell.params.beta);
    if (c.diverged) {
      out << "  diverged";
    } else {
      out << "  final_gap=" << format_value(c.final_gap);
    }
    out << '\n';
  }
  for (const auto& s : record.selections) {
    out << "selected " << s.method << " (section " << s.method_index << "): ";
    if (s.best_cell) {
      out << "multiplier=" << format_value(*s.best_multiplier)
          << " alpha=" << format_value(*s.best_alpha) << '\n';
    } else {
      out << "none, every cell diverged\n";
    }
  }
  if (record.all_diverged()) return kExitAllDiverged;
  if (tune && record.any_selection_failed()) return kExitAllDiverged;
  return kExitOk;
}

int cmd_inspect(const std::string& path, std::ostream& out) {
  const auto data = problems::parse_libsvm(std::filesystem::path(path));
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < data.labels.size(); ++i) pos += data.labels[i] > 0 ? 1 : 0;
  const double m = static_cast<double>(data.samples());
  const double cells = m * static_cast<double>(data.features_dim());
  out << "samples=" << data.samples() << '\n'
      << "features=" << data.features_dim() << '\n'
      << "nonzeros=" << data.features.nonZeros() << '\n'
      << "density=" << format_value(cells > 0 ? data.features.nonZeros() / cells : 0.0) << '\n'
      << "positive=" << pos << '\n'
      << "negative=" << data.samples() - pos << '\n';
  if (data.samples() > 0) {
    out << "data_L=" << format_value(problems::max_singular_value_squared(data.features) / (4 * m))
        << '\n';
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heavy-ball with averaging: experiments and deviation analysis", "avghb"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output;
  auto* run = app.add_subcommand("run", "Run every cell of an experiment config");
  run->add_option("config", config_path, "Experiment config file")->required();
  run->add_option("-o,--output", output, "Override the output directory");

  auto* tune = app.add_subcommand("tune", "Run a stepsize grid and select the best alpha");
  tune->add_option("config", config_path, "Experiment config file")->required();
  tune->add_option("-o,--output", output, "Override the output directory");

  DeviationArgs dev;
  auto* devc = app.add_subcommand("deviation", "Maximal deviation of the iterates on a quadratic");
  devc->add_option("--spectrum", dev.spectrum, "Comma-separated eigenvalues");
  devc->add_option("--diag", dev.diag, "Diagonal family shorthand mu:lambda2:L:n");
  devc->add_option("--alpha", dev.alpha, "Stepsize");
  devc->add_option("--beta", dev.beta, "Momentum");
  devc->add_flag("--optimal", dev.optimal, "Use the optimal heavy-ball parameters");
  devc->add_option("--scheme", dev.scheme, "raw | uniform | theorem | geometric:<rho>");
  devc->add_option("--f", dev.F, "Spectral gap factor: compare averaged and optimal heavy ball");
  devc->add_option("--kcap", dev.kcap, "Iteration cap of the sup scan");
  devc->add_option("--curves", dev.curves, "Write per-mode curves to this CSV");
  devc->add_option("--out", dev.out, "Summary CSV path (default: stdout)");

  std::string dataset_path;
  auto* datasets = app.add_subcommand("datasets", "Dataset utilities");
  datasets->require_subcommand(1);
  auto* inspect = datasets->add_subcommand("inspect", "Summarize a LIBSVM file");
  inspect->add_option("path", dataset_path, "LIBSVM file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, output, false, out);
    if (tune->parsed()) return cmd_run(config_path, output, true, out);
    if (devc->parsed()) return cmd_deviation(dev, out);
    if (inspect->parsed()) return cmd_inspect(dataset_path, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace avghb::harness
