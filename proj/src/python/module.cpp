#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "avghb/deviation/deviation.hpp"
#include "avghb/error.hpp"
#include "avghb/harness/cli.hpp"
#include "avghb/optim/runner.hpp"
#include "avghb/problems/libsvm.hpp"
#include "avghb/problems/logreg.hpp"
#include "avghb/problems/quadratic.hpp"

namespace py = pybind11;
using namespace avghb;

namespace {

optim::AveragingScheme scheme_from(const std::string& name, double rho, std::size_t window) {
  if (name == "none") return optim::AveragingScheme::none();
  if (name == "uniform") return optim::AveragingScheme::uniform();
  if (name == "geometric") return optim::AveragingScheme::geometric(rho);
  if (name == "theorem") return optim::AveragingScheme::theorem_weights();
  if (name == "tail") return optim::AveragingScheme::tail(window);
  throw py::value_error("scheme must be none, uniform, geometric, theorem or tail");
}

optim::X1Rule x1_from(const std::string& name) {
  if (name == "copy_x0") return optim::X1Rule::copy_x0;
  if (name == "one_grad_step") return optim::X1Rule::one_grad_step;
  throw py::value_error("x1 must be copy_x0 or one_grad_step");
}

py::dict trajectory_dict(const optim::Trajectory& t) {
  std::vector<std::size_t> k;
  std::vector<double> gr, ga, dr, da, inf, env;
  for (const auto& r : t.rows) {
    k.push_back(r.k);
    gr.push_back(r.f_gap_raw);
    ga.push_back(r.f_gap_avg);
    dr.push_back(r.dist_raw);
    da.push_back(r.dist_avg);
    inf.push_back(r.inf_norm_raw);
    env.push_back(r.bound_envelope.value_or(std::numeric_limits<double>::quiet_NaN()));
  }
  py::dict d;
  d["k"] = k;
  d["f_gap_raw"] = gr;
  d["f_gap_avg"] = ga;
  d["dist_raw"] = dr;
  d["dist_avg"] = da;
  d["inf_norm_raw"] = inf;
  d["bound_envelope"] = env;
  d["diverged"] = t.diverged;
  d["diverged_at"] = t.diverged_at;
  d["x_last"] = t.x_last;
  d["x_avg_last"] = t.x_avg_last;
  d["R0"] = t.R0;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Heavy-ball optimizers with iterate averaging";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<optim::HBParams>(m, "HBParams")
      .def(py::init<>())
      .def(py::init([](double a, double b) { return optim::HBParams{a, b}; }), py::arg("alpha"),
           py::arg("beta"))
      .def_readwrite("alpha", &optim::HBParams::alpha)
      .def_readwrite("beta", &optim::HBParams::beta)
      .def("__repr__", [](const optim::HBParams& p) {
        std::ostringstream s;
        s.precision(17);
        s << "HBParams(alpha=" << p.alpha << ", beta=" << p.beta << ")";
        return s.str();
      });

  m.def("optimal_hb_params", &optim::optimal_hb_params, py::arg("L"), py::arg("mu"));
  m.def("wahb_stepsize", &optim::wahb_stepsize, py::arg("L"), py::arg("beta"));

  py::class_<problems::Objective, std::shared_ptr<problems::Objective>>(m, "Objective")
      .def("value", &problems::Objective::value)
      .def("gradient", &problems::Objective::gradient)
      .def("gap", &problems::Objective::gap)
      .def_property_readonly("family", &problems::Objective::family)
      .def_property_readonly("dim", &problems::Objective::dim)
      .def_property_readonly("L", [](const problems::Objective& o) { return o.meta().smooth_L; })
      .def_property_readonly("mu", [](const problems::Objective& o) { return o.meta().strong_mu; })
      .def_property_readonly("x_star", [](const problems::Objective& o) {
        return o.meta().optimum_known ? py::cast(o.meta().x_star) : py::none();
      })
      .def_property_readonly("f_star", [](const problems::Objective& o) { return o.meta().f_star; });

  py::class_<problems::QuadraticProblem, problems::Objective,
             std::shared_ptr<problems::QuadraticProblem>>(m, "QuadraticProblem")
      .def(py::init<Matrix, Vector, std::string>(), py::arg("A"), py::arg("b"),
           py::arg("family") = "random")
      .def_property_readonly("matrix", &problems::QuadraticProblem::matrix)
      .def_property_readonly("eigenvalues", &problems::QuadraticProblem::eigenvalues);

  m.def("diag_quadratic", [](double mu, std::vector<double> interior, double L) {
    return std::make_shared<problems::QuadraticProblem>(
        problems::make_diag_quadratic(mu, interior, L));
  }, py::arg("mu"), py::arg("interior"), py::arg("L"));
  m.def("random_quadratic", [](std::size_t dim, std::uint64_t seed, std::optional<double> mu,
                               std::optional<double> L) {
    std::optional<problems::SpectrumTarget> target;
    if (mu && L) target = problems::SpectrumTarget{*mu, *L};
    return std::make_shared<problems::QuadraticProblem>(
        problems::make_random_quadratic(dim, seed, target));
  }, py::arg("dim"), py::arg("seed"), py::arg("mu") = py::none(), py::arg("L") = py::none());
  m.def("nesterov", [](std::size_t dim, double L, double mu) {
    return std::make_shared<problems::QuadraticProblem>(problems::make_nesterov(dim, L, mu));
  }, py::arg("dim"), py::arg("L"), py::arg("mu"));
  m.def("toeplitz", [](std::size_t dim, std::optional<double> shift) {
    return std::make_shared<problems::QuadraticProblem>(problems::make_toeplitz(dim, shift));
  }, py::arg("dim"), py::arg("shift") = py::none());
  m.def("synthetic_logreg", [](std::size_t m_, std::size_t d, double l2, std::uint64_t seed,
                               double density) {
    return std::shared_ptr<problems::Objective>(std::make_shared<problems::LogRegProblem>(
        problems::make_synthetic_dataset(m_, d, seed, density), l2));
  }, py::arg("m"), py::arg("d"), py::arg("l2"), py::arg("seed") = 0, py::arg("density") = 1.0);
  m.def("libsvm_logreg", [](const std::string& path, double l2) {
    return std::shared_ptr<problems::Objective>(std::make_shared<problems::LogRegProblem>(
        problems::parse_libsvm(std::filesystem::path(path)), l2,
        problems::ReferenceOptions::from_env()));
  }, py::arg("path"), py::arg("l2"));
  m.def("libsvm_shape", [](const std::string& path) {
    const auto d = problems::parse_libsvm(std::filesystem::path(path));
    return py::make_tuple(d.samples(), d.features_dim(), d.features.nonZeros());
  }, py::arg("path"), "(samples, features, nonzeros) of a LIBSVM file");

  m.def("run", [](const problems::Objective& problem, double alpha, double beta,
                  const Vector& x0, std::size_t iters, const std::string& scheme, double rho,
                  std::size_t window, const std::string& x1) {
    optim::RunOptions opts;
    opts.iters = iters;
    opts.x1_rule = x1_from(x1);
    opts.stop_on_divergence = true;
    const auto averaging = scheme_from(scheme, rho, window);
    optim::Trajectory t;
    {
      py::gil_scoped_release release;
      t = optim::run(problem, {alpha, beta}, averaging, x0, opts);
    }
    return trajectory_dict(t);
  }, py::arg("problem"), py::arg("alpha"), py::arg("beta"), py::arg("x0"), py::arg("iters"),
     py::arg("scheme") = "none", py::arg("rho") = 1.0, py::arg("window") = 1,
     py::arg("x1") = "copy_x0",
     "Run heavy ball with the given averaging scheme; returns the trajectory columns.");

  m.def("run_rahb", [](const problems::Objective& problem, double beta, double eps,
                       const Vector& x0) {
    if (!problem.meta().optimum_known) throw DomainError("restarts need a known optimum");
    const double R0 = (x0 - problem.meta().x_star).norm();
    auto [t, s] = optim::run_rahb(problem, beta, eps, R0, x0);
    py::dict d = trajectory_dict(t);
    d["tau"] = s.tau;
    d["inner_N"] = s.inner_N;
    d["stage_gaps"] = s.stage_gaps;
    d["x_hat"] = s.x_hat;
    return d;
  }, py::arg("problem"), py::arg("beta"), py::arg("eps"), py::arg("x0"));

  m.def("dev_measure", [](std::vector<double> spectrum, double alpha, double beta,
                          const std::string& scheme, double rho, std::size_t K_cap) {
    deviation::DeviationQuery q;
    q.params = {alpha, beta};
    q.spectrum = std::move(spectrum);
    q.K_cap = K_cap;
    if (scheme == "raw") {
      q.scheme = deviation::DevScheme::raw;
    } else if (scheme == "uniform") {
      q.scheme = deviation::DevScheme::uniform_avg;
    } else if (scheme == "geometric") {
      q.scheme = deviation::DevScheme::weighted_avg;
      q.weight_log_growth = std::log(rho);
    } else {
      throw py::value_error("scheme must be raw, uniform or geometric");
    }
    const auto r = deviation::dev_measure(q);
    py::dict d;
    d["dev_value"] = r.dev_value;
    d["argmax_k"] = r.argmax_k;
    d["argmax_mode"] = r.argmax_mode;
    d["truncation_K"] = r.truncation_K;
    d["converged"] = r.converged;
    return d;
  }, py::arg("spectrum"), py::arg("alpha"), py::arg("beta"), py::arg("scheme") = "raw",
     py::arg("rho") = 1.0, py::arg("K_cap") = 1'000'000);

  m.def("theorem3_ratio_bound", &deviation::theorem3_ratio_bound, py::arg("F"));
  m.def("hb_peak_lower_bound", &deviation::hb_peak_lower_bound, py::arg("kappa"));

  m.def("cli_main", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = harness::cli_main(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Run the command line tool; returns (exit_code, stdout, stderr).");
}
