#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gab/aggregation.hpp"
#include "gab/binary_mle.hpp"
#include "gab/contraction.hpp"
#include "gab/errors.hpp"
#include "gab/pipeline.hpp"
#include "gab/poisson_ar.hpp"
#include "gab/simulate.hpp"
#include "gab/spec_io.hpp"

namespace py = pybind11;
using namespace gab;

namespace {

PoissonParams poisson_params(double c_bar, double gamma_bar, double beta) {
  PoissonParams p;
  p.c_bar = c_bar;
  p.gamma_bar = gamma_bar;
  p.beta = beta;
  return p;
}

BinaryMatrix to_binary(const Eigen::Ref<const Eigen::MatrixXd>& y) {
  if (((y.array() != 0.0) && (y.array() != 1.0)).any()) throw ValidationError("panel entries must be 0 or 1");
  return y.cast<std::uint8_t>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Generalized autoregressive binary panels";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def_static(
          "from_json", [](const std::string& text) { return spec_from_json(nlohmann::json::parse(text)); },
          py::arg("text"))
      .def("to_json", [](const ModelSpec& s) { return spec_to_json(s).dump(); })
      .def_property_readonly("family", [](const ModelSpec& s) { return std::string(to_string(s.family)); })
      .def_property_readonly("n_series", [](const ModelSpec& s) { return s.n_series; })
      .def("validate", [](const ModelSpec& s) { return validate_spec(s).summary(); })
      .def("__repr__", [](const ModelSpec& s) {
        return "<ModelSpec " + std::string(to_string(s.family)) + " N=" + std::to_string(s.n_series) + ">";
      });

  m.def("make_linear", &make_linear, py::arg("omega"), py::arg("alpha"), py::arg("beta"), py::arg("n_series") = 1);
  m.def("make_exchangeable", &make_exchangeable, py::arg("omega"), py::arg("gamma"), py::arg("beta"),
        py::arg("n_series"));
  m.def("make_interactive", py::overload_cast<double, double, double, double, int>(&make_interactive),
        py::arg("omega"), py::arg("alpha"), py::arg("gamma"), py::arg("beta"), py::arg("n_series"));

  m.def(
      "simulate",
      [](const ModelSpec& spec, int horizon, std::uint64_t seed, int burn_in, std::uint32_t replicate,
         std::optional<double> p0) {
        SimConfig cfg;
        cfg.seed = seed;
        cfg.horizon = horizon;
        cfg.burn_in = burn_in;
        if (p0) cfg.init = fixed_init(*p0);
        const auto t = simulate(spec, cfg, replicate);
        return py::make_tuple(t.p, Eigen::MatrixXd(t.y.cast<double>()));
      },
      py::arg("spec"), py::arg("horizon"), py::arg("seed") = 0, py::arg("burn_in") = 1000, py::arg("replicate") = 0,
      py::arg("p0") = py::none(), "Returns (p, y), both N x T.");

  m.def("unconditional_mean", [](const ModelSpec& s) { return unconditional_mean(s).per_series_mean; });
  m.def("check_contraction", [](const ModelSpec& s) {
    const auto c = check_contraction(s);
    py::dict d;
    d["rho"] = c.rho;
    d["companion"] = c.companion;
    d["assumption1_supported"] = c.assumption1_supported;
    d["assumption1_holds"] = c.assumption1_holds;
    d["assumption2_supported"] = c.assumption2_supported;
    d["assumption2_holds"] = c.assumption2_holds;
    d["note"] = c.note;
    return d;
  });
  m.def("spectral_radius", [](const Eigen::MatrixXd& a) { return spectral_radius(a); });

  m.def(
      "loglik",
      [](const ModelSpec& s, const Eigen::MatrixXd& y, const std::string& restriction) {
        LikelihoodOptions o;
        o.restriction = restriction_from_string(restriction);
        return loglik(s, to_binary(y), o);
      },
      py::arg("spec"), py::arg("y"), py::arg("restriction") = "none");
  m.def(
      "score",
      [](const ModelSpec& s, const Eigen::MatrixXd& y, const std::string& restriction) {
        LikelihoodOptions o;
        o.restriction = restriction_from_string(restriction);
        return score(s, to_binary(y), o);
      },
      py::arg("spec"), py::arg("y"), py::arg("restriction") = "none");
  m.def(
      "fit_mle",
      [](const ModelSpec& proto, const Eigen::MatrixXd& y, const std::string& restriction, int starts,
         std::uint64_t seed) {
        FitConfig cfg;
        cfg.restriction = restriction_from_string(restriction);
        cfg.likelihood.restriction = cfg.restriction;
        cfg.starts = starts;
        cfg.seed = seed;
        const auto f = fit_mle(proto, to_binary(y), cfg);
        py::dict d;
        d["labels"] = f.layout.labels;
        d["theta"] = f.theta;
        d["std_errors"] = f.std_errors;
        d["loglik"] = f.loglik;
        d["converged"] = f.converged;
        d["fisher_ok"] = f.fisher_ok;
        d["clip_count"] = f.clip_count;
        d["spec"] = f.spec;
        return d;
      },
      py::arg("prototype"), py::arg("y"), py::arg("restriction") = "none", py::arg("starts") = 5,
      py::arg("seed") = 0);
  m.def(
      "forecast_one_step",
      [](const ModelSpec& s, const Eigen::MatrixXd& y, int start) { return forecast_one_step(s, to_binary(y), start); },
      py::arg("spec"), py::arg("y"), py::arg("start"));
  m.def("mse", [](const Eigen::MatrixXd& f, const Eigen::MatrixXd& y) { return mse_eval(f, to_binary(y)).pooled; },
        py::arg("forecasts"), py::arg("realized"));

  m.def("bernoulli_sum_pmf", [](const std::vector<double>& q) { return bernoulli_sum_pmf(q); }, py::arg("q"));
  m.def("poisson_tv_distance", [](const std::vector<double>& q) { return poisson_tv_distance(q); }, py::arg("q"));
  m.def("rare_event_spec",
        [](int n, double c, double a, double beta, double gamma, double kappa) {
          RareEventScaling s;
          s.c = c;
          s.a = a;
          s.beta = beta;
          s.gamma = gamma;
          s.kappa = kappa;
          return make_rare_event_spec(s, n);
        },
        py::arg("n"), py::arg("c") = 0.25, py::arg("a") = 0.5, py::arg("beta") = 0.6, py::arg("gamma") = 0.2,
        py::arg("kappa") = 1.0);

  m.def(
      "filter_lambda",
      [](double c, double g, double b, const std::vector<std::int64_t>& x, double lambda0) {
        return filter_lambda(poisson_params(c, g, b), x, lambda0);
      },
      py::arg("c_bar"), py::arg("gamma_bar"), py::arg("beta"), py::arg("x"), py::arg("lambda0"));
  m.def(
      "simulate_poisson",
      [](double c, double g, double b, int horizon, std::uint64_t seed) {
        const auto s = simulate_poisson_ar(poisson_params(c, g, b), horizon, seed);
        return py::make_tuple(s.x, s.lambda);
      },
      py::arg("c_bar"), py::arg("gamma_bar"), py::arg("beta"), py::arg("horizon"), py::arg("seed") = 0);
  m.def(
      "fit_poisson",
      [](const std::vector<std::int64_t>& x, bool intercept_only, std::uint64_t seed) {
        PoissonFitConfig cfg;
        cfg.intercept_only = intercept_only;
        cfg.seed = seed;
        const auto f = fit_poisson_mle(x, cfg);
        py::dict d;
        d["c_bar"] = f.params.c_bar;
        d["gamma_bar"] = f.params.gamma_bar;
        d["beta"] = f.params.beta;
        d["std_errors"] = f.std_errors;
        d["loglik"] = f.loglik;
        d["converged"] = f.converged;
        return d;
      },
      py::arg("x"), py::arg("intercept_only") = false, py::arg("seed") = 0);
  m.def(
      "calibrate_binary_from_poisson",
      [](double c, double g, double b, int n) { return calibrate_binary_from_poisson(poisson_params(c, g, b), n); },
      py::arg("c_bar"), py::arg("gamma_bar"), py::arg("beta"), py::arg("n_series"));

  m.def(
      "threshold_binary",
      [](const Eigen::MatrixXd& residuals, double level, int t_est) {
        const auto p = threshold_binary(residuals, level, t_est);
        return py::make_tuple(Eigen::MatrixXd(p.y.cast<double>()), p.thresholds);
      },
      py::arg("residuals"), py::arg("level"), py::arg("t_est"));
}
