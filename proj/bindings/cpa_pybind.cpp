#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cpa/aot.hpp"
#include "cpa/baselines.hpp"
#include "cpa/bench.hpp"
#include "cpa/pi.hpp"
#include "cpa/sic.hpp"

namespace py = pybind11;
using namespace cpa;

namespace {

py::dict result_to_dict(const DecodingResult& res) {
  py::dict d;
  d["trial"] = res.trial;
  d["gamma"] = res.gamma;
  d["iterations"] = res.iterations;
  d["decoded_count"] = res.decoded_count;
  d["active_count"] = res.active_count;
  d["p_d_active"] = res.p_d_active();
  d["decoded_users"] = res.decoded_users;
  d["degree_tests"] = res.degree_tests;
  d["degree_passes"] = res.degree_passes;
  return d;
}

py::dict row_to_dict(const ReportRow& r) {
  py::dict d;
  d["scheme"] = r.scheme;
  d["M"] = r.M;
  d["tau"] = r.tau;
  d["alpha"] = r.alpha;
  d["beta"] = r.beta;
  d["R"] = r.R;
  d["p_d"] = r.p_d;
  d["gamma"] = r.gamma;
  d["gamma_stderr"] = r.gamma_stderr;
  d["backend"] = r.backend;
  d["normalization_mode"] = r.normalization_mode;
  d["seed"] = r.seed;
  return d;
}

}  // namespace

PYBIND11_MODULE(cpa_py, m) {
  m.doc() = "coded pilot random access: simulation and density-evolution analysis";

  py::enum_<SignalMode>(m, "SignalMode")
      .value("full", SignalMode::Full)
      .value("virtual_", SignalMode::Virtual)
      .value("orthogonal", SignalMode::Orthogonal);

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_readwrite("K", &SystemConfig::K)
      .def_readwrite("M", &SystemConfig::M)
      .def_readwrite("L", &SystemConfig::L)
      .def_readwrite("tau", &SystemConfig::tau)
      .def_readwrite("sigma2", &SystemConfig::sigma2)
      .def_readwrite("R", &SystemConfig::R)
      .def_readwrite("b", &SystemConfig::b)
      .def_readwrite("p_a", &SystemConfig::p_a)
      .def_readwrite("Delta", &SystemConfig::Delta)
      .def_readwrite("seed", &SystemConfig::seed)
      .def_readwrite("mode", &SystemConfig::mode)
      .def_readwrite("margin_db", &SystemConfig::margin_db)
      .def_property_readonly("D", &SystemConfig::D)
      .def("alpha", &SystemConfig::alpha)
      .def("beta", &SystemConfig::beta)
      .def("set_alpha_beta", &SystemConfig::set_alpha_beta)
      .def("validate", &SystemConfig::validate)
      .def("sinr_threshold", &SystemConfig::sinr_threshold)
      .def("__repr__", [](const SystemConfig& c) {
        return "SystemConfig(K=" + std::to_string(c.K) + ", M=" + std::to_string(c.M) +
               ", tau=" + std::to_string(c.tau) + ", Delta=" + std::to_string(c.Delta) + ")";
      });

  m.def("load_config", &load_config);
  m.def("save_config", &save_config);

  m.def(
      "run_trial",
      [](const SystemConfig& cfg, std::uint64_t trial, bool enable_sic) {
        TrialOptions opts;
        opts.enable_sic = enable_sic;
        return result_to_dict(run_trial(cfg, trial, opts));
      },
      py::arg("cfg"), py::arg("trial") = 0, py::arg("enable_sic") = true);

  m.def(
      "aot_evaluate",
      [](double alpha, double beta, const std::vector<double>& pi_values) {
        auto [Psi, Lambda] = make_poisson_specs(alpha, beta);
        PiTable pi;
        pi.values = pi_values.empty() ? std::vector<double>{1.0, 1.0} : pi_values;
        const AotEvaluation ev = aot_evaluate(Psi, Lambda, pi);
        py::dict d;
        d["p_d_active"] = ev.p_d_active;
        d["p_d_include_all"] = ev.p_d_include_all;
        d["q_inf"] = ev.fixpoint.q_inf;
        d["iterations"] = ev.fixpoint.iterations;
        d["converged"] = ev.fixpoint.converged;
        d["q_trace"] = ev.fixpoint.q_trace;
        return d;
      },
      py::arg("alpha"), py::arg("beta"), py::arg("pi_values") = std::vector<double>{},
      "Fixed-point decode probability for Poisson(alpha)/Poisson(beta) degree specs; "
      "pi_values[j] is the degree-j resource decode probability (index 0 ignored).");

  m.def("expected_throughput",
        [](double p_d, double alpha, double R, int L, int tau, const std::string& norm) {
          return expected_throughput(p_d, alpha, R, L, tau, normalization_from_string(norm));
        },
        py::arg("p_d"), py::arg("alpha"), py::arg("R"), py::arg("L"), py::arg("tau"),
        py::arg("normalization") = "eq5");

  m.def(
      "pi_micro",
      [](int degree, const SystemConfig& cfg, std::uint64_t trials) {
        const PiEstimate e = pi_micro(degree, cfg, trials);
        py::dict d;
        d["degree"] = e.degree;
        d["value"] = e.value;
        d["stderr"] = e.se;
        d["trials"] = e.trials;
        return d;
      },
      py::arg("degree"), py::arg("cfg"), py::arg("trials") = 10000);

  m.def(
      "pi_micro_table",
      [](const SystemConfig& cfg, std::uint64_t trials, const std::string& cache_dir) {
        const auto tables = pi_micro_tables(micro_params(cfg, trials),
                                            {{cfg.tau, cfg.beta(), cfg.R, -1.0, -1}}, cache_dir);
        py::dict d;
        d["values"] = tables[0].table.values;
        d["stderr"] = tables[0].se;
        d["trials"] = tables[0].trials;
        return d;
      },
      py::arg("cfg"), py::arg("trials") = 10000, py::arg("cache_dir") = "");

  m.def("aloha_optimal_pa", &aloha_optimal_pa);
  m.def("aloha_throughput", &aloha_throughput, py::arg("cfg"), py::arg("pi1"));
  m.def("smm_throughput", &smm_throughput, py::arg("cfg"), py::arg("pi1"));
  m.def("downlink_delay", [](const SystemConfig& cfg) {
    const DelayModel dm = downlink_delay(cfg);
    py::dict d;
    d["p_eff"] = dm.p_eff;
    d["mean"] = dm.mean();
    return d;
  });
  m.def("simulate_delay_mean", &simulate_delay_mean, py::arg("cfg"), py::arg("trials"));

  m.def(
      "optimize",
      [](const SystemConfig& base, const std::vector<double>& alphas,
         const std::vector<double>& betas, const std::vector<int>& taus,
         const std::string& backend, std::uint64_t trials, std::uint64_t pi_trials,
         const std::string& pi_cache, const std::string& norm, int threads) {
        SweepSpec spec;
        spec.base = base;
        if (!alphas.empty()) spec.alphas = alphas;
        if (!betas.empty()) spec.betas = betas;
        if (!taus.empty()) spec.taus = taus;
        spec.backend = backend;
        spec.trials = trials;
        spec.pi_trials = pi_trials;
        spec.pi_cache = pi_cache;
        spec.norm = normalization_from_string(norm);
        spec.threads = threads;
        return row_to_dict(optimize(spec).best);
      },
      py::arg("base"), py::arg("alphas") = std::vector<double>{},
      py::arg("betas") = std::vector<double>{}, py::arg("taus") = std::vector<int>{},
      py::arg("backend") = "aot", py::arg("trials") = 16, py::arg("pi_trials") = 10000,
      py::arg("pi_cache") = "", py::arg("normalization") = "eq5", py::arg("threads") = 1);
}
