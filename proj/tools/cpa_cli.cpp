#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpa/baselines.hpp"
#include "cpa/bench.hpp"
#include "cpa/pi.hpp"
#include "cpa/sic.hpp"

namespace {

// "a,b,c" or "start:step:end"
std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    double start, step, end;
    if (std::sscanf(s.c_str(), "%lf:%lf:%lf", &start, &step, &end) != 3 || step <= 0)
      throw CLI::ValidationError("grid", "expected start:step:end with step > 0");
    for (double v = start; v <= end + 1e-12; v += step) out.push_back(v);
    return out;
  }
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto comma = s.find(',', pos);
    const auto tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    out.push_back(std::stod(tok));
    pos = comma == std::string::npos ? s.size() : comma + 1;
  }
  if (out.empty()) throw CLI::ValidationError("grid", "empty grid");
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_grid(s)) out.push_back(static_cast<int>(std::llround(v)));
  return out;
}

void print_rows(const cpa::ThroughputReport& rep) {
  std::printf("%-6s %5s %4s %7s %6s %5s %9s %10s %10s %4s %6s\n", "scheme", "M", "tau", "alpha",
              "beta", "R", "p_d", "gamma", "stderr", "bknd", "norm");
  for (const auto& r : rep.rows)
    std::printf("%-6s %5d %4d %7.3f %6.3f %5.2f %9.5f %10.5f %10.5f %4s %6s\n", r.scheme.c_str(),
                r.M, r.tau, r.alpha, r.beta, r.R, r.p_d, r.gamma, r.gamma_stderr,
                r.backend.c_str(), r.normalization_mode.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded random-access simulator and analyzer for massive-antenna uplinks"};
  app.require_subcommand(1);

  std::string config_path, pi_cache, norm_str = "eq5", mode_str;
  std::uint64_t trials = 16, pi_trials = 10000;
  int threads = 1;
  cpa::SystemConfig cfg;
  std::optional<double> opt_alpha, opt_beta;

  app.add_option("--config", config_path, "JSON config file; flags override its keys");
  app.add_option("--seed", cfg.seed, "base RNG seed");
  app.add_option("--trials", trials, "simulation frames per evaluation point");
  app.add_option("--threads", threads, "worker threads for trial loops");
  app.add_option("--normalization", norm_str,
                 "throughput unit: eq5 = per channel use, sec4 = per-slot data section")
      ->check(CLI::IsMember({"eq5", "sec4"}));
  app.add_option("--pi-cache", pi_cache, "directory for cached decode-probability tables");
  app.add_option("--pi-trials", pi_trials, "Monte Carlo trials per decode-probability degree");
  auto* oK = app.add_option("--K", cfg.K, "user population");
  auto* oM = app.add_option("--M", cfg.M, "base-station antennas");
  auto* oL = app.add_option("--L", cfg.L, "channel uses per slot");
  auto* oTau = app.add_option("--tau", cfg.tau, "pilot count / pilot length");
  auto* oSig = app.add_option("--sigma2", cfg.sigma2, "noise variance");
  auto* oR = app.add_option("--R", cfg.R, "code rate");
  auto* oB = app.add_option("--b", cfg.b, "bits per data symbol");
  auto* oPa = app.add_option("--p-a", cfg.p_a, "per-slot activation probability");
  auto* oDelta = app.add_option("--Delta", cfg.Delta, "slots per frame");
  auto* oMargin = app.add_option("--margin-db", cfg.margin_db, "extra decode margin in dB");
  app.add_option("--alpha", [&](const CLI::results_t& r) {
        opt_alpha = std::stod(r[0]);
        return true;
      }, "target mean activations per user (sets Delta)");
  app.add_option("--beta", [&](const CLI::results_t& r) {
        opt_beta = std::stod(r[0]);
        return true;
      }, "target mean colliders per resource (sets p_a)");
  app.add_option("--mode", mode_str, "signal backend: full, virtual, orthogonal")
      ->check(CLI::IsMember({"full", "virtual", "orthogonal"}));

  auto finalize_cfg = [&] {
    if (!config_path.empty()) {
      cpa::SystemConfig from_file = cpa::load_config(config_path);
      // explicit flags win over file keys
      if (!*oK) cfg.K = from_file.K;
      if (!*oM) cfg.M = from_file.M;
      if (!*oL) cfg.L = from_file.L;
      if (!*oTau) cfg.tau = from_file.tau;
      if (!*oSig) cfg.sigma2 = from_file.sigma2;
      if (!*oR) cfg.R = from_file.R;
      if (!*oB) cfg.b = from_file.b;
      if (!*oPa) cfg.p_a = from_file.p_a;
      if (!*oDelta) cfg.Delta = from_file.Delta;
      if (!*oMargin) cfg.margin_db = from_file.margin_db;
      if (!app.count("--seed")) cfg.seed = from_file.seed;
      if (mode_str.empty()) cfg.mode = from_file.mode;
    }
    if (!mode_str.empty()) cfg.mode = cpa::signal_mode_from_string(mode_str);
    const double a = opt_alpha.value_or(cfg.alpha());
    const double b2 = opt_beta.value_or(cfg.beta());
    if (opt_alpha || opt_beta) cfg.set_alpha_beta(a, b2);
    cfg.validate();
  };

  auto make_spec = [&] {
    cpa::SweepSpec spec;
    spec.base = cfg;
    spec.trials = trials;
    spec.pi_trials = pi_trials;
    spec.pi_cache = pi_cache;
    spec.norm = cpa::normalization_from_string(norm_str);
    spec.threads = threads;
    return spec;
  };

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "run Monte Carlo frames at one operating point");
  std::string sim_out, sim_trace;
  bool sim_no_sic = false;
  sim->add_option("--out", sim_out, "write a one-row report CSV here");
  sim->add_option("--trace", sim_trace, "write per-decode trace CSV here");
  sim->add_flag("--no-sic", sim_no_sic, "disable cancellation (collision-free decoding only)");
  sim->callback([&] {
    finalize_cfg();
    cpa::TrialOptions opts;
    opts.enable_sic = !sim_no_sic;
    opts.capture_trace = !sim_trace.empty();
    std::vector<double> gammas(trials), pds(trials);
    std::vector<cpa::TraceRow> trace;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const auto res = cpa::run_trial(cfg, t, opts);
      gammas[t] = res.gamma;
      pds[t] = res.p_d_active();
      trace.insert(trace.end(), res.trace.begin(), res.trace.end());
    }
    double g = 0, pd = 0;
    for (std::uint64_t t = 0; t < trials; ++t) { g += gammas[t]; pd += pds[t]; }
    g /= trials; pd /= trials;
    double var = 0;
    for (std::uint64_t t = 0; t < trials; ++t) var += (gammas[t] - g) * (gammas[t] - g);
    const double se = trials > 1 ? std::sqrt(var / (trials - 1) / trials) : 0.0;
    const double scale = norm_str == "sec4" ? double(cfg.L) / cfg.tau : 1.0;
    cpa::ThroughputReport rep;
    rep.rows.push_back({sim_no_sic ? "aloha" : "cpa", cfg.M, cfg.tau, cfg.alpha(), cfg.beta(),
                        cfg.R, pd, g * scale, se * scale, "sim", norm_str, cfg.seed});
    print_rows(rep);
    if (!sim_out.empty()) cpa::emit_csv(rep, sim_out);
    if (!sim_trace.empty()) cpa::write_trace_csv(sim_trace, trace);
  });

  // ---- analyze ----
  auto* ana = app.add_subcommand("analyze", "density-evolution prediction at one operating point");
  std::string ana_out, ana_pi_table;
  bool ana_ideal_pi = false;
  ana->add_option("--out", ana_out, "write a one-row report CSV here");
  ana->add_option("--pi-table", ana_pi_table, "load the decode-probability table from this CSV");
  ana->add_flag("--ideal-pi", ana_ideal_pi, "assume every residual singleton decodes");
  ana->callback([&] {
    finalize_cfg();
    cpa::PiTable pi;
    if (ana_ideal_pi) {
      pi = cpa::PiTable::ideal();
    } else if (!ana_pi_table.empty()) {
      pi = cpa::read_pi_csv(ana_pi_table).table;
    } else {
      const auto tables = cpa::pi_micro_tables(cpa::micro_params(cfg, pi_trials),
                                               {{cfg.tau, cfg.beta(), cfg.R, -1.0, -1}}, pi_cache);
      pi = tables[0].table;
    }
    auto [Psi, Lambda] = cpa::make_poisson_specs(cfg.alpha(), cfg.beta());
    const auto ev = cpa::aot_evaluate(Psi, Lambda, pi);
    const auto norm = cpa::normalization_from_string(norm_str);
    const double gamma =
        cpa::expected_throughput(ev.p_d_include_all, cfg.alpha(), cfg.R, cfg.L, cfg.tau, norm);
    std::printf("alpha=%.4f beta=%.4f tau=%d M=%d R=%.2f\n", cfg.alpha(), cfg.beta(), cfg.tau,
                cfg.M, cfg.R);
    std::printf("p_d (active users)  = %.6f\n", ev.p_d_active);
    std::printf("p_d (all users)     = %.6f\n", ev.p_d_include_all);
    std::printf("gamma (%s)         = %.6f\n", norm_str.c_str(), gamma);
    std::printf("fixpoint: q=%.3e after %d iterations, converged=%d\n", ev.fixpoint.q_inf,
                ev.fixpoint.iterations, ev.fixpoint.converged ? 1 : 0);
    if (!ana_out.empty()) {
      cpa::ThroughputReport rep;
      rep.rows.push_back({"cpa", cfg.M, cfg.tau, cfg.alpha(), cfg.beta(), cfg.R, ev.p_d_active,
                          gamma, 0.0, "aot", norm_str, cfg.seed});
      cpa::emit_csv(rep, ana_out);
    }
  });

  // ---- pi ----
  auto* pic = app.add_subcommand("pi", "estimate per-degree decode probabilities");
  std::string pi_out, pi_mode = "micro";
  int pi_degree = 0;
  pic->add_option("--out", pi_out, "write the table CSV here");
  pic->add_option("--pi-mode", pi_mode, "micro: isolated collisions; frame: tallied in situ")
      ->check(CLI::IsMember({"micro", "frame"}));
  pic->add_option("--degree", pi_degree, "single degree to estimate (0 = full table)");
  pic->callback([&] {
    finalize_cfg();
    cpa::PiTableEstimate est;
    if (pi_mode == "frame") {
      est = cpa::pi_frame(cfg, trials);
    } else if (pi_degree > 0) {
      const auto e = cpa::pi_micro(pi_degree, cfg, pi_trials);
      est.mode = "micro";
      est.table.values.assign(static_cast<std::size_t>(pi_degree) + 1, 0.0);
      est.se.assign(static_cast<std::size_t>(pi_degree) + 1, 0.0);
      est.trials.assign(static_cast<std::size_t>(pi_degree) + 1, 0);
      est.table.values[static_cast<std::size_t>(pi_degree)] = e.value;
      est.se[static_cast<std::size_t>(pi_degree)] = e.se;
      est.trials[static_cast<std::size_t>(pi_degree)] = e.trials;
    } else {
      est = cpa::pi_micro_tables(cpa::micro_params(cfg, pi_trials),
                                 {{cfg.tau, cfg.beta(), cfg.R, -1.0, -1}}, pi_cache)[0];
    }
    std::printf("degree  estimate  stderr     trials  (%s)\n", est.mode.c_str());
    for (std::size_t d = 1; d < est.table.values.size(); ++d) {
      if (est.mode == "frame" && est.trials[d] == 0) continue;
      std::printf("%6zu  %8.5f  %8.5f  %7llu\n", d, est.table.values[d], est.se[d],
                  static_cast<unsigned long long>(est.trials[d]));
    }
    if (!pi_out.empty()) cpa::write_pi_csv(pi_out, est);
  });

  // ---- optimize ----
  auto* opt = app.add_subcommand("optimize", "grid-search the operating point");
  std::string opt_out, opt_backend = "aot";
  std::string opt_alphas, opt_betas, opt_taus;
  opt->add_option("--backend", opt_backend, "aot or sim")->check(CLI::IsMember({"aot", "sim"}));
  opt->add_option("--alphas", opt_alphas, "alpha grid: list or start:step:end");
  opt->add_option("--betas", opt_betas, "beta grid: list or start:step:end");
  opt->add_option("--tau-list", opt_taus, "tau grid: comma list");
  opt->add_option("--out", opt_out, "write the full sweep surface CSV here");
  opt->callback([&] {
    finalize_cfg();
    auto spec = make_spec();
    spec.backend = opt_backend;
    if (!opt_alphas.empty()) spec.alphas = parse_grid(opt_alphas);
    if (!opt_betas.empty()) spec.betas = parse_grid(opt_betas);
    spec.taus = opt_taus.empty() ? std::vector<int>{cfg.tau} : parse_int_list(opt_taus);
    const auto res = cpa::optimize(spec);
    std::printf("best operating point:\n");
    cpa::ThroughputReport rep;
    rep.rows.push_back(res.best);
    print_rows(rep);
    if (!opt_out.empty()) cpa::emit_csv(res.surface, opt_out);
  });

  // ---- compare ----
  auto* cmp = app.add_subcommand("compare", "this protocol vs baselines at optimized points");
  std::string cmp_out, cmp_Ms = "400", cmp_Rs = "1.0", cmp_taus;
  cmp->add_option("--Ms", cmp_Ms, "antenna counts, comma list");
  cmp->add_option("--Rs", cmp_Rs, "code rates, comma list");
  cmp->add_option("--tau-list", cmp_taus, "tau grid for all schemes");
  cmp->add_option("--out", cmp_out, "write the comparison CSV here");
  cmp->callback([&] {
    finalize_cfg();
    auto spec = make_spec();
    spec.taus = cmp_taus.empty() ? cpa::SweepSpec::default_tau_grid() : parse_int_list(cmp_taus);
    const auto rep = cpa::compare_schemes(spec, parse_int_list(cmp_Ms), parse_grid(cmp_Rs));
    print_rows(rep);
    if (!cmp_out.empty()) cpa::emit_csv(rep, cmp_out);
  });

  // ---- fig ----
  auto* dly = app.add_subcommand("delay", "downlink access delay at the current operating point");
  std::uint64_t dly_draws = 0;
  dly->add_option("--draws", dly_draws, "also Monte Carlo the mean with this many user draws");
  dly->callback([&] {
    finalize_cfg();
    const cpa::DelayModel dm = cpa::downlink_delay(cfg);
    std::printf("p_eff (active and uncontested) = %.9f\n", dm.p_eff);
    std::printf("mean delay                     = %.4f slots\n", dm.mean());
    if (dly_draws > 0)
      std::printf("simulated mean (%llu draws)    = %.4f slots\n",
                  static_cast<unsigned long long>(dly_draws),
                  cpa::simulate_delay_mean(cfg, dly_draws));
  });

  auto* fig = app.add_subcommand("fig", "emit a canned figure dataset");
  int fig_n = 5;
  std::string fig_out = "figdata";
  fig->add_option("number", fig_n, "figure number (5-9)")->required()
      ->check(CLI::Range(5, 9));
  fig->add_option("--out", fig_out, "output directory");
  fig->callback([&] {
    finalize_cfg();
    cpa::fig_recipe(fig_n, make_spec(), fig_out);
    std::printf("wrote %s/fig%d.csv\n", fig_out.c_str(), fig_n);
  });

  // global flags (--alpha, --M, ...) may appear after the subcommand name
  for (auto* sc : app.get_subcommands(nullptr)) sc->fallthrough();

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
