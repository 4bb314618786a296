#include "cpa/pi.hpp"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "cpa/receiver.hpp"
#include "cpa/rng.hpp"
#include "cpa/sic.hpp"

namespace cpa {

namespace {

double threshold_for(const PiMicroParams& params, double R) {
  return (std::exp2(static_cast<double>(params.b) * R) - 1.0) *
         std::pow(10.0, params.margin_db / 10.0);
}

// Estimates are only needed where the collision-size ensemble has mass;
// 12 sigma past the mean bounds the ignored tail below 1e-12.
int default_max_degree(double beta) {
  const double j = std::ceil(beta + 12.0 * std::sqrt(std::max(beta, 1.0)));
  return std::clamp(static_cast<int>(j), 16, 64);
}

// Estimates below this are indistinguishable from zero at the default trial
// count; two consecutive such degrees end the sweep for that request.
constexpr double kCollapseLevel = 5e-4;

struct Member {
  double threshold;
  std::size_t request;
};

struct Group {
  int tau;
  double load;        // mean (or exact count) of cross-pilot interferers
  bool fixed_load;
  std::uint64_t cross_seed;
  std::vector<Member> members;
};

struct RequestState {
  int max_degree;
  std::vector<double> values{0.0};  // index 0 padding
  std::vector<double> se{0.0};
  std::vector<std::uint64_t> trials{0};
  int below_count = 0;
  bool done = false;
};

// All randomness at degree j flows from two stream families:
//   components: (node_seed, PiNode, j)    -- channels, pilot noise, power
//                                            estimates; independent of every
//                                            request parameter except M
//   cross:      (cross_seed, PiCross, j)  -- per-group interferer draws
// so any subset of requests reproduces the exact numbers of the full batch.
void run_degree(int j, const PiMicroParams& params, std::vector<Group>& groups,
                std::vector<RequestState>& reqs, std::vector<std::uint64_t>& passes) {
  const auto trials = params.trials;
  const int M = params.M;

  std::vector<std::vector<double>> cross(groups.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    auto& g = groups[gi];
    bool any = false;
    for (const auto& m : g.members)
      if (!reqs[m.request].done && j <= reqs[m.request].max_degree) any = true;
    if (!any) continue;
    cross[gi].resize(trials);
    auto rng = rng_stream(g.cross_seed, Stream::PiCross, static_cast<std::uint64_t>(j), 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
      const std::uint64_t n = g.fixed_load ? static_cast<std::uint64_t>(std::llround(g.load))
                                           : rng.poisson(g.load);
      cross[gi][t] = n ? rng.gamma(static_cast<double>(n)) : 0.0;
    }
  }

  std::fill(passes.begin(), passes.end(), 0);
  auto rng = rng_stream(mix64(params.seed, static_cast<std::uint64_t>(params.M)), Stream::PiNode,
                        static_cast<std::uint64_t>(j), 0);
  MatC H(M, j);
  VecC z0(M), hsum(M);
  RowC u(j), v(j);
  std::vector<double> ghat(static_cast<std::size_t>(j) - 1);
  for (std::uint64_t t = 0; t < trials; ++t) {
    fill_cnormal(H, rng);
    for (int r = 0; r < M; ++r) z0(r) = rng.cnormal();
    for (auto& gv : ghat) gv = rng.gamma(static_cast<double>(M));
    hsum = H.rowwise().sum();
    u.noalias() = hsum.adjoint() * H;
    v.noalias() = z0.adjoint() * H;
    const double S2 = hsum.squaredNorm();
    const double w0r = (hsum.adjoint() * z0)(0, 0).real();
    const double n0 = z0.squaredNorm();

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      if (cross[gi].empty()) continue;
      const auto& g = groups[gi];
      const double s = std::sqrt(params.sigma2 / static_cast<double>(g.tau));
      const double phi2 = S2 + 2.0 * s * w0r + s * s * n0;
      double den = (cross[gi][t] + params.sigma2) * phi2;
      for (int i = 0; i + 1 < j; ++i) {
        const cd ai = u(i) + s * v(i);
        den += std::norm(ai - cd(ghat[static_cast<std::size_t>(i)], 0.0));
      }
      const double num = std::norm(cd(u(j - 1) + s * v(j - 1)));
      const double sinr = den <= 0.0 ? kInfiniteSinr : num / den;
      for (const auto& m : g.members) {
        if (reqs[m.request].done || j > reqs[m.request].max_degree) continue;
        if (sinr >= m.threshold) ++passes[m.request];
      }
    }
  }
}

std::vector<PiTableEstimate> compute_tables(const PiMicroParams& params,
                                            const std::vector<PiRequest>& requests) {
  std::vector<Group> groups;
  std::vector<RequestState> reqs(requests.size());
  const std::uint64_t node_seed = mix64(params.seed, static_cast<std::uint64_t>(params.M));
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const auto& rq = requests[r];
    if (rq.tau < 1) throw std::invalid_argument("PiRequest: tau must be >= 1");
    const bool fixed = rq.fixed_cross >= 0.0;
    const double load = fixed ? rq.fixed_cross : (static_cast<double>(rq.tau) - 1.0) * rq.beta;
    reqs[r].max_degree = rq.max_degree > 0 ? rq.max_degree : default_max_degree(rq.beta);
    const std::uint64_t cross_seed =
        mix64(mix64(node_seed, fold_bits(load)), fixed ? 1u : 0u);
    Group* grp = nullptr;
    for (auto& g : groups)
      if (g.tau == rq.tau && g.load == load && g.fixed_load == fixed) grp = &g;
    if (!grp) {
      groups.push_back({rq.tau, load, fixed, cross_seed, {}});
      grp = &groups.back();
    }
    grp->members.push_back({threshold_for(params, rq.R), r});
  }

  int global_max = 0;
  for (const auto& st : reqs) global_max = std::max(global_max, st.max_degree);
  std::vector<std::uint64_t> passes(requests.size());
  for (int j = 1; j <= global_max; ++j) {
    bool any = false;
    for (const auto& st : reqs)
      if (!st.done && j <= st.max_degree) any = true;
    if (!any) break;
    run_degree(j, params, groups, reqs, passes);
    for (std::size_t r = 0; r < reqs.size(); ++r) {
      auto& st = reqs[r];
      if (st.done || j > st.max_degree) continue;
      const double val = static_cast<double>(passes[r]) / static_cast<double>(params.trials);
      st.values.push_back(val);
      st.se.push_back(std::sqrt(val * (1.0 - val) / static_cast<double>(params.trials)));
      st.trials.push_back(params.trials);
      st.below_count = (val < kCollapseLevel) ? st.below_count + 1 : 0;
      if (st.below_count >= 2 || j == st.max_degree) st.done = true;
    }
  }

  std::vector<PiTableEstimate> out(requests.size());
  for (std::size_t r = 0; r < reqs.size(); ++r) {
    out[r].table.values = std::move(reqs[r].values);
    out[r].se = std::move(reqs[r].se);
    out[r].trials = std::move(reqs[r].trials);
    out[r].mode = "micro";
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string pi_cache_key(const PiMicroParams& params, const PiRequest& req) {
  std::ostringstream os;
  os << "pi_M" << params.M << "_s2" << fmt_double(params.sigma2) << "_b" << params.b;
  if (params.margin_db != 0.0) os << "_mg" << fmt_double(params.margin_db);
  os << "_tau" << req.tau << "_beta" << fmt_double(req.beta) << "_R" << fmt_double(req.R);
  if (req.fixed_cross >= 0.0) os << "_fc" << fmt_double(req.fixed_cross);
  if (req.max_degree > 0) os << "_j" << req.max_degree;
  os << "_t" << params.trials << "_seed" << params.seed << "_micro";
  return os.str();
}

std::vector<PiTableEstimate> pi_micro_tables(const PiMicroParams& params,
                                             const std::vector<PiRequest>& requests,
                                             const std::string& cache_dir) {
  std::vector<PiTableEstimate> out(requests.size());
  std::vector<std::size_t> misses;
  namespace fs = std::filesystem;
  for (std::size_t r = 0; r < requests.size(); ++r) {
    if (!cache_dir.empty()) {
      const fs::path p = fs::path(cache_dir) / (pi_cache_key(params, requests[r]) + ".csv");
      if (fs::exists(p)) {
        out[r] = read_pi_csv(p.string());
        continue;
      }
    }
    misses.push_back(r);
  }
  if (misses.empty()) return out;
  std::vector<PiRequest> todo;
  for (auto r : misses) todo.push_back(requests[r]);
  auto computed = compute_tables(params, todo);
  for (std::size_t i = 0; i < misses.size(); ++i) {
    out[misses[i]] = std::move(computed[i]);
    if (!cache_dir.empty()) {
      fs::create_directories(cache_dir);
      const fs::path p =
          fs::path(cache_dir) / (pi_cache_key(params, requests[misses[i]]) + ".csv");
      // write-then-rename so concurrent processes sharing the cache never
      // observe a half-written table
      const fs::path tmp = p.string() + ".tmp" + std::to_string(::getpid());
      write_pi_csv(tmp.string(), out[misses[i]]);
      fs::rename(tmp, p);
    }
  }
  return out;
}

PiEstimate pi_micro(int degree, const SystemConfig& cfg, std::uint64_t trials) {
  if (degree < 1) throw std::invalid_argument("pi_micro: degree must be >= 1");
  const PiMicroParams params = micro_params(cfg, trials);
  const PiRequest req{cfg.tau, cfg.beta(), cfg.R, -1.0, degree};
  std::vector<Group> groups;
  std::vector<RequestState> reqs(1);
  reqs[0].max_degree = degree;
  const std::uint64_t node_seed = mix64(params.seed, static_cast<std::uint64_t>(params.M));
  const double load = (static_cast<double>(req.tau) - 1.0) * req.beta;
  groups.push_back({req.tau, load, false, mix64(mix64(node_seed, fold_bits(load)), 0u),
                    {{threshold_for(params, req.R), 0}}});
  std::vector<std::uint64_t> passes(1);
  run_degree(degree, params, groups, reqs, passes);
  const double val = static_cast<double>(passes[0]) / static_cast<double>(trials);
  return {degree, val, std::sqrt(val * (1.0 - val) / static_cast<double>(trials)), trials};
}

PiTableEstimate pi_frame(const SystemConfig& cfg, std::uint64_t trials) {
  std::vector<std::uint64_t> tests, hits;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const DecodingResult res = run_trial(cfg, t);
    if (res.degree_tests.size() > tests.size()) {
      tests.resize(res.degree_tests.size(), 0);
      hits.resize(res.degree_tests.size(), 0);
    }
    for (std::size_t d = 0; d < res.degree_tests.size(); ++d) {
      tests[d] += res.degree_tests[d];
      hits[d] += res.degree_passes[d];
    }
  }
  PiTableEstimate est;
  est.mode = "frame";
  est.table.values.assign(tests.size(), std::numeric_limits<double>::quiet_NaN());
  est.se.assign(tests.size(), 0.0);
  est.trials.assign(tests.size(), 0);
  if (!tests.empty()) est.table.values[0] = 0.0;
  for (std::size_t d = 1; d < tests.size(); ++d) {
    if (tests[d] == 0) continue;
    const double v = static_cast<double>(hits[d]) / static_cast<double>(tests[d]);
    est.table.values[d] = v;
    est.se[d] = std::sqrt(v * (1.0 - v) / static_cast<double>(tests[d]));
    est.trials[d] = tests[d];
  }
  return est;
}

void write_pi_csv(const std::string& path, const PiTableEstimate& est) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open pi table for writing: " + path);
  out.precision(17);
  out << "degree,estimate,stderr,trials,mode\n";
  for (std::size_t d = 1; d < est.table.values.size(); ++d) {
    if (est.mode == "frame" && est.trials[d] == 0) continue;
    out << d << ',' << est.table.values[d] << ',' << est.se[d] << ',' << est.trials[d] << ','
        << est.mode << '\n';
  }
}

PiTableEstimate read_pi_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pi table: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("degree,", 0) != 0)
    throw std::runtime_error("bad pi table header in " + path);
  PiTableEstimate est;
  est.table.values.assign(1, 0.0);
  est.se.assign(1, 0.0);
  est.trials.assign(1, 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::getline(ls, tok, ',');
    const auto d = static_cast<std::size_t>(std::stoul(tok));
    std::getline(ls, tok, ',');
    const double val = std::stod(tok);
    std::getline(ls, tok, ',');
    const double se = std::stod(tok);
    std::getline(ls, tok, ',');
    const auto tr = static_cast<std::uint64_t>(std::stoull(tok));
    std::getline(ls, tok, ',');
    if (est.table.values.size() <= d) {
      est.table.values.resize(d + 1, std::numeric_limits<double>::quiet_NaN());
      est.se.resize(d + 1, 0.0);
      est.trials.resize(d + 1, 0);
    }
    est.table.values[d] = val;
    est.se[d] = se;
    est.trials[d] = tr;
    est.mode = tok;
  }
  return est;
}

}  // namespace cpa
