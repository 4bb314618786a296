#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cpa/pi.hpp"
#include "cpa/receiver.hpp"

using namespace cpa;

namespace {

std::string fresh_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace

TEST_CASE("a lone pilot with no noise always decodes") {
  SystemConfig cfg;
  cfg.tau = 1;
  cfg.L = 8;
  cfg.sigma2 = 0.0;
  cfg.M = 8;
  cfg.p_a = 0.001;  // beta = 1 with K = 1000
  const PiEstimate est = pi_micro(1, cfg, 500);
  CHECK(est.value == 1.0);
  CHECK(est.se == 0.0);
  CHECK(est.trials == 500);
}

TEST_CASE("many antennas make singleton decoding near-certain") {
  SystemConfig cfg;  // defaults: M=400, tau=4, sigma2=0.1, beta=1, threshold 3
  const PiEstimate est = pi_micro(1, cfg, 4000);
  CHECK(est.value > 0.995);
}

TEST_CASE("channel hardening: more antennas raise deep-collision success") {
  SystemConfig small;
  small.M = 50;
  SystemConfig large;
  large.M = 400;
  const PiEstimate lo = pi_micro(4, small, 4000);
  const PiEstimate hi = pi_micro(4, large, 4000);
  CHECK(hi.value > lo.value);
}

TEST_CASE("deep-collision success is non-decreasing in the antenna count") {
  // j = 8 sits near the decodability edge at M = 64 and saturates by
  // M = 1024, so the ordering is informative, checked at 3 combined sigma.
  std::vector<PiEstimate> ests;
  for (int M : {64, 256, 1024}) {
    SystemConfig cfg;
    cfg.M = M;
    ests.push_back(pi_micro(8, cfg, 3000));
  }
  for (std::size_t i = 1; i < ests.size(); ++i) {
    const double slack = 3.0 * std::hypot(ests[i - 1].se, ests[i].se);
    CHECK(ests[i].value >= ests[i - 1].value - slack);
  }
  CHECK(ests.back().value > 0.99);
}

TEST_CASE("success degrades with collision depth") {
  // Cancellation residue accumulates with every peeled interferer, so the
  // per-degree decode probability cannot improve as collisions deepen
  // (up to Monte Carlo noise on near-certain estimates).
  SystemConfig cfg;  // M=400, sigma2=0.1, R=1, beta()=1
  PiRequest req;
  req.tau = cfg.tau;
  req.beta = cfg.beta();
  req.R = cfg.R;
  req.max_degree = 8;
  const auto tables = pi_micro_tables(micro_params(cfg, 10000), {req});
  REQUIRE(tables[0].table.values.size() >= 9);
  for (int j = 2; j <= 8; ++j) {
    const auto prev = tables[0].at(j - 1);
    const auto cur = tables[0].at(j);
    const double slack = 3.0 * std::hypot(prev.se, cur.se);
    CHECK(cur.value <= prev.value + slack);
  }
}

TEST_CASE("single-degree estimates are bit-identical to batch rows") {
  SystemConfig cfg;  // beta() == 1 at defaults
  const std::uint64_t trials = 3000;
  PiRequest req;
  req.tau = cfg.tau;
  req.beta = cfg.beta();
  req.R = cfg.R;
  req.max_degree = 6;
  const auto tables = pi_micro_tables(micro_params(cfg, trials), {req});
  REQUIRE(tables.size() == 1);
  REQUIRE(tables[0].table.values.size() >= 7);
  for (int j : {1, 3, 6}) {
    const PiEstimate single = pi_micro(j, cfg, trials);
    CHECK(single.value == tables[0].table.values[static_cast<std::size_t>(j)]);
    CHECK(single.se == tables[0].se[static_cast<std::size_t>(j)]);
  }
  // binomial standard error formula
  const auto e4 = tables[0].at(4);
  CHECK(e4.se == doctest::Approx(std::sqrt(e4.value * (1.0 - e4.value) / trials)).epsilon(1e-12));
}

TEST_CASE("gamma-mixed interference agrees with explicitly drawn interferers") {
  // Reference estimator: same isolated-collision model, but the cross-pilot
  // interferers are materialized as channel vectors and projected onto the
  // estimate, instead of using the conditional Gamma shortcut.
  const int M = 24, j = 2, tau = 3;
  const double beta = 1.5, sigma2 = 0.2, R = 0.5;
  const std::uint64_t trials = 4000;
  const double threshold = std::exp2(2.0 * R) - 1.0;
  const double s = std::sqrt(sigma2 / tau);

  Rng rng = rng_stream(123, Stream::Misc, 0, 0);
  std::uint64_t hits = 0;
  VecC h0(M), h1(M), z0(M), hl(M);
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (int m = 0; m < M; ++m) {
      h0(m) = rng.cnormal();
      h1(m) = rng.cnormal();
      z0(m) = rng.cnormal();
    }
    const VecC phi = h0 + h1 + s * z0;
    const double ghat = rng.gamma(M);
    const auto n_cross = rng.poisson((tau - 1) * beta);
    double cross2 = 0.0;
    for (std::uint64_t c = 0; c < n_cross; ++c) {
      for (int m = 0; m < M; ++m) hl(m) = rng.cnormal();
      cross2 += std::norm((phi.adjoint() * hl)(0, 0));
    }
    const cd a0 = (phi.adjoint() * h0)(0, 0);
    const cd a1 = (phi.adjoint() * h1)(0, 0);
    const double den = cross2 + phi.squaredNorm() * sigma2 + std::norm(a0 - cd(ghat, 0.0));
    const double sinr = den <= 0.0 ? kInfiniteSinr : std::norm(a1) / den;
    if (sinr >= threshold) ++hits;
  }
  const double ref = static_cast<double>(hits) / static_cast<double>(trials);
  const double ref_se = std::sqrt(ref * (1.0 - ref) / static_cast<double>(trials));

  SystemConfig cfg;
  cfg.M = M;
  cfg.tau = tau;
  cfg.L = 16;
  cfg.sigma2 = sigma2;
  cfg.R = R;
  cfg.K = 1000;
  cfg.p_a = beta * tau / 1000.0;
  const PiEstimate est = pi_micro(j, cfg, trials);
  const double gap = std::abs(est.value - ref);
  CHECK(gap < 4.0 * std::sqrt(ref_se * ref_se + est.se * est.se));
}

TEST_CASE("cache round trip reproduces the computed tables exactly") {
  const std::string dir = fresh_dir("cpa_pi_cache_test");
  SystemConfig cfg;
  cfg.M = 16;
  const PiMicroParams params = micro_params(cfg, 400);
  PiRequest r1;
  r1.beta = 1.0;
  r1.max_degree = 5;
  PiRequest r2;
  r2.beta = 2.0;
  r2.max_degree = 5;
  CHECK(pi_cache_key(params, r1) != pi_cache_key(params, r2));

  const auto first = pi_micro_tables(params, {r1, r2}, dir);
  CHECK(std::filesystem::exists(std::filesystem::path(dir) /
                                (pi_cache_key(params, r1) + ".csv")));
  const auto second = pi_micro_tables(params, {r1, r2}, dir);
  for (int i : {0, 1}) {
    REQUIRE(second[i].table.values.size() == first[i].table.values.size());
    for (std::size_t d = 1; d < first[i].table.values.size(); ++d) {
      CHECK(second[i].table.values[d] == first[i].table.values[d]);
      CHECK(second[i].se[d] == first[i].se[d]);
      CHECK(second[i].trials[d] == first[i].trials[d]);
    }
    CHECK(second[i].mode == "micro");
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("table files survive a write/read round trip") {
  const std::string dir = fresh_dir("cpa_pi_csv_test");
  PiTableEstimate est;
  est.mode = "micro";
  est.table.values = {0.0, 1.0, 0.625, 0.0078125};
  est.se = {0.0, 0.0, 0.1, 0.002};
  est.trials = {0, 100, 100, 100};
  const std::string path = dir + "/table.csv";
  write_pi_csv(path, est);
  const PiTableEstimate back = read_pi_csv(path);
  REQUIRE(back.table.values.size() == 4);
  for (std::size_t d = 1; d < 4; ++d) {
    CHECK(back.table.values[d] == est.table.values[d]);
    CHECK(back.se[d] == est.se[d]);
    CHECK(back.trials[d] == est.trials[d]);
  }
  CHECK(back.mode == "micro");
  CHECK_THROWS_AS(read_pi_csv(dir + "/missing.csv"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("hopeless operating points collapse the sweep early") {
  SystemConfig cfg;
  cfg.M = 2;
  cfg.sigma2 = 2.0;
  PiRequest req;
  req.tau = cfg.tau;
  req.beta = 1.0;
  req.R = cfg.R;
  req.max_degree = 30;
  const auto tables = pi_micro_tables(micro_params(cfg, 2000), {req});
  REQUIRE(tables.size() == 1);
  CHECK(tables[0].table.values.size() < 31);  // stopped before max_degree
  CHECK(tables[0].table.values.back() < 5e-4);
}

TEST_CASE("in-frame tallies see only successes when decoding is ideal") {
  SystemConfig cfg;
  cfg.K = 100;
  cfg.M = 8;
  cfg.L = 8;
  cfg.tau = 2;
  cfg.Delta = 25;
  cfg.sigma2 = 0.0;
  cfg.p_a = 0.02;  // beta = 1
  cfg.mode = SignalMode::Orthogonal;
  const PiTableEstimate est = pi_frame(cfg, 20);
  CHECK(est.mode == "frame");
  REQUIRE(est.table.values.size() >= 3);
  bool any = false;
  for (std::size_t d = 1; d < est.table.values.size(); ++d) {
    if (est.trials[d] == 0) {
      CHECK(std::isnan(est.table.values[d]));
      continue;
    }
    any = true;
    CHECK(est.table.values[d] == 1.0);
  }
  CHECK(any);
}

TEST_CASE("isolated-collision and in-frame singleton estimates agree") {
  SystemConfig cfg;
  cfg.K = 500;
  cfg.M = 8;
  cfg.L = 16;
  cfg.tau = 2;
  cfg.Delta = 50;
  cfg.sigma2 = 0.5;
  cfg.p_a = 2.0 * 1.0 / 500.0;  // beta = 1
  cfg.mode = SignalMode::Virtual;

  const PiTableEstimate frame = pi_frame(cfg, 30);
  REQUIRE(frame.table.values.size() >= 2);
  REQUIRE(frame.trials[1] > 500);
  const PiEstimate micro = pi_micro(1, cfg, 10000);
  const double gap = std::abs(frame.table.values[1] - micro.value);
  CHECK(gap < 4.0 * std::sqrt(frame.se[1] * frame.se[1] + micro.se * micro.se) + 0.01);
}

TEST_CASE("isolated-collision model tracks full frames through degree four") {
  // The isolated model replaces each cancelled interferer's norm estimate
  // with an independent fresh draw, while full frames carry the estimate
  // actually produced at the decoding node. At the default operating point
  // both are near-certain, so they must agree within combined Monte Carlo
  // error (with a 1/n floor for estimates sitting on the boundary).
  SystemConfig cfg;  // K=1000, M=400, tau=4, sigma2=0.1, R=1, alpha=1.1, beta=1
  cfg.mode = SignalMode::Virtual;
  const PiTableEstimate frame = pi_frame(cfg, 25);
  const auto tables = pi_micro_tables(micro_params(cfg, 10000),
                                      {{cfg.tau, cfg.beta(), cfg.R, -1.0, 4}});
  for (int j = 1; j <= 4; ++j) {
    const PiEstimate f = frame.at(j);
    REQUIRE(f.trials > 20);
    const PiEstimate m = tables[0].at(j);
    const double floor = 1.0 / static_cast<double>(f.trials);
    CHECK(std::abs(f.value - m.value) <= 3.0 * std::hypot(f.se, m.se) + floor);
  }
}
