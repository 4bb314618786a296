#include <doctest.h>

#include <cmath>

#include "cpa/baselines.hpp"

using namespace cpa;

TEST_CASE("downlink service probability and mean delay at the default point") {
  SystemConfig cfg;  // K=1000, tau=4, p_a=0.004
  const DelayModel m = downlink_delay(cfg);
  CHECK(m.p_eff == doctest::Approx(0.001472253953).epsilon(1e-9));
  CHECK(m.mean() == doctest::Approx(678.230644).epsilon(1e-6));
}

TEST_CASE("delay pmf is a proper distribution on 0,1,2,...") {
  SystemConfig cfg;
  const DelayModel m = downlink_delay(cfg);
  const auto dmax = static_cast<std::uint64_t>(50.0 / m.p_eff);
  double sum = 0.0, mean = 0.0;
  for (std::uint64_t d = 0; d <= dmax; ++d) {
    const double p = m.pmf(d);
    sum += p;
    mean += static_cast<double>(d) * p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mean == doctest::Approx(m.mean()).epsilon(1e-6));
  CHECK(m.pmf(0) == doctest::Approx(m.p_eff).epsilon(1e-12));
}

TEST_CASE("delay edge cases") {
  SystemConfig solo;
  solo.K = 1;
  solo.p_a = 1.0;
  CHECK(downlink_delay(solo).p_eff == 1.0);
  CHECK(downlink_delay(solo).mean() == 0.0);
  CHECK(simulate_delay_mean(solo, 10) == 0.0);

  CHECK(DelayModel{0.5}.mean() == 1.0);
  CHECK(DelayModel{0.0}.mean() == std::numeric_limits<double>::infinity());

  SystemConfig idle;
  idle.p_a = 0.0;
  CHECK(simulate_delay_mean(idle, 10) == std::numeric_limits<double>::infinity());
}

TEST_CASE("simulated delay matches the analytic mean") {
  SystemConfig cfg;
  const DelayModel m = downlink_delay(cfg);
  const double sim = simulate_delay_mean(cfg, 100000);
  CHECK(sim == doctest::Approx(m.mean()).epsilon(0.02));
}

TEST_CASE("uncoordinated access peaks at one expected transmitter per resource") {
  SystemConfig cfg;
  CHECK(aloha_optimal_pa(cfg) == doctest::Approx(0.004));
  SystemConfig tiny;
  tiny.K = 3;
  tiny.tau = 8;
  CHECK(aloha_optimal_pa(tiny) == 1.0);

  // the optimum beats every other activation level on a surrounding grid
  SystemConfig at_opt = cfg;
  at_opt.p_a = aloha_optimal_pa(cfg);
  const double best = aloha_throughput(at_opt, 1.0);
  for (double pa = 0.0002; pa <= 0.0101; pa += 0.0002) {
    SystemConfig other = cfg;
    other.p_a = pa;
    CHECK(aloha_throughput(other, 1.0) <= best + 1e-12);
  }
}

TEST_CASE("collision-limited throughput at the optimum carries the 1/e factor") {
  SystemConfig cfg;
  cfg.p_a = aloha_optimal_pa(cfg);
  const double x = cfg.p_a / cfg.tau;
  const double psing = cfg.K * x * std::pow(1.0 - x, static_cast<double>(cfg.K - 1));
  CHECK(psing == doctest::Approx(0.368063488259).epsilon(1e-9));
  CHECK(psing == doctest::Approx(std::exp(-1.0)).epsilon(0.01));
  CHECK(aloha_throughput(cfg, 1.0) == doctest::Approx(1.380238080972086).epsilon(1e-12));
}

TEST_CASE("a fully scheduled system upper-bounds uncoordinated access") {
  SystemConfig cfg;
  cfg.p_a = aloha_optimal_pa(cfg);
  CHECK(smm_throughput(cfg, 1.0) == doctest::Approx(3.75));
  for (double pi1 : {1.0, 0.9, 0.5})
    CHECK(smm_throughput(cfg, pi1) >= aloha_throughput(cfg, pi1));
}
