#include <doctest.h>

#include <cmath>
#include <complex>

#include "cpa/receiver.hpp"

using namespace cpa;

TEST_CASE("least squares noise variance is sigma2 / tau per antenna") {
  const int M = 20000, tau = 4;
  const double sigma2 = 0.4;
  const MatC S = make_pilots(tau);
  Rng rng = rng_stream(21, Stream::Misc, 0, 0);
  MatC Z(M, tau);
  fill_cnormal(Z, rng);
  Z *= std::sqrt(sigma2);
  const VecC phi = ls_estimate(Z, S.row(2));
  CHECK(phi.squaredNorm() / M == doctest::Approx(sigma2 / tau).epsilon(0.05));
}

TEST_CASE("matched filter and power sum match their definitions") {
  Rng rng = rng_stream(22, Stream::Misc, 0, 0);
  const int M = 6, D = 5;
  VecC phi(M);
  MatC Yu(M, D);
  for (int m = 0; m < M; ++m) phi(m) = rng.cnormal();
  fill_cnormal(Yu, rng);

  const RowC f = matched_filter(phi, Yu);
  double p = 0.0;
  for (int m = 0; m < M; ++m) p += std::norm(phi(m));
  CHECK(power_sum(phi) == doctest::Approx(p).epsilon(1e-12));
  for (int t = 0; t < D; ++t) {
    cd want(0.0, 0.0);
    for (int m = 0; m < M; ++m) want += std::conj(phi(m)) * Yu(m, t);
    CHECK(std::abs(f(t) - want) < 1e-12);
  }
}

TEST_CASE("zero forcing splits two equal-power orthogonal colliders evenly") {
  const int M = 4, D = 3;
  VecC h1 = VecC::Zero(M), h2 = VecC::Zero(M);
  h1(0) = cd(1, 0);
  h1(2) = cd(1, 0);
  h2(1) = cd(0, 1);
  h2(3) = cd(0, -1);
  RowC x1(D), x2(D);
  x1 << cd(1, 0), cd(0, 1), cd(-1, 0);
  x2 << cd(0, -1), cd(1, 0), cd(0, 1);

  const VecC phi = h1 + h2;
  const MatC Yu = h1 * x1 + h2 * x2;
  const RowC psi = zf_estimate(phi, Yu);
  for (int t = 0; t < D; ++t)
    CHECK(std::abs(psi(t) - 0.5 * (x1(t) + x2(t))) < 1e-14);

  CHECK_THROWS_AS(zf_estimate(VecC::Zero(M), Yu), std::invalid_argument);
}

TEST_CASE("node SINR combines residue, interference, cross power and noise") {
  FactorNode node;
  node.members = {10, 11, 12};
  node.a = {cd(3, 4), cd(1, 0), cd(0, 2)};
  node.ghat = {0.0, 1.5, 0.0};
  node.in_resid = {1, 0, 1};
  node.cross2 = 0.25;
  node.phi2 = 2.0;

  // member 0: |3+4i|^2 / (0.25 + 2*0.1 + |1-1.5|^2 + |2i|^2)
  CHECK(node_sinr(node, 0, 0.1) == doctest::Approx(25.0 / 4.7).epsilon(1e-12));
  // member 2: |2i|^2 / (0.25 + 0.2 + 0.25 + 25)
  CHECK(node_sinr(node, 2, 0.1) == doctest::Approx(4.0 / 25.7).epsilon(1e-12));

  // more cross-pilot power can only hurt
  FactorNode crowded = node;
  crowded.cross2 = 2.5;
  CHECK(node_sinr(crowded, 0, 0.1) < node_sinr(node, 0, 0.1));
}

TEST_CASE("vanishing denominator reports the finite sentinel") {
  FactorNode node;
  node.members = {0};
  node.a = {cd(1, 0)};
  node.ghat = {0.0};
  node.in_resid = {1};
  node.cross2 = 0.0;
  node.phi2 = 1.0;
  CHECK(node_sinr(node, 0, 0.0) == kInfiniteSinr);
}

TEST_CASE("decodability is a closed threshold test") {
  SystemConfig cfg;
  cfg.b = 2;
  cfg.R = 1.0;
  cfg.sigma2 = 0.0;
  REQUIRE(cfg.sinr_threshold() == 3.0);

  FactorNode node;
  node.members = {0};
  node.a = {cd(1.5, 0)};  // |a|^2 = 2.25 exactly
  node.ghat = {0.0};
  node.in_resid = {1};
  node.cross2 = 0.75;  // SINR = 3 exactly
  node.phi2 = 0.0;
  CHECK(decodable(node, 0, cfg));

  node.cross2 = 0.7500001;
  CHECK_FALSE(decodable(node, 0, cfg));
}
