#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "cpa/rng.hpp"

using namespace cpa;

TEST_CASE("streams are reproducible and coordinate-separated") {
  auto a1 = rng_stream(42, Stream::Channels, 3, 7);
  auto a2 = rng_stream(42, Stream::Channels, 3, 7);
  for (int i = 0; i < 64; ++i) CHECK(a1.next() == a2.next());

  auto b = rng_stream(42, Stream::Channels, 3, 8);
  auto c = rng_stream(42, Stream::PilotNoise, 3, 7);
  auto d = rng_stream(43, Stream::Channels, 3, 7);
  auto a3 = rng_stream(42, Stream::Channels, 3, 7);
  bool differ_b = false, differ_c = false, differ_d = false;
  for (int i = 0; i < 16; ++i) {
    const auto v = a3.next();
    differ_b |= v != b.next();
    differ_c |= v != c.next();
    differ_d |= v != d.next();
  }
  CHECK(differ_b);
  CHECK(differ_c);
  CHECK(differ_d);
}

TEST_CASE("mix64 is sensitive to argument order") {
  CHECK(mix64(1, 2) != mix64(2, 1));
  CHECK(mix64(0) != 0);
  CHECK(fold_bits(0.25) != fold_bits(0.250000001));
}

TEST_CASE("uniform stays inside its interval") {
  auto rng = rng_stream(7, Stream::Misc);
  double mn = 1.0, mx = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    mn = std::min(mn, u);
    mx = std::max(mx, u);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(mn < 0.001);
  CHECK(mx > 0.999);
}

TEST_CASE("normal and complex normal moments") {
  auto rng = rng_stream(8, Stream::Misc);
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(s / n == doctest::Approx(0.0).epsilon(1).scale(0.02));
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));

  std::complex<double> mean{0, 0};
  double p = 0;
  for (int i = 0; i < n; ++i) {
    const auto z = rng.cnormal();
    mean += z;
    p += std::norm(z);
  }
  // CN(0,1): unit total power, split evenly between re and im
  CHECK(p / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(mean) / n < 0.01);
}

TEST_CASE("binomial matches its mean in the sparse and dense regimes") {
  auto rng = rng_stream(9, Stream::Misc);
  CHECK(rng.binomial(100, 0.0) == 0);
  CHECK(rng.binomial(100, 1.0) == 100);
  double s = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) s += static_cast<double>(rng.binomial(5000, 0.001));
  CHECK(s / n == doctest::Approx(5.0).epsilon(0.03));
  s = 0;
  for (int i = 0; i < n; ++i) s += static_cast<double>(rng.binomial(20, 0.4));
  CHECK(s / n == doctest::Approx(8.0).epsilon(0.03));
}

TEST_CASE("poisson mean and variance across both sampler branches") {
  auto rng = rng_stream(10, Stream::Misc);
  for (double mean : {3.0, 31.0, 124.0}) {
    const int n = 20000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(mean));
      s += k;
      s2 += k * k;
    }
    const double m = s / n;
    const double v = s2 / n - m * m;
    CHECK(m == doctest::Approx(mean).epsilon(0.03));
    CHECK(v == doctest::Approx(mean).epsilon(0.08));
  }
  CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("gamma moments at channel-power shapes") {
  auto rng = rng_stream(11, Stream::Misc);
  for (double shape : {1.0, 24.0, 400.0}) {
    const int n = 20000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.gamma(shape);
      s += x;
      s2 += x * x;
    }
    const double m = s / n;
    const double v = s2 / n - m * m;
    CHECK(m == doctest::Approx(shape).epsilon(0.03));
    CHECK(v == doctest::Approx(shape).epsilon(0.1));
  }
}

TEST_CASE("uniform_int covers its range without bias") {
  auto rng = rng_stream(12, Stream::Misc);
  std::vector<int> counts(4, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_int(4)];
  for (int j = 0; j < 4; ++j)
    CHECK(static_cast<double>(counts[j]) / n == doctest::Approx(0.25).epsilon(0.05));
}
