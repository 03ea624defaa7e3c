// Copyright 2026 The SparseDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdint>

#include <catch2/catch_amalgamated.hpp>

#include "sparsedp/geometric.hpp"
#include "sparsedp/stats.hpp"

using namespace sparsedp;

TEST_CASE("noise spec derives alpha and rejects bad parameters", "[geometric]") {
  NoiseSpec s = NoiseSpec::make(0.5, 2);
  REQUIRE(s.alpha == Catch::Approx(std::exp(-0.25)).epsilon(1e-15));
  REQUIRE(s.sensitivity == 2);
  REQUIRE(s.pow_alpha(3.0) == Catch::Approx(std::exp(-0.75)).epsilon(1e-14));
  REQUIRE(s.one_minus_pow_alpha(2.0) ==
          Catch::Approx(1.0 - std::exp(-0.5)).epsilon(1e-14));

  REQUIRE_THROWS_AS(NoiseSpec::make(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(NoiseSpec::make(-1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(NoiseSpec::make(std::nan("")), std::invalid_argument);
  REQUIRE_THROWS_AS(NoiseSpec::make(1.0, 0), std::invalid_argument);
}

TEST_CASE("noise moments match their closed forms", "[geometric]") {
  // Independent long-double evaluation of E|X| = 2a/(1-a^2) and
  // Var[X] = 2a/(1-a)^2.
  for (double eps : {0.05, 0.1, 0.5, 1.0, 3.0}) {
    NoiseSpec s = NoiseSpec::make(eps);
    long double a = std::exp(static_cast<long double>(-eps));
    long double mean_abs = 2.0L * a / (1.0L - a * a);
    long double var = 2.0L * a / ((1.0L - a) * (1.0L - a));
    REQUIRE(s.mean_abs_noise() ==
            Catch::Approx(static_cast<double>(mean_abs)).epsilon(1e-12));
    REQUIRE(s.noise_variance() ==
            Catch::Approx(static_cast<double>(var)).epsilon(1e-12));
  }
  // At eps = 0.1 the expected per-cell absolute noise is just under 10.
  double m = NoiseSpec::make(0.1).mean_abs_noise();
  REQUIRE(m > 9.98);
  REQUIRE(m < 9.99);
}

TEST_CASE("pmf and cdf are a consistent distribution", "[geometric]") {
  NoiseSpec s = NoiseSpec::make(0.1);
  double total = 0.0;
  for (std::int64_t x = -2000; x <= 2000; ++x) total += geom_pmf(s, x);
  REQUIRE(total == Catch::Approx(1.0).margin(1e-9));

  // Symmetry and the two closed-form anchor points.
  REQUIRE(geom_pmf(s, -7) == Catch::Approx(geom_pmf(s, 7)).epsilon(1e-15));
  REQUIRE(geom_cdf(s, -1) ==
          Catch::Approx(s.alpha / (1.0 + s.alpha)).epsilon(1e-15));
  REQUIRE(geom_cdf(s, 0) == Catch::Approx(1.0 / (1.0 + s.alpha)).epsilon(1e-15));

  for (std::int64_t x = -50; x <= 50; ++x) {
    double step = geom_cdf(s, x) - geom_cdf(s, x - 1);
    REQUIRE(step == Catch::Approx(geom_pmf(s, x)).margin(1e-14));
    REQUIRE(geom_cdf(s, x) >= geom_cdf(s, x - 1));
  }
  REQUIRE(geom_cdf(s, 5000) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("analytic and tabulated samplers invert the same cdf", "[geometric]") {
  // Both samplers compute the generalized inverse CDF of one u01() draw, so
  // with identical seeds they must emit identical sequences.
  NoiseSpec s = NoiseSpec::make(0.4);
  RngHandle ra(2026), rb(2026);
  GeometricSampler fast(s);
  for (int i = 0; i < 20000; ++i) {
    REQUIRE(sample_geometric(s, ra) == fast(rb));
  }
}

TEST_CASE("sampler table covers all bits of the uniform", "[geometric]") {
  for (double eps : {2.0, 0.5, 0.01}) {
    GeometricSampler g(NoiseSpec::make(eps));
    REQUIRE(g.cap() >= 1);
    bool capped = g.cap() == (1 << 21);
    double tail = 2.0 * g.spec().pow_alpha(static_cast<double>(g.cap() + 1)) /
                  (1.0 + g.spec().alpha);
    REQUIRE((capped || tail < 0x1.0p-60));
  }
}

TEST_CASE("samples follow the two-sided geometric law", "[geometric]") {
  struct Case {
    double eps;
    std::int64_t window;
  };
  // alpha = 0.1, 0.5 and e^-0.1 respectively.
  for (Case c : {Case{std::log(10.0), 30}, Case{std::log(2.0), 60},
                 Case{0.1, 250}}) {
    NoiseSpec s = NoiseSpec::make(c.eps);
    RngHandle rng(416 + static_cast<std::uint64_t>(c.window));
    GeometricSampler fast(s);
    CountHistogram direct, tabulated;
    for (int i = 0; i < 200000; ++i) {
      add_sample(direct, sample_geometric(s, rng));
      add_sample(tabulated, fast(rng));
    }
    auto cdf = [&s](std::int64_t x) { return geom_cdf(s, x); };
    Chi2Result g1 = chi_square_gof(direct, cdf, -c.window, c.window);
    Chi2Result g2 = chi_square_gof(tabulated, cdf, -c.window, c.window);
    INFO("eps=" << c.eps << " p1=" << g1.p_value << " p2=" << g2.p_value);
    REQUIRE(g1.bins >= 2);
    REQUIRE(g1.p_value > 1e-4);
    REQUIRE(g2.p_value > 1e-4);
  }
}

TEST_CASE("empirical mean absolute noise matches theory", "[geometric]") {
  NoiseSpec s = NoiseSpec::make(0.1);
  GeometricSampler fast(s);
  RngHandle rng(99);
  MeanVar mv;
  for (int i = 0; i < 1000000; ++i)
    mv.add(static_cast<double>(std::abs(fast(rng))));
  // Var|X| = Var X - (E|X|)^2 since E[X]=0.
  double expect = s.mean_abs_noise();
  double sd_abs = std::sqrt(s.noise_variance() - expect * expect);
  double se = sd_abs / std::sqrt(1e6);
  REQUIRE(std::abs(mv.mean - expect) < 4.0 * se);
}

TEST_CASE("binomial sampling is exact at the edges and unbiased", "[geometric]") {
  RngHandle rng(7);
  REQUIRE(sample_binomial(0, 0.5, rng) == 0);
  REQUIRE(sample_binomial(100, 0.0, rng) == 0);
  REQUIRE(sample_binomial(100, 1.0, rng) == 100);
  REQUIRE_THROWS_AS(sample_binomial(-1, 0.5, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(sample_binomial(10, -0.1, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(sample_binomial(10, 1.5, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(sample_binomial(10, std::nan(""), rng),
                    std::invalid_argument);

  MeanVar mv;
  for (int i = 0; i < 20000; ++i)
    mv.add(static_cast<double>(sample_binomial(1000, 0.3, rng)));
  double se = std::sqrt(1000 * 0.3 * 0.7 / 20000.0);
  REQUIRE(std::abs(mv.mean - 300.0) < 4.0 * se);
  REQUIRE(mv.variance() == Catch::Approx(210.0).epsilon(0.1));
}

TEST_CASE("negative release values clamp to zero", "[geometric]") {
  REQUIRE(clamp_nonnegative(-5) == 0);
  REQUIRE(clamp_nonnegative(0) == 0);
  REQUIRE(clamp_nonnegative(7) == 7);
}
