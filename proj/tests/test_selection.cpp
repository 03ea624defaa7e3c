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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "sparsedp/oracle.hpp"
#include "sparsedp/selection.hpp"
#include "sparsedp/stats.hpp"

using namespace sparsedp;

namespace {

// epsilon values that put alpha at 0.1, 0.5 and e^-0.1.
const double kEpsAlphaTenth = std::log(10.0);
const double kEpsAlphaHalf = std::log(2.0);

}  // namespace

TEST_CASE("hand-computed anchor values", "[selection]") {
  // At alpha = 1/2, theta = 2: p = alpha^theta/(1+alpha) = (1/4)/(3/2) = 1/6.
  NoiseSpec half = NoiseSpec::make(kEpsAlphaHalf);
  REQUIRE(inclusion_probability(SelectKind::filter_one_sided, half, 2) ==
          Catch::Approx(1.0 / 6.0).epsilon(1e-12));

  // At alpha = 1/2, tau = 1: p = 2a(1-a)/(1-a^2) = 2a/(1+a) = 2/3.
  REQUIRE(inclusion_probability(SelectKind::threshold, half, 0, 1) ==
          Catch::Approx(2.0 / 3.0).epsilon(1e-12));

  // At alpha = 1/2, tau = 2 the conditional probability of landing at or
  // below -2 is 1/3: D = a(1-a^2) = 3/8, C = 4/3, and the lower-tail mass
  // through -2 is C * a^2 * 2(1-a) = (4/3)(1/4)(1) = 1/3.
  REQUIRE(conditional_value_cdf(SelectKind::threshold, half, 0, 2, -2) ==
          Catch::Approx(1.0 / 3.0).epsilon(1e-12));

  // The same three values from the brute-force enumeration.
  BruteProbability b1 = brute_probability(SelectKind::filter_one_sided,
                                          kEpsAlphaHalf, 1, 2, 0);
  REQUIRE(b1.inclusion == Catch::Approx(1.0 / 6.0).epsilon(1e-12));
  BruteProbability b2 =
      brute_probability(SelectKind::threshold, kEpsAlphaHalf, 1, 0, 1);
  REQUIRE(b2.inclusion == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  BruteProbability b3 =
      brute_probability(SelectKind::threshold, kEpsAlphaHalf, 1, 0, 2);
  REQUIRE(b3.cdf(-2) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("closed forms agree with brute-force enumeration", "[selection]") {
  struct Combo {
    SelectKind kind;
    std::int64_t theta, tau;
  };
  std::vector<Combo> combos;
  for (std::int64_t v : {1, 2, 5}) {
    combos.push_back({SelectKind::filter_one_sided, v, 0});
    combos.push_back({SelectKind::filter_two_sided, v, 0});
    combos.push_back({SelectKind::threshold, 0, v});
  }
  combos.push_back({SelectKind::filter_threshold, 1, 2});
  combos.push_back({SelectKind::filter_threshold, 1, 5});
  combos.push_back({SelectKind::filter_threshold, 2, 5});

  for (double eps : {kEpsAlphaTenth, kEpsAlphaHalf, 0.1}) {
    NoiseSpec s = NoiseSpec::make(eps);
    for (const Combo& c : combos) {
      INFO("eps=" << eps << " kind=" << to_string(c.kind)
                  << " theta=" << c.theta << " tau=" << c.tau);
      BruteProbability brute =
          brute_probability(c.kind, eps, 1, c.theta, c.tau);
      double p = inclusion_probability(c.kind, s, c.theta, c.tau);
      REQUIRE(std::abs(p - brute.inclusion) <= 1e-9);

      ConditionalValueLaw law(c.kind, s, c.theta, c.tau);
      std::int64_t lo = brute.support_lo - 2;
      std::int64_t hi =
          brute.support_lo + static_cast<std::int64_t>(brute.pmf.size()) + 1;
      double worst = 0.0;
      double prev = -1.0;
      for (std::int64_t nu = lo; nu <= hi; ++nu) {
        double f = law.cdf(nu);
        worst = std::max(worst, std::abs(f - brute.cdf(nu)));
        REQUIRE(f >= prev - 1e-12);  // monotone up to rounding
        prev = f;
      }
      REQUIRE(worst <= 1e-9);
      REQUIRE(law.cdf(lo - 1000) <= 1e-9);
      REQUIRE(law.cdf(hi + 1000) == Catch::Approx(1.0).margin(1e-9));
    }
  }
}

TEST_CASE("threshold is the theta=0 face of the combined rule", "[selection]") {
  NoiseSpec s = NoiseSpec::make(0.1);
  for (std::int64_t tau : {1, 3, 10}) {
    REQUIRE(inclusion_probability(SelectKind::threshold, s, 0, tau) ==
            combined_pass_probability(s, 0, tau));
    for (std::int64_t nu = -tau - 5; nu <= tau + 5; ++nu)
      REQUIRE(conditional_value_cdf(SelectKind::threshold, s, 0, tau, nu) ==
              conditional_value_cdf(SelectKind::filter_threshold, s, 0, tau,
                                    nu));
  }
  // At theta = tau the combined rule degenerates to a pure two-sided filter.
  for (std::int64_t t : {1, 4, 9})
    REQUIRE(combined_pass_probability(s, t, t) ==
            Catch::Approx(inclusion_probability(SelectKind::filter_two_sided,
                                                s, t))
                .epsilon(1e-12));
}

TEST_CASE("selection parameters are validated", "[selection]") {
  NoiseSpec s = NoiseSpec::make(1.0);
  REQUIRE_THROWS_AS(inclusion_probability(SelectKind::filter_one_sided, s, 0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(inclusion_probability(SelectKind::filter_two_sided, s, -1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(inclusion_probability(SelectKind::threshold, s, 0, 0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      inclusion_probability(SelectKind::filter_threshold, s, 3, 3),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      inclusion_probability(SelectKind::filter_threshold, s, -1, 3),
      std::invalid_argument);
  REQUIRE_THROWS_AS(combined_pass_probability(s, 4, 2), std::invalid_argument);
}

TEST_CASE("two-sided filter leaves a flat gap across the origin", "[selection]") {
  NoiseSpec s = NoiseSpec::make(0.3);
  ConditionalValueLaw law(SelectKind::filter_two_sided, s, 4, 0);
  for (std::int64_t nu = -4; nu <= 3; ++nu)
    REQUIRE(law.cdf(nu) == Catch::Approx(0.5).epsilon(1e-15));
  REQUIRE(law.cdf(-5) < 0.5);
  REQUIRE(law.cdf(4) > 0.5);
}

TEST_CASE("conditional samplers match the brute-force law", "[selection]") {
  struct Case {
    SelectKind kind;
    double eps;
    std::int64_t theta, tau;
  };
  int which = 0;
  for (Case c : {Case{SelectKind::filter_one_sided, kEpsAlphaHalf, 3, 0},
                 Case{SelectKind::filter_two_sided, 0.1, 5, 0},
                 Case{SelectKind::threshold, kEpsAlphaHalf, 0, 3},
                 Case{SelectKind::filter_threshold, 0.1, 2, 8}}) {
    NoiseSpec s = NoiseSpec::make(c.eps);
    ConditionalValueLaw law(c.kind, s, c.theta, c.tau);
    BruteProbability brute = brute_probability(c.kind, c.eps, 1, c.theta, c.tau);
    RngHandle rng(500 + static_cast<std::uint64_t>(which++));

    CountHistogram hist;
    for (int i = 0; i < 100000; ++i) {
      std::int64_t v = law.sample(rng);
      // Support restrictions per rule.
      switch (c.kind) {
        case SelectKind::filter_one_sided:
          REQUIRE(v >= c.theta);
          break;
        case SelectKind::filter_two_sided:
          REQUIRE(std::abs(v) >= c.theta);
          break;
        case SelectKind::threshold:
          REQUIRE(v != 0);
          break;
        case SelectKind::filter_threshold:
          REQUIRE(std::abs(v) >= std::max<std::int64_t>(c.theta, 1));
          break;
      }
      add_sample(hist, v);
    }
    std::int64_t hi =
        brute.support_lo + static_cast<std::int64_t>(brute.pmf.size()) - 1;
    Chi2Result gof = chi_square_gof(
        hist, [&brute](std::int64_t v) { return brute.cdf(v); },
        brute.support_lo, hi);
    INFO("kind=" << to_string(c.kind) << " eps=" << c.eps
                 << " p=" << gof.p_value << " bins=" << gof.bins);
    REQUIRE(gof.bins >= 2);
    REQUIRE(gof.p_value > 1e-4);
  }
}

TEST_CASE("zero-location sampling is exact, distinct and uniform", "[selection]") {
  SparseTable t(DomainSpec::flat(10), {{3, 1}, {7, 2}});
  RngHandle rng(11);

  REQUIRE(select_zero_locations(t, 0, rng).empty());

  auto three = select_zero_locations(t, 3, rng);  // sparse rejection path
  REQUIRE(three.size() == 3);
  std::set<std::uint64_t> dedup(three.begin(), three.end());
  REQUIRE(dedup.size() == 3);
  for (std::uint64_t i : three) REQUIRE(t.count_at(i) == 0);

  auto five = select_zero_locations(t, 5, rng);  // dense subsample path
  std::set<std::uint64_t> dedup5(five.begin(), five.end());
  REQUIRE(dedup5.size() == 5);
  for (std::uint64_t i : five) REQUIRE(t.count_at(i) == 0);

  auto all = select_zero_locations(t, 8, rng);
  std::sort(all.begin(), all.end());
  REQUIRE(all == std::vector<std::uint64_t>{0, 1, 2, 4, 5, 6, 8, 9});

  REQUIRE_THROWS_AS(select_zero_locations(t, 9, rng), std::invalid_argument);
}

TEST_CASE("zero-location sampling shows no positional bias", "[selection]") {
  SparseTable t(DomainSpec::flat(10), {{5, 4}});
  RngHandle rng(42);
  std::vector<std::uint64_t> freq(10, 0);
  const int reps = 20000;
  for (int r = 0; r < reps; ++r)
    for (std::uint64_t i : select_zero_locations(t, 3, rng)) ++freq[i];
  REQUIRE(freq[5] == 0);
  // Each of the 9 zero cells is chosen with probability 1/3 per rep.
  double expect = reps / 3.0;
  double sd = std::sqrt(reps * (1.0 / 3.0) * (2.0 / 3.0));
  for (std::uint64_t i = 0; i < 10; ++i) {
    if (i == 5) continue;
    REQUIRE(std::abs(static_cast<double>(freq[i]) - expect) < 5.0 * sd);
  }
}
