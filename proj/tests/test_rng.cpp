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

#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "sparsedp/rng.hpp"

using sparsedp::RngHandle;

TEST_CASE("same seed reproduces the same stream", "[rng]") {
  RngHandle a(42), b(42);
  for (int i = 0; i < 32; ++i) REQUIRE(a.bits() == b.bits());
  REQUIRE(a.seed() == 42);
}

TEST_CASE("different seeds give different streams", "[rng]") {
  RngHandle a(1), b(2);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) all_equal = all_equal && (a.bits() == b.bits());
  REQUIRE_FALSE(all_equal);
}

TEST_CASE("forking is label-addressed and does not consume parent state",
          "[rng]") {
  RngHandle parent(7);
  RngHandle untouched(7);

  RngHandle c1 = parent.fork("child");
  RngHandle c2 = parent.fork("child");
  RngHandle other = parent.fork("other");
  RngHandle numbered = parent.fork(std::uint64_t{3});

  // Same label twice: same child stream.
  for (int i = 0; i < 8; ++i) REQUIRE(c1.bits() == c2.bits());

  // Distinct labels diverge.
  RngHandle c3 = parent.fork("child");
  bool all_equal = true;
  for (int i = 0; i < 8; ++i)
    all_equal = all_equal && (c3.bits() == other.bits());
  REQUIRE_FALSE(all_equal);
  (void)numbered;

  // Forking never advanced the parent.
  for (int i = 0; i < 8; ++i) REQUIRE(parent.bits() == untouched.bits());
}

TEST_CASE("numbered forks are independent of label forks", "[rng]") {
  RngHandle parent(99);
  RngHandle a = parent.fork(std::uint64_t{1});
  RngHandle b = parent.fork(std::uint64_t{2});
  REQUIRE(a.bits() != b.bits());
}

TEST_CASE("u01 stays inside the open unit interval", "[rng]") {
  RngHandle r(5);
  for (int i = 0; i < 20000; ++i) {
    double u = r.u01();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
  for (int i = 0; i < 20000; ++i) {
    double u = r.u01_inclusive();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
  }
}

TEST_CASE("below covers its range and rejects zero", "[rng]") {
  RngHandle r(11);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    std::uint64_t v = r.below(5);
    REQUIRE(v < 5);
    seen.insert(v);
  }
  REQUIRE(seen.size() == 5);
  REQUIRE_THROWS_AS(r.below(0), std::invalid_argument);
}

TEST_CASE("coin produces both outcomes", "[rng]") {
  RngHandle r(13);
  int heads = 0;
  for (int i = 0; i < 1000; ++i) heads += r.coin() ? 1 : 0;
  REQUIRE(heads > 400);
  REQUIRE(heads < 600);
}
