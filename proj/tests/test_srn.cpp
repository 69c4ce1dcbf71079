// Copyright 2026 The epiroute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "epiroute/srn.hpp"

using namespace epiroute;

namespace {

RateFn constant(double r) {
  return [r](MarkingView) { return r; };
}

SrnModel two_state(double r) {
  SrnModel m;
  auto a = m.add_place("a", 1);
  auto b = m.add_place("b", 0);
  m.add_timed({"go", {{a, 1}}, {{b, 1}}, {}, constant(r)});
  m.add_reward("done", [b](MarkingView mk) { return double(mk[b]); });
  m.set_absorbing([b](MarkingView mk) { return mk[b] == 1; });
  return m;
}

// k tokens cycling through three places with rates depending on occupancy.
SrnModel ring(unsigned k) {
  SrnModel m;
  PlaceId p[3] = {m.add_place("p0", k), m.add_place("p1"), m.add_place("p2")};
  for (int i = 0; i < 3; ++i) {
    const PlaceId from = p[i], to = p[(i + 1) % 3];
    m.add_timed({"t" + std::to_string(i), {{from, 1}}, {{to, 1}}, {},
                 [from, i](MarkingView mk) { return (i + 1) * 0.5 * mk[from]; }});
  }
  return m;
}

}  // namespace

TEST_CASE("minimal net expands to a two-state chain") {
  auto c = expand_reachability(two_state(0.01));
  REQUIRE(c.states() == 2);
  CHECK(c.transitions() == 1);
  CHECK(c.absorbing_states.size() == 1);
  CHECK(c.exit_rate[0] == doctest::Approx(0.01));
  CHECK(c.exit_rate[1] == 0.0);
  CHECK(c.reward("done")[1] == 1.0);
  CHECK_THROWS_AS(c.reward("missing"), std::out_of_range);
}

TEST_CASE("generator rows sum to zero") {
  auto c = expand_reachability(ring(4));
  for (StateIndex s = 0; s < c.states(); ++s) {
    double sum = 0;
    for (auto k = c.row_ptr[s]; k < c.row_ptr[s + 1]; ++k) {
      CHECK(c.rate[k] > 0);
      sum += c.rate[k];
    }
    CHECK(std::abs(sum - c.exit_rate[s]) <= 1e-12 * std::max(1.0, sum));
  }
}

TEST_CASE("expansion without immediates matches direct enumeration") {
  const unsigned k = 5;
  auto c = expand_reachability(ring(k));
  // Compositions of k into 3 parts.
  CHECK(c.states() == (k + 2) * (k + 1) / 2);
  std::map<std::vector<int>, std::map<std::vector<int>, double>> oracle;
  for (unsigned a = 0; a <= k; ++a)
    for (unsigned b = 0; a + b <= k; ++b) {
      std::vector<int> mk = {int(a), int(b), int(k - a - b)};
      for (int i = 0; i < 3; ++i) {
        if (!mk[i]) continue;
        auto nx = mk;
        --nx[i];
        ++nx[(i + 1) % 3];
        oracle[mk][nx] += (i + 1) * 0.5 * mk[i];
      }
    }
  for (StateIndex s = 0; s < c.states(); ++s) {
    auto v = c.marking(s);
    std::vector<int> mk(v.begin(), v.end());
    std::map<std::vector<int>, double> got;
    for (auto e = c.row_ptr[s]; e < c.row_ptr[s + 1]; ++e) {
      auto w = c.marking(c.col[e]);
      got[std::vector<int>(w.begin(), w.end())] += c.rate[e];
    }
    REQUIRE(got.size() == oracle[mk].size());
    for (auto& [to, r] : oracle[mk]) CHECK(got[to] == doctest::Approx(r));
  }
}

TEST_CASE("immediate chains are eliminated with path probabilities") {
  SrnModel m;
  auto a = m.add_place("a", 1);
  auto dec = m.add_place("dec");
  auto b = m.add_place("b");
  auto c2 = m.add_place("c");
  m.add_timed({"leave", {{a, 1}}, {{dec, 1}}, {}, constant(2.0)});
  m.add_immediate({"to_b", {{dec, 1}}, {{b, 1}}, {}, constant(0.25)});
  m.add_immediate({"to_c", {{dec, 1}}, {{c2, 1}}, {}, constant(0.75)});
  CHECK(validate_model(m).empty());
  auto c = expand_reachability(m);
  REQUIRE(c.states() == 3);
  std::map<std::string, double> into;
  for (auto e = c.row_ptr[0]; e < c.row_ptr[1]; ++e) {
    auto w = c.marking(c.col[e]);
    into[w[b] ? "b" : "c"] = c.rate[e];
  }
  CHECK(into["b"] == doctest::Approx(0.5));
  CHECK(into["c"] == doctest::Approx(1.5));
}

TEST_CASE("zero rate disables a transition") {
  SrnModel m;
  auto a = m.add_place("a", 1);
  auto b = m.add_place("b");
  m.add_timed({"never", {{a, 1}}, {{b, 1}}, {}, constant(0.0)});
  auto c = expand_reachability(m);
  CHECK(c.states() == 1);
  CHECK(c.absorbing_states.size() == 1);  // dead state
}

TEST_CASE("validator diagnostics") {
  SUBCASE("weights not summing to one") {
    SrnModel m;
    auto a = m.add_place("a", 1);
    auto dec = m.add_place("dec");
    auto b = m.add_place("b");
    m.add_timed({"leave", {{a, 1}}, {{dec, 1}}, {}, constant(1.0)});
    m.add_immediate({"x", {{dec, 1}}, {{a, 1}}, {}, constant(0.3)});
    m.add_immediate({"y", {{dec, 1}}, {{b, 1}}, {}, constant(0.3)});
    auto d = validate_model(m);
    REQUIRE(d.size() == 1);
    CHECK(d[0].kind == Diagnostic::Kind::WeightSum);
  }
  SUBCASE("dangling arc") {
    SrnModel m;
    auto a = m.add_place("a", 1);
    m.add_timed({"bad", {{a, 1}}, {{7, 1}}, {}, constant(1.0)});
    auto d = validate_model(m);
    REQUIRE(!d.empty());
    CHECK(d[0].kind == Diagnostic::Kind::DanglingArc);
    CHECK_THROWS_AS(expand_reachability(m), ModelInvalid);
  }
  SUBCASE("vanishing initial marking") {
    SrnModel m;
    auto a = m.add_place("a", 1);
    auto b = m.add_place("b");
    m.add_immediate({"now", {{a, 1}}, {{b, 1}}, {}, constant(1.0)});
    auto d = validate_model(m);
    REQUIRE(!d.empty());
    CHECK(d[0].kind == Diagnostic::Kind::VanishingInitial);
  }
}

TEST_CASE("immediate loop is reported") {
  SrnModel m;
  auto a = m.add_place("a", 1);
  auto x = m.add_place("x");
  auto y = m.add_place("y");
  m.add_timed({"go", {{a, 1}}, {{x, 1}}, {}, constant(1.0)});
  m.add_immediate({"xy", {{x, 1}}, {{y, 1}}, {}, constant(1.0)});
  m.add_immediate({"yx", {{y, 1}}, {{x, 1}}, {}, constant(1.0)});
  CHECK_THROWS_AS(expand_reachability(m), VanishingLoop);
}

TEST_CASE("state budget") {
  ExpansionOptions o;
  o.max_states = 5;
  CHECK_THROWS_AS(expand_reachability(ring(6), o), StateBudgetExceeded);
  CHECK(count_tangible_states(ring(6)) == 28);
}

TEST_CASE("token conservation check") {
  auto c = expand_reachability(ring(4));
  TokenGroup g{{0, 1, 2}, 4};
  CHECK(conserve_tokens_check(c, std::span(&g, 1)));

  SrnModel leak;
  auto a = leak.add_place("a", 2);
  auto b = leak.add_place("b");
  leak.add_timed({"drop", {{a, 2}}, {{b, 1}}, {}, constant(1.0)});
  auto cl = expand_reachability(leak);
  TokenGroup gl{{a, b}, 2};
  CHECK_FALSE(conserve_tokens_check(cl, std::span(&gl, 1)));
}

TEST_CASE("expansion is deterministic") {
  auto c1 = expand_reachability(ring(6));
  auto c2 = expand_reachability(ring(6));
  CHECK(c1.markings == c2.markings);
  CHECK(c1.col == c2.col);
  CHECK(c1.rate == c2.rate);
}

TEST_CASE("edge list round trip") {
  auto c = expand_reachability(two_state(0.0123456789012345));
  std::stringstream ss;
  write_edge_list(c, ss, "done");
  auto back = read_edge_list(ss);
  REQUIRE(back.states() == 2);
  CHECK(back.rate[0] == c.rate[0]);
  CHECK(back.absorbing_states == c.absorbing_states);
  CHECK(back.reward("done")[1] == 1.0);
}
