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

#include <functional>
#include <numeric>
#include <random>

#include "epiroute/models.hpp"
#include "fixtures.hpp"

using namespace epiroute;

TEST_CASE("r_meet_hat interpolation") {
  const auto r = test_rates();
  const int M = 11;
  CHECK(r_meet_hat(0, r, M) == 0.0);
  CHECK(r_meet_hat(1, r, M) == r.gamma);
  CHECK(r_meet_hat(M - 1, r, M) == doctest::Approx(r.eta).epsilon(1e-14));
  for (int n = 0; n + 1 < M; ++n) CHECK(r_meet_hat(n + 1, r, M) >= r_meet_hat(n, r, M));
  CHECK_THROWS_AS(r_meet_hat(M, r, M), std::domain_error);
  CHECK_THROWS_AS(r_meet_hat(-1, r, M), std::domain_error);
}

TEST_CASE("approximate local counts: worked cases") {
  const std::vector<double> three = {0.2, 0.4, 0.4};
  CHECK(approx_local_counts(5, three, std::nullopt, CountVariant::Susceptible).n_hat == std::vector<int>{1, 2, 2});
  CHECK(approx_local_counts(0, three, std::nullopt, CountVariant::Infected).n_hat == std::vector<int>{0, 0, 0});
  const std::vector<double> four(4, 0.25);
  CHECK(approx_local_counts(5, four, std::nullopt, CountVariant::Susceptible).n_hat ==
        std::vector<int>{2, 1, 1, 1});
  CHECK(approx_local_counts(5, three, 1, CountVariant::Infected).n_hat == std::vector<int>{1, 3, 2});
  // The source offset applies to the infected variant only.
  CHECK(approx_local_counts(5, three, 1, CountVariant::Susceptible).n_hat == std::vector<int>{1, 2, 2});
  const std::vector<double> one = {1.0};
  for (int t = 0; t < 20; ++t)
    CHECK(approx_local_counts(t, one, std::nullopt, CountVariant::Susceptible).n_hat == std::vector<int>{t});
}

namespace {

void check_sum(int tokens, const std::vector<double>& p, std::optional<int> src, CountVariant v) {
  auto n = approx_local_counts(tokens, p, src, v).n_hat;
  const int extra = (v == CountVariant::Infected && src) ? 1 : 0;
  REQUIRE(std::accumulate(n.begin(), n.end(), 0) == tokens + extra);
  for (int x : n) REQUIRE(x >= 0);
}

}  // namespace

TEST_CASE("approximate local counts preserve the token total") {
  // Exhaustive over a lattice of selection vectors (multiples of 0.1).
  for (int N = 1; N <= 5; ++N) {
    std::vector<int> parts(N, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
      if (i == N - 1) {
        parts[i] = left;
        std::vector<double> p(N);
        for (int k = 0; k < N; ++k) p[k] = parts[k] / 10.0;
        for (int t = 0; t <= 12; ++t) {
          check_sum(t, p, std::nullopt, CountVariant::Susceptible);
          for (int s = 0; s < N; ++s) check_sum(t, p, s, CountVariant::Infected);
        }
        return;
      }
      for (int k = 0; k <= left; ++k) {
        parts[i] = k;
        rec(i + 1, left - k);
      }
    };
    rec(0, 10);
  }
  // Random selection vectors.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int N = 1 + trial % 5;
    std::vector<double> p(N);
    double s = 0;
    for (auto& x : p) s += (x = u(rng));
    for (auto& x : p) x /= s;
    const int t = static_cast<int>(u(rng) * 200);
    check_sum(t, p, std::nullopt, CountVariant::Susceptible);
    check_sum(t, p, trial % N, CountVariant::Infected);
  }
}

TEST_CASE("monolithic model structure") {
  const auto cfg = reference_config(3, 5);
  const auto model = build_monolithic(cfg, test_rates());
  CHECK(validate_model(model).empty());
  const auto c = expand_reachability(model);
  CHECK(c.states() == 1475);
  const auto groups = conservation_groups(model, Engine::Monolithic, cfg);
  CHECK(conserve_tokens_check(c, groups));
  // The source never loses the message.
  const auto tx = c.reward(kTransmissionsReward);
  for (StateIndex s = 0; s < c.states(); ++s) REQUIRE(tx[s] >= 1.0);
  CHECK(count_tangible_states(build_monolithic(reference_config(4, 5), test_rates())) == 3870);
}

TEST_CASE("folded model structure") {
  struct Case {
    int N, M;
    std::uint64_t states;
  };
  for (auto k : {Case{3, 5, 400}, Case{4, 5, 600}, Case{3, 10, 3300}, Case{4, 15, 16800}, Case{5, 10, 6930}}) {
    const auto cfg = reference_config(k.N, k.M);
    const auto model = build_folded(cfg, test_rates());
    CHECK(validate_model(model).empty());
    const auto c = expand_reachability(model);
    CHECK(c.states() == k.states);
    CHECK(conserve_tokens_check(c, conservation_groups(model, Engine::Folded, cfg)));
  }
}

TEST_CASE("invalid rates are rejected") {
  auto r = test_rates();
  r.eta = r.gamma / 2;
  CHECK_THROWS(build_monolithic(reference_config(3, 5), r));
  r = test_rates();
  r.lambda = 0;
  CHECK_THROWS(build_folded(reference_config(3, 5), r));
}
