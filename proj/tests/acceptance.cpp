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

// End-to-end acceptance run. Prints one [PASS]/[FAIL] line per criterion, with
// indented detail lines, and exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "epiroute/config.hpp"
#include "epiroute/mobility.hpp"
#include "epiroute/models.hpp"
#include "epiroute/ode.hpp"
#include "epiroute/solve.hpp"
#include "epiroute/srn.hpp"
#include "epiroute/stats.hpp"

using namespace epiroute;

namespace {

constexpr std::uint64_t kRateRuns = 10'000;
constexpr std::uint64_t kRateSeed = 1;
constexpr std::uint64_t kSimSeed = 11;
constexpr double kDt = 0.1;
constexpr std::uint64_t kStateBudget = 8'000'000;
constexpr double kCdfWorkCap = 4e10;  // q * t * (nnz + n) per CDF evaluation

int g_failed = 0;

void detail(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

void verdict(int k, bool ok, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", k, what.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Meeting samples keyed by (layout, scenario). Matches estimate_rates: every
// scenario draws from its own stream of the same master seed.
class MeetingCache {
 public:
  const std::vector<double>& samples(int N, MeetingScenario::Kind kind, int n) {
    const auto key = std::make_tuple(N, static_cast<int>(kind), n);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto cfg = reference_config(N, std::max(3, n + 1));
    MeetingScenario sc{kind, n, 0};
    return cache_[key] = meeting_samples(cfg, sc, kRateRuns, kDt, kRateSeed);
  }

  MeetingRates rates(int N, int M) {
    using K = MeetingScenario::Kind;
    MeetingRates r;
    r.lambda = rate_from_samples(samples(N, K::LocalPair, 0)).rate;
    r.mu = rate_from_samples(samples(N, K::RoamingPair, 0)).rate;
    r.gamma = rate_from_samples(samples(N, K::RoamingVsLocalSet, 1)).rate;
    r.eta = rate_from_samples(samples(N, K::RoamingVsLocalSet, M - 1)).rate;
    return r;
  }

 private:
  std::map<std::tuple<int, int, int>, std::vector<double>> cache_;
};

struct SimSummary {
  double delay = 0.0;
  double hw_delay = 0.0;
  double transmissions = 0.0;
  std::vector<std::uint64_t> tx_counts;  // index k: k+1 transmissions
};

SimSummary simulate(int N, int M, std::uint64_t runs) {
  const auto out = simulate_epidemics(reference_config(N, M), SimOptions{}, runs, kSimSeed);
  std::vector<double> d, t;
  SimSummary s;
  s.tx_counts.assign(M - 1, 0);
  for (const auto& o : out) {
    d.push_back(o.delivery_delay);
    t.push_back(o.transmissions);
    ++s.tx_counts.at(o.transmissions - 1);
  }
  const auto cd = mean_ci(d);
  s.delay = cd.mean;
  s.hw_delay = cd.half_width;
  s.transmissions = mean_ci(t).mean;
  return s;
}

// Property checks gathered from every expanded and solved model.
struct Properties {
  int models = 0;
  int cdf_ok = 0;
  std::size_t cdf_points = 0;
  int tokens_ok = 0;
  int ode_runs = 0;
  int ode_ok = 0;
  std::vector<std::string> failures;
};

Properties g_props;

struct Solved {
  std::uint64_t states = 0;
  double mtta = 0.0;
  double transmissions = 0.0;
};

std::optional<Solved> solve_srn(const NetworkConfig& cfg, const MeetingRates& r, Engine engine) {
  const auto model = engine == Engine::Monolithic ? build_monolithic(cfg, r) : build_folded(cfg, r);
  const char* name = engine == Engine::Monolithic ? "mono" : "folded";
  ExpansionOptions eo;
  eo.max_states = kStateBudget;
  Ctmc c;
  try {
    c = expand_reachability(model, eo);
  } catch (const StateBudgetExceeded&) {
    return std::nullopt;
  }
  Solved s;
  s.states = c.states();
  const auto abs = mtta(c);
  s.mtta = abs.mtta;
  s.transmissions = expected_transmissions(c).exact_limit;

  ++g_props.models;
  const auto tag = std::string(name) + " N=" + std::to_string(cfg.N) + " M=" + std::to_string(cfg.M);
  if (conserve_tokens_check(c, conservation_groups(model, engine, cfg)))
    ++g_props.tokens_ok;
  else
    g_props.failures.push_back(tag + ": token conservation");
  // The limit F(inf) is the total absorption probability. Grid points are kept
  // while uniformization stays affordable; Markov's inequality bounds F(4E) >= 3/4.
  const double total = std::accumulate(abs.absorption.begin(), abs.absorption.end(), 0.0);
  const double q = 1.001 * *std::max_element(c.exit_rate.begin(), c.exit_rate.end());
  const double per_second = q * static_cast<double>(c.transitions() + c.states());
  std::vector<double> grid = {0.0};
  for (double f : {0.25, 0.5, 1.0, 2.0, 4.0})
    if (per_second * f * s.mtta <= kCdfWorkCap) grid.push_back(f * s.mtta);
  if (grid.size() == 1) grid.push_back(kCdfWorkCap / per_second);
  const auto F = delivery_cdf(c, grid);
  bool ok = std::abs(total - 1.0) < 1e-8 && F[0].value == 0.0 && F.back().value <= 1.0 + 1e-12;
  for (std::size_t i = 1; i < F.size(); ++i) ok = ok && F[i].value >= F[i - 1].value;
  if (grid.back() == 4 * s.mtta) ok = ok && F.back().value >= 0.75;
  g_props.cdf_points += grid.size();
  if (ok)
    ++g_props.cdf_ok;
  else
    g_props.failures.push_back(tag + ": delivery CDF shape");
  return s;
}

double ode_model_delay(const NetworkConfig& cfg, const MeetingRates& r) {
  const auto res = ode_delay(cfg, r);
  ++g_props.ode_runs;
  bool ok = res.trajectory.decreasing_steps == 0;
  for (const auto& s : res.trajectory.samples) {
    ok = ok && s.I_r >= 0 && s.susceptible_roaming(cfg.M) >= -1e-9;
    for (std::size_t j = 0; j < s.I_l.size(); ++j) ok = ok && s.I_l[j] >= 0 && s.S_l[j] >= 0;
  }
  if (ok)
    ++g_props.ode_ok;
  else
    g_props.failures.push_back("ode M=" + std::to_string(cfg.M) + ": conservation or monotonicity");
  return res.delay;
}

struct ReferenceCell {
  int N, M;
  double mono_delay, sim_delay, mono_tx;
};

// Reference values: delay (monolithic, simulation) and monolithic transmissions.
const ReferenceCell kReferenceCells[] = {
    {3, 5, 1272.72, 1253.50, 2.50},  {3, 10, 845.69, 821.60, 4.95},  {3, 15, 671.34, 639.88, 7.39},
    {3, 20, 570.16, 536.05, 9.82},   {4, 5, 1366.03, 1346.21, 2.50}, {4, 10, 892.31, 874.31, 4.96},
    {4, 15, 700.22, 668.48, 7.39},   {5, 5, 1442.32, 1416.52, 2.50}, {5, 10, 931.34, 906.67, 4.96},
    {5, 15, 724.65, 696.87, 7.39},
};

void criterion1() {
  struct Golden {
    int N, M;
    Engine e;
    std::uint64_t states;
  };
  const Golden golden[] = {
      {3, 5, Engine::Monolithic, 1475},   {4, 5, Engine::Monolithic, 3870},
      {3, 10, Engine::Monolithic, 56100}, {3, 15, Engine::Monolithic, 578000},
      {3, 5, Engine::Folded, 400},        {4, 5, Engine::Folded, 600},
      {3, 10, Engine::Folded, 3300},      {3, 15, Engine::Folded, 11200},
      {4, 15, Engine::Folded, 16800},     {5, 10, Engine::Folded, 6930},
      {5, 20, Engine::Folded, 55860},     {5, 50, Engine::Folded, 874650},
  };
  const MeetingRates unit{1.0, 1.0, 1.0, 2.0};
  bool ok = true;
  for (const auto& g : golden) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = reference_config(g.N, g.M);
    const auto model = g.e == Engine::Monolithic ? build_monolithic(cfg, unit) : build_folded(cfg, unit);
    const auto n = count_tangible_states(model);
    ok = ok && n == g.states;
    detail("%-6s N=%d M=%-3d states=%-8llu expected=%-8llu (%.1f s)", g.e == Engine::Monolithic ? "mono" : "folded",
           g.N, g.M, static_cast<unsigned long long>(n), static_cast<unsigned long long>(g.states),
           seconds_since(t0));
  }
  verdict(1, ok, "tangible state counts match the golden values exactly");
}

void criterion2(MeetingCache& mc) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = reference_config(3, 5);
  const auto c = expand_reachability(build_monolithic(cfg, mc.rates(3, 5)));
  const double exact = mtta(c).mtta;
  const auto sim = monte_carlo_ctmc(c, 100'000, 2);
  const double gap = rel(exact, sim.mean_time);
  const bool ok = std::abs(exact - sim.mean_time) <= sim.hw_time && gap < 0.01;
  detail("mtta=%.3f  monte carlo=%.3f +/- %.3f  gap=%.3f%% (%.1f s)", exact, sim.mean_time, sim.hw_time, 100 * gap,
         seconds_since(t0));
  verdict(2, ok, "mono N=3 M=5 mtta inside the 95% Monte Carlo half-width, gap < 1%");
}

void criterion3(const SimSummary& n4m15, const std::map<std::pair<int, int>, Solved>& mono) {
  const auto chi = chi_square_uniform_discrete(n4m15.tx_counts, 0.01);
  bool ok = chi.passed && rel(n4m15.transmissions, 7.5) <= 0.03;
  detail("sim N=4 M=15: uniform chi2=%.2f (dof %d, critical %.2f), mean transmissions=%.3f", chi.statistic, chi.dof,
         chi.critical_value, n4m15.transmissions);
  for (const auto& cell : kReferenceCells) {
    if (cell.N != 3 || cell.M > 15) continue;
    const auto& s = mono.at({cell.N, cell.M});
    const bool c = rel(s.transmissions, cell.mono_tx) <= 0.01;
    ok = ok && c;
    detail("mono N=3 M=%-2d transmissions=%.4f reference=%.2f", cell.M, s.transmissions, cell.mono_tx);
  }
  verdict(3, ok, "transmission counts uniform on {1..M-1}; analytic means match within 1%");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  MeetingCache mc;

  criterion1();
  criterion2(mc);

  // Criterion 4 (and inputs to criterion 3): every published cell.
  std::map<std::pair<int, int>, Solved> mono;
  SimSummary n4m15;
  {
    bool ok = true;
    int solved = 0;
    for (const auto& cell : kReferenceCells) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto r = mc.rates(cell.N, cell.M);
      const auto s = solve_srn(reference_config(cell.N, cell.M), r, Engine::Monolithic);
      if (!s) {
        detail("N=%d M=%-2d mono exceeds the %llu-state budget; excluded", cell.N, cell.M,
               static_cast<unsigned long long>(kStateBudget));
        continue;
      }
      ++solved;
      mono[{cell.N, cell.M}] = *s;
      const auto sim = simulate(cell.N, cell.M, 8000);
      if (cell.N == 4 && cell.M == 15) n4m15 = sim;
      const double pe = percent_error(s->mtta, sim.delay);
      const double abs_gap = rel(s->mtta, cell.mono_delay);
      const bool c = pe <= 8.0 && abs_gap <= 0.10;
      ok = ok && c;
      detail("N=%d M=%-2d states=%-8llu mono=%8.2f sim=%8.2f +/- %5.2f  PE=%5.2f%%  vs reference mono %7.2f "
             "(%+.1f%%), reference sim %7.2f  tx=%.3f/%.3f (%.0f s)%s",
             cell.N, cell.M, static_cast<unsigned long long>(s->states), s->mtta, sim.delay, sim.hw_delay, pe,
             cell.mono_delay, 100 * (s->mtta - cell.mono_delay) / cell.mono_delay, cell.sim_delay,
             s->transmissions, sim.transmissions, seconds_since(t0), c ? "" : "  <-- out of tolerance");
    }
    verdict(4, ok && solved > 0,
            "mono-vs-sim delay PE <= 8% and |mono - reference| <= 10% on " + std::to_string(solved) +
                " solvable cells");
  }

  criterion3(n4m15, mono);

  // Criterion 5: folded vs ODE against simulation, N=4.
  {
    bool ok = true;
    for (int M = 10; M <= 100; M += 10) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto cfg = reference_config(4, M);
      const auto r = mc.rates(4, M);
      const auto folded = solve_srn(cfg, r, Engine::Folded);
      const double ode = ode_model_delay(cfg, r);
      const auto sim = simulate(4, M, 4000);
      if (!folded) {
        ok = false;
        detail("M=%d folded exceeds the state budget", M);
        continue;
      }
      const double fg = std::abs(folded->mtta - sim.delay), og = std::abs(ode - sim.delay);
      bool c = rel(folded->mtta, sim.delay) <= 0.25;
      if (M <= 50) c = c && fg < og;
      ok = ok && c;
      detail("M=%-3d states=%-8llu folded=%7.2f ode=%7.2f sim=%7.2f +/- %5.2f  folded gap %5.1f%%  ode gap %5.1f%%  "
             "tx folded=%.2f sim=%.2f (%.0f s)%s",
             M, static_cast<unsigned long long>(folded->states), folded->mtta, ode, sim.delay, sim.hw_delay,
             100 * fg / sim.delay, 100 * og / sim.delay, folded->transmissions, sim.transmissions, seconds_since(t0),
             c ? "" : "  <-- out of tolerance");
    }
    verdict(5, ok, "folded closer to simulation than ODE for M <= 50; folded within 25% for M = 10..100");
  }

  // Criterion 6: exponential first-meeting times, N=3 layout.
  {
    bool ok = true;
    const double ref[] = {2.586e-4, 4.6303e-4, 6.13131e-4, 7.35581e-4, 8.26595e-4,
                          9.10946e-4, 9.62966e-4, 1.013051e-3, 1.047914e-3, 1.086226e-3};
    for (int n : {1, 4, 7, 10}) {
      const auto& v = mc.samples(3, MeetingScenario::Kind::RoamingVsLocalSet, n);
      const auto chi = chi_square_exponential(v, 40, 0.01);
      const auto est = rate_from_samples(v);
      bool c = chi.passed;
      if (n == 1 || n == 10) c = c && rel(est.rate, ref[n - 1]) <= 0.10;
      ok = ok && c;
      detail("|S_l|=%-2d chi2=%6.2f (dof %d, critical %.2f; dof %d critical %.2f) rate=%.4e +/- %.1e reference %.4e",
             n, chi.statistic, chi.dof, chi.critical_value, chi.alt_dof, chi.alt_critical_value, est.rate,
             est.half_width, ref[n - 1]);
    }
    verdict(6, ok, "first-meeting times pass the 40-bin exponential test; R_meet(1), R_meet(10) within 10%");
  }

  // Criterion 7: properties collected above plus reproducibility and redistribution checks.
  {
    bool ok = g_props.failures.empty() && g_props.models > 0 && g_props.ode_runs > 0;
    detail("CDF shape %d/%d models (%zu grid points), token conservation %d/%d models, ODE invariants %d/%d runs", g_props.cdf_ok,
           g_props.models, g_props.cdf_points, g_props.tokens_ok, g_props.models, g_props.ode_ok, g_props.ode_runs);
    for (const auto& f : g_props.failures) detail("failure: %s", f.c_str());

    bool sums = true;
    std::uint64_t cases = 0;
    auto check = [&](int tokens, const std::vector<double>& p, std::optional<int> src, CountVariant v) {
      const auto n = approx_local_counts(tokens, p, src, v).n_hat;
      const int extra = (v == CountVariant::Infected && src) ? 1 : 0;
      sums = sums && std::accumulate(n.begin(), n.end(), 0) == tokens + extra &&
             std::all_of(n.begin(), n.end(), [](int x) { return x >= 0; });
      ++cases;
    };
    for (int N = 1; N <= 5; ++N) {
      std::vector<int> parts(N, 0);
      std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == N - 1) {
          parts[i] = left;
          std::vector<double> p(N);
          for (int k = 0; k < N; ++k) p[k] = parts[k] / 10.0;
          for (int t = 0; t <= 12; ++t) {
            check(t, p, std::nullopt, CountVariant::Susceptible);
            for (int s = 0; s < N; ++s) check(t, p, s, CountVariant::Infected);
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
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20000; ++trial) {
      const int N = 1 + trial % 5;
      std::vector<double> p(N);
      double s = 0;
      for (auto& x : p) s += (x = u(rng));
      for (auto& x : p) x /= s;
      const int t = static_cast<int>(u(rng) * 256);
      check(t, p, std::nullopt, CountVariant::Susceptible);
      check(t, p, trial % N, CountVariant::Infected);
    }
    detail("local-count redistribution preserved the total in %llu cases: %s",
           static_cast<unsigned long long>(cases), sums ? "yes" : "no");

    const auto cfg = reference_config(3, 6);
    const auto a = simulate_epidemics(cfg, SimOptions{}, 50, 99);
    const auto b = simulate_epidemics(cfg, SimOptions{}, 50, 99);
    bool repro = true;
    for (std::size_t i = 0; i < a.size(); ++i)
      repro = repro && a[i].delivery_delay == b[i].delivery_delay && a[i].transmissions == b[i].transmissions &&
              a[i].infection_times == b[i].infection_times;
    MeetingScenario sc{MeetingScenario::Kind::RoamingVsLocalSet, 2, 0};
    repro = repro && meeting_samples(cfg, sc, 50, kDt, 5) == meeting_samples(cfg, sc, 50, kDt, 5);
    const auto c = expand_reachability(build_monolithic(reference_config(3, 5), MeetingRates{1e-3, 1e-4, 2e-4, 5e-4}));
    const auto m1 = monte_carlo_ctmc(c, 2000, 3), m2 = monte_carlo_ctmc(c, 2000, 3);
    repro = repro && m1.mean_time == m2.mean_time && m1.var_time == m2.var_time;
    detail("bit-reproducible under fixed seeds (simulation, meetings, Monte Carlo): %s", repro ? "yes" : "no");
    verdict(7, ok && sums && repro, "property suites hold");
  }

  std::printf("acceptance finished in %.0f s: %d criterion(s) failed\n", seconds_since(start), g_failed);
  return g_failed == 0 ? 0 : 1;
}
