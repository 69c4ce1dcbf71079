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

#include "epiroute/solve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "epiroute/models.hpp"
#include "epiroute/rng.hpp"

namespace epiroute {

namespace {

void require_absorbing(const Ctmc& c) {
  const std::size_t n = c.states();
  if (c.absorbing_states.empty()) throw NotAbsorbing("chain has no absorbing state");
  // Reverse adjacency, built transiently.
  std::vector<std::uint64_t> in_ptr(n + 1, 0);
  for (std::size_t k = 0; k < c.col.size(); ++k) ++in_ptr[c.col[k] + 1];
  for (std::size_t i = 0; i < n; ++i) in_ptr[i + 1] += in_ptr[i];
  std::vector<StateIndex> in_src(c.col.size());
  {
    std::vector<std::uint64_t> fill(in_ptr.begin(), in_ptr.end() - 1);
    for (StateIndex s = 0; s < n; ++s)
      for (auto k = c.row_ptr[s]; k < c.row_ptr[s + 1]; ++k) in_src[fill[c.col[k]]++] = s;
  }
  std::vector<std::uint8_t> reach(n, 0);
  std::vector<StateIndex> stack(c.absorbing_states.begin(), c.absorbing_states.end());
  for (StateIndex a : stack) reach[a] = 1;
  while (!stack.empty()) {
    const StateIndex s = stack.back();
    stack.pop_back();
    for (auto k = in_ptr[s]; k < in_ptr[s + 1]; ++k)
      if (!reach[in_src[k]]) {
        reach[in_src[k]] = 1;
        stack.push_back(in_src[k]);
      }
  }
  for (std::size_t s = 0; s < n; ++s)
    if (!reach[s]) throw NotAbsorbing("state " + std::to_string(s) + " cannot reach the absorbing set");
}

// Expected sojourn times x over transient states: x_j q_j = pi0_j + sum_i x_i Q_ij.
std::vector<double> sojourn_direct(const Ctmc& c, const std::vector<double>& pi0, AbsorptionResult& res) {
  const std::size_t n = c.states();
  std::vector<int> idx(n, -1);
  int nt = 0;
  for (std::size_t s = 0; s < n; ++s)
    if (!c.is_absorbing[s]) idx[s] = nt++;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b(nt);
  for (std::size_t s = 0; s < n; ++s) {
    if (idx[s] < 0) continue;
    trip.emplace_back(idx[s], idx[s], c.exit_rate[s]);
    b[idx[s]] = pi0[s];
    for (auto k = c.row_ptr[s]; k < c.row_ptr[s + 1]; ++k)
      if (idx[c.col[k]] >= 0) trip.emplace_back(idx[c.col[k]], idx[s], -c.rate[k]);
  }
  Eigen::SparseMatrix<double> A(nt, nt);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU factorization failed");
  Eigen::VectorXd y = lu.solve(b);
  if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU solve failed");
  const double bn = b.lpNorm<1>();
  res.residual = bn > 0 ? (A * y - b).lpNorm<1>() / bn : 0.0;
  std::vector<double> x(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    if (idx[s] >= 0) x[s] = y[idx[s]];
  return x;
}

std::vector<double> sojourn_iterative(const Ctmc& c, const std::vector<double>& pi0, const SolverOptions& opts,
                                      AbsorptionResult& res) {
  const std::size_t n = c.states();
  std::vector<double> x(n, 0.0), acc_cur(n, 0.0), acc_prev(n, 0.0), acc_next(n, 0.0);
  const double omega = opts.relaxation;
  const double norm = std::accumulate(pi0.begin(), pi0.end(), 0.0, [](double a, double v) { return a + std::abs(v); });
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    for (StateIndex j = 0; j < n; ++j) {
      if (c.is_absorbing[j]) continue;
      const double gs = (pi0[j] + acc_cur[j] + acc_prev[j]) / c.exit_rate[j];
      x[j] = omega == 1.0 ? gs : (1 - omega) * x[j] + omega * gs;
      const double xj = x[j];
      for (auto k = c.row_ptr[j]; k < c.row_ptr[j + 1]; ++k) {
        const StateIndex d = c.col[k];
        if (d > j)
          acc_cur[d] += xj * c.rate[k];
        else
          acc_next[d] += xj * c.rate[k];
      }
    }
    double r = 0.0;
    for (StateIndex j = 0; j < n; ++j) {
      if (c.is_absorbing[j]) continue;
      r += std::abs(pi0[j] + acc_cur[j] + acc_next[j] - c.exit_rate[j] * x[j]);
    }
    res.residual = norm > 0 ? r / norm : 0.0;
    res.iterations = it;
    if (!std::isfinite(res.residual)) throw SingularSystem("iterative solve diverged");
    if (res.residual < opts.tolerance) return x;
    acc_prev.swap(acc_next);
    std::fill(acc_next.begin(), acc_next.end(), 0.0);
    std::fill(acc_cur.begin(), acc_cur.end(), 0.0);
  }
  throw SingularSystem("iterative solve did not reach tolerance; residual " + std::to_string(res.residual));
}

}  // namespace

AbsorptionResult mtta(const Ctmc& c, std::span<const double> reward, const SolverOptions& opts) {
  if (!reward.empty() && reward.size() != c.states()) throw std::invalid_argument("reward length != state count");
  require_absorbing(c);
  AbsorptionResult res;
  const std::size_t n = c.states();
  const auto pi0 = c.initial_distribution();
  const std::size_t transient_count = n - c.absorbing_states.size();
  std::vector<double> x;
  if (transient_count == 0) {
    x.assign(n, 0.0);
  } else if (transient_count < opts.direct_threshold && !opts.force_iterative) {
    x = sojourn_direct(c, pi0, res);
    if (res.residual > std::max(opts.tolerance, 1e-9)) throw SingularSystem("direct solve residual too large");
  } else {
    x = sojourn_iterative(c, pi0, opts, res);
  }

  std::vector<double> into(n, 0.0);
  for (StateIndex s = 0; s < n; ++s) {
    if (c.is_absorbing[s]) {
      into[s] += pi0[s];
      continue;
    }
    res.mtta += x[s];
    for (auto k = c.row_ptr[s]; k < c.row_ptr[s + 1]; ++k)
      if (c.is_absorbing[c.col[k]]) into[c.col[k]] += x[s] * c.rate[k];
  }
  res.absorption.reserve(c.absorbing_states.size());
  for (StateIndex a : c.absorbing_states) {
    res.absorption.push_back(into[a]);
    if (!reward.empty()) res.terminal_reward += into[a] * reward[a];
  }
  return res;
}

namespace {

struct Uniformized {
  const Ctmc& c;
  double q;

  // out = in * (I + Q/q)
  void step(const std::vector<double>& in, std::vector<double>& out) const {
    const std::size_t n = c.states();
    for (std::size_t s = 0; s < n; ++s) out[s] = in[s] * (1.0 - c.exit_rate[s] / q);
    for (StateIndex s = 0; s < n; ++s) {
      const double v = in[s];
      if (v == 0.0) continue;
      const double f = v / q;
      for (auto k = c.row_ptr[s]; k < c.row_ptr[s + 1]; ++k) out[c.col[k]] += f * c.rate[k];
    }
  }

  std::vector<double> propagate(const std::vector<double>& pi, double dt, double tol) const {
    if (dt <= 0.0 || q == 0.0) return pi;
    const double lam = q * dt;
    std::vector<double> acc(pi.size(), 0.0), v = pi, next(pi.size());
    double cum = 0.0;
    const double log_lam = std::log(lam);
    for (std::size_t k = 0;; ++k) {
      const double w = std::exp(-lam + k * log_lam - std::lgamma(static_cast<double>(k) + 1.0));
      if (w > 0.0)
        for (std::size_t s = 0; s < acc.size(); ++s) acc[s] += w * v[s];
      cum += w;
      if (k >= lam && 1.0 - cum < tol) break;
      step(v, next);
      v.swap(next);
    }
    // Spread the truncated tail proportionally so the result stays a distribution.
    if (cum > 0.0)
      for (double& a : acc) a /= cum;
    return acc;
  }
};

double dot(std::span<const double> a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<TransientResult> transient_curve(const Ctmc& c, std::span<const double> grid, double tol,
                                             std::span<const double> reward, bool keep_probabilities) {
  if (!(tol > 0.0 && tol <= 1e-3)) throw std::invalid_argument("transient: tol must lie in (0, 1e-3]");
  if (reward.size() != c.states()) throw std::invalid_argument("reward length != state count");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0) throw std::invalid_argument("transient: negative time");
    if (i && grid[i] < grid[i - 1]) throw std::invalid_argument("transient: grid must be ascending");
  }
  const double max_exit = c.exit_rate.empty() ? 0.0 : *std::max_element(c.exit_rate.begin(), c.exit_rate.end());
  const Uniformized u{c, 1.001 * max_exit};
  std::vector<TransientResult> out;
  auto pi = c.initial_distribution();
  double t_prev = 0.0;
  for (double t : grid) {
    pi = u.propagate(pi, t - t_prev, tol);
    t_prev = t;
    TransientResult r;
    r.time = t;
    r.expected_reward = dot(reward, pi);
    if (keep_probabilities) r.probabilities = pi;
    out.push_back(std::move(r));
  }
  return out;
}

TransientResult transient(const Ctmc& c, double t, double tol, std::span<const double> reward) {
  const double g[1] = {t};
  auto r = transient_curve(c, g, tol, reward, true);
  return std::move(r.front());
}

std::vector<CdfPoint> delivery_cdf(const Ctmc& c, std::span<const double> grid, double tol) {
  const auto pts = transient_curve(c, grid, tol, c.reward(kDeliveredReward));
  std::vector<CdfPoint> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back({p.time, p.expected_reward});
  return out;
}

TransmissionEstimate expected_transmissions(const Ctmc& c, double t_large, const SolverOptions& opts) {
  const auto reward = c.reward(kTransmissionsReward);
  const auto abs = mtta(c, reward, opts);
  TransmissionEstimate e;
  e.exact_limit = abs.terminal_reward;
  e.t_large = t_large > 0.0 ? t_large : 20.0 * abs.mtta;
  const double max_exit = c.exit_rate.empty() ? 0.0 : *std::max_element(c.exit_rate.begin(), c.exit_rate.end());
  const double work = max_exit * e.t_large * static_cast<double>(c.transitions() + c.states());
  if (work > opts.transient_work_cap) {
    e.at_t_large = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  e.at_t_large = transient(c, e.t_large, 1e-10, reward).expected_reward;
  e.truncation_warning = std::abs(e.at_t_large - e.exact_limit) > 0.01 * std::abs(e.exact_limit);
  return e;
}

McStats monte_carlo_ctmc(const Ctmc& c, std::uint64_t runs, std::uint64_t seed, std::span<const double> reward) {
  if (runs < 1) throw std::invalid_argument("monte_carlo_ctmc: runs must be >= 1");
  if (!reward.empty() && reward.size() != c.states()) throw std::invalid_argument("reward length != state count");
  McStats st;
  st.runs = runs;
  double sum_t = 0, sum_t2 = 0, sum_r = 0, sum_r2 = 0;
  for (std::uint64_t run = 0; run < runs; ++run) {
    Rng rng = make_rng(seed, run);
    double u = uniform01(rng);
    StateIndex s = c.initial.back().first;
    for (auto [st0, p] : c.initial) {
      if (u < p) {
        s = st0;
        break;
      }
      u -= p;
    }
    double t = 0.0;
    while (!c.is_absorbing[s]) {
      const double q = c.exit_rate[s];
      t += -std::log1p(-uniform01(rng)) / q;
      double pick = uniform01(rng) * q;
      auto k = c.row_ptr[s];
      const auto end = c.row_ptr[s + 1];
      for (; k + 1 < end; ++k) {
        if (pick < c.rate[k]) break;
        pick -= c.rate[k];
      }
      s = c.col[k];
    }
    const double r = reward.empty() ? 0.0 : reward[s];
    sum_t += t;
    sum_t2 += t * t;
    sum_r += r;
    sum_r2 += r * r;
  }
  const double n = static_cast<double>(runs);
  st.mean_time = sum_t / n;
  st.mean_reward = sum_r / n;
  if (runs > 1) {
    st.var_time = std::max(0.0, (sum_t2 - n * st.mean_time * st.mean_time) / (n - 1));
    st.var_reward = std::max(0.0, (sum_r2 - n * st.mean_reward * st.mean_reward) / (n - 1));
    st.hw_time = 1.96 * std::sqrt(st.var_time / n);
    st.hw_reward = 1.96 * std::sqrt(st.var_reward / n);
  } else {
    st.hw_time = st.hw_reward = std::numeric_limits<double>::quiet_NaN();
  }
  return st;
}

}  // namespace epiroute
