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

#include "epiroute/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace epiroute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double exponential(Rng& rng, double rate) {
  if (rate <= 0.0) return kInf;
  return -std::log1p(-uniform01(rng)) / rate;
}

Point uniform_in(const Box& b, Rng& rng) {
  const double x = b.x0 + uniform01(rng) * (b.x1 - b.x0);
  const double y = b.y0 + uniform01(rng) * (b.y1 - b.y0);
  return {x, y};
}

// Straight motion on [lo, hi] with mirror reflection; flips v on odd bounce counts.
void reflect_axis(double& x, double& v, double lo, double hi, double t) {
  const double moved = x + v * t;
  if (moved >= lo && moved <= hi) {
    x = moved;
    return;
  }
  const double w = hi - lo;
  if (w <= 0.0) return;
  const double period = 2.0 * w;
  double u = std::fmod(x - lo + v * t, period);
  if (u < 0.0) u += period;
  if (u > w) {
    u = period - u;
    v = -v;
  }
  x = lo + u;
}

void set_heading(NodeState& n, double heading) {
  n.heading = heading;
  n.vx = n.speed * std::cos(heading);
  n.vy = n.speed * std::sin(heading);
}

void move_straight(NodeState& n, const Box& b, double t) {
  const double vx0 = n.vx, vy0 = n.vy;
  reflect_axis(n.pos.x, n.vx, b.x0, b.x1, t);
  reflect_axis(n.pos.y, n.vy, b.y0, b.y1, t);
  if (n.vx != vx0 || n.vy != vy0) n.heading = std::atan2(n.vy, n.vx);
}

Box region_of(const NodeState& n, const NetworkConfig& cfg) {
  return n.mode == Mode::Local ? community_box(cfg, n.community) : common_area(cfg);
}

int pick_community(const NetworkConfig& cfg, Rng& rng) {
  double u = uniform01(rng);
  for (int j = 0; j + 1 < cfg.N; ++j) {
    if (u < cfg.P_sel[j]) return j;
    u -= cfg.P_sel[j];
  }
  return cfg.N - 1;
}

// Decides what happens when a travel ends at time `now`.
void end_travel(NodeState& n, double now, const NetworkConfig& cfg, Rng& rng) {
  if (n.mode == Mode::Local) {
    if (uniform01(rng) < cfg.P_r) {
      n.mode = Mode::Roaming;
      n.community = -1;
    }
    start_travel(n, now, cfg, rng);
    return;
  }
  // Roaming.
  if (uniform01(rng) < cfg.P_l) {
    const int j = pick_community(cfg, rng);
    n.community = j;
    const Box c = community_box(cfg, j);
    if (c.contains(n.pos, 0.0)) {
      n.mode = Mode::Local;
      start_travel(n, now, cfg, rng);
    } else {
      n.mode = Mode::Transitional;
      n.target = uniform_in(c, rng);
      n.speed = cfg.v_trans;
      set_heading(n, std::atan2(n.target.y - n.pos.y, n.target.x - n.pos.x));
      n.travel_end = kInf;
    }
    return;
  }
  start_travel(n, now, cfg, rng);
}

}  // namespace

Box common_area(const NetworkConfig& cfg) { return {0.0, 0.0, cfg.L, cfg.L}; }

Box community_box(const NetworkConfig& cfg, int j) {
  const Point c = cfg.community_centers.at(j);
  const double h = cfg.L_c / 2;
  return {c.x - h, c.y - h, c.x + h, c.y + h};
}

void start_travel(NodeState& n, double now, const NetworkConfig& cfg, Rng& rng) {
  n.speed = cfg.v_max - uniform01(rng) * (cfg.v_max - cfg.v_min);  // (v_min, v_max]
  set_heading(n, 2.0 * std::numbers::pi * uniform01(rng));
  n.travel_end = now + exponential(rng, n.mode == Mode::Local ? cfg.alpha : cfg.beta);
}

namespace {

// Trusts the cached velocity; the public advance() refreshes it first.
void step_node(NodeState& n, double now, double dt, const NetworkConfig& cfg, Rng& rng) {
  double t = now;
  const double end = now + dt;
  while (t < end) {
    if (n.mode == Mode::Transitional) {
      const double dx = n.target.x - n.pos.x, dy = n.target.y - n.pos.y;
      const double dist = std::hypot(dx, dy);
      const double reach = n.speed * (end - t);
      if (reach < dist) {
        n.pos.x += dx / dist * reach;
        n.pos.y += dy / dist * reach;
        break;
      }
      t += dist / n.speed;
      n.pos = n.target;
      n.mode = Mode::Local;
      start_travel(n, t, cfg, rng);
      continue;
    }
    const double seg_end = std::min(end, n.travel_end);
    move_straight(n, region_of(n, cfg), seg_end - t);
    t = seg_end;
    if (n.travel_end <= end) end_travel(n, t, cfg, rng);
  }
}

}  // namespace

NodeState advance(NodeState n, double now, double dt, const NetworkConfig& cfg, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("advance: dt must be positive");
  set_heading(n, n.heading);
  step_node(n, now, dt, cfg, rng);
  return n;
}

namespace {

double dist2(Point a, Point b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

void check_step(const NetworkConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (std::max(cfg.v_max, cfg.v_trans) * dt >= cfg.R / 4)
    throw std::invalid_argument("dt too large: a node may move R/4 or more in one step");
}

struct Transfer {
  double time;
  std::uint64_t key;  // random tie-break between equal completion times
  int node;
  bool operator>(const Transfer& o) const { return time != o.time ? time > o.time : key > o.key; }
};

}  // namespace

SimOutcome run_epidemic(const NetworkConfig& cfg, const SimOptions& opts, Rng& rng) {
  check_step(cfg, opts.dt);
  if (opts.tx_delay < 0.0) throw std::invalid_argument("tx_delay must be nonnegative");
  const int M = cfg.M;
  const double R2 = cfg.R * cfg.R;
  const Box area = common_area(cfg);
  std::vector<NodeState> nodes(M);
  for (auto& n : nodes) {
    n.pos = uniform_in(area, rng);
    n.mode = Mode::Roaming;
    start_travel(n, 0.0, cfg, rng);
  }
  nodes[0].infected = true;
  std::vector<std::uint8_t> scheduled(M, 0);
  scheduled[0] = 1;
  std::vector<int> infected = {0};
  std::priority_queue<Transfer, std::vector<Transfer>, std::greater<>> queue;
  SimOutcome out;

  // Uniform grid with cell side R over the not-yet-reached nodes, rebuilt per step.
  const int G = std::max(1, static_cast<int>(std::ceil(cfg.L / cfg.R)));
  std::vector<int> head(static_cast<std::size_t>(G) * G, -1), next(M, -1), touched;
  auto cell_xy = [&](Point p, int& cx, int& cy) {
    cx = std::clamp(static_cast<int>(p.x / cfg.R), 0, G - 1);
    cy = std::clamp(static_cast<int>(p.y / cfg.R), 0, G - 1);
  };

  auto schedule_from = [&](int src, double t) {
    int cx, cy;
    cell_xy(nodes[src].pos, cx, cy);
    for (int y = std::max(0, cy - 1); y <= std::min(G - 1, cy + 1); ++y)
      for (int x = std::max(0, cx - 1); x <= std::min(G - 1, cx + 1); ++x)
        for (int j = head[static_cast<std::size_t>(y) * G + x]; j >= 0; j = next[j])
          if (!scheduled[j] && dist2(nodes[src].pos, nodes[j].pos) <= R2) {
            scheduled[j] = 1;
            queue.push({t + opts.tx_delay, rng(), j});
          }
  };

  for (std::uint64_t step = 0;; ++step) {
    const double now = step * opts.dt;
    if (step > 0)
      for (auto& n : nodes) step_node(n, now - opts.dt, opts.dt, cfg, rng);
    for (int c : touched) head[c] = -1;
    touched.clear();
    for (int j = 0; j < M; ++j) {
      if (scheduled[j]) continue;
      int cx, cy;
      cell_xy(nodes[j].pos, cx, cy);
      const int c = cy * G + cx;
      if (head[c] < 0) touched.push_back(c);
      next[j] = head[c];
      head[c] = j;
    }
    for (std::size_t k = 0, m = infected.size(); k < m; ++k) schedule_from(infected[k], now);
    // Positions are frozen while a cascade of back-to-back transfers resolves.
    while (!queue.empty()) {
      const Transfer tr = queue.top();
      queue.pop();
      nodes[tr.node].infected = true;
      infected.push_back(tr.node);
      out.infection_times.emplace_back(tr.time, tr.node);
      if (tr.node == 1) {
        out.delivery_delay = tr.time;
        out.transmissions = static_cast<int>(infected.size()) - 1;
        return out;
      }
      schedule_from(tr.node, tr.time);
    }
  }
}

std::vector<SimOutcome> simulate_epidemics(const NetworkConfig& cfg, const SimOptions& opts, std::uint64_t runs,
                                           std::uint64_t seed) {
  validate_config(cfg);
  std::vector<SimOutcome> out;
  out.reserve(runs);
  for (std::uint64_t r = 0; r < runs; ++r) {
    Rng rng = make_rng(seed, r);
    out.push_back(run_epidemic(cfg, opts, rng));
  }
  return out;
}

double first_meeting_time(const NetworkConfig& base, const MeetingScenario& sc, double dt, Rng& rng) {
  check_step(base, dt);
  NetworkConfig cfg = base;
  cfg.P_r = 0.0;
  cfg.P_l = 0.0;
  std::vector<NodeState> a, b;
  auto make = [&](Mode mode) {
    NodeState n;
    n.mode = mode;
    n.community = mode == Mode::Local ? sc.community : -1;
    return n;
  };
  switch (sc.kind) {
    case MeetingScenario::Kind::LocalPair:
      a.push_back(make(Mode::Local));
      b.push_back(make(Mode::Local));
      break;
    case MeetingScenario::Kind::RoamingPair:
      a.push_back(make(Mode::Roaming));
      b.push_back(make(Mode::Roaming));
      break;
    case MeetingScenario::Kind::RoamingVsLocalSet:
      if (sc.local_nodes < 1) throw std::invalid_argument("local set must be nonempty");
      a.push_back(make(Mode::Roaming));
      b.assign(sc.local_nodes, make(Mode::Local));
      break;
  }
  const double R2 = cfg.R * cfg.R;
  auto any_contact = [&] {
    for (const auto& x : a)
      for (const auto& y : b)
        if (dist2(x.pos, y.pos) <= R2) return true;
    return false;
  };
  // Redraw the whole placement until the two sides start out of range.
  do {
    for (auto* side : {&a, &b})
      for (auto& n : *side) n.pos = uniform_in(region_of(n, cfg), rng);
  } while (any_contact());
  for (auto* side : {&a, &b})
    for (auto& n : *side) start_travel(n, 0.0, cfg, rng);

  constexpr double kHorizon = 1e8;
  for (std::uint64_t step = 1;; ++step) {
    const double now = step * dt;
    if (now > kHorizon) throw std::runtime_error("first meeting not observed within the horizon");
    for (auto* side : {&a, &b})
      for (auto& n : *side) step_node(n, now - dt, dt, cfg, rng);
    if (any_contact()) return now;
  }
}

namespace {

std::uint64_t scenario_stream(const MeetingScenario& sc) {
  switch (sc.kind) {
    case MeetingScenario::Kind::LocalPair:
      return 1;
    case MeetingScenario::Kind::RoamingPair:
      return 2;
    case MeetingScenario::Kind::RoamingVsLocalSet:
      break;
  }
  return 1000 + static_cast<std::uint64_t>(sc.local_nodes);
}

}  // namespace

std::vector<double> meeting_samples(const NetworkConfig& cfg, const MeetingScenario& sc, std::uint64_t runs,
                                    double dt, std::uint64_t seed) {
  validate_config(cfg);
  const std::uint64_t sub = derive_seed(seed, scenario_stream(sc));
  std::vector<double> t;
  t.reserve(runs);
  for (std::uint64_t r = 0; r < runs; ++r) {
    Rng rng = make_rng(sub, r);
    t.push_back(first_meeting_time(cfg, sc, dt, rng));
  }
  return t;
}

RateEstimate rate_from_samples(const std::vector<double>& times) {
  RateEstimate e;
  e.samples = times.size();
  if (times.empty()) throw std::invalid_argument("rate_from_samples: no samples");
  double sum = 0.0, sum2 = 0.0;
  for (double t : times) {
    sum += t;
    sum2 += t * t;
  }
  const double n = static_cast<double>(times.size());
  e.mean_time = sum / n;
  e.rate = 1.0 / e.mean_time;
  if (times.size() > 1) {
    const double var = std::max(0.0, (sum2 - n * e.mean_time * e.mean_time) / (n - 1));
    e.half_width = 1.96 * std::sqrt(var / n) / (e.mean_time * e.mean_time);
  } else {
    e.half_width = std::numeric_limits<double>::quiet_NaN();
  }
  return e;
}

RatesFile estimate_rates(const NetworkConfig& cfg, std::uint64_t runs, double dt, std::uint64_t seed) {
  if (runs < 1) throw std::invalid_argument("estimate_rates: runs must be >= 1");
  if (cfg.M < 3) throw std::invalid_argument("estimate_rates: M must be at least 3");
  const MeetingScenario scenarios[4] = {
      {MeetingScenario::Kind::LocalPair, 0, 0},
      {MeetingScenario::Kind::RoamingPair, 0, 0},
      {MeetingScenario::Kind::RoamingVsLocalSet, 1, 0},
      {MeetingScenario::Kind::RoamingVsLocalSet, cfg.M - 1, 0},
  };
  RatesFile f;
  double* fields[4] = {&f.rates.lambda, &f.rates.mu, &f.rates.gamma, &f.rates.eta};
  for (int k = 0; k < 4; ++k) {
    const auto e = rate_from_samples(meeting_samples(cfg, scenarios[k], runs, dt, seed));
    *fields[k] = e.rate;
    f.samples[k] = e.samples;
    f.half_width[k] = e.half_width;
  }
  return f;
}

std::vector<std::pair<int, RateEstimate>> estimate_r_meet_curve(const NetworkConfig& cfg,
                                                                const std::vector<int>& n_values,
                                                                std::uint64_t runs, double dt, std::uint64_t seed) {
  std::vector<std::pair<int, RateEstimate>> out;
  for (int n : n_values) {
    if (n < 1 || n > cfg.M - 1) throw std::invalid_argument("R_meet curve: n must lie in [1, M-1]");
    MeetingScenario sc{MeetingScenario::Kind::RoamingVsLocalSet, n, 0};
    out.emplace_back(n, rate_from_samples(meeting_samples(cfg, sc, runs, dt, seed)));
  }
  return out;
}

}  // namespace epiroute
