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

#ifndef EPIROUTE_MOBILITY_HPP
#define EPIROUTE_MOBILITY_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "epiroute/config.hpp"
#include "epiroute/rng.hpp"

namespace epiroute {

enum class Mode : std::uint8_t { Roaming, Local, Transitional };

struct NodeState {
  Point pos;
  Mode mode = Mode::Roaming;
  int community = -1;  // local or transitional target community
  double heading = 0.0;
  double speed = 0.0;
  double vx = 0.0, vy = 0.0;  // cached speed * (cos, sin) of heading
  double travel_end = 0.0;  // absolute time; unused while transitional
  Point target;             // transitional destination
  bool infected = false;
};

struct Box {
  double x0, y0, x1, y1;
  bool contains(Point p, double slack = 1e-9) const {
    return p.x >= x0 - slack && p.x <= x1 + slack && p.y >= y0 - slack && p.y <= y1 + slack;
  }
};

Box common_area(const NetworkConfig& cfg);
Box community_box(const NetworkConfig& cfg, int j);

/// Starts a fresh travel in the node's current mode: speed on (v_min, v_max],
/// heading on [0, 2 pi), duration exponential with rate alpha (local) or beta (roaming).
void start_travel(NodeState& node, double now, const NetworkConfig& cfg, Rng& rng);

/// Moves the node from `now` to `now + dt`, reflecting off the walls of its
/// region and handling every travel end inside the interval.
NodeState advance(NodeState node, double now, double dt, const NetworkConfig& cfg, Rng& rng);

struct SimOutcome {
  double delivery_delay = 0.0;
  int transmissions = 0;
  std::vector<std::pair<double, int>> infection_times;  // (time, node), source excluded
};

struct SimOptions {
  double tx_delay = 0.01;
  double dt = 0.1;
};

/// One replication: M roaming nodes placed uniformly, node 0 carries the
/// message, node 1 is the destination.
SimOutcome run_epidemic(const NetworkConfig& cfg, const SimOptions& opts, Rng& rng);

/// Replications with sub-seeds derived from `seed`.
std::vector<SimOutcome> simulate_epidemics(const NetworkConfig& cfg, const SimOptions& opts, std::uint64_t runs,
                                           std::uint64_t seed);

/// Who takes part in a first-meeting experiment. Mode switching is disabled.
struct MeetingScenario {
  enum class Kind { LocalPair, RoamingPair, RoamingVsLocalSet };
  Kind kind = Kind::RoamingVsLocalSet;
  int local_nodes = 1;  // size of the local set for RoamingVsLocalSet
  int community = 0;
};

/// Time of the first step at which the two sides come within R.
double first_meeting_time(const NetworkConfig& cfg, const MeetingScenario& sc, double dt, Rng& rng);

std::vector<double> meeting_samples(const NetworkConfig& cfg, const MeetingScenario& sc, std::uint64_t runs,
                                    double dt, std::uint64_t seed);

struct RateEstimate {
  double rate = 0.0;
  double half_width = 0.0;  // 95%, delta method
  std::uint64_t samples = 0;
  double mean_time = 0.0;
};

RateEstimate rate_from_samples(const std::vector<double>& times);

/// lambda, mu, gamma = R_meet(1) and eta = R_meet(M-1), each from `runs` samples.
RatesFile estimate_rates(const NetworkConfig& cfg, std::uint64_t runs, double dt, std::uint64_t seed);

std::vector<std::pair<int, RateEstimate>> estimate_r_meet_curve(const NetworkConfig& cfg,
                                                                const std::vector<int>& n_values,
                                                                std::uint64_t runs, double dt, std::uint64_t seed);

}  // namespace epiroute

#endif  // EPIROUTE_MOBILITY_HPP
