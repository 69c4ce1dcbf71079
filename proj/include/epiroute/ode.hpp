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

#ifndef EPIROUTE_ODE_HPP
#define EPIROUTE_ODE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "epiroute/config.hpp"

namespace epiroute {

/// Mean-field populations: infected/susceptible local nodes per community and
/// infected roaming nodes. Susceptible roaming nodes are implied by M.
struct OdeState {
  std::vector<double> I_l;
  std::vector<double> S_l;
  double I_r = 0.0;
  double t = 0.0;

  double total_infected() const;
  double susceptible_roaming(int M) const;
};

/// Which local population drives infection of susceptible roaming nodes.
/// `SusceptibleLocal` keeps the term exactly as the fluid equations are usually
/// written down; `InfectedLocal` uses the infected local population instead.
enum class RoamingCoupling { SusceptibleLocal, InfectedLocal };

/// Continuous interpolation of the first-meeting rate, with the unit step
/// theta(0) = 1 so that the value at n = 1 is exactly gamma.
double r_meet_continuous(double n, const MeetingRates& rates, int M);

OdeState ode_rhs(const OdeState& s, const NetworkConfig& cfg, const MeetingRates& rates,
                 RoamingCoupling coupling = RoamingCoupling::SusceptibleLocal);

class StepTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NotSaturated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OdeTrajectory {
  std::vector<OdeState> samples;  // one per dt, starting at t = 0
  std::uint64_t clamped = 0;      // negative excursions reset to zero
  std::uint64_t decreasing_steps = 0;  // steps where total infected fell by more than 1e-9
};

/// Initial condition: one infected roaming node, everyone else roaming susceptible.
OdeState ode_initial_state(const NetworkConfig& cfg);

/// Classical fixed-step RK4 from the initial condition up to t_max.
OdeTrajectory integrate(const NetworkConfig& cfg, const MeetingRates& rates, double t_max, double dt,
                        RoamingCoupling coupling = RoamingCoupling::SusceptibleLocal);

/// E(D) = t_max - integral(total infected - 1) / (M - 1), trapezoid rule.
/// Throws NotSaturated unless the final total is at least 0.999 M.
double average_delay_ode(const OdeTrajectory& traj, int M);

struct OdeDelayOptions {
  double dt = 0.5;
  double t_initial = 2000.0;
  double t_cap = 1e6;
  RoamingCoupling coupling = RoamingCoupling::SusceptibleLocal;
};

struct OdeDelayResult {
  double delay = 0.0;
  double t_max = 0.0;
  OdeTrajectory trajectory;
};

/// Integrates, doubling t_max until saturation (or throwing NotSaturated at the cap).
OdeDelayResult ode_delay(const NetworkConfig& cfg, const MeetingRates& rates, const OdeDelayOptions& opts = {});

/// CSV: t,I_r,I_l_1..I_l_N,S_l_1..S_l_N,total_infected
std::string trajectory_csv(const OdeTrajectory& traj);

}  // namespace epiroute

#endif  // EPIROUTE_ODE_HPP
