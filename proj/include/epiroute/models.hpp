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

#ifndef EPIROUTE_MODELS_HPP
#define EPIROUTE_MODELS_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "epiroute/config.hpp"
#include "epiroute/srn.hpp"

namespace epiroute {

inline constexpr const char* kTransmissionsReward = "transmissions";
inline constexpr const char* kDeliveredReward = "delivered";

/// Piecewise-linear first-meeting rate of one roaming node with `n` co-located
/// local nodes: 0, gamma, then linear up to eta at n = M-1.
/// Throws std::domain_error if n < 0 or n > M-1.
double r_meet_hat(int n, const MeetingRates& rates, int M);

enum class CountVariant { Infected, Susceptible };

struct LocalCountEstimate {
  std::vector<int> n_hat;
};

class InsufficientQueue : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Distributes `tokens` local nodes over communities in proportion to P_sel with
/// largest-remainder style correction. Rounding is half away from zero; ties in
/// the correction queues go to the lower community index. For the infected
/// variant the source's community (if any) receives one extra node.
LocalCountEstimate approx_local_counts(int tokens, std::span<const double> P_sel,
                                       std::optional<int> source_community, CountVariant variant);

/// Exact model: one local submodel per community, one roaming submodel and the
/// destination submodel. Rewards: "transmissions" (infected nodes other than the
/// destination) and "delivered" (#P_inf_des).
SrnModel build_monolithic(const NetworkConfig& cfg, const MeetingRates& rates);

/// Approximate model: all communities folded into one submodel, plus separate
/// source and destination submodels. Per-community counts come from
/// approx_local_counts.
SrnModel build_folded(const NetworkConfig& cfg, const MeetingRates& rates);

enum class Engine { Monolithic, Folded, Ode, Simulation };

/// Groups of places whose token totals are invariant (node conservation).
std::vector<TokenGroup> conservation_groups(const SrnModel& model, Engine kind, const NetworkConfig& cfg);

}  // namespace epiroute

#endif  // EPIROUTE_MODELS_HPP
