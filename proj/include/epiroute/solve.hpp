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

#ifndef EPIROUTE_SOLVE_HPP
#define EPIROUTE_SOLVE_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "epiroute/srn.hpp"

namespace epiroute {

class NotAbsorbing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double tolerance = 1e-10;          // relative residual of the absorption system
  std::size_t direct_threshold = 10'000;
  std::size_t max_iterations = 200'000;
  double relaxation = 1.0;           // SOR factor; 1 = Gauss-Seidel
  bool force_iterative = false;
  /// expected_transmissions skips the transient evaluation (NaN) when
  /// q * t_large * transitions exceeds this.
  double transient_work_cap = 2e10;
};

struct AbsorptionResult {
  double mtta = 0.0;
  /// Probability of ending in each absorbing state, aligned with ctmc.absorbing_states.
  std::vector<double> absorption;
  /// Expected reward evaluated on the absorbing state reached (0 without a reward).
  double terminal_reward = 0.0;
  std::size_t iterations = 0;  // 0 for the direct path
  double residual = 0.0;
};

/// Mean time to absorption from the initial distribution. Solves
/// x (-Q_TT) = pi0_T; x_i is the expected time spent in transient state i.
AbsorptionResult mtta(const Ctmc& ctmc, std::span<const double> reward = {}, const SolverOptions& opts = {});

struct TransientResult {
  double time = 0.0;
  std::vector<double> probabilities;
  double expected_reward = 0.0;
};

/// State distribution at time t by uniformization; the truncated Poisson tail is < tol.
TransientResult transient(const Ctmc& ctmc, double t, double tol, std::span<const double> reward);

/// Expected reward at each grid time (grid sorted ascending), propagating the
/// distribution from one grid point to the next.
std::vector<TransientResult> transient_curve(const Ctmc& ctmc, std::span<const double> grid, double tol,
                                             std::span<const double> reward, bool keep_probabilities = false);

struct CdfPoint {
  double t;
  double value;
};

/// P(delivered by t) using the "delivered" reward.
std::vector<CdfPoint> delivery_cdf(const Ctmc& ctmc, std::span<const double> grid, double tol = 1e-10);

struct TransmissionEstimate {
  double at_t_large = 0.0;
  double t_large = 0.0;
  double exact_limit = 0.0;
  bool truncation_warning = false;  // |at_t_large - exact| > 1% relative
};

/// Expected "transmissions" reward at t_large (default 20 x MTTA) plus the exact
/// limit from the absorption distribution, which is the authoritative value.
TransmissionEstimate expected_transmissions(const Ctmc& ctmc, double t_large = 0.0, const SolverOptions& opts = {});

struct McStats {
  std::uint64_t runs = 0;
  double mean_time = 0.0;
  double var_time = 0.0;
  double hw_time = 0.0;  // 95% half-width
  double mean_reward = 0.0;
  double var_reward = 0.0;
  double hw_reward = 0.0;
};

/// Exponential-race simulation of the chain until absorption. The reward is
/// read on the absorbing state reached.
McStats monte_carlo_ctmc(const Ctmc& ctmc, std::uint64_t runs, std::uint64_t seed, std::span<const double> reward = {});

}  // namespace epiroute

#endif  // EPIROUTE_SOLVE_HPP
