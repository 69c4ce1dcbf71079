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

#ifndef EPIROUTE_CONFIG_HPP
#define EPIROUTE_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace epiroute {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Physical and mobility parameters of the network. Lengths in meters, rates in 1/s,
/// speeds in m/s.
struct NetworkConfig {
  int N = 0;
  int M = 0;
  double L = 1000.0;
  double L_c = 100.0;
  double R = 10.0;
  double alpha = 1.0 / 80.0;
  double beta = 1.0 / 520.0;
  double P_r = 0.2;
  double P_l = 0.8;
  std::vector<double> P_sel;
  double v_min = 5.0;
  double v_max = 15.0;
  double v_trans = 20.0;
  std::vector<Point> community_centers;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ConfigError on the first violated invariant. Returns soft warnings
/// (e.g. R large relative to L_c).
std::vector<std::string> validate_config(const NetworkConfig& cfg);

/// Reference scenario: N in {3,4,5} communities laid out on the 1000 m square.
NetworkConfig reference_config(int N, int M);

/// JSON document with a "version" header; unknown keys are rejected.
NetworkConfig parse_config(const std::string& text);
NetworkConfig load_config(const std::string& path);
std::string dump_config(const NetworkConfig& cfg);

inline constexpr int kConfigVersion = 1;

struct MeetingRates {
  double lambda = 0.0;  // local-local, same community
  double mu = 0.0;      // roaming-roaming
  double gamma = 0.0;   // roaming vs one local node
  double eta = 0.0;     // roaming vs the M-1 other nodes local in one community

  void validate() const;
};

/// Rate file contents: the four rates plus sample sizes and 95% half-widths.
struct RatesFile {
  MeetingRates rates;
  std::uint64_t samples[4] = {0, 0, 0, 0};
  double half_width[4] = {0.0, 0.0, 0.0, 0.0};
};

std::string format_rates(const RatesFile& r);
RatesFile parse_rates(const std::string& text);
RatesFile load_rates(const std::string& path);

}  // namespace epiroute

#endif  // EPIROUTE_CONFIG_HPP
