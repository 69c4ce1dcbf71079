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

#ifndef EPIROUTE_STATS_HPP
#define EPIROUTE_STATS_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epiroute {

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);
  /// Fraction of samples <= t.
  double operator()(double t) const;
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

class TooFewSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChiSquareReport {
  std::string test;
  double statistic = 0.0;
  int bins = 0;
  int dof = 0;
  double critical_value = 0.0;
  bool passed = false;
  // Same statistic judged with one more degree of freedom (no fitted parameter).
  int alt_dof = 0;
  double alt_critical_value = 0.0;
  bool alt_passed = false;
};

/// Upper quantile of the chi-square distribution at 1 - alpha_level.
double chi_square_critical(int dof, double alpha_level);

/// Goodness of fit against an exponential with rate 1/mean, using `bins`
/// equal-probability bins; dof = bins - 2.
ChiSquareReport chi_square_exponential(std::span<const double> samples, int bins, double alpha_level);

/// counts[k] is the number of observations of value k+1; dof = K - 1.
ChiSquareReport chi_square_uniform_discrete(std::span<const std::uint64_t> counts, double alpha_level);

/// 100 |model - reference| / |reference|; std::domain_error for reference 0.
double percent_error(double model_value, double reference_value);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 95% normal approximation; NaN for fewer than two samples
  double variance = 0.0;
  std::uint64_t n = 0;
};

MeanCi mean_ci(std::span<const double> samples);

/// CSV rows `test,statistic,dof,critical,passed`, one per dof convention.
std::string chi_square_csv(std::span<const ChiSquareReport> reports);

}  // namespace epiroute

#endif  // EPIROUTE_STATS_HPP
