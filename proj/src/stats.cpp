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

#include "epiroute/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "epiroute/io.hpp"

namespace epiroute {

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw std::invalid_argument("EmpiricalCdf: no samples");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double t) const {
  const auto k = std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin();
  return static_cast<double>(k) / static_cast<double>(sorted_.size());
}

double chi_square_critical(int dof, double alpha_level) {
  if (dof < 1) throw std::invalid_argument("chi-square: dof must be >= 1");
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw std::invalid_argument("chi-square: alpha in (0,1)");
  return boost::math::quantile(boost::math::chi_squared(dof), 1.0 - alpha_level);
}

namespace {

void judge(ChiSquareReport& r, double alpha_level) {
  r.critical_value = chi_square_critical(r.dof, alpha_level);
  r.passed = r.statistic < r.critical_value;
  r.alt_critical_value = chi_square_critical(r.alt_dof, alpha_level);
  r.alt_passed = r.statistic < r.alt_critical_value;
}

}  // namespace

ChiSquareReport chi_square_exponential(std::span<const double> samples, int bins, double alpha_level) {
  if (bins < 3) throw std::invalid_argument("chi_square_exponential: need at least 3 bins");
  const double n = static_cast<double>(samples.size());
  const double expected = n / bins;
  if (expected < 5.0) throw TooFewSamples("expected count per bin below 5");
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (!(mean > 0.0)) throw std::invalid_argument("chi_square_exponential: samples must have a positive mean");
  // Bin k holds F(x) in [k/bins, (k+1)/bins) with F(x) = 1 - exp(-x/mean).
  std::vector<std::uint64_t> observed(bins, 0);
  for (double x : samples) {
    const double F = -std::expm1(-std::max(0.0, x) / mean);
    const int k = std::min(bins - 1, static_cast<int>(F * bins));
    ++observed[k];
  }
  ChiSquareReport r;
  r.test = "exponential";
  r.bins = bins;
  for (auto o : observed) r.statistic += (o - expected) * (o - expected) / expected;
  r.dof = bins - 2;
  r.alt_dof = bins - 1;
  judge(r, alpha_level);
  return r;
}

ChiSquareReport chi_square_uniform_discrete(std::span<const std::uint64_t> counts, double alpha_level) {
  const int K = static_cast<int>(counts.size());
  if (K < 2) throw std::invalid_argument("chi_square_uniform_discrete: need at least 2 cells");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double expected = total / K;
  if (expected < 5.0) throw TooFewSamples("expected count per cell below 5");
  ChiSquareReport r;
  r.test = "uniform";
  r.bins = K;
  for (auto c : counts) r.statistic += (c - expected) * (c - expected) / expected;
  r.dof = r.alt_dof = K - 1;
  judge(r, alpha_level);
  return r;
}

double percent_error(double model_value, double reference_value) {
  if (reference_value == 0.0) throw std::domain_error("percent_error: reference value is zero");
  return 100.0 * std::abs(model_value - reference_value) / std::abs(reference_value);
}

MeanCi mean_ci(std::span<const double> samples) {
  MeanCi c;
  c.n = samples.size();
  if (samples.empty()) throw std::invalid_argument("mean_ci: no samples");
  const double n = static_cast<double>(c.n);
  c.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (c.n < 2) {
    c.half_width = c.variance = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  double ss = 0.0;
  for (double x : samples) ss += (x - c.mean) * (x - c.mean);
  c.variance = ss / (n - 1);
  c.half_width = 1.96 * std::sqrt(c.variance / n);
  return c;
}

std::string chi_square_csv(std::span<const ChiSquareReport> reports) {
  CsvWriter w({"test", "statistic", "dof", "critical", "passed"});
  for (const auto& r : reports) {
    w.row({r.test, fmt_num(r.statistic), std::to_string(r.dof), fmt_num(r.critical_value), r.passed ? "1" : "0"});
    if (r.alt_dof != r.dof)
      w.row({r.test + "_no_fit_dof", fmt_num(r.statistic), std::to_string(r.alt_dof), fmt_num(r.alt_critical_value),
             r.alt_passed ? "1" : "0"});
  }
  return w.str();
}

}  // namespace epiroute
