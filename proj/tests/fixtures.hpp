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

#ifndef EPIROUTE_TESTS_FIXTURES_HPP
#define EPIROUTE_TESTS_FIXTURES_HPP

#include "epiroute/config.hpp"

// Plausible meeting rates for the reference geometry; structural tests do not
// depend on their exact values.
inline epiroute::MeetingRates test_rates() {
  epiroute::MeetingRates r;
  r.lambda = 1.6e-3;
  r.mu = 1.1e-4;
  r.gamma = 2.586e-4;
  r.eta = 1.086e-3;
  return r;
}

#endif  // EPIROUTE_TESTS_FIXTURES_HPP
