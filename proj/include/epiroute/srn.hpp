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

#ifndef EPIROUTE_SRN_HPP
#define EPIROUTE_SRN_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace epiroute {

using PlaceId = std::uint32_t;
using StateIndex = std::uint32_t;
using Token = std::uint8_t;

/// Read-only view of a marking: one token count per place.
using MarkingView = std::span<const Token>;

using GuardFn = std::function<bool(MarkingView)>;
using RateFn = std::function<double(MarkingView)>;
using RewardFn = std::function<double(MarkingView)>;

struct Place {
  PlaceId id = 0;
  std::string name;
  unsigned initial_tokens = 0;
};

struct Arc {
  PlaceId place = 0;
  unsigned multiplicity = 1;
};

struct TimedTransition {
  std::string name;
  std::vector<Arc> inputs;
  std::vector<Arc> outputs;
  GuardFn guard;  // empty means always true
  RateFn rate;    // 1/s; a zero rate disables the transition in that marking
};

struct ImmediateTransition {
  std::string name;
  std::vector<Arc> inputs;
  std::vector<Arc> outputs;
  GuardFn guard;
  RateFn weight;
};

struct NamedReward {
  std::string name;
  RewardFn fn;
};

/// Stochastic reward net. Immediate transitions have priority over timed ones;
/// enabled immediates fire with probability weight / (sum of enabled weights).
class SrnModel {
 public:
  PlaceId add_place(std::string name, unsigned initial_tokens = 0);
  void add_timed(TimedTransition t) { timed_.push_back(std::move(t)); }
  void add_immediate(ImmediateTransition t) { immediate_.push_back(std::move(t)); }
  void add_reward(std::string name, RewardFn fn) { rewards_.push_back({std::move(name), std::move(fn)}); }
  void set_absorbing(GuardFn pred) { absorbing_ = std::move(pred); }

  const std::vector<Place>& places() const { return places_; }
  const std::vector<TimedTransition>& timed() const { return timed_; }
  const std::vector<ImmediateTransition>& immediate() const { return immediate_; }
  const std::vector<NamedReward>& rewards() const { return rewards_; }
  const GuardFn& absorbing() const { return absorbing_; }

  std::vector<Token> initial_marking() const;
  PlaceId place_id(const std::string& name) const;  // throws std::out_of_range

 private:
  std::vector<Place> places_;
  std::vector<TimedTransition> timed_;
  std::vector<ImmediateTransition> immediate_;
  std::vector<NamedReward> rewards_;
  GuardFn absorbing_;
};

struct Diagnostic {
  enum class Kind { DanglingArc, WeightSum, VanishingInitial, BadTokenCount };
  Kind kind;
  std::string message;
};

/// Structural checks. Weight sums are probed per decision place by dropping a
/// single token into it on top of the initial marking.
std::vector<Diagnostic> validate_model(const SrnModel& model);

class ModelInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class VanishingLoop : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class StateBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExpansionOptions {
  std::uint64_t max_states = 50'000'000;
  bool keep_markings = true;
  bool build_generator = true;  // false: count states only
  unsigned max_vanishing_depth = 64;
};

/// Absorbing CTMC over tangible markings. Off-diagonal rates are stored row-wise
/// (CSR); the diagonal is implied by exit_rate.
struct Ctmc {
  std::size_t place_count = 0;
  std::vector<std::string> place_names;
  std::vector<Token> markings;  // state-major, place_count entries per state; may be empty

  std::vector<std::uint64_t> row_ptr;  // size states()+1
  std::vector<StateIndex> col;
  std::vector<double> rate;
  std::vector<double> exit_rate;

  std::vector<std::pair<StateIndex, double>> initial;
  std::vector<std::uint8_t> is_absorbing;
  std::vector<StateIndex> absorbing_states;

  std::vector<std::string> reward_names;
  std::vector<std::vector<double>> rewards;

  std::size_t states() const { return exit_rate.size(); }
  std::size_t transitions() const { return col.size(); }
  MarkingView marking(StateIndex s) const {
    return {markings.data() + std::size_t{s} * place_count, place_count};
  }
  /// Per-state values of the named reward; throws std::out_of_range.
  std::span<const double> reward(const std::string& name) const;
  std::vector<double> initial_distribution() const;
};

Ctmc expand_reachability(const SrnModel& model, const ExpansionOptions& opts = {});

/// Tangible state count without storing the generator.
std::uint64_t count_tangible_states(const SrnModel& model, std::uint64_t max_states = 50'000'000);

struct TokenGroup {
  std::vector<PlaceId> places;
  unsigned expected_total = 0;
};

/// True iff every stored marking holds the expected total in each group.
bool conserve_tokens_check(const Ctmc& ctmc, std::span<const TokenGroup> groups);

/// Plain-text edge list; `reward_name` selects the per-state reward column.
void write_edge_list(const Ctmc& ctmc, std::ostream& os, const std::string& reward_name);
Ctmc read_edge_list(std::istream& is);

}  // namespace epiroute

#endif  // EPIROUTE_SRN_HPP
