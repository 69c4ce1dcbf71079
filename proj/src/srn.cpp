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

#include "epiroute/srn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace epiroute {

PlaceId SrnModel::add_place(std::string name, unsigned initial_tokens) {
  const auto id = static_cast<PlaceId>(places_.size());
  places_.push_back({id, std::move(name), initial_tokens});
  return id;
}

std::vector<Token> SrnModel::initial_marking() const {
  std::vector<Token> m(places_.size());
  for (const auto& p : places_) {
    if (p.initial_tokens > std::numeric_limits<Token>::max())
      throw ModelInvalid("initial tokens of place " + p.name + " exceed 255");
    m[p.id] = static_cast<Token>(p.initial_tokens);
  }
  return m;
}

PlaceId SrnModel::place_id(const std::string& name) const {
  for (const auto& p : places_)
    if (p.name == name) return p.id;
  throw std::out_of_range("no place named " + name);
}

std::span<const double> Ctmc::reward(const std::string& name) const {
  for (std::size_t i = 0; i < reward_names.size(); ++i)
    if (reward_names[i] == name) return rewards[i];
  throw std::out_of_range("no reward named " + name);
}

std::vector<double> Ctmc::initial_distribution() const {
  std::vector<double> p(states(), 0.0);
  for (auto [s, w] : initial) p[s] += w;
  return p;
}

namespace {

bool arcs_valid(const std::vector<Arc>& arcs, std::size_t n) {
  return std::all_of(arcs.begin(), arcs.end(), [n](const Arc& a) { return a.place < n; });
}

bool inputs_satisfied(const std::vector<Arc>& inputs, MarkingView m) {
  for (const auto& a : inputs)
    if (m[a.place] < a.multiplicity) return false;
  return true;
}

template <typename T>
bool guard_holds(const T& t, MarkingView m) {
  return !t.guard || t.guard(m);
}

template <typename T>
void fire(const T& t, std::span<Token> m) {
  for (const auto& a : t.inputs) m[a.place] = static_cast<Token>(m[a.place] - a.multiplicity);
  for (const auto& a : t.outputs) {
    const unsigned v = m[a.place] + a.multiplicity;
    if (v > std::numeric_limits<Token>::max())
      throw ModelInvalid("token count overflow in place " + std::to_string(a.place) + " firing " + t.name);
    m[a.place] = static_cast<Token>(v);
  }
}

std::uint64_t hash_bytes(const Token* p, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

// Open-addressing set of marking indices; the markings themselves live in `arena`.
class MarkingTable {
 public:
  explicit MarkingTable(std::size_t width) : width_(width), slots_(1024, kEmpty) {}

  std::size_t size() const { return count_; }
  std::vector<Token>& arena() { return arena_; }

  // Returns (index, inserted).
  std::pair<StateIndex, bool> insert(const Token* m) {
    if ((count_ + 1) * 2 > slots_.size()) grow();
    const std::size_t mask = slots_.size() - 1;
    std::size_t pos = hash_bytes(m, width_) & mask;
    while (true) {
      const StateIndex s = slots_[pos];
      if (s == kEmpty) {
        if (count_ >= std::numeric_limits<StateIndex>::max() - 1)
          throw StateBudgetExceeded("state index space exhausted");
        const auto idx = static_cast<StateIndex>(count_++);
        arena_.insert(arena_.end(), m, m + width_);
        slots_[pos] = idx;
        return {idx, true};
      }
      if (std::memcmp(arena_.data() + std::size_t{s} * width_, m, width_) == 0) return {s, false};
      pos = (pos + 1) & mask;
    }
  }

 private:
  static constexpr StateIndex kEmpty = std::numeric_limits<StateIndex>::max();

  void grow() {
    std::vector<StateIndex> fresh(slots_.size() * 2, kEmpty);
    const std::size_t mask = fresh.size() - 1;
    for (StateIndex s = 0; s < count_; ++s) {
      std::size_t pos = hash_bytes(arena_.data() + std::size_t{s} * width_, width_) & mask;
      while (fresh[pos] != kEmpty) pos = (pos + 1) & mask;
      fresh[pos] = s;
    }
    slots_.swap(fresh);
  }

  std::size_t width_;
  std::size_t count_ = 0;
  std::vector<StateIndex> slots_;
  std::vector<Token> arena_;
};

class Expander {
 public:
  Expander(const SrnModel& model, const ExpansionOptions& opts)
      : model_(model), opts_(opts), width_(model.places().size()), table_(width_) {}

  Ctmc run();
  std::uint64_t count_only();

 private:
  // Resolves `m` through immediate firings; appends reached tangible states with
  // their path probability.
  void resolve(std::vector<Token>& m, double prob, unsigned depth,
               std::vector<std::pair<StateIndex, double>>& out);
  StateIndex intern(const Token* m);
  void explore_state(StateIndex s, std::vector<std::pair<StateIndex, double>>& edges);

  const SrnModel& model_;
  const ExpansionOptions& opts_;
  std::size_t width_;
  MarkingTable table_;
  std::vector<std::vector<Token>> path_;  // vanishing markings on the current firing chain
  std::vector<std::pair<StateIndex, double>> reached_;
};

StateIndex Expander::intern(const Token* m) {
  auto [idx, inserted] = table_.insert(m);
  if (inserted && table_.size() > opts_.max_states)
    throw StateBudgetExceeded("tangible state count exceeded budget of " + std::to_string(opts_.max_states));
  return idx;
}

void Expander::resolve(std::vector<Token>& m, double prob, unsigned depth,
                       std::vector<std::pair<StateIndex, double>>& out) {
  const MarkingView view(m);
  double total = 0.0;
  std::vector<std::pair<std::size_t, double>> enabled;
  const auto& imm = model_.immediate();
  for (std::size_t i = 0; i < imm.size(); ++i) {
    const auto& t = imm[i];
    if (!inputs_satisfied(t.inputs, view) || !guard_holds(t, view)) continue;
    const double w = t.weight ? t.weight(view) : 1.0;
    if (w <= 0.0) continue;
    enabled.emplace_back(i, w);
    total += w;
  }
  if (enabled.empty()) {
    out.emplace_back(intern(m.data()), prob);
    return;
  }
  if (depth >= opts_.max_vanishing_depth)
    throw VanishingLoop("immediate firing chain exceeds depth " + std::to_string(opts_.max_vanishing_depth));
  for (const auto& v : path_)
    if (v == m) throw VanishingLoop("immediate firings revisit a vanishing marking");
  path_.push_back(m);
  for (auto [i, w] : enabled) {
    std::vector<Token> child = m;
    fire(imm[i], std::span<Token>(child));
    resolve(child, prob * w / total, depth + 1, out);
  }
  path_.pop_back();
}

void Expander::explore_state(StateIndex s, std::vector<std::pair<StateIndex, double>>& edges) {
  edges.clear();
  std::vector<Token> cur(table_.arena().begin() + std::size_t{s} * width_,
                         table_.arena().begin() + std::size_t{s + 1} * width_);
  const MarkingView view(cur);
  if (model_.absorbing() && model_.absorbing()(view)) return;
  for (const auto& t : model_.timed()) {
    if (!inputs_satisfied(t.inputs, view) || !guard_holds(t, view)) continue;
    const double r = t.rate ? t.rate(view) : 0.0;
    if (!(r > 0.0)) continue;
    std::vector<Token> next = cur;
    fire(t, std::span<Token>(next));
    reached_.clear();
    resolve(next, 1.0, 0, reached_);
    double mass = 0.0;
    for (auto [dst, p] : reached_) {
      mass += p;
      if (dst != s) edges.emplace_back(dst, r * p);
    }
    if (std::abs(mass - 1.0) > 1e-12)
      throw ModelInvalid("probability mass leaving vanishing markings after " + t.name + " is " +
                         std::to_string(mass));
  }
  std::sort(edges.begin(), edges.end());
  std::size_t w = 0;
  for (std::size_t r = 0; r < edges.size(); ++r) {
    if (w > 0 && edges[w - 1].first == edges[r].first)
      edges[w - 1].second += edges[r].second;
    else
      edges[w++] = edges[r];
  }
  edges.resize(w);
}

Ctmc Expander::run() {
  Ctmc c;
  c.place_count = width_;
  for (const auto& p : model_.places()) c.place_names.push_back(p.name);

  auto m0 = model_.initial_marking();
  std::vector<std::pair<StateIndex, double>> init;
  resolve(m0, 1.0, 0, init);
  std::map<StateIndex, double> merged;
  for (auto [s, p] : init) merged[s] += p;
  c.initial.assign(merged.begin(), merged.end());

  std::vector<std::pair<StateIndex, double>> edges;
  c.row_ptr.push_back(0);
  for (StateIndex s = 0; s < table_.size(); ++s) {
    explore_state(s, edges);
    if (!opts_.build_generator) continue;
    double exit = 0.0;
    for (auto [dst, r] : edges) {
      c.col.push_back(dst);
      c.rate.push_back(r);
      exit += r;
    }
    c.row_ptr.push_back(c.col.size());
    c.exit_rate.push_back(exit);
  }

  const std::size_t n = table_.size();
  if (!opts_.build_generator) {
    c.row_ptr.assign(n + 1, 0);
    c.exit_rate.assign(n, 0.0);
  }
  c.is_absorbing.assign(n, 0);
  const auto& arena = table_.arena();
  for (StateIndex s = 0; s < n; ++s) {
    const MarkingView view(arena.data() + std::size_t{s} * width_, width_);
    const bool dead = opts_.build_generator && c.row_ptr[s + 1] == c.row_ptr[s];
    if (dead || (model_.absorbing() && model_.absorbing()(view))) {
      c.is_absorbing[s] = 1;
      c.absorbing_states.push_back(s);
    }
  }
  for (const auto& r : model_.rewards()) {
    c.reward_names.push_back(r.name);
    std::vector<double> v(n);
    for (StateIndex s = 0; s < n; ++s) v[s] = r.fn(MarkingView(arena.data() + std::size_t{s} * width_, width_));
    c.rewards.push_back(std::move(v));
  }
  if (opts_.keep_markings) c.markings = std::move(table_.arena());
  return c;
}

std::uint64_t Expander::count_only() {
  auto m0 = model_.initial_marking();
  std::vector<std::pair<StateIndex, double>> init;
  resolve(m0, 1.0, 0, init);
  std::vector<std::pair<StateIndex, double>> edges;
  for (StateIndex s = 0; s < table_.size(); ++s) explore_state(s, edges);
  return table_.size();
}

}  // namespace

std::vector<Diagnostic> validate_model(const SrnModel& model) {
  std::vector<Diagnostic> out;
  const std::size_t n = model.places().size();
  bool dangling = false;
  auto check_arcs = [&](const std::string& name, const std::vector<Arc>& in, const std::vector<Arc>& outs) {
    if (!arcs_valid(in, n) || !arcs_valid(outs, n)) {
      out.push_back({Diagnostic::Kind::DanglingArc, "dangling arc in transition " + name});
      dangling = true;
    }
  };
  for (const auto& t : model.timed()) check_arcs(t.name, t.inputs, t.outputs);
  for (const auto& t : model.immediate()) check_arcs(t.name, t.inputs, t.outputs);
  for (const auto& p : model.places())
    if (p.initial_tokens > std::numeric_limits<Token>::max())
      out.push_back({Diagnostic::Kind::BadTokenCount, "initial tokens of " + p.name + " exceed 255"});
  if (dangling || !out.empty()) return out;

  const auto m0 = model.initial_marking();
  for (const auto& t : model.immediate())
    if (inputs_satisfied(t.inputs, m0) && guard_holds(t, m0)) {
      out.push_back({Diagnostic::Kind::VanishingInitial, "initial marking enables immediate " + t.name});
      break;
    }

  std::vector<PlaceId> decision_places;
  for (const auto& t : model.immediate())
    for (const auto& a : t.inputs)
      if (std::find(decision_places.begin(), decision_places.end(), a.place) == decision_places.end())
        decision_places.push_back(a.place);
  for (PlaceId p : decision_places) {
    auto probe = m0;
    if (probe[p] == std::numeric_limits<Token>::max()) continue;
    ++probe[p];
    const MarkingView view(probe);
    double sum = 0.0;
    for (const auto& t : model.immediate()) {
      const bool uses = std::any_of(t.inputs.begin(), t.inputs.end(), [p](const Arc& a) { return a.place == p; });
      if (uses && inputs_satisfied(t.inputs, view) && guard_holds(t, view)) sum += t.weight ? t.weight(view) : 1.0;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "weights sum to " << sum << " != 1 at decision place " << model.places()[p].name;
      out.push_back({Diagnostic::Kind::WeightSum, msg.str()});
    }
  }
  return out;
}

Ctmc expand_reachability(const SrnModel& model, const ExpansionOptions& opts) {
  auto diags = validate_model(model);
  if (!diags.empty()) throw ModelInvalid(diags.front().message);
  Expander e(model, opts);
  return e.run();
}

std::uint64_t count_tangible_states(const SrnModel& model, std::uint64_t max_states) {
  auto diags = validate_model(model);
  if (!diags.empty()) throw ModelInvalid(diags.front().message);
  ExpansionOptions opts;
  opts.max_states = max_states;
  opts.keep_markings = false;
  opts.build_generator = false;
  Expander e(model, opts);
  return e.count_only();
}

bool conserve_tokens_check(const Ctmc& ctmc, std::span<const TokenGroup> groups) {
  if (ctmc.markings.empty()) throw std::logic_error("conserve_tokens_check needs stored markings");
  for (StateIndex s = 0; s < ctmc.states(); ++s) {
    const auto m = ctmc.marking(s);
    for (const auto& g : groups) {
      unsigned total = 0;
      for (PlaceId p : g.places) total += m[p];
      if (total != g.expected_total) return false;
    }
  }
  return true;
}

void write_edge_list(const Ctmc& ctmc, std::ostream& os, const std::string& reward_name) {
  const auto reward = ctmc.reward(reward_name);
  os << std::setprecision(17);
  os << "ctmc 1\n";
  os << "states " << ctmc.states() << "\n";
  for (auto [s, p] : ctmc.initial) os << "initial " << s << " " << p << "\n";
  for (StateIndex s : ctmc.absorbing_states) os << "absorbing " << s << "\n";
  os << "reward_name " << reward_name << "\n";
  for (StateIndex s = 0; s < ctmc.states(); ++s) os << "reward " << s << " " << reward[s] << "\n";
  os << "edges " << ctmc.transitions() << "\n";
  for (StateIndex s = 0; s < ctmc.states(); ++s)
    for (auto k = ctmc.row_ptr[s]; k < ctmc.row_ptr[s + 1]; ++k)
      os << s << " " << ctmc.col[k] << " " << ctmc.rate[k] << "\n";
}

Ctmc read_edge_list(std::istream& is) {
  Ctmc c;
  std::string key;
  std::size_t n = 0;
  std::string reward_name = "reward";
  std::vector<double> reward;
  auto fail = [](const std::string& what) { throw std::runtime_error("edge list: " + what); };
  if (!(is >> key >> n) || key != "ctmc" || n != 1) fail("bad header");
  if (!(is >> key >> n) || key != "states") fail("missing state count");
  c.exit_rate.assign(n, 0.0);
  c.is_absorbing.assign(n, 0);
  reward.assign(n, 0.0);
  std::size_t edges = 0;
  while (is >> key) {
    if (key == "initial") {
      StateIndex s;
      double p;
      is >> s >> p;
      c.initial.emplace_back(s, p);
    } else if (key == "absorbing") {
      StateIndex s;
      is >> s;
      c.absorbing_states.push_back(s);
      c.is_absorbing.at(s) = 1;
    } else if (key == "reward_name") {
      is >> reward_name;
    } else if (key == "reward") {
      StateIndex s;
      double v;
      is >> s >> v;
      reward.at(s) = v;
    } else if (key == "edges") {
      is >> edges;
      break;
    } else {
      fail("unknown record " + key);
    }
  }
  if (!is) fail("truncated header");
  std::vector<std::size_t> count(n + 1, 0);
  std::vector<std::tuple<StateIndex, StateIndex, double>> list(edges);
  for (auto& [s, d, r] : list) {
    if (!(is >> s >> d >> r) || s >= n || d >= n) fail("bad edge");
    ++count[s + 1];
  }
  c.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) c.row_ptr[i + 1] = c.row_ptr[i] + count[i + 1];
  c.col.resize(edges);
  c.rate.resize(edges);
  std::vector<std::uint64_t> fill(c.row_ptr.begin(), c.row_ptr.end() - 1);
  for (auto& [s, d, r] : list) {
    c.col[fill[s]] = d;
    c.rate[fill[s]++] = r;
    c.exit_rate[s] += r;
  }
  c.reward_names.push_back(reward_name);
  c.rewards.push_back(std::move(reward));
  return c;
}

}  // namespace epiroute
