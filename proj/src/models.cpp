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

#include "epiroute/models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

namespace epiroute {

double r_meet_hat(int n, const MeetingRates& rates, int M) {
  if (n < 0 || n > M - 1) throw std::domain_error("r_meet_hat: n out of range [0, M-1]");
  if (n == 0) return 0.0;
  if (n == 1) return rates.gamma;
  return rates.gamma + (n - 1) * (rates.eta - rates.gamma) / (M - 2);
}

LocalCountEstimate approx_local_counts(int tokens, std::span<const double> P_sel,
                                       std::optional<int> source_community, CountVariant variant) {
  if (tokens < 0) throw std::invalid_argument("approx_local_counts: negative token count");
  const auto n = P_sel.size();
  LocalCountEstimate est;
  est.n_hat.resize(n);
  std::vector<double> measure(n);
  std::vector<std::size_t> plus, minus;
  long d = -tokens;
  for (std::size_t i = 0; i < n; ++i) {
    double x = P_sel[i] * tokens;
    const double r = std::round(x);
    if (std::abs(x - r) < 1e-9) x = r;  // P_sel products that are integral up to rounding noise
    est.n_hat[i] = static_cast<int>(r);
    d += est.n_hat[i];
    measure[i] = std::abs(x - r);
    (x > r ? plus : minus).push_back(i);
  }
  auto by_measure = [&](std::size_t a, std::size_t b) { return measure[a] > measure[b]; };
  std::stable_sort(plus.begin(), plus.end(), by_measure);
  std::stable_sort(minus.begin(), minus.end(), by_measure);
  if (d > 0 && static_cast<std::size_t>(d) > minus.size())
    throw InsufficientQueue("deallocation queue shorter than surplus");
  if (d < 0 && static_cast<std::size_t>(-d) > plus.size())
    throw InsufficientQueue("reallocation queue shorter than deficit");
  for (std::size_t k = 0; d > 0; ++k, --d) --est.n_hat[minus[k]];
  for (std::size_t k = 0; d < 0; ++k, ++d) ++est.n_hat[plus[k]];
  if (variant == CountVariant::Infected && source_community) {
    if (*source_community < 0 || static_cast<std::size_t>(*source_community) >= n)
      throw std::out_of_range("approx_local_counts: source community out of range");
    ++est.n_hat[*source_community];
  }
  return est;
}

namespace {

Arc arc(PlaceId p) { return {p, 1}; }

std::vector<double> meeting_table(const MeetingRates& rates, int M) {
  std::vector<double> t(M);
  for (int n = 0; n < M; ++n) t[n] = r_meet_hat(n, rates, M);
  return t;
}

}  // namespace

SrnModel build_monolithic(const NetworkConfig& cfg, const MeetingRates& rates) {
  validate_config(cfg);
  rates.validate();
  const int N = cfg.N;
  const int M = cfg.M;
  const double lambda = rates.lambda, mu = rates.mu, gamma = rates.gamma;
  const double alpha = cfg.alpha, beta = cfg.beta, P_r = cfg.P_r, P_l = cfg.P_l;
  auto rm = std::make_shared<const std::vector<double>>(meeting_table(rates, M));

  SrnModel m;
  std::vector<PlaceId> sus_l(N), inf_l(N), sus_l_dec(N), inf_l_dec(N), sus_l_des(N), sus_l_dec_des(N);
  for (int j = 0; j < N; ++j) {
    const auto k = std::to_string(j + 1);
    sus_l[j] = m.add_place("P_sus_l_" + k);
    inf_l[j] = m.add_place("P_inf_l_" + k);
    sus_l_dec[j] = m.add_place("P_sus_l_dec_" + k);
    inf_l_dec[j] = m.add_place("P_inf_l_dec_" + k);
  }
  const PlaceId sus_r = m.add_place("P_sus_r", M - 2);
  const PlaceId inf_r = m.add_place("P_inf_r", 1);
  const PlaceId sus_r_dec = m.add_place("P_sus_r_dec");
  const PlaceId inf_r_dec = m.add_place("P_inf_r_dec");
  for (int j = 0; j < N; ++j) {
    const auto k = std::to_string(j + 1);
    sus_l_des[j] = m.add_place("P_sus_l_des_" + k);
    sus_l_dec_des[j] = m.add_place("P_sus_l_dec_des_" + k);
  }
  const PlaceId sus_r_des = m.add_place("P_sus_r_des", 1);
  const PlaceId sus_r_dec_des = m.add_place("P_sus_r_dec_des");
  const PlaceId inf_des = m.add_place("P_inf_des");

  const GuardFn g_w = [inf_des](MarkingView mk) { return mk[inf_des] == 0; };
  auto constant = [](double w) { return RateFn([w](MarkingView) { return w; }); };
  auto scaled = [](PlaceId p, double r) { return RateFn([p, r](MarkingView mk) { return mk[p] * r; }); };
  // Meeting rate of one roaming node with the infected local nodes of every community.
  auto roaming_exposure = [rm, inf_l, inf_r, mu](MarkingView mk) {
    double s = mk[inf_r] * mu;
    for (PlaceId p : inf_l) s += (*rm)[mk[p]];
    return s;
  };

  for (int j = 0; j < N; ++j) {
    const auto k = std::to_string(j + 1);
    const PlaceId sl = sus_l[j], il = inf_l[j];
    m.add_timed({"T_l_inf_" + k, {arc(sl)}, {arc(il)},
                 [inf_des, il, inf_r](MarkingView mk) { return mk[inf_des] == 0 && mk[il] + mk[inf_r] > 0; },
                 [rm, sl, il, inf_r, lambda](MarkingView mk) {
                   return mk[sl] * mk[il] * lambda + mk[inf_r] * (*rm)[mk[sl]];
                 }});
    m.add_timed({"T_sus_l_end_" + k, {arc(sl)}, {arc(sus_l_dec[j])}, g_w, scaled(sl, alpha)});
    m.add_timed({"T_inf_l_end_" + k, {arc(il)}, {arc(inf_l_dec[j])}, g_w, scaled(il, alpha)});
    m.add_immediate({"t_sus_ll_" + k, {arc(sus_l_dec[j])}, {arc(sl)}, {}, constant(1 - P_r)});
    m.add_immediate({"t_sus_lr_" + k, {arc(sus_l_dec[j])}, {arc(sus_r)}, {}, constant(P_r)});
    m.add_immediate({"t_inf_ll_" + k, {arc(inf_l_dec[j])}, {arc(il)}, {}, constant(1 - P_r)});
    m.add_immediate({"t_inf_lr_" + k, {arc(inf_l_dec[j])}, {arc(inf_r)}, {}, constant(P_r)});
    m.add_immediate({"t_sus_rl_" + k, {arc(sus_r_dec)}, {arc(sl)}, {}, constant(P_l * cfg.P_sel[j])});
    m.add_immediate({"t_inf_rl_" + k, {arc(inf_r_dec)}, {arc(il)}, {}, constant(P_l * cfg.P_sel[j])});
  }
  m.add_timed({"T_r_inf", {arc(sus_r)}, {arc(inf_r)}, g_w,
               [sus_r, roaming_exposure](MarkingView mk) { return mk[sus_r] * roaming_exposure(mk); }});
  m.add_timed({"T_sus_r_end", {arc(sus_r)}, {arc(sus_r_dec)}, g_w, scaled(sus_r, beta)});
  m.add_timed({"T_inf_r_end", {arc(inf_r)}, {arc(inf_r_dec)}, g_w, scaled(inf_r, beta)});
  m.add_immediate({"t_sus_rr", {arc(sus_r_dec)}, {arc(sus_r)}, {}, constant(1 - P_l)});
  m.add_immediate({"t_inf_rr", {arc(inf_r_dec)}, {arc(inf_r)}, {}, constant(1 - P_l)});

  // Destination submodel.
  for (int j = 0; j < N; ++j) {
    const auto k = std::to_string(j + 1);
    const PlaceId il = inf_l[j];
    m.add_timed({"T_l_inf_des_" + k, {arc(sus_l_des[j])}, {arc(inf_des)},
                 [inf_des, il, inf_r](MarkingView mk) { return mk[inf_des] == 0 && mk[il] + mk[inf_r] > 0; },
                 [il, inf_r, lambda, gamma](MarkingView mk) { return mk[il] * lambda + mk[inf_r] * gamma; }});
    m.add_timed({"T_sus_l_end_des_" + k, {arc(sus_l_des[j])}, {arc(sus_l_dec_des[j])}, {}, constant(alpha)});
    m.add_immediate({"t_sus_ll_des_" + k, {arc(sus_l_dec_des[j])}, {arc(sus_l_des[j])}, {}, constant(1 - P_r)});
    m.add_immediate({"t_sus_lr_des_" + k, {arc(sus_l_dec_des[j])}, {arc(sus_r_des)}, {}, constant(P_r)});
    m.add_immediate(
        {"t_sus_rl_des_" + k, {arc(sus_r_dec_des)}, {arc(sus_l_des[j])}, {}, constant(P_l * cfg.P_sel[j])});
  }
  m.add_timed({"T_r_inf_des", {arc(sus_r_des)}, {arc(inf_des)}, g_w, roaming_exposure});
  m.add_timed({"T_sus_r_end_des", {arc(sus_r_des)}, {arc(sus_r_dec_des)}, {}, constant(beta)});
  m.add_immediate({"t_sus_rr_des", {arc(sus_r_dec_des)}, {arc(sus_r_des)}, {}, constant(1 - P_l)});

  m.add_reward(kTransmissionsReward, [inf_l, inf_r](MarkingView mk) {
    double s = mk[inf_r];
    for (PlaceId p : inf_l) s += mk[p];
    return s;
  });
  m.add_reward(kDeliveredReward, [inf_des](MarkingView mk) { return double(mk[inf_des]); });
  m.set_absorbing([inf_des](MarkingView mk) { return mk[inf_des] == 1; });
  return m;
}

namespace {

// Approximate per-community lookups for every token count a folded marking can hold.
struct FoldedCounts {
  int N = 0;
  std::vector<std::vector<int>> sus;               // [tokens][community]
  std::vector<std::vector<std::vector<int>>> inf;  // [source location + 1][tokens][community]

  FoldedCounts(const NetworkConfig& cfg) : N(cfg.N) {
    const int max_tokens = cfg.M;
    for (int t = 0; t <= max_tokens; ++t)
      sus.push_back(approx_local_counts(t, cfg.P_sel, std::nullopt, CountVariant::Susceptible).n_hat);
    inf.resize(N + 1);
    for (int src = -1; src < N; ++src)
      for (int t = 0; t <= max_tokens; ++t)
        inf[src + 1].push_back(approx_local_counts(t, cfg.P_sel, src < 0 ? std::nullopt : std::optional<int>(src),
                                                   CountVariant::Infected)
                                   .n_hat);
  }
};

}  // namespace

SrnModel build_folded(const NetworkConfig& cfg, const MeetingRates& rates) {
  validate_config(cfg);
  rates.validate();
  const int N = cfg.N;
  const int M = cfg.M;
  const double lambda = rates.lambda, mu = rates.mu, gamma = rates.gamma;
  const double alpha = cfg.alpha, beta = cfg.beta, P_r = cfg.P_r, P_l = cfg.P_l;
  auto rm = std::make_shared<const std::vector<double>>(meeting_table(rates, M));
  auto counts = std::make_shared<const FoldedCounts>(cfg);

  SrnModel m;
  const PlaceId sus_l = m.add_place("P_sus_l_f");
  const PlaceId inf_l = m.add_place("P_inf_l_f");
  const PlaceId sus_l_dec = m.add_place("P_sus_l_dec_f");
  const PlaceId inf_l_dec = m.add_place("P_inf_l_dec_f");
  const PlaceId sus_r = m.add_place("P_sus_r", M - 2);
  const PlaceId inf_r = m.add_place("P_inf_r", 0);
  const PlaceId sus_r_dec = m.add_place("P_sus_r_dec");
  const PlaceId inf_r_dec = m.add_place("P_inf_r_dec");

  const PlaceId r_src = m.add_place("P_r_src", 1);
  const PlaceId r_dec_src = m.add_place("P_r_dec_src");
  std::vector<PlaceId> l_src(N), l_dec_src(N);
  for (int j = 0; j < N; ++j) {
    const auto k = std::to_string(j + 1);
    l_src[j] = m.add_place("P_l_src_" + k);
    l_dec_src[j] = m.add_place("P_l_dec_src_" + k);
  }

  std::vector<PlaceId> sus_l_des(N), sus_l_dec_des(N);
  for (int j = 0; j < N; ++j) {
    const auto k = std::to_string(j + 1);
    sus_l_des[j] = m.add_place("P_sus_l_des_" + k);
    sus_l_dec_des[j] = m.add_place("P_sus_l_dec_des_" + k);
  }
  const PlaceId sus_r_des = m.add_place("P_sus_r_des", 1);
  const PlaceId sus_r_dec_des = m.add_place("P_sus_r_dec_des");
  const PlaceId inf_des = m.add_place("P_inf_des");

  auto source_slot = [l_src](MarkingView mk) {
    for (std::size_t j = 0; j < l_src.size(); ++j)
      if (mk[l_src[j]] == 1) return static_cast<int>(j) + 1;
    return 0;
  };
  auto inf_hat = [counts, source_slot, inf_l](MarkingView mk) -> const std::vector<int>& {
    return counts->inf[source_slot(mk)][mk[inf_l]];
  };
  auto sus_hat = [counts, sus_l](MarkingView mk) -> const std::vector<int>& { return counts->sus[mk[sus_l]]; };
  auto roaming_infected = [inf_r, r_src](MarkingView mk) { return mk[inf_r] + mk[r_src]; };
  auto roaming_exposure = [rm, inf_hat, roaming_infected, mu](MarkingView mk) {
    double s = roaming_infected(mk) * mu;
    for (int n : inf_hat(mk)) s += (*rm)[n];
    return s;
  };

  const GuardFn g_w = [inf_des](MarkingView mk) { return mk[inf_des] == 0; };
  auto constant = [](double w) { return RateFn([w](MarkingView) { return w; }); };
  auto scaled = [](PlaceId p, double r) { return RateFn([p, r](MarkingView mk) { return mk[p] * r; }); };

  // Folded submodel.
  m.add_timed({"T_l_inf_f", {arc(sus_l)}, {arc(inf_l)},
               [inf_des, inf_hat, sus_hat, roaming_infected](MarkingView mk) {
                 if (mk[inf_des] != 0) return false;
                 if (roaming_infected(mk) > 0) return true;
                 const auto& s = sus_hat(mk);
                 const auto& i = inf_hat(mk);
                 for (std::size_t j = 0; j < s.size(); ++j)
                   if (s[j] * i[j] > 0) return true;
                 return false;
               },
               [rm, inf_hat, sus_hat, roaming_infected, lambda](MarkingView mk) {
                 const auto& s = sus_hat(mk);
                 const auto& i = inf_hat(mk);
                 const int roam = roaming_infected(mk);
                 double r = 0.0;
                 for (std::size_t j = 0; j < s.size(); ++j) r += s[j] * i[j] * lambda + roam * (*rm)[s[j]];
                 return r;
               }});
  m.add_timed({"T_r_inf", {arc(sus_r)}, {arc(inf_r)}, g_w,
               [sus_r, roaming_exposure](MarkingView mk) { return mk[sus_r] * roaming_exposure(mk); }});
  m.add_timed({"T_sus_l_end_f", {arc(sus_l)}, {arc(sus_l_dec)}, g_w, scaled(sus_l, alpha)});
  m.add_timed({"T_inf_l_end_f", {arc(inf_l)}, {arc(inf_l_dec)}, g_w, scaled(inf_l, alpha)});
  m.add_timed({"T_sus_r_end", {arc(sus_r)}, {arc(sus_r_dec)}, g_w, scaled(sus_r, beta)});
  m.add_timed({"T_inf_r_end", {arc(inf_r)}, {arc(inf_r_dec)}, g_w, scaled(inf_r, beta)});
  m.add_immediate({"t_sus_ll_f", {arc(sus_l_dec)}, {arc(sus_l)}, {}, constant(1 - P_r)});
  m.add_immediate({"t_sus_lr_f", {arc(sus_l_dec)}, {arc(sus_r)}, {}, constant(P_r)});
  m.add_immediate({"t_inf_ll_f", {arc(inf_l_dec)}, {arc(inf_l)}, {}, constant(1 - P_r)});
  m.add_immediate({"t_inf_lr_f", {arc(inf_l_dec)}, {arc(inf_r)}, {}, constant(P_r)});
  m.add_immediate({"t_sus_rl_f", {arc(sus_r_dec)}, {arc(sus_l)}, {}, constant(P_l)});
  m.add_immediate({"t_sus_rr", {arc(sus_r_dec)}, {arc(sus_r)}, {}, constant(1 - P_l)});
  m.add_immediate({"t_inf_rl_f", {arc(inf_r_dec)}, {arc(inf_l)}, {}, constant(P_l)});
  m.add_immediate({"t_inf_rr", {arc(inf_r_dec)}, {arc(inf_r)}, {}, constant(1 - P_l)});

  // Source submodel.
  m.add_timed({"T_r_end_src", {arc(r_src)}, {arc(r_dec_src)}, g_w, constant(beta)});
  m.add_immediate({"t_rr_src", {arc(r_dec_src)}, {arc(r_src)}, {}, constant(1 - P_l)});
  for (int j = 0; j < N; ++j) {
    const auto k = std::to_string(j + 1);
    m.add_immediate({"t_rl_src_" + k, {arc(r_dec_src)}, {arc(l_src[j])}, {}, constant(P_l * cfg.P_sel[j])});
    m.add_timed({"T_l_end_src_" + k, {arc(l_src[j])}, {arc(l_dec_src[j])}, g_w, constant(alpha)});
    m.add_immediate({"t_ll_src_" + k, {arc(l_dec_src[j])}, {arc(l_src[j])}, {}, constant(1 - P_r)});
    m.add_immediate({"t_lr_src_" + k, {arc(l_dec_src[j])}, {arc(r_src)}, {}, constant(P_r)});
  }

  // Destination submodel.
  for (int j = 0; j < N; ++j) {
    const auto k = std::to_string(j + 1);
    const auto jj = static_cast<std::size_t>(j);
    m.add_timed({"T_l_inf_des_" + k, {arc(sus_l_des[j])}, {arc(inf_des)},
                 [inf_hat, roaming_infected, jj](MarkingView mk) {
                   return inf_hat(mk)[jj] > 0 || roaming_infected(mk) > 0;
                 },
                 [inf_hat, roaming_infected, jj, lambda, gamma](MarkingView mk) {
                   return roaming_infected(mk) * gamma + inf_hat(mk)[jj] * lambda;
                 }});
    m.add_timed({"T_sus_l_end_des_" + k, {arc(sus_l_des[j])}, {arc(sus_l_dec_des[j])}, {}, constant(alpha)});
    m.add_immediate({"t_sus_ll_des_" + k, {arc(sus_l_dec_des[j])}, {arc(sus_l_des[j])}, {}, constant(1 - P_r)});
    m.add_immediate({"t_sus_lr_des_" + k, {arc(sus_l_dec_des[j])}, {arc(sus_r_des)}, {}, constant(P_r)});
    m.add_immediate(
        {"t_sus_rl_des_" + k, {arc(sus_r_dec_des)}, {arc(sus_l_des[j])}, {}, constant(P_l * cfg.P_sel[j])});
  }
  m.add_timed({"T_r_inf_des", {arc(sus_r_des)}, {arc(inf_des)}, g_w, roaming_exposure});
  m.add_timed({"T_sus_r_end_des", {arc(sus_r_des)}, {arc(sus_r_dec_des)}, {}, constant(beta)});
  m.add_immediate({"t_sus_rr_des", {arc(sus_r_dec_des)}, {arc(sus_r_des)}, {}, constant(1 - P_l)});

  m.add_reward(kTransmissionsReward,
               [inf_l, inf_r](MarkingView mk) { return double(mk[inf_l]) + mk[inf_r] + 1.0; });
  m.add_reward(kDeliveredReward, [inf_des](MarkingView mk) { return double(mk[inf_des]); });
  m.set_absorbing([inf_des](MarkingView mk) { return mk[inf_des] == 1; });
  return m;
}

std::vector<TokenGroup> conservation_groups(const SrnModel& model, Engine kind, const NetworkConfig& cfg) {
  std::vector<TokenGroup> groups;
  if (kind == Engine::Monolithic) {
    TokenGroup all;
    for (const auto& p : model.places()) all.places.push_back(p.id);
    all.expected_total = static_cast<unsigned>(cfg.M);
    groups.push_back(std::move(all));
    return groups;
  }
  if (kind != Engine::Folded) throw std::invalid_argument("conservation_groups: SRN engines only");
  TokenGroup relays{{}, static_cast<unsigned>(cfg.M - 2)};
  TokenGroup src{{}, 1};
  TokenGroup des{{}, 1};
  for (const auto& p : model.places()) {
    if (p.name.find("_src") != std::string::npos)
      src.places.push_back(p.id);
    else if (p.name.find("_des") != std::string::npos)
      des.places.push_back(p.id);
    else
      relays.places.push_back(p.id);
  }
  groups = {relays, src, des};
  return groups;
}

}  // namespace epiroute
