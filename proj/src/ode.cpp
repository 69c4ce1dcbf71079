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

#include "epiroute/ode.hpp"

#include <cmath>
#include <numeric>

#include "epiroute/io.hpp"

namespace epiroute {

double OdeState::total_infected() const { return I_r + std::accumulate(I_l.begin(), I_l.end(), 0.0); }

double OdeState::susceptible_roaming(int M) const {
  return M - I_r - std::accumulate(I_l.begin(), I_l.end(), 0.0) - std::accumulate(S_l.begin(), S_l.end(), 0.0);
}

namespace {

double theta(double x) { return x >= 0.0 ? 1.0 : 0.0; }

// y += h * k, used for the RK4 stages.
OdeState axpy(const OdeState& y, double h, const OdeState& k) {
  OdeState r = y;
  for (std::size_t i = 0; i < r.I_l.size(); ++i) {
    r.I_l[i] += h * k.I_l[i];
    r.S_l[i] += h * k.S_l[i];
  }
  r.I_r += h * k.I_r;
  r.t += h;
  return r;
}

}  // namespace

double r_meet_continuous(double n, const MeetingRates& rates, int M) {
  const double g = rates.gamma;
  return g + theta(1.0 - n) * (n - 1.0) * g + theta(n - 1.0) * (n - 1.0) * (rates.eta - g) / (M - 2);
}

OdeState ode_rhs(const OdeState& s, const NetworkConfig& cfg, const MeetingRates& r, RoamingCoupling coupling) {
  const int N = cfg.N;
  const double S_r = s.susceptible_roaming(cfg.M);
  OdeState d;
  d.I_l.assign(N, 0.0);
  d.S_l.assign(N, 0.0);
  double roaming_gain = s.I_r * r.mu;
  double local_to_roaming = 0.0;
  for (int i = 0; i < N; ++i) {
    const double Il = s.I_l[i], Sl = s.S_l[i];
    const double meet_sus = s.I_r * r_meet_continuous(Sl, r, cfg.M);
    const double to_local = cfg.beta * cfg.P_l * cfg.P_sel[i];
    d.I_l[i] = -Il * cfg.alpha * cfg.P_r + s.I_r * to_local + Sl * Il * r.lambda + meet_sus;
    d.S_l[i] = S_r * to_local - Sl * cfg.alpha * cfg.P_r - Sl * Il * r.lambda - meet_sus;
    local_to_roaming += Il * cfg.alpha * cfg.P_r;
    roaming_gain += r_meet_continuous(coupling == RoamingCoupling::InfectedLocal ? Il : Sl, r, cfg.M);
  }
  d.I_r = -s.I_r * cfg.beta * cfg.P_l + local_to_roaming + S_r * roaming_gain;
  return d;
}

OdeState ode_initial_state(const NetworkConfig& cfg) {
  OdeState s;
  s.I_l.assign(cfg.N, 0.0);
  s.S_l.assign(cfg.N, 0.0);
  s.I_r = 1.0;
  return s;
}

namespace {

void rk4_step(OdeState& y, double h, const NetworkConfig& cfg, const MeetingRates& r, RoamingCoupling cp,
              OdeTrajectory& traj) {
  const OdeState k1 = ode_rhs(y, cfg, r, cp);
  const OdeState k2 = ode_rhs(axpy(y, h / 2, k1), cfg, r, cp);
  const OdeState k3 = ode_rhs(axpy(y, h / 2, k2), cfg, r, cp);
  const OdeState k4 = ode_rhs(axpy(y, h, k3), cfg, r, cp);
  const double before = y.total_infected();
  const double limit = 0.1 * cfg.M;
  auto update = [&](double& v, double a, double b, double c, double d) {
    const double dv = h / 6 * (a + 2 * b + 2 * c + d);
    if (std::abs(dv) > limit) throw StepTooLarge("ODE component changed by more than 10% of M in one step");
    v += dv;
    if (v < 0.0) {
      v = 0.0;
      ++traj.clamped;
    }
  };
  for (std::size_t i = 0; i < y.I_l.size(); ++i) {
    update(y.I_l[i], k1.I_l[i], k2.I_l[i], k3.I_l[i], k4.I_l[i]);
    update(y.S_l[i], k1.S_l[i], k2.S_l[i], k3.S_l[i], k4.S_l[i]);
  }
  update(y.I_r, k1.I_r, k2.I_r, k3.I_r, k4.I_r);
  y.t += h;
  if (y.total_infected() < before - 1e-9) ++traj.decreasing_steps;
}

void extend(OdeTrajectory& traj, const NetworkConfig& cfg, const MeetingRates& r, double t_max, double dt,
            RoamingCoupling cp) {
  OdeState y = traj.samples.back();
  const auto steps = static_cast<std::uint64_t>(std::llround(t_max / dt));
  for (auto k = static_cast<std::uint64_t>(traj.samples.size() - 1); k < steps; ++k) {
    rk4_step(y, dt, cfg, r, cp, traj);
    y.t = (k + 1) * dt;  // avoid drift from repeated addition
    traj.samples.push_back(y);
  }
}

}  // namespace

OdeTrajectory integrate(const NetworkConfig& cfg, const MeetingRates& rates, double t_max, double dt,
                        RoamingCoupling coupling) {
  validate_config(cfg);
  rates.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (t_max < 0.0) throw std::invalid_argument("integrate: t_max must be nonnegative");
  OdeTrajectory traj;
  traj.samples.push_back(ode_initial_state(cfg));
  extend(traj, cfg, rates, t_max, dt, coupling);
  return traj;
}

double average_delay_ode(const OdeTrajectory& traj, int M) {
  if (traj.samples.empty()) throw std::invalid_argument("average_delay_ode: empty trajectory");
  if (M < 2) throw std::invalid_argument("average_delay_ode: M must be at least 2");
  const auto& last = traj.samples.back();
  if (last.total_infected() < M - 0.001 * M)
    throw NotSaturated("total infected " + fmt_num(last.total_infected()) + " below 0.999 M at t = " +
                       fmt_num(last.t));
  double area = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const auto& a = traj.samples[i - 1];
    const auto& b = traj.samples[i];
    area += 0.5 * ((a.total_infected() - 1.0) + (b.total_infected() - 1.0)) * (b.t - a.t);
  }
  return last.t - area / (M - 1);
}

OdeDelayResult ode_delay(const NetworkConfig& cfg, const MeetingRates& rates, const OdeDelayOptions& o) {
  validate_config(cfg);
  rates.validate();
  OdeDelayResult res;
  res.trajectory.samples.push_back(ode_initial_state(cfg));
  for (double t_max = o.t_initial;; t_max = std::min(2 * t_max, o.t_cap)) {
    extend(res.trajectory, cfg, rates, t_max, o.dt, o.coupling);
    const double total = res.trajectory.samples.back().total_infected();
    if (total >= cfg.M - 0.001 * cfg.M) {
      res.t_max = t_max;
      res.delay = average_delay_ode(res.trajectory, cfg.M);
      return res;
    }
    if (t_max >= o.t_cap) throw NotSaturated("ODE did not saturate before " + fmt_num(o.t_cap) + " s");
  }
}

std::string trajectory_csv(const OdeTrajectory& traj) {
  const std::size_t N = traj.samples.empty() ? 0 : traj.samples.front().I_l.size();
  std::vector<std::string> header = {"t", "I_r"};
  for (std::size_t i = 1; i <= N; ++i) header.push_back("I_l_" + std::to_string(i));
  for (std::size_t i = 1; i <= N; ++i) header.push_back("S_l_" + std::to_string(i));
  header.push_back("total_infected");
  CsvWriter w(header);
  for (const auto& s : traj.samples) {
    std::vector<std::string> row = {fmt_num(s.t), fmt_num(s.I_r)};
    for (double v : s.I_l) row.push_back(fmt_num(v));
    for (double v : s.S_l) row.push_back(fmt_num(v));
    row.push_back(fmt_num(s.total_infected()));
    w.row(row);
  }
  return w.str();
}

}  // namespace epiroute
