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

#include "epiroute/epiroute.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "epiroute/config.hpp"
#include "epiroute/io.hpp"
#include "epiroute/mobility.hpp"
#include "epiroute/models.hpp"
#include "epiroute/ode.hpp"
#include "epiroute/solve.hpp"
#include "epiroute/srn.hpp"
#include "epiroute/stats.hpp"

struct epi_config {
  epiroute::NetworkConfig cfg;
};

struct epi_model {
  epiroute::Ctmc ctmc;
};

namespace {

thread_local std::string g_last_error;

epi_status fail(epi_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Maps every exception the core can raise onto a status code.
template <class F>
epi_status guarded(F&& f) {
  using namespace epiroute;
  g_last_error.clear();
  try {
    f();
    return EPI_OK;
  } catch (const ConfigError& e) {
    return fail(EPI_ERR_CONFIG, e.what());
  } catch (const ModelInvalid& e) {
    return fail(EPI_ERR_CONFIG, e.what());
  } catch (const StateBudgetExceeded& e) {
    return fail(EPI_ERR_STATE_BUDGET,
                std::string(e.what()) + "; the folded or ode engine handles larger networks");
  } catch (const VanishingLoop& e) {
    return fail(EPI_ERR_SOLVER, e.what());
  } catch (const NotAbsorbing& e) {
    return fail(EPI_ERR_SOLVER, e.what());
  } catch (const SingularSystem& e) {
    return fail(EPI_ERR_SOLVER, e.what());
  } catch (const StepTooLarge& e) {
    return fail(EPI_ERR_INVALID_ARGUMENT, e.what());
  } catch (const NotSaturated& e) {
    return fail(EPI_ERR_NOT_SATURATED, e.what());
  } catch (const TooFewSamples& e) {
    return fail(EPI_ERR_TOO_FEW_SAMPLES, e.what());
  } catch (const IoError& e) {
    return fail(EPI_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(EPI_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(EPI_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(EPI_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EPI_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(EPI_ERR_INTERNAL, "unknown error");
  }
}

#define EPI_REQUIRE(cond, what) \
  if (!(cond)) return fail(EPI_ERR_INVALID_ARGUMENT, what)

epiroute::MeetingRates to_rates(const epi_rates& r) {
  epiroute::MeetingRates m;
  m.lambda = r.lambda;
  m.mu = r.mu;
  m.gamma = r.gamma;
  m.eta = r.eta;
  return m;
}

epiroute::RatesFile to_file(const epi_rates& r) {
  epiroute::RatesFile f;
  f.rates = to_rates(r);
  for (int k = 0; k < 4; ++k) {
    f.samples[k] = r.samples[k];
    f.half_width[k] = r.half_width[k];
  }
  return f;
}

epi_rates from_file(const epiroute::RatesFile& f) {
  epi_rates r{};
  r.lambda = f.rates.lambda;
  r.mu = f.rates.mu;
  r.gamma = f.rates.gamma;
  r.eta = f.rates.eta;
  for (int k = 0; k < 4; ++k) {
    r.samples[k] = f.samples[k];
    r.half_width[k] = f.half_width[k];
  }
  return r;
}

epiroute::SrnModel build(const epiroute::NetworkConfig& cfg, const epiroute::MeetingRates& r, epi_engine e) {
  if (e == EPI_ENGINE_MONOLITHIC) return epiroute::build_monolithic(cfg, r);
  if (e == EPI_ENGINE_FOLDED) return epiroute::build_folded(cfg, r);
  throw std::invalid_argument("unknown SRN engine");
}

}  // namespace

extern "C" {

const char* epi_version(void) { return "1.0.0"; }

const char* epi_last_error(void) { return g_last_error.c_str(); }

const char* epi_status_name(epi_status s) {
  switch (s) {
    case EPI_OK:
      return "ok";
    case EPI_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case EPI_ERR_CONFIG:
      return "configuration error";
    case EPI_ERR_IO:
      return "i/o error";
    case EPI_ERR_STATE_BUDGET:
      return "state budget exceeded";
    case EPI_ERR_SOLVER:
      return "solver failure";
    case EPI_ERR_NOT_SATURATED:
      return "ode not saturated";
    case EPI_ERR_TOO_FEW_SAMPLES:
      return "too few samples";
    case EPI_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

epi_status epi_config_load(const char* path, epi_config** out) {
  EPI_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new epi_config{epiroute::load_config(path)}; });
}

epi_status epi_config_parse(const char* json_text, epi_config** out) {
  EPI_REQUIRE(json_text && out, "null argument");
  return guarded([&] { *out = new epi_config{epiroute::parse_config(json_text)}; });
}

epi_status epi_config_reference(int n_communities, int nodes, epi_config** out) {
  EPI_REQUIRE(out, "null argument");
  return guarded([&] {
    auto cfg = epiroute::reference_config(n_communities, nodes);
    epiroute::validate_config(cfg);
    *out = new epi_config{std::move(cfg)};
  });
}

epi_status epi_config_clone(const epi_config* cfg, epi_config** out) {
  EPI_REQUIRE(cfg && out, "null argument");
  return guarded([&] { *out = new epi_config{cfg->cfg}; });
}

epi_status epi_config_set_nodes(epi_config* cfg, int nodes) {
  EPI_REQUIRE(cfg, "null argument");
  return guarded([&] {
    auto c = cfg->cfg;
    c.M = nodes;
    epiroute::validate_config(c);
    cfg->cfg = std::move(c);
  });
}

epi_status epi_config_shape(const epi_config* cfg, int* n_communities, int* nodes) {
  EPI_REQUIRE(cfg, "null argument");
  if (n_communities) *n_communities = cfg->cfg.N;
  if (nodes) *nodes = cfg->cfg.M;
  return EPI_OK;
}

epi_status epi_config_dump(const epi_config* cfg, char* buf, size_t buf_len, size_t* needed) {
  EPI_REQUIRE(cfg, "null argument");
  return guarded([&] {
    const std::string s = epiroute::dump_config(cfg->cfg);
    if (needed) *needed = s.size() + 1;
    if (buf && buf_len > 0) {
      const std::size_t n = std::min(buf_len - 1, s.size());
      std::memcpy(buf, s.data(), n);
      buf[n] = '\0';
    }
  });
}

void epi_config_free(epi_config* cfg) { delete cfg; }

epi_status epi_estimate_rates(const epi_config* cfg, uint64_t runs, uint64_t seed, double dt, epi_rates* out) {
  EPI_REQUIRE(cfg && out, "null argument");
  EPI_REQUIRE(runs >= 1, "runs must be >= 1");
  return guarded([&] { *out = from_file(epiroute::estimate_rates(cfg->cfg, runs, dt, seed)); });
}

epi_status epi_rates_load(const char* path, epi_rates* out) {
  EPI_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = from_file(epiroute::load_rates(path)); });
}

epi_status epi_rates_save(const char* path, const epi_rates* rates) {
  EPI_REQUIRE(path && rates, "null argument");
  return guarded([&] { epiroute::write_file_atomic(path, epiroute::format_rates(to_file(*rates))); });
}

epi_status epi_meeting_samples(const epi_config* cfg, int local_nodes, uint64_t runs, uint64_t seed, double dt,
                               double* out) {
  EPI_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    epiroute::MeetingScenario sc{epiroute::MeetingScenario::Kind::RoamingVsLocalSet, local_nodes, 0};
    const auto v = epiroute::meeting_samples(cfg->cfg, sc, runs, dt, seed);
    std::copy(v.begin(), v.end(), out);
  });
}

epi_status epi_count_states(const epi_config* cfg, epi_engine engine, uint64_t max_states, uint64_t* out) {
  EPI_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    // Reachability does not depend on the rate values, only on which are positive.
    epiroute::MeetingRates unit{1.0, 1.0, 1.0, 2.0};
    *out = epiroute::count_tangible_states(build(cfg->cfg, unit, engine), max_states ? max_states : 50'000'000);
  });
}

epi_status epi_model_build(const epi_config* cfg, const epi_rates* rates, epi_engine engine, uint64_t max_states,
                           epi_model** out) {
  EPI_REQUIRE(cfg && rates && out, "null argument");
  return guarded([&] {
    epiroute::ExpansionOptions o;
    if (max_states) o.max_states = max_states;
    auto m = std::make_unique<epi_model>();
    m->ctmc = epiroute::expand_reachability(build(cfg->cfg, to_rates(*rates), engine), o);
    *out = m.release();
  });
}

uint64_t epi_model_states(const epi_model* model) { return model ? model->ctmc.states() : 0; }

epi_status epi_model_analyze(const epi_model* model, epi_analysis* out) {
  EPI_REQUIRE(model && out, "null argument");
  return guarded([&] {
    const auto& c = model->ctmc;
    const auto abs = epiroute::mtta(c);
    const auto tx = epiroute::expected_transmissions(c);
    epi_analysis a{};
    a.states = c.states();
    a.transitions = c.transitions();
    a.mtta = abs.mtta;
    a.transmissions = tx.exact_limit;
    a.transmissions_t_large = tx.at_t_large;
    a.t_large = tx.t_large;
    a.truncation_warning = tx.truncation_warning ? 1 : 0;
    a.iterations = abs.iterations;
    a.residual = abs.residual;
    *out = a;
  });
}

epi_status epi_model_cdf(const epi_model* model, const double* grid, size_t n, double* values) {
  EPI_REQUIRE(model && (n == 0 || (grid && values)), "null argument");
  return guarded([&] {
    const auto pts = epiroute::delivery_cdf(model->ctmc, std::span<const double>(grid, n));
    for (std::size_t i = 0; i < n; ++i) values[i] = pts[i].value;
  });
}

epi_status epi_model_write_edges(const epi_model* model, const char* path) {
  EPI_REQUIRE(model && path, "null argument");
  return guarded([&] {
    std::ostringstream os;
    epiroute::write_edge_list(model->ctmc, os, epiroute::kTransmissionsReward);
    epiroute::write_file_atomic(path, os.str());
  });
}

void epi_model_free(epi_model* model) { delete model; }

epi_status epi_ode_delay(const epi_config* cfg, const epi_rates* rates, double dt, const double* grid, size_t n,
                         double* fhat, const char* trajectory_csv, epi_ode_result* out) {
  EPI_REQUIRE(cfg && rates && out, "null argument");
  EPI_REQUIRE(n == 0 || (grid && fhat), "null grid");
  return guarded([&] {
    epiroute::OdeDelayOptions o;
    if (dt > 0) o.dt = dt;
    const auto& c = cfg->cfg;
    auto res = epiroute::ode_delay(c, to_rates(*rates), o);
    const auto& s = res.trajectory.samples;
    for (std::size_t i = 0; i < n; ++i) {
      // Linear interpolation on the fixed-step trajectory; saturated beyond its end.
      const double t = grid[i];
      double total;
      if (t <= 0) {
        total = s.front().total_infected();
      } else if (t >= s.back().t) {
        total = s.back().total_infected();
      } else {
        const auto k = static_cast<std::size_t>(t / o.dt);
        const double w = (t - s[k].t) / (s[k + 1].t - s[k].t);
        total = (1 - w) * s[k].total_infected() + w * s[k + 1].total_infected();
      }
      fhat[i] = std::clamp((total - 1.0) / (c.M - 1), 0.0, 1.0);
    }
    if (trajectory_csv) epiroute::write_file_atomic(trajectory_csv, epiroute::trajectory_csv(res.trajectory));
    out->delay = res.delay;
    out->t_max = res.t_max;
    out->clamped = res.trajectory.clamped;
    out->decreasing_steps = res.trajectory.decreasing_steps;
  });
}

epi_status epi_simulate(const epi_config* cfg, uint64_t runs, uint64_t seed, double tx_delay, double dt,
                        epi_sim_run* out) {
  EPI_REQUIRE(cfg && out, "null argument");
  EPI_REQUIRE(runs >= 1, "runs must be >= 1");
  return guarded([&] {
    epiroute::SimOptions o;
    o.tx_delay = tx_delay;
    if (dt > 0) o.dt = dt;
    const auto v = epiroute::simulate_epidemics(cfg->cfg, o, runs, seed);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = {v[i].delivery_delay, v[i].transmissions};
  });
}

namespace {

epi_chi2 to_c(const epiroute::ChiSquareReport& r) {
  return {r.statistic, r.bins, r.dof, r.critical_value, r.passed, r.alt_dof, r.alt_critical_value, r.alt_passed};
}

}  // namespace

epi_status epi_chi2_uniform(const uint64_t* counts, size_t cells, double alpha, epi_chi2* out) {
  EPI_REQUIRE(counts && out, "null argument");
  return guarded([&] { *out = to_c(epiroute::chi_square_uniform_discrete(std::span(counts, cells), alpha)); });
}

epi_status epi_chi2_exponential(const double* samples, size_t n, int bins, double alpha, epi_chi2* out) {
  EPI_REQUIRE(samples && out, "null argument");
  return guarded([&] { *out = to_c(epiroute::chi_square_exponential(std::span(samples, n), bins, alpha)); });
}

epi_status epi_percent_error(double model_value, double reference_value, double* out) {
  EPI_REQUIRE(out, "null argument");
  return guarded([&] { *out = epiroute::percent_error(model_value, reference_value); });
}

epi_status epi_write_text_atomic(const char* path, const char* text) {
  EPI_REQUIRE(path && text, "null argument");
  return guarded([&] { epiroute::write_file_atomic(path, text); });
}

}  // extern "C"
