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

// epiroute command-line front end. Talks to the library only through the C API.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epiroute/epiroute.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 3;

struct Failure {
  int code;
  std::string message;
};

void check(epi_status s, const std::string& what) {
  if (s == EPI_OK) return;
  const int code = (s == EPI_ERR_INVALID_ARGUMENT || s == EPI_ERR_CONFIG) ? kExitUsage : kExitFailure;
  throw Failure{code, what + ": " + epi_status_name(s) + ": " + epi_last_error()};
}

[[noreturn]] void usage(const std::string& msg) { throw Failure{kExitUsage, msg}; }

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, r.ptr);
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) { line(header); }
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  void save(const std::string& path) const { check(epi_write_text_atomic(path.c_str(), os_.str().c_str()), path); }

 private:
  std::ostringstream os_;
};

struct ConfigHandle {
  epi_config* p = nullptr;
  ~ConfigHandle() { epi_config_free(p); }
};
struct ModelHandle {
  epi_model* p = nullptr;
  ~ModelHandle() { epi_model_free(p); }
};

// Options shared by the subcommands.
struct Options {
  std::string config;
  std::string engine;
  std::string engines;
  std::string rates;
  std::string out;
  std::string cdf_grid;
  std::string reference = "sim";
  std::optional<std::uint64_t> runs;
  std::uint64_t seed = 1;
  std::uint64_t max_states = 0;
  double tx_delay = 0.01;
  double dt = 0.1;
  double ode_dt = 0.5;
};

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> g;
  if (spec.empty()) return g;
  double a, b, h;
  char c1, c2;
  std::istringstream is(spec);
  if (!(is >> a >> c1 >> b >> c2 >> h) || c1 != ':' || c2 != ':' || !is.eof())
    usage("--cdf-grid expects start:stop:step");
  if (!(h > 0) || a < 0 || b < a) usage("--cdf-grid needs 0 <= start <= stop and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) g.push_back(a + i * h);
  return g;
}

void load_config(const Options& o, ConfigHandle& cfg) {
  if (o.config.empty()) usage("--config is required");
  check(epi_config_load(o.config.c_str(), &cfg.p), "loading " + o.config);
}

std::string out_dir(const Options& o) {
  if (o.out.empty()) usage("--out is required");
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (ec) throw Failure{kExitFailure, "cannot create " + o.out + ": " + ec.message()};
  return o.out;
}

epi_rates obtain_rates(const Options& o, const epi_config* cfg, const std::string& dir) {
  epi_rates r{};
  if (!o.rates.empty()) {
    check(epi_rates_load(o.rates.c_str(), &r), "loading " + o.rates);
    return r;
  }
  const std::uint64_t runs = o.runs.value_or(10000);
  if (runs == 0) usage("--runs must be >= 1");
  std::cerr << "estimating meeting rates from " << runs << " runs per experiment\n";
  check(epi_estimate_rates(cfg, runs, o.seed, o.dt, &r), "estimating rates");
  check(epi_rates_save((dir + "/rates.csv").c_str(), &r), "saving rates");
  return r;
}

std::optional<epi_engine> srn_engine(const std::string& e) {
  if (e == "mono") return EPI_ENGINE_MONOLITHIC;
  if (e == "folded") return EPI_ENGINE_FOLDED;
  return std::nullopt;
}

struct Measures {
  double delay = NAN;
  double transmissions = NAN;
  std::uint64_t states = 0;
};

Measures run_srn(const Options& o, const epi_config* cfg, const epi_rates& r, epi_engine e,
                 const std::vector<double>& grid, std::vector<double>* cdf, epi_analysis* full = nullptr) {
  ModelHandle m;
  check(epi_model_build(cfg, &r, e, o.max_states, &m.p), "building model");
  epi_analysis a{};
  check(epi_model_analyze(m.p, &a), "solving model");
  if (a.truncation_warning)
    std::cerr << "warning: transmissions at t_large differ from the exact limit by more than 1%\n";
  if (cdf && !grid.empty()) {
    cdf->resize(grid.size());
    check(epi_model_cdf(m.p, grid.data(), grid.size(), cdf->data()), "transient analysis");
  }
  if (full) *full = a;
  return {a.mtta, a.transmissions, a.states};
}

Measures run_ode(const Options& o, const epi_config* cfg, const epi_rates& r, const std::vector<double>& grid,
                 std::vector<double>* cdf, const std::string& trajectory) {
  epi_ode_result res{};
  std::vector<double> f(grid.size());
  check(epi_ode_delay(cfg, &r, o.ode_dt, grid.empty() ? nullptr : grid.data(), grid.size(),
                      grid.empty() ? nullptr : f.data(), trajectory.empty() ? nullptr : trajectory.c_str(), &res),
        "integrating ODE");
  if (res.clamped) std::cerr << "note: " << res.clamped << " negative ODE excursions clamped to zero\n";
  if (cdf) *cdf = f;
  return {res.delay, NAN, 0};  // the fluid model has no transmission measure
}

struct SimSummary {
  Measures m;
  double hw_delay = NAN, hw_tx = NAN;
  std::vector<epi_sim_run> runs;
};

SimSummary run_sim(const Options& o, const epi_config* cfg) {
  const std::uint64_t runs = o.runs.value_or(8000);
  if (runs == 0) usage("--runs must be >= 1");
  SimSummary s;
  s.runs.resize(runs);
  check(epi_simulate(cfg, runs, o.seed, o.tx_delay, o.dt, s.runs.data()), "simulating");
  double d = 0, d2 = 0, t = 0, t2 = 0;
  for (const auto& r : s.runs) {
    d += r.delay;
    d2 += r.delay * r.delay;
    t += r.transmissions;
    t2 += double(r.transmissions) * r.transmissions;
  }
  const double n = double(runs);
  s.m.delay = d / n;
  s.m.transmissions = t / n;
  if (runs > 1) {
    s.hw_delay = 1.96 * std::sqrt(std::max(0.0, (d2 - n * s.m.delay * s.m.delay) / (n - 1)) / n);
    s.hw_tx = 1.96 * std::sqrt(std::max(0.0, (t2 - n * s.m.transmissions * s.m.transmissions) / (n - 1)) / n);
  }
  return s;
}

void write_cdf(const std::string& path, const std::vector<double>& grid, const std::vector<double>& v) {
  Csv c({"t", "cdf"});
  for (std::size_t i = 0; i < grid.size(); ++i) c.line({num(grid[i]), num(v[i])});
  c.save(path);
}

int cmd_estimate_rates(const Options& o) {
  const std::uint64_t runs = o.runs.value_or(10000);
  if (runs == 0) usage("--runs must be >= 1");
  if (o.out.empty()) usage("--out <rates file> is required");
  ConfigHandle cfg;
  load_config(o, cfg);
  epi_rates r{};
  check(epi_estimate_rates(cfg.p, runs, o.seed, o.dt, &r), "estimating rates");
  check(epi_rates_save(o.out.c_str(), &r), "saving rates");
  std::cout << "lambda=" << num(r.lambda) << " mu=" << num(r.mu) << " gamma=" << num(r.gamma)
            << " eta=" << num(r.eta) << "\n";
  return 0;
}

int cmd_analyze(const Options& o) {
  const auto grid = parse_grid(o.cdf_grid);
  const auto e = srn_engine(o.engine);
  if (!e && o.engine != "ode") usage("--engine must be mono, folded or ode");
  ConfigHandle cfg;
  load_config(o, cfg);
  const std::string dir = out_dir(o);
  const epi_rates r = obtain_rates(o, cfg.p, dir);
  int N = 0, M = 0;
  epi_config_shape(cfg.p, &N, &M);
  std::vector<double> cdf;
  Csv summary({"engine", "N", "M", "states", "transitions", "delay", "transmissions", "transmissions_t_large",
               "t_large", "solver_iterations", "residual"});
  if (e) {
    epi_analysis a{};
    run_srn(o, cfg.p, r, *e, grid, &cdf, &a);
    summary.line({o.engine, std::to_string(N), std::to_string(M), std::to_string(a.states),
                  std::to_string(a.transitions), num(a.mtta), num(a.transmissions), num(a.transmissions_t_large),
                  num(a.t_large), std::to_string(a.iterations), num(a.residual)});
    std::cout << "states=" << a.states << " delay=" << num(a.mtta) << " transmissions=" << num(a.transmissions)
              << "\n";
  } else {
    const auto m = run_ode(o, cfg.p, r, grid, &cdf, dir + "/trajectory.csv");
    summary.line({"ode", std::to_string(N), std::to_string(M), "", "", num(m.delay), num(m.transmissions), "", "",
                  "", ""});
    std::cout << "delay=" << num(m.delay) << "\n";
  }
  summary.save(dir + "/summary.csv");
  if (!grid.empty()) write_cdf(dir + "/cdf.csv", grid, cdf);
  return 0;
}

int cmd_simulate(const Options& o) {
  auto grid = parse_grid(o.cdf_grid);
  ConfigHandle cfg;
  load_config(o, cfg);
  const std::string dir = out_dir(o);
  int M = 0;
  epi_config_shape(cfg.p, nullptr, &M);
  const auto s = run_sim(o, cfg.p);

  Csv runs({"run", "delay", "transmissions"});
  for (std::size_t i = 0; i < s.runs.size(); ++i)
    runs.line({std::to_string(i), num(s.runs[i].delay), std::to_string(s.runs[i].transmissions)});
  runs.save(dir + "/runs.csv");

  const bool ci = s.runs.size() > 1;
  Csv summary({"runs", "mean_delay", "hw_delay", "mean_transmissions", "hw_transmissions", "ci_defined"});
  summary.line({std::to_string(s.runs.size()), num(s.m.delay), num(s.hw_delay), num(s.m.transmissions),
                num(s.hw_tx), ci ? "1" : "0"});
  summary.save(dir + "/summary.csv");

  std::vector<double> delays;
  for (const auto& r : s.runs) delays.push_back(r.delay);
  std::sort(delays.begin(), delays.end());
  if (grid.empty())
    for (int k = 0; k <= 100; ++k) grid.push_back(delays.back() * k / 100.0);
  std::vector<double> F;
  for (double t : grid)
    F.push_back(double(std::upper_bound(delays.begin(), delays.end(), t) - delays.begin()) / delays.size());
  write_cdf(dir + "/cdf.csv", grid, F);

  Csv uni({"test", "statistic", "dof", "critical", "passed"});
  if (M >= 3) {
    std::vector<std::uint64_t> counts(M - 1, 0);
    for (const auto& r : s.runs) ++counts.at(r.transmissions - 1);
    epi_chi2 c{};
    const epi_status st = epi_chi2_uniform(counts.data(), counts.size(), 0.01, &c);
    if (st == EPI_OK)
      uni.line({"uniform", num(c.statistic), std::to_string(c.dof), num(c.critical), c.passed ? "1" : "0"});
    else if (st == EPI_ERR_TOO_FEW_SAMPLES)
      uni.line({"uniform", "nan", std::to_string(M - 2), "nan", "NA"});
    else
      check(st, "uniformity test");
  }
  uni.save(dir + "/uniformity.csv");
  std::cout << "delay=" << num(s.m.delay) << " (+/- " << num(s.hw_delay) << ") transmissions="
            << num(s.m.transmissions) << " (+/- " << num(s.hw_tx) << ")" << (ci ? "" : " [CI undefined]") << "\n";
  return 0;
}

int cmd_compare(const Options& o) {
  std::vector<std::string> engines;
  std::stringstream ss(o.engines);
  for (std::string e; std::getline(ss, e, ',');)
    if (!e.empty()) engines.push_back(e);
  if (engines.size() < 2) usage("--engines needs at least two engines");
  for (const auto& e : engines)
    if (e != "mono" && e != "folded" && e != "ode" && e != "sim") usage("unknown engine " + e);
  if (std::find(engines.begin(), engines.end(), o.reference) == engines.end())
    usage("--reference must be one of the compared engines");
  if (o.rates.empty() && std::any_of(engines.begin(), engines.end(), [](auto& e) { return e != "sim"; }))
    usage("compare needs --rates so every engine uses the same meeting rates");
  ConfigHandle cfg;
  load_config(o, cfg);
  const std::string dir = out_dir(o);
  epi_rates r{};
  if (!o.rates.empty()) check(epi_rates_load(o.rates.c_str(), &r), "loading " + o.rates);

  std::map<std::string, Measures> got;
  for (const auto& e : engines) {
    if (auto se = srn_engine(e))
      got[e] = run_srn(o, cfg.p, r, *se, {}, nullptr);
    else if (e == "ode")
      got[e] = run_ode(o, cfg.p, r, {}, nullptr, "");
    else
      got[e] = run_sim(o, cfg.p).m;
  }
  const Measures ref = got[o.reference];
  auto pe = [](double v, double ref) -> double {
    double out = NAN;
    if (std::isnan(v) || std::isnan(ref) || epi_percent_error(v, ref, &out) != EPI_OK) return NAN;
    return out;
  };
  Csv c({"engine", "states", "delay", "transmissions", "pe_delay", "pe_transmissions"});
  for (const auto& e : engines) {
    const auto& m = got[e];
    c.line({e, m.states ? std::to_string(m.states) : "", num(m.delay), num(m.transmissions),
            num(pe(m.delay, ref.delay)), num(pe(m.transmissions, ref.transmissions))});
    std::cout << e << ": delay=" << num(m.delay) << " transmissions=" << num(m.transmissions)
              << " pe_delay=" << num(pe(m.delay, ref.delay)) << "\n";
  }
  c.save(dir + "/comparison.csv");
  return 0;
}

int cmd_statespace(const Options& o) {
  const auto e = srn_engine(o.engine);
  if (!e) usage("--engine must be mono or folded");
  ConfigHandle cfg;
  load_config(o, cfg);
  std::uint64_t n = 0;
  check(epi_count_states(cfg.p, *e, o.max_states, &n), "expanding state space");
  int N = 0, M = 0;
  epi_config_shape(cfg.p, &N, &M);
  std::cout << "engine=" << o.engine << " N=" << N << " M=" << M << " states=" << n << "\n";
  if (!o.out.empty()) {
    Csv c({"engine", "N", "M", "states"});
    c.line({o.engine, std::to_string(N), std::to_string(M), std::to_string(n)});
    c.save(out_dir(o) + "/statespace.csv");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epidemic routing performance toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "network configuration (JSON)");
    s->add_option("--seed", o.seed, "master seed");
  };

  auto* est = app.add_subcommand("estimate-rates", "estimate lambda, mu, gamma and eta by simulation");
  add_common(est);
  est->add_option("--runs", o.runs, "runs per experiment (default 10000)");
  est->add_option("--out", o.out, "rates file to write");
  est->add_option("--dt", o.dt, "simulation time step (s)");

  auto* ana = app.add_subcommand("analyze", "solve the mono/folded SRN or the ODE model");
  add_common(ana);
  ana->add_option("--engine", o.engine, "mono | folded | ode")->required();
  ana->add_option("--rates", o.rates, "rates file (estimated when omitted)");
  ana->add_option("--runs", o.runs, "runs per experiment when estimating rates (default 10000)");
  ana->add_option("--out", o.out, "output directory");
  ana->add_option("--cdf-grid", o.cdf_grid, "start:stop:step for cdf.csv");
  ana->add_option("--max-states", o.max_states, "tangible state budget");

  auto* sim = app.add_subcommand("simulate", "run the mobility simulator");
  add_common(sim);
  sim->add_option("--runs", o.runs, "replications (default 8000)");
  sim->add_option("--out", o.out, "output directory");
  sim->add_option("--tx-delay", o.tx_delay, "message transfer time (s)");
  sim->add_option("--dt", o.dt, "simulation time step (s)");
  sim->add_option("--cdf-grid", o.cdf_grid, "start:stop:step for cdf.csv");

  auto* cmp = app.add_subcommand("compare", "compare engines on one configuration");
  add_common(cmp);
  cmp->add_option("--engines", o.engines, "comma list of mono, folded, ode, sim")->required();
  cmp->add_option("--reference", o.reference, "engine the percent errors refer to");
  cmp->add_option("--rates", o.rates, "rates file shared by all engines");
  cmp->add_option("--runs", o.runs, "simulation replications (default 8000)");
  cmp->add_option("--out", o.out, "output directory");
  cmp->add_option("--tx-delay", o.tx_delay, "message transfer time (s)");
  cmp->add_option("--max-states", o.max_states, "tangible state budget");

  auto* sts = app.add_subcommand("statespace", "count tangible states without solving");
  add_common(sts);
  sts->add_option("--engine", o.engine, "mono | folded")->required();
  sts->add_option("--out", o.out, "output directory");
  sts->add_option("--max-states", o.max_states, "tangible state budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*est) return cmd_estimate_rates(o);
    if (*ana) return cmd_analyze(o);
    if (*sim) return cmd_simulate(o);
    if (*cmp) return cmd_compare(o);
    if (*sts) return cmd_statespace(o);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
