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

#include "epiroute/config.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "epiroute/io.hpp"
#include "json.hpp"

namespace epiroute {

using nlohmann::json;

std::vector<std::string> validate_config(const NetworkConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.N < 1) fail("N must be >= 1");
  if (c.M < 2) fail("M must be >= 2");
  if (c.M > 255) fail("M must be <= 255");
  if (!(c.L > 0) || !(c.L_c > 0) || !(c.R > 0)) fail("L, L_c and R must be positive");
  if (c.L_c > c.L) fail("L_c must not exceed L");
  if (!(c.alpha > 0) || !(c.beta > 0)) fail("alpha and beta must be positive");
  if (c.P_r < 0 || c.P_r > 1 || c.P_l < 0 || c.P_l > 1) fail("P_r and P_l must lie in [0,1]");
  if (!(c.v_min > 0) || !(c.v_min < c.v_max)) fail("need 0 < v_min < v_max");
  if (!(c.v_trans > 0)) fail("v_trans must be positive");
  if (static_cast<int>(c.P_sel.size()) != c.N) fail("P_sel needs N entries");
  if (static_cast<int>(c.community_centers.size()) != c.N) fail("community_centers needs N entries");
  double sum = 0.0;
  for (double p : c.P_sel) {
    if (p < 0) fail("P_sel entries must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) fail("P_sel must sum to 1");
  const double h = c.L_c / 2;
  for (int i = 0; i < c.N; ++i) {
    const auto& a = c.community_centers[i];
    if (a.x - h < 0 || a.y - h < 0 || a.x + h > c.L || a.y + h > c.L)
      fail("community " + std::to_string(i + 1) + " is not inside the common area");
    for (int j = 0; j < i; ++j) {
      const auto& b = c.community_centers[j];
      if (std::abs(a.x - b.x) < c.L_c && std::abs(a.y - b.y) < c.L_c)
        fail("communities " + std::to_string(j + 1) + " and " + std::to_string(i + 1) + " overlap");
    }
  }
  std::vector<std::string> warn;
  if (c.R > c.L_c / 5) warn.push_back("R exceeds L_c/5; meeting-time exponentiality may not hold");
  return warn;
}

NetworkConfig reference_config(int N, int M) {
  NetworkConfig c;
  c.N = N;
  c.M = M;
  switch (N) {
    case 3:
      c.P_sel = {0.2, 0.4, 0.4};
      c.community_centers = {{250, 250}, {250, 750}, {750, 250}};
      break;
    case 4:
      c.P_sel = {0.2, 0.4, 0.1, 0.3};
      c.community_centers = {{250, 250}, {250, 750}, {750, 250}, {750, 750}};
      break;
    case 5:
      c.P_sel = {0.2, 0.4, 0.2, 0.1, 0.1};
      c.community_centers = {{250, 250}, {250, 750}, {750, 250}, {750, 750}, {500, 500}};
      break;
    default:
      throw ConfigError("reference layouts exist for N = 3, 4, 5 only");
  }
  return c;
}

NetworkConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {"version", "N",     "M",     "L",       "L_c",   "R",
                                              "alpha",   "beta",  "P_r",   "P_l",     "v_min", "v_max",
                                              "v_trans", "communities"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown config key: " + k);
  for (const auto& k : known)
    if (!j.contains(k)) throw ConfigError("missing config key: " + k);
  if (j["version"] != kConfigVersion) throw ConfigError("unsupported config version");

  NetworkConfig c;
  try {
    c.N = j["N"].get<int>();
    c.M = j["M"].get<int>();
    c.L = j["L"].get<double>();
    c.L_c = j["L_c"].get<double>();
    c.R = j["R"].get<double>();
    c.alpha = j["alpha"].get<double>();
    c.beta = j["beta"].get<double>();
    c.P_r = j["P_r"].get<double>();
    c.P_l = j["P_l"].get<double>();
    c.v_min = j["v_min"].get<double>();
    c.v_max = j["v_max"].get<double>();
    c.v_trans = j["v_trans"].get<double>();
    for (const auto& com : j["communities"]) {
      for (const auto& [k, v] : com.items())
        if (k != "center" && k != "P_sel") throw ConfigError("unknown community key: " + k);
      const auto& ctr = com.at("center");
      if (!ctr.is_array() || ctr.size() != 2) throw ConfigError("community center must be [x, y]");
      c.community_centers.push_back({ctr[0].get<double>(), ctr[1].get<double>()});
      c.P_sel.push_back(com.at("P_sel").get<double>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  validate_config(c);
  return c;
}

NetworkConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::string dump_config(const NetworkConfig& c) {
  json j;
  j["version"] = kConfigVersion;
  j["N"] = c.N;
  j["M"] = c.M;
  j["L"] = c.L;
  j["L_c"] = c.L_c;
  j["R"] = c.R;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["P_r"] = c.P_r;
  j["P_l"] = c.P_l;
  j["v_min"] = c.v_min;
  j["v_max"] = c.v_max;
  j["v_trans"] = c.v_trans;
  j["communities"] = json::array();
  for (int i = 0; i < c.N; ++i)
    j["communities"].push_back(
        {{"center", {c.community_centers[i].x, c.community_centers[i].y}}, {"P_sel", c.P_sel[i]}});
  return j.dump(2) + "\n";
}

void MeetingRates::validate() const {
  if (!(lambda > 0 && mu > 0 && gamma > 0 && eta > 0)) throw ConfigError("meeting rates must be positive");
  if (eta < gamma) throw ConfigError("eta must be >= gamma");
}

namespace {
const char* const kRateCols[] = {"lambda", "mu", "gamma", "eta"};
}

std::string format_rates(const RatesFile& r) {
  std::vector<std::string> header, values;
  const double v[4] = {r.rates.lambda, r.rates.mu, r.rates.gamma, r.rates.eta};
  for (int i = 0; i < 4; ++i) {
    header.emplace_back(kRateCols[i]);
    values.push_back(fmt_num(v[i]));
  }
  for (int i = 0; i < 4; ++i) {
    header.push_back(std::string("n_") + kRateCols[i]);
    values.push_back(std::to_string(r.samples[i]));
  }
  for (int i = 0; i < 4; ++i) {
    header.push_back(std::string("hw_") + kRateCols[i]);
    values.push_back(fmt_num(r.half_width[i]));
  }
  return CsvWriter(header).row(values).str();
}

RatesFile parse_rates(const std::string& text) {
  std::istringstream in(text);
  std::string head, vals;
  if (!std::getline(in, head) || !std::getline(in, vals)) throw ConfigError("rates file needs header and values");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      out.push_back(cell);
    }
    return out;
  };
  const auto h = split(head), v = split(vals);
  if (h.size() != v.size()) throw ConfigError("rates file header/value width mismatch");
  std::map<std::string, std::string> kv;
  for (std::size_t i = 0; i < h.size(); ++i) kv[h[i]] = v[i];
  RatesFile r;
  double* dst[4] = {&r.rates.lambda, &r.rates.mu, &r.rates.gamma, &r.rates.eta};
  try {
    for (int i = 0; i < 4; ++i) {
      auto it = kv.find(kRateCols[i]);
      if (it == kv.end()) throw ConfigError(std::string("rates file lacks column ") + kRateCols[i]);
      *dst[i] = std::stod(it->second);
      if (auto n = kv.find(std::string("n_") + kRateCols[i]); n != kv.end()) r.samples[i] = std::stoull(n->second);
      if (auto w = kv.find(std::string("hw_") + kRateCols[i]); w != kv.end()) r.half_width[i] = std::stod(w->second);
    }
  } catch (const std::logic_error&) {
    throw ConfigError("rates file has a malformed number");
  }
  r.rates.validate();
  return r;
}

RatesFile load_rates(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_rates(text);
}

}  // namespace epiroute
