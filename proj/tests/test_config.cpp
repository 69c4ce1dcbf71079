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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "epiroute/config.hpp"
#include "epiroute/io.hpp"

using namespace epiroute;

TEST_CASE("reference layouts validate") {
  for (int N : {3, 4, 5}) {
    auto c = reference_config(N, 10);
    CHECK(validate_config(c).empty());
  }
  CHECK_THROWS_AS(reference_config(6, 10), ConfigError);
}

TEST_CASE("invalid configurations") {
  auto c = reference_config(3, 5);
  SUBCASE("P_sel sum") {
    c.P_sel[0] += 1e-6;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  }
  SUBCASE("overlap") {
    c.community_centers[1] = {300, 300};
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  }
  SUBCASE("outside") {
    c.community_centers[1] = {20, 500};
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  }
  SUBCASE("speeds") {
    c.v_min = c.v_max;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  }
  SUBCASE("too few nodes") {
    c.M = 1;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  }
}

TEST_CASE("large communication range only warns") {
  auto c = reference_config(3, 5);
  c.R = 30;
  CHECK(validate_config(c).size() == 1);
}

TEST_CASE("config JSON round trip and strictness") {
  const auto c = reference_config(4, 15);
  const auto text = dump_config(c);
  const auto back = parse_config(text);
  CHECK(back.N == 4);
  CHECK(back.M == 15);
  CHECK(back.P_sel == c.P_sel);
  CHECK(back.community_centers[3].x == 750);
  CHECK(dump_config(back) == text);

  std::string typo = text;
  typo.replace(typo.find("\"alpha\""), 7, "\"alpah\"");
  CHECK_THROWS_AS(parse_config(typo), ConfigError);
  std::string old = text;
  old.replace(old.find("\"version\": 1"), 12, "\"version\": 2");
  CHECK_THROWS_AS(parse_config(old), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("rates file round trip") {
  RatesFile f;
  f.rates = {0.0266964, 0.00025943, 0.000256124, 0.00107907};
  for (int k = 0; k < 4; ++k) {
    f.samples[k] = 10000;
    f.half_width[k] = 1e-6 * (k + 1);
  }
  const auto text = format_rates(f);
  CHECK(text.rfind("lambda,mu,gamma,eta,", 0) == 0);
  const auto back = parse_rates(text);
  CHECK(back.rates.gamma == doctest::Approx(f.rates.gamma).epsilon(1e-11));
  CHECK(back.samples[3] == 10000);
  CHECK_THROWS_AS(parse_rates("lambda,mu\n1,2\n"), ConfigError);
  CHECK_THROWS_AS(parse_rates("lambda,mu,gamma,eta\n1,1,2,1\n"), ConfigError);  // eta < gamma
}

TEST_CASE("atomic file write") {
  const auto dir = std::filesystem::temp_directory_path() / "epiroute_test_io";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "x.csv").string();
  write_file_atomic(path, "a,b\n1,2\n");
  CHECK(read_file(path) == "a,b\n1,2\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_THROWS_AS(write_file_atomic("/nonexistent/dir/x.csv", "x"), IoError);
  CHECK(fmt_num(0.1) == "0.1");
  CHECK(fmt_num(1272.72) == "1272.72");
}
