// Copyright 2026 The netop Authors.
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

#ifndef NETOP_RUN_CONFIG_HPP_
#define NETOP_RUN_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "netop/netsim.hpp"
#include "netop/trainer.hpp"

namespace netop {

inline constexpr std::string_view kConfigSchema = "netop-config-1";

struct RunPaths {
  std::string out_dir = "out";
  std::string checkpoint = "out/model.ckpt";
  std::string fixtures = "tests/fixtures";

  bool operator==(const RunPaths&) const = default;
};

struct EvalConfig {
  int networks = 200;
  std::uint64_t seed = 1000000;
  int workers = 0;  // 0: hardware concurrency

  bool operator==(const EvalConfig&) const = default;
};

// Everything a CLI run needs in one JSON document. Every section and field is
// optional; missing values keep their defaults. Unknown fields are rejected.
struct RunConfig {
  netsim::SimConfig sim;
  trainer::TrainConfig train;
  RunPaths paths;
  EvalConfig eval;

  // Throws ConfigError naming the offending field ("train.batch_size").
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& cfg);
// Throws ConfigError on unknown fields, wrong types or invalid values.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::string& path);

}  // namespace netop

#endif  // NETOP_RUN_CONFIG_HPP_
