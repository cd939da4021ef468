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

#include "netop/run_config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <type_traits>

#include "netop/errors.hpp"

namespace netop {

namespace {

using nlohmann::json;

// Reads the fields of one JSON object section, rejecting anything unknown.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (!doc.is_object()) throw ConfigError(name_, "must be an object");
    doc_ = &doc;
  }

  template <class T>
  Section& field(const char* key, T& out) {
    seen_.emplace(key);
    auto it = doc_->find(key);
    if (it == doc_->end()) return *this;
    const std::string path = qualified(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(path, "must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(path, "must be an integer");
      if (std::is_unsigned_v<T> && it->is_number_integer() &&
          !it->is_number_unsigned()) {
        throw ConfigError(path, "must be non-negative");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(path, "must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError(path, "must be a string");
    } else {
      if (!it->is_array()) throw ConfigError(path, "must be an array");
      for (const auto& v : *it) {
        if (!v.is_number_integer()) {
          throw ConfigError(path, "must contain integers");
        }
      }
    }
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path, "value out of range");
    }
    return *this;
  }

  Section& custom(const char* key, const std::function<void(const json&,
                                                             const std::string&)>& fn) {
    seen_.emplace(key);
    auto it = doc_->find(key);
    if (it != doc_->end()) fn(*it, qualified(key));
    return *this;
  }

  void finish() const {
    for (const auto& [key, value] : doc_->items()) {
      if (!seen_.count(key)) throw ConfigError(qualified(key), "unknown field");
    }
  }

 private:
  std::string qualified(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  const json* doc_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

template <class Fn>
void with_prefix(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    const auto colon = std::string(e.what()).find(": ");
    throw ConfigError(prefix + "." + e.field(),
                      std::string(e.what()).substr(colon + 2));
  }
}

const char* loss_mode_token(trainer::LossMode mode) {
  return mode == trainer::LossMode::kSquared ? "squared" : "quantile_huber";
}

}  // namespace

void RunConfig::validate() const {
  with_prefix("sim", [&] { sim.validate(); });
  with_prefix("train", [&] { train.validate(); });
  if (paths.out_dir.empty()) throw ConfigError("paths.out_dir", "must not be empty");
  if (paths.checkpoint.empty()) {
    throw ConfigError("paths.checkpoint", "must not be empty");
  }
  if (eval.networks < 0) throw ConfigError("eval.networks", "must be non-negative");
  if (eval.workers < 0) throw ConfigError("eval.workers", "must be non-negative");
}

json to_json(const RunConfig& cfg) {
  const auto& s = cfg.sim;
  const auto& t = cfg.train;
  return {
      {"schema", kConfigSchema},
      {"sim",
       {{"device_min", s.device_min},
        {"device_max", s.device_max},
        {"subnet_pool_size", s.subnet_pool_size},
        {"address_pool_size", s.address_pool_size},
        {"fault_probability", s.fault_probability},
        {"fault_min", s.fault_min}}},
      {"train",
       {{"target_correct", t.target_correct},
        {"target_wrong", t.target_wrong},
        {"mean_threshold_correct", t.mean_threshold_correct},
        {"mean_threshold_wrong", t.mean_threshold_wrong},
        {"critical_weight", t.critical_weight},
        {"huber_kappa", t.huber_kappa},
        {"loss_mode", loss_mode_token(t.loss_mode)},
        {"learning_rate", t.learning_rate},
        {"phase2_learning_rate", t.phase2_learning_rate},
        {"adam_beta1", t.adam_beta1},
        {"adam_beta2", t.adam_beta2},
        {"adam_epsilon", t.adam_epsilon},
        {"hidden_sizes", t.hidden_sizes},
        {"batch_size", t.batch_size},
        {"buffer_capacity", t.buffer_capacity},
        {"epsilon_start", t.epsilon_start},
        {"epsilon_end", t.epsilon_end},
        {"epsilon_decay_steps", t.epsilon_decay_steps},
        {"warmup_steps", t.warmup_steps},
        {"collect_steps_per_update", t.collect_steps_per_update},
        {"phase1_steps", t.phase1_steps},
        {"phase2_max_steps", t.phase2_max_steps},
        {"phase2_epsilon", t.phase2_epsilon},
        {"store_assisted", t.store_assisted},
        {"validation_networks", t.validation_networks},
        {"validation_interval", t.validation_interval},
        {"log_interval", t.log_interval},
        {"seed", t.seed}}},
      {"paths",
       {{"out_dir", cfg.paths.out_dir},
        {"checkpoint", cfg.paths.checkpoint},
        {"fixtures", cfg.paths.fixtures}}},
      {"eval",
       {{"networks", cfg.eval.networks},
        {"seed", cfg.eval.seed},
        {"workers", cfg.eval.workers}}},
  };
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig cfg;
  Section top(doc, "");
  top.custom("schema", [](const json& v, const std::string& path) {
    if (!v.is_string() || v.get<std::string>() != kConfigSchema) {
      throw ConfigError(path, "must be \"netop-config-1\"");
    }
  });
  top.custom("sim", [&](const json& v, const std::string& path) {
    auto& s = cfg.sim;
    Section(v, path)
        .field("device_min", s.device_min)
        .field("device_max", s.device_max)
        .field("subnet_pool_size", s.subnet_pool_size)
        .field("address_pool_size", s.address_pool_size)
        .field("fault_probability", s.fault_probability)
        .field("fault_min", s.fault_min)
        .finish();
  });
  top.custom("train", [&](const json& v, const std::string& path) {
    auto& t = cfg.train;
    Section(v, path)
        .field("target_correct", t.target_correct)
        .field("target_wrong", t.target_wrong)
        .field("mean_threshold_correct", t.mean_threshold_correct)
        .field("mean_threshold_wrong", t.mean_threshold_wrong)
        .field("critical_weight", t.critical_weight)
        .field("huber_kappa", t.huber_kappa)
        .custom("loss_mode",
                [&](const json& m, const std::string& p) {
                  if (m == "quantile_huber") {
                    t.loss_mode = trainer::LossMode::kQuantileHuber;
                  } else if (m == "squared") {
                    t.loss_mode = trainer::LossMode::kSquared;
                  } else {
                    throw ConfigError(p,
                                      "must be \"quantile_huber\" or \"squared\"");
                  }
                })
        .field("learning_rate", t.learning_rate)
        .field("phase2_learning_rate", t.phase2_learning_rate)
        .field("adam_beta1", t.adam_beta1)
        .field("adam_beta2", t.adam_beta2)
        .field("adam_epsilon", t.adam_epsilon)
        .field("hidden_sizes", t.hidden_sizes)
        .field("batch_size", t.batch_size)
        .field("buffer_capacity", t.buffer_capacity)
        .field("epsilon_start", t.epsilon_start)
        .field("epsilon_end", t.epsilon_end)
        .field("epsilon_decay_steps", t.epsilon_decay_steps)
        .field("warmup_steps", t.warmup_steps)
        .field("collect_steps_per_update", t.collect_steps_per_update)
        .field("phase1_steps", t.phase1_steps)
        .field("phase2_max_steps", t.phase2_max_steps)
        .field("phase2_epsilon", t.phase2_epsilon)
        .field("store_assisted", t.store_assisted)
        .field("validation_networks", t.validation_networks)
        .field("validation_interval", t.validation_interval)
        .field("log_interval", t.log_interval)
        .field("seed", t.seed)
        .finish();
  });
  top.custom("paths", [&](const json& v, const std::string& path) {
    Section(v, path)
        .field("out_dir", cfg.paths.out_dir)
        .field("checkpoint", cfg.paths.checkpoint)
        .field("fixtures", cfg.paths.fixtures)
        .finish();
  });
  top.custom("eval", [&](const json& v, const std::string& path) {
    Section(v, path)
        .field("networks", cfg.eval.networks)
        .field("seed", cfg.eval.seed)
        .field("workers", cfg.eval.workers)
        .finish();
  });
  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(),
                     e.byte > 0 ? e.byte - 1 : 0);
  }
  return run_config_from_json(doc);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

}  // namespace netop
