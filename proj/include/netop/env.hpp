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

// Repair episode over one faulted network.
//
// The environment walks the information items in enumeration order. For each
// item the operator first diagnoses it (NO_FAULT / FAULT_DETECTED); a faulted
// item then takes a command sub-step and a parameter sub-step, after which the
// three sub-actions are composed into one device instruction and applied.
// Every sub-step is scored +1 if it matches the oracle and -1 otherwise.
// A wrong action leaves the episode where it was; the third consecutive
// failure on the same sub-step makes the environment apply the oracle action
// itself and marks the episode as assisted.

#ifndef NETOP_ENV_HPP_
#define NETOP_ENV_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netop/codec.hpp"
#include "netop/netsim.hpp"

namespace netop::env {

inline constexpr int kFailuresBeforeAssist = 3;

struct EpisodeState {
  netsim::NetworkState network;
  // Items with their oracle sub-actions, captured at reset. An item is only
  // modified by its own repair, so the entries stay valid while pending.
  std::vector<netsim::ScriptEntry> script;
  std::size_t cursor = 0;
  codec::Phase phase = codec::Phase::kDiagnose;
  std::optional<netsim::Verdict> pending_verdict;
  std::optional<netsim::Command> pending_command;
  int steps_taken = 0;
  int retries_on_current = 0;
  bool assisted = false;
  int max_steps = 0;
  int fault_count = 0;
  int negative_rewards = 0;
  int total_reward = 0;
  bool done = false;

  std::size_t item_count() const { return script.size(); }
};

struct StepResult {
  int reward = 0;
  codec::ObservationVector next_observation{};
  bool episode_done = false;
  bool network_repaired = false;
  // Set when the retry limit made the environment apply this oracle action.
  std::optional<codec::ActionId> assisted_action;
};

struct ReplaySample {
  codec::ObservationVector obs{};
  codec::ActionId action{};
  int reward = 0;
  codec::ObservationVector next_obs{};

  bool operator==(const ReplaySample&) const = default;
};

// 4 x (items + 2 x faults).
int max_steps_for(std::size_t item_count, int fault_count);

EpisodeState start_episode(netsim::NetworkState network);

std::pair<EpisodeState, codec::ObservationVector> reset(
    std::uint64_t design_seed, std::uint64_t fault_seed,
    const netsim::SimConfig& cfg);

codec::ObservationVector observe(const EpisodeState& state);

// Throws ProtocolError once the episode is done.
StepResult step(EpisodeState& state, codec::ActionId action);

// Throws ProtocolError once the episode is done.
codec::ActionId oracle_action(const EpisodeState& state);

// Throws ContractError unless reward is +1 or -1.
ReplaySample make_sample(const codec::ObservationVector& obs,
                         codec::ActionId action, int reward,
                         const codec::ObservationVector& next_obs);

inline constexpr std::string_view kTraceSchema = "netop-trace-1";

// One JSON object per line; no trailing newline.
std::string sample_to_json_line(const ReplaySample& sample);

}  // namespace netop::env

#endif  // NETOP_ENV_HPP_
