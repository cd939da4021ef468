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

#include "netop/env.hpp"

#include <json.hpp>

#include "netop/errors.hpp"

namespace netop::env {

namespace {

using codec::ActionId;
using codec::Phase;

void next_item(EpisodeState& s) {
  ++s.cursor;
  s.phase = Phase::kDiagnose;
  s.pending_verdict.reset();
  s.pending_command.reset();
  if (s.cursor >= s.script.size()) s.done = true;
}

// Advances the phase machine with an action known to be correct.
void advance(EpisodeState& s, ActionId action) {
  s.retries_on_current = 0;
  auto component = codec::decode_action(action, s.phase);
  switch (s.phase) {
    case Phase::kDiagnose: {
      auto verdict = std::get<netsim::Verdict>(*component);
      if (verdict == netsim::Verdict::kNoFault) {
        next_item(s);
      } else {
        s.pending_verdict = verdict;
        s.phase = Phase::kCommand;
      }
      break;
    }
    case Phase::kCommand:
      s.pending_command = std::get<netsim::Command>(*component);
      s.phase = Phase::kParameter;
      break;
    case Phase::kParameter: {
      netsim::DeviceInstruction instr{*s.pending_verdict, s.pending_command,
                                      std::get<netsim::Parameter>(*component)};
      s.network = netsim::apply_instruction(s.network,
                                            s.script[s.cursor].item, instr);
      next_item(s);
      break;
    }
  }
}

}  // namespace

int max_steps_for(std::size_t item_count, int fault_count) {
  return 4 * (static_cast<int>(item_count) + 2 * fault_count);
}

EpisodeState start_episode(netsim::NetworkState network) {
  EpisodeState s;
  s.script = netsim::oracle_script(network);
  s.fault_count = network.faults_remaining;
  s.max_steps = max_steps_for(s.script.size(), s.fault_count);
  s.network = std::move(network);
  s.done = s.script.empty();
  return s;
}

std::pair<EpisodeState, codec::ObservationVector> reset(
    std::uint64_t design_seed, std::uint64_t fault_seed,
    const netsim::SimConfig& cfg) {
  auto design = netsim::generate_design(design_seed, cfg);
  auto injected = netsim::inject_faults(design, fault_seed, cfg);
  auto state = start_episode(std::move(injected.state));
  auto obs = observe(state);
  return {std::move(state), obs};
}

codec::ObservationVector observe(const EpisodeState& state) {
  if (state.done) return codec::kPadObservation;
  return codec::build_observation(state.script[state.cursor].item, state.phase,
                                  state.pending_command);
}

ActionId oracle_action(const EpisodeState& state) {
  if (state.done) throw ProtocolError("episode is done");
  const auto& steps = state.script[state.cursor].steps;
  return codec::encode_action(steps[static_cast<int>(state.phase)]);
}

StepResult step(EpisodeState& state, ActionId action) {
  const ActionId expected = oracle_action(state);
  ++state.steps_taken;

  StepResult result;
  if (action == expected) {
    result.reward = 1;
    advance(state, action);
  } else {
    result.reward = -1;
    ++state.negative_rewards;
    if (++state.retries_on_current >= kFailuresBeforeAssist) {
      state.assisted = true;
      result.assisted_action = expected;
      advance(state, expected);
    }
  }
  state.total_reward += result.reward;
  if (state.steps_taken >= state.max_steps) state.done = true;

  result.episode_done = state.done;
  result.network_repaired = netsim::is_repaired(state.network);
  result.next_observation = observe(state);
  return result;
}

ReplaySample make_sample(const codec::ObservationVector& obs, ActionId action,
                         int reward, const codec::ObservationVector& next_obs) {
  if (reward != 1 && reward != -1) {
    throw ContractError("reward must be +1 or -1, got " +
                        std::to_string(reward));
  }
  return {obs, action, reward, next_obs};
}

std::string sample_to_json_line(const ReplaySample& sample) {
  nlohmann::json line = {{"schema", kTraceSchema},
                         {"obs", sample.obs},
                         {"action", codec::to_int(sample.action)},
                         {"action_name", codec::action_name(sample.action)},
                         {"reward", sample.reward},
                         {"next_obs", sample.next_obs}};
  return line.dump();
}

}  // namespace netop::env
