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

#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>

#include "netop/errors.hpp"
#include "netop/rng.hpp"

namespace netop::env {
namespace {

using codec::ActionId;
using codec::Phase;

TEST(EnvTest, MaxSteps) {
  EXPECT_EQ(max_steps_for(30, 4), 4 * (30 + 8));
  EXPECT_EQ(max_steps_for(0, 0), 0);
}

TEST(EnvTest, ResetStartsInDiagnose) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto [state, obs] = reset(s, s, netsim::SimConfig{});
    EXPECT_DOUBLE_EQ(obs[codec::slot::kPhase], codec::embed(8, 0));
    EXPECT_EQ(state.cursor, 0u);
    EXPECT_EQ(state.phase, Phase::kDiagnose);
    EXPECT_GE(state.fault_count, 1);
    EXPECT_EQ(state.max_steps,
              4 * (static_cast<int>(state.item_count()) + 2 * state.fault_count));
    EXPECT_EQ(obs, observe(state));
  }
}

TEST(EnvTest, GoldenFirstObservation) {
  std::ifstream in(std::string(NETOP_FIXTURE_DIR) + "/first_obs_d0_f1.json");
  ASSERT_TRUE(in.good());
  const auto golden = nlohmann::json::parse(in);
  const auto obs = reset(0, 1, netsim::SimConfig{}).second;
  ASSERT_EQ(golden.size(), obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    EXPECT_NEAR(obs[i], golden[i].get<double>(), 1e-15) << "slot " << i;
  }
}

TEST(EnvTest, OracleRolloutProperty) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    auto [state, obs] = reset(s, s ^ 0x55, netsim::SimConfig{});
    const int expected =
        static_cast<int>(state.item_count()) + 2 * state.fault_count;
    int samples = 0;
    StepResult r;
    while (!state.done) {
      const auto action = oracle_action(state);
      r = step(state, action);
      ASSERT_EQ(r.reward, 1);
      make_sample(obs, action, r.reward, r.next_observation);
      obs = r.next_observation;
      ++samples;
    }
    EXPECT_EQ(samples, expected);
    EXPECT_EQ(state.total_reward, expected);
    EXPECT_EQ(state.negative_rewards, 0);
    EXPECT_FALSE(state.assisted);
    EXPECT_TRUE(r.network_repaired);
    EXPECT_TRUE(r.episode_done);
    EXPECT_EQ(r.next_observation, codec::kPadObservation);
    EXPECT_TRUE(netsim::is_repaired(state.network));
  }
}

// Advances the episode with oracle actions until the current item is faulted.
void skip_to_fault(EpisodeState& state) {
  while (!state.script[state.cursor].item.faulted()) {
    step(state, oracle_action(state));
  }
}

TEST(EnvTest, WrongDiagnosisKeepsPosition) {
  auto state = reset(11, 11, netsim::SimConfig{}).first;
  skip_to_fault(state);
  const auto cursor = state.cursor;
  const auto r = step(state, codec::action::kNoFault);
  EXPECT_EQ(r.reward, -1);
  EXPECT_EQ(state.cursor, cursor);
  EXPECT_EQ(state.phase, Phase::kDiagnose);
  EXPECT_EQ(state.retries_on_current, 1);
  EXPECT_EQ(state.negative_rewards, 1);
}

TEST(EnvTest, PhaseIllegalActionIsWrong) {
  auto state = reset(3, 4, netsim::SimConfig{}).first;
  const auto r = step(state, ActionId{9 + 4});  // PARAM_ADDR_5
  EXPECT_EQ(r.reward, -1);
  EXPECT_EQ(state.cursor, 0u);
}

TEST(EnvTest, ThirdFailureTriggersAssist) {
  auto state = reset(5, 6, netsim::SimConfig{}).first;
  skip_to_fault(state);
  const auto cursor = state.cursor;
  step(state, codec::action::kNoFault);
  step(state, codec::action::kNoFault);
  EXPECT_FALSE(state.assisted);
  EXPECT_EQ(state.phase, Phase::kDiagnose);
  const auto r = step(state, codec::action::kNoFault);
  ASSERT_TRUE(r.assisted_action.has_value());
  EXPECT_EQ(*r.assisted_action, codec::action::kFaultDetected);
  EXPECT_TRUE(state.assisted);
  EXPECT_EQ(state.cursor, cursor);
  EXPECT_EQ(state.phase, Phase::kCommand);
  EXPECT_EQ(state.retries_on_current, 0);
}

TEST(EnvTest, OracleActionExamples) {
  netsim::SimConfig cfg;
  cfg.fault_probability = 1.0;
  const auto design = netsim::generate_design(2, cfg);
  auto injected = netsim::inject_faults(design, 2, cfg).state;
  // Pin one address item's design value to index 17.
  netsim::ItemKey addr_key;
  for (auto& [key, value] : injected.design) {
    if (key.kind == netsim::ItemKind::kIpAddress) {
      addr_key = key;
      break;
    }
  }
  injected.design[addr_key] = "ip-address-17";
  injected.current[addr_key] = "ip-address-3";
  auto state = start_episode(injected);
  while (state.script[state.cursor].item.key != addr_key) {
    step(state, oracle_action(state));
  }
  EXPECT_EQ(oracle_action(state), codec::action::kFaultDetected);
  step(state, codec::action::kFaultDetected);
  EXPECT_EQ(codec::to_int(oracle_action(state)), 3);
  step(state, ActionId{3});
  EXPECT_EQ(codec::to_int(oracle_action(state)), 25);

  auto healthy = start_episode(netsim::healthy_state(design));
  EXPECT_EQ(oracle_action(healthy), codec::action::kNoFault);
}

TEST(EnvTest, RandomPolicyAlwaysTerminates) {
  Rng rng(9);
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto state = reset(s, s + 1, netsim::SimConfig{}).first;
    while (!state.done) {
      step(state, ActionId{static_cast<int>(rng.uniform_index(codec::kActionCount))});
      ASSERT_LE(state.steps_taken, state.max_steps);
    }
    EXPECT_THROW(step(state, ActionId{0}), ProtocolError);
    EXPECT_THROW(oracle_action(state), ProtocolError);
  }
}

TEST(EnvTest, SampleContract) {
  const auto obs = reset(1, 1, netsim::SimConfig{}).second;
  EXPECT_THROW(make_sample(obs, ActionId{0}, 0, obs), ContractError);
  const auto sample = make_sample(obs, ActionId{1}, 1, codec::kPadObservation);
  EXPECT_EQ(sample.obs, obs);
  EXPECT_EQ(sample.next_obs, codec::kPadObservation);
  const auto line = nlohmann::json::parse(sample_to_json_line(sample));
  EXPECT_EQ(line["schema"], "netop-trace-1");
  EXPECT_EQ(line["action"], 1);
  EXPECT_EQ(line["reward"], 1);
  EXPECT_EQ(line["obs"].size(), 16u);
}

}  // namespace
}  // namespace netop::env
