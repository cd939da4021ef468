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

#include "netop/netsim.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "netop/errors.hpp"

namespace netop::netsim {
namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(NETOP_FIXTURE_DIR) + "/" + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Union-find over device names; returns false on a cycle.
bool is_tree(const NetworkDesign& d) {
  std::map<std::string, std::string> parent;
  for (const auto& dev : d.devices) parent[dev] = dev;
  std::function<std::string(const std::string&)> find =
      [&](const std::string& x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
      };
  for (const auto& l : d.links) {
    auto ra = find(l.a.device);
    auto rb = find(l.b.device);
    if (ra == rb) return false;
    parent[ra] = rb;
  }
  std::set<std::string> roots;
  for (const auto& dev : d.devices) roots.insert(find(dev));
  return roots.size() == 1 && d.links.size() + 1 == d.devices.size();
}

TEST(SimConfigTest, DefaultsAreValid) { EXPECT_NO_THROW(SimConfig{}.validate()); }

TEST(SimConfigTest, InvalidFieldIsNamed) {
  SimConfig cfg;
  cfg.device_min = 3;
  try {
    cfg.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "device_min");
  }
  cfg = SimConfig{};
  cfg.subnet_pool_size = 8;  // below device_max - 1
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SimConfig{};
  cfg.fault_probability = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(generate_design(0, cfg), ConfigError);
}

TEST(GenerateDesignTest, TreeInvariantsHold) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto d = generate_design(seed, SimConfig{});
    const int n = static_cast<int>(d.devices.size());
    ASSERT_GE(n, 4);
    ASSERT_LE(n, 10);
    ASSERT_TRUE(is_tree(d)) << "seed " << seed;

    std::set<int> subnets;
    std::set<Endpoint> endpoints;
    for (const auto& l : d.links) {
      EXPECT_TRUE(subnets.insert(l.subnet).second);
      EXPECT_GE(l.subnet, 1);
      EXPECT_LE(l.subnet, 32);
      EXPECT_NE(d.endpoint_addresses.at(l.a), d.endpoint_addresses.at(l.b));
      EXPECT_TRUE(endpoints.insert(l.a).second);
      EXPECT_TRUE(endpoints.insert(l.b).second);
      EXPECT_NE(l.a.device, l.b.device);
    }
    EXPECT_EQ(endpoints.size(), d.endpoint_addresses.size());
  }
}

TEST(GenerateDesignTest, SeedSevenExample) {
  const auto d = generate_design(7, SimConfig{});
  EXPECT_GE(d.devices.size(), 4u);
  EXPECT_LE(d.devices.size(), 10u);
  EXPECT_EQ(d.links.size(), d.devices.size() - 1);
  EXPECT_TRUE(is_tree(d));
}

TEST(GenerateDesignTest, DeterministicAndSeedSensitive) {
  EXPECT_EQ(generate_design(42, SimConfig{}), generate_design(42, SimConfig{}));
  int differing = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    differing += generate_design(s, SimConfig{}) == generate_design(s + 1, SimConfig{})
                     ? 0
                     : 1;
  }
  EXPECT_EQ(differing, 20);
}

TEST(GenerateDesignTest, CoversDeviceRangeAndProtocols) {
  std::set<std::size_t> sizes;
  std::set<Protocol> protocols;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto d = generate_design(s, SimConfig{});
    sizes.insert(d.devices.size());
    protocols.insert(d.protocol);
  }
  EXPECT_EQ(sizes, (std::set<std::size_t>{4, 5, 6, 7, 8, 9, 10}));
  EXPECT_EQ(protocols.size(), 3u);
}

TEST(GenerateDesignTest, ReducedPools) {
  SimConfig cfg;
  cfg.device_max = 6;
  cfg.subnet_pool_size = 8;
  cfg.address_pool_size = 8;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto d = generate_design(s, cfg);
    EXPECT_LE(d.devices.size(), 6u);
    for (const auto& l : d.links) EXPECT_LE(l.subnet, 8);
    for (const auto& [ep, a] : d.endpoint_addresses) {
      EXPECT_GE(a, 1);
      EXPECT_LE(a, 8);
    }
  }
}

TEST(HealthyStateTest, ItemSetFollowsProtocol) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto d = generate_design(s, SimConfig{});
    const auto st = healthy_state(d);
    EXPECT_TRUE(is_repaired(st));
    EXPECT_EQ(count_faults(st), 0);
    std::size_t per_device = 0;
    if (d.protocol != Protocol::kOspf) per_device += 1;
    if (d.protocol == Protocol::kRip) per_device += 1;
    // 3 interface items per endpoint, one network statement per endpoint.
    const std::size_t expected =
        d.links.size() * 2 * 4 + per_device * d.devices.size();
    EXPECT_EQ(st.design.size(), expected);
  }
}

TEST(InjectFaultsTest, FloorAndConsistency) {
  SimConfig cfg;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto d = generate_design(s, cfg);
    const auto r = inject_faults(d, s + 1000, cfg);
    ASSERT_GE(r.faults.size(), 1u);
    EXPECT_EQ(r.state.faults_remaining, static_cast<int>(r.faults.size()));
    EXPECT_EQ(count_faults(r.state), static_cast<int>(r.faults.size()));
    EXPECT_EQ(r.state.design, healthy_state(d).design);
    for (const auto& f : r.faults) {
      const auto key = f.key();
      EXPECT_NE(r.state.design.at(key), r.state.current.at(key));
      EXPECT_EQ(r.state.current.at(key), f.wrong_value);
      EXPECT_EQ(fault_kind_for(key.kind), f.kind);
    }
  }
}

TEST(InjectFaultsTest, ProbabilityExtremes) {
  SimConfig cfg;
  cfg.fault_probability = 0.0;
  cfg.fault_min = 2;
  const auto d = generate_design(5, cfg);
  EXPECT_EQ(inject_faults(d, 5, cfg).faults.size(), 2u);
  cfg.fault_min = 0;
  EXPECT_TRUE(inject_faults(d, 5, cfg).faults.empty());
  cfg.fault_probability = 1.0;
  const auto all = inject_faults(d, 5, cfg);
  EXPECT_EQ(all.faults.size(), all.state.design.size());
}

TEST(InjectFaultsTest, WrongValuesPerKind) {
  SimConfig cfg;
  cfg.fault_probability = 1.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto r = inject_faults(generate_design(s, cfg), s, cfg);
    for (const auto& f : r.faults) {
      switch (f.kind) {
        case FaultKind::kPortClosed:
          EXPECT_EQ(f.wrong_value, "closed");
          break;
        case FaultKind::kIncorrectIpAddress:
          EXPECT_TRUE(parse_address_token(f.wrong_value).has_value());
          break;
        case FaultKind::kIncorrectIpSubnet:
          EXPECT_TRUE(parse_subnet_token(f.wrong_value).has_value());
          break;
        case FaultKind::kMissingIpSubnet:
          EXPECT_EQ(f.wrong_value, "ABSENT");
          break;
        case FaultKind::kAutoSummaryEnabled:
          EXPECT_EQ(f.wrong_value, "enabled");
          break;
        case FaultKind::kWrongProtocolVersion:
          EXPECT_EQ(f.wrong_value, "version-1");
          break;
      }
    }
  }
}

TEST(InjectFaultsTest, HundredNetworksCoverEveryKind) {
  std::set<FaultKind> kinds;
  for (std::uint64_t i = 0; i < 100; ++i) {
    for (const auto& f : inject_faults(generate_design(i, SimConfig{}), i, SimConfig{}).faults) {
      kinds.insert(f.kind);
    }
  }
  EXPECT_EQ(kinds.size(), 6u);
}

TEST(ItemKeyTest, StringRoundTripAndOrder) {
  const auto r = inject_faults(generate_design(3, SimConfig{}), 3, SimConfig{});
  const auto items = enumerate_items(r.state);
  ASSERT_EQ(items.size(), r.state.design.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto text = items[i].key.to_string();
    const auto parsed = ItemKey::parse(text);
    ASSERT_TRUE(parsed.has_value()) << text;
    EXPECT_EQ(*parsed, items[i].key);
    if (i > 0) {
      EXPECT_LT(items[i - 1].key, items[i].key);
    }
  }
  EXPECT_EQ(ItemKey::parse("Device-a/Port-1/ip-address")->kind,
            ItemKind::kIpAddress);
  EXPECT_EQ(ItemKey::parse("Device-b/network/ip-subnet-3")->subnet, 3);
  EXPECT_FALSE(ItemKey::parse("Device-z/auto-summary").has_value());
  EXPECT_FALSE(ItemKey::parse("nonsense").has_value());
}

TEST(ItemKeyTest, InterfaceItemsPrecedeRoutingItems) {
  const ItemKey port{"Device-a", "Port-9", ItemKind::kIpSubnet, 0};
  const ItemKey stmt{"Device-a", "", ItemKind::kNetworkStatement, 1};
  const ItemKey summary{"Device-a", "", ItemKind::kAutoSummary, 0};
  const ItemKey next{"Device-b", "Port-1", ItemKind::kPortStatus, 0};
  EXPECT_LT(port, stmt);
  EXPECT_LT(stmt, summary);
  EXPECT_LT(summary, next);
}

TEST(ApplyInstructionTest, OracleRepairsEveryFault) {
  SimConfig cfg;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto state = inject_faults(generate_design(s, cfg), s + 7, cfg).state;
    const int faults = count_faults(state);
    int repaired = 0;
    for (const auto& entry : oracle_script(state)) {
      if (entry.steps.size() == 1) {
        EXPECT_EQ(std::get<Verdict>(entry.steps[0]), Verdict::kNoFault);
        EXPECT_FALSE(entry.item.faulted());
        continue;
      }
      ASSERT_EQ(entry.steps.size(), 3u);
      DeviceInstruction instr{Verdict::kFaultDetected,
                              std::get<Command>(entry.steps[1]),
                              std::get<Parameter>(entry.steps[2])};
      state = apply_instruction(state, entry.item, instr);
      ++repaired;
      EXPECT_EQ(state.faults_remaining, faults - repaired);
    }
    EXPECT_EQ(repaired, faults);
    EXPECT_TRUE(is_repaired(state));
  }
}

TEST(ApplyInstructionTest, Mismatches) {
  auto st = healthy_state(generate_design(1, SimConfig{}));
  const auto items = enumerate_items(st);
  const auto& port = items.front();
  ASSERT_EQ(port.kind(), ItemKind::kPortStatus);
  DeviceInstruction wrong{Verdict::kFaultDetected, Command::kSetIpAddress,
                          Parameter::address(1)};
  EXPECT_THROW(apply_instruction(st, port, wrong), InstructionMismatchError);
  DeviceInstruction malformed{Verdict::kFaultDetected, std::nullopt,
                              Parameter::none()};
  EXPECT_THROW(apply_instruction(st, port, malformed), ContractError);
  InfoItem ghost = port;
  ghost.key.device = "Device-j";
  ghost.key.interface = "Port-9";
  DeviceInstruction fix{Verdict::kFaultDetected, Command::kNoShutdown,
                        Parameter::none()};
  EXPECT_THROW(apply_instruction(st, ghost, fix), InstructionMismatchError);
}

TEST(StateJsonTest, RoundTripIsByteStable) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto st = inject_faults(generate_design(s, SimConfig{}), s, SimConfig{}).state;
    const auto text = state_to_json(st);
    EXPECT_EQ(state_from_json(text), st);
    EXPECT_EQ(state_to_json(state_from_json(text)), text);
    EXPECT_EQ(text.back(), '\n');
  }
}

TEST(StateJsonTest, GoldenFixture) {
  const auto design = generate_design(0, SimConfig{});
  const auto st = inject_faults(design, 1, SimConfig{}).state;
  EXPECT_EQ(state_to_json(st), read_fixture("state_d0_f1.json"));
}

TEST(StateJsonTest, MalformedInputReportsOffset) {
  const std::string good =
      state_to_json(inject_faults(generate_design(2, SimConfig{}), 2, SimConfig{}).state);
  try {
    state_from_json(good.substr(0, good.size() / 2));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GT(e.offset(), 0u);
    EXPECT_LE(e.offset(), good.size() / 2);
  }
  std::string bad = good;
  const auto pos = bad.find("\"open\"");
  ASSERT_NE(pos, std::string::npos);
  bad.replace(pos, 6, "\"ajar\"");
  try {
    state_from_json(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), pos);
  }
}

TEST(TokenTest, Names) {
  EXPECT_EQ(device_name(0), "Device-a");
  EXPECT_EQ(device_name(9), "Device-j");
  EXPECT_EQ(interface_name(0), "Port-1");
  EXPECT_EQ(address_token(17), "ip-address-17");
  EXPECT_EQ(subnet_token(1), "ip-subnet-1");
  EXPECT_EQ(parse_address_token("ip-address-63"), 63);
  EXPECT_FALSE(parse_address_token("ip-address-64").has_value());
  EXPECT_FALSE(parse_subnet_token("ip-subnet-0").has_value());
  EXPECT_THROW(protocol_from_token("BGP"), UnknownTokenError);
}

}  // namespace
}  // namespace netop::netsim
