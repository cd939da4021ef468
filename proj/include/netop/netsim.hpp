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

// Randomized small-network simulator.
//
// A generated network is a tree of 4..10 devices. Every cable is its own
// subnet with two distinct endpoint addresses, and the whole network runs one
// routing protocol. The network is represented purely as configuration
// records: a "design" dictionary holding the intended value of every
// information item and a "current" dictionary holding what the devices are
// actually configured with. Faults make the two disagree; repairs make them
// agree again.

#ifndef NETOP_NETSIM_HPP_
#define NETOP_NETSIM_HPP_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace netop::netsim {

struct SimConfig {
  int device_min = 4;
  int device_max = 10;
  int subnet_pool_size = 32;
  int address_pool_size = 63;
  double fault_probability = 0.3;
  int fault_min = 1;

  // Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const SimConfig&) const = default;
};

// Hard limits of the token vocabulary; configs may only shrink these.
inline constexpr int kMaxDevices = 10;
inline constexpr int kMaxInterfaces = 9;
inline constexpr int kMaxSubnets = 32;
inline constexpr int kMaxAddresses = 63;

enum class Protocol { kRip, kEigrp, kOspf };

enum class FaultKind {
  kPortClosed,
  kIncorrectIpAddress,
  kIncorrectIpSubnet,
  kMissingIpSubnet,
  kAutoSummaryEnabled,
  kWrongProtocolVersion,
};
inline constexpr int kFaultKindCount = 6;

// Declaration order is the per-device enumeration order.
enum class ItemKind {
  kPortStatus,
  kIpAddress,
  kIpSubnet,
  kNetworkStatement,
  kAutoSummary,
  kProtocolVersion,
};
inline constexpr int kItemKindCount = 6;

enum class Verdict { kNoFault, kFaultDetected };

enum class Command {
  kNoShutdown,
  kSetIpAddress,
  kSetIpSubnet,
  kAddNetworkStatement,
  kNoAutoSummary,
  kSetVersion2,
};
inline constexpr int kCommandCount = 6;

struct Parameter {
  enum class Kind { kNone, kAddress, kSubnet };
  Kind kind = Kind::kNone;
  int index = 0;  // 1-based pool index; 0 for kNone

  static Parameter none() { return {}; }
  static Parameter address(int i) { return {Kind::kAddress, i}; }
  static Parameter subnet(int i) { return {Kind::kSubnet, i}; }

  bool operator==(const Parameter&) const = default;
};

// One sub-step output of the operator.
using SubAction = std::variant<Verdict, Command, Parameter>;

struct DeviceInstruction {
  Verdict verdict = Verdict::kNoFault;
  std::optional<Command> command;
  Parameter parameter;

  // Throws ContractError when the verdict/command/parameter combination is
  // not well-formed.
  void validate() const;

  bool operator==(const DeviceInstruction&) const = default;
};

// Tokens.
std::string_view to_token(Protocol p);
Protocol protocol_from_token(std::string_view token);  // UnknownTokenError
std::string_view to_token(ItemKind k);
std::string_view to_token(Command c);
std::string_view to_token(FaultKind k);
std::string device_name(int index);     // 0 -> "Device-a"
std::string interface_name(int index);  // 0 -> "Port-1"
std::string address_token(int index);   // 1 -> "ip-address-1"
std::string subnet_token(int index);    // 1 -> "ip-subnet-1"
std::string parameter_token(const Parameter& p);
// Pool index of "ip-address-N" / "ip-subnet-N", or nullopt.
std::optional<int> parse_address_token(std::string_view token);
std::optional<int> parse_subnet_token(std::string_view token);

inline constexpr std::string_view kPortOpen = "open";
inline constexpr std::string_view kPortClosed = "closed";
inline constexpr std::string_view kSummaryDisabled = "disabled";
inline constexpr std::string_view kSummaryEnabled = "enabled";
inline constexpr std::string_view kVersion1 = "version-1";
inline constexpr std::string_view kVersion2 = "version-2";
inline constexpr std::string_view kAbsent = "ABSENT";

FaultKind fault_kind_for(ItemKind k);
Command repair_command_for(ItemKind k);
bool is_interface_item(ItemKind k);

struct Endpoint {
  std::string device;
  std::string interface;

  auto operator<=>(const Endpoint&) const = default;
};

struct Link {
  Endpoint a;
  Endpoint b;
  int subnet = 0;  // 1-based index into the subnet pool

  bool operator==(const Link&) const = default;
};

struct NetworkDesign {
  std::vector<std::string> devices;
  std::vector<Link> links;
  std::map<Endpoint, int> endpoint_addresses;
  Protocol protocol = Protocol::kOspf;

  bool operator==(const NetworkDesign&) const = default;
};

// Identifies one information item. The ordering is the enumeration order:
// devices by name; within a device, interface items (by interface, then
// kind) before routing items (network statements by subnet, then
// auto-summary, then protocol version).
struct ItemKey {
  std::string device;
  std::string interface;  // empty for routing-level items
  ItemKind kind = ItemKind::kPortStatus;
  int subnet = 0;  // network statements only

  std::strong_ordering operator<=>(const ItemKey& o) const;
  bool operator==(const ItemKey& o) const = default;

  // "Device-a/Port-1/ip-address", "Device-a/network/ip-subnet-3",
  // "Device-a/auto-summary", "Device-a/protocol-version".
  std::string to_string() const;
  static std::optional<ItemKey> parse(std::string_view text);
};

struct Fault {
  FaultKind kind = FaultKind::kPortClosed;
  std::string device;
  std::optional<std::string> interface;
  std::optional<int> subnet;
  std::string wrong_value;

  ItemKey key() const;
  bool operator==(const Fault&) const = default;
};

struct NetworkState {
  std::map<ItemKey, std::string> design;
  std::map<ItemKey, std::string> current;
  Protocol protocol = Protocol::kOspf;
  int faults_remaining = 0;

  bool operator==(const NetworkState&) const = default;
};

struct InfoItem {
  ItemKey key;
  std::string design_value;
  std::string current_value;
  Protocol protocol = Protocol::kOspf;

  ItemKind kind() const { return key.kind; }
  const std::string& device() const { return key.device; }
  std::optional<std::string> interface() const;
  bool faulted() const { return design_value != current_value; }

  bool operator==(const InfoItem&) const = default;
};

struct ScriptEntry {
  InfoItem item;
  std::vector<SubAction> steps;  // [NoFault] or [FaultDetected, cmd, param]
};

NetworkDesign generate_design(std::uint64_t seed, const SimConfig& cfg);

// Fault-free state for a design.
NetworkState healthy_state(const NetworkDesign& design);

struct InjectionResult {
  NetworkState state;
  std::vector<Fault> faults;
};

InjectionResult inject_faults(const NetworkDesign& design, std::uint64_t seed,
                              const SimConfig& cfg);

std::vector<InfoItem> enumerate_items(const NetworkState& state);

// Current snapshot of one item; throws InstructionMismatchError if absent.
InfoItem item_at(const NetworkState& state, const ItemKey& key);

// Returns the updated state. Throws InstructionMismatchError when the command
// does not repair the item's kind or the item does not exist, and
// ContractError when instr is malformed.
NetworkState apply_instruction(const NetworkState& state, const InfoItem& item,
                               const DeviceInstruction& instr);

std::vector<SubAction> oracle_steps(const InfoItem& item);
std::vector<ScriptEntry> oracle_script(const NetworkState& state);

bool is_repaired(const NetworkState& state);
int count_faults(const NetworkState& state);
int device_count(const NetworkState& state);

// Fault kind present at each mismatching key.
std::vector<FaultKind> active_fault_kinds(const NetworkState& state);

inline constexpr std::string_view kStateSchema = "netop-state-1";

// Pretty-printed, sorted keys, newline-terminated.
std::string state_to_json(const NetworkState& state);
// Throws ParseError carrying the byte offset of the problem.
NetworkState state_from_json(std::string_view text);

}  // namespace netop::netsim

#endif  // NETOP_NETSIM_HPP_
