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

#include <algorithm>
#include <charconv>
#include <numeric>
#include <tuple>

#include "netop/errors.hpp"
#include "netop/rng.hpp"

namespace netop::netsim {

namespace {

std::optional<int> parse_suffix(std::string_view token, std::string_view prefix,
                                int max) {
  if (token.substr(0, prefix.size()) != prefix) return std::nullopt;
  auto digits = token.substr(prefix.size());
  if (digits.empty() || digits.front() == '0') return std::nullopt;
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    return std::nullopt;
  }
  if (value < 1 || value > max) return std::nullopt;
  return value;
}

// Draws a pool index in [1, pool] different from `avoid`.
int draw_other_index(Rng& rng, int pool, int avoid) {
  int pick = 1 + static_cast<int>(rng.uniform_index(pool - 1));
  return pick >= avoid ? pick + 1 : pick;
}

}  // namespace

void SimConfig::validate() const {
  if (device_min < 4) throw ConfigError("device_min", "must be at least 4");
  if (device_max < device_min) {
    throw ConfigError("device_max", "must be >= device_min");
  }
  if (device_max > kMaxDevices) {
    throw ConfigError("device_max", "must be <= 10");
  }
  if (subnet_pool_size < device_max - 1) {
    throw ConfigError("subnet_pool_size", "must be >= device_max - 1");
  }
  if (subnet_pool_size > kMaxSubnets) {
    throw ConfigError("subnet_pool_size", "must be <= 32");
  }
  if (address_pool_size < 2) {
    throw ConfigError("address_pool_size", "must be at least 2");
  }
  if (address_pool_size > kMaxAddresses) {
    throw ConfigError("address_pool_size", "must be <= 63");
  }
  if (!(fault_probability >= 0.0 && fault_probability <= 1.0)) {
    throw ConfigError("fault_probability", "must lie in [0, 1]");
  }
  if (fault_min < 0) throw ConfigError("fault_min", "must be non-negative");
}

void DeviceInstruction::validate() const {
  using K = Parameter::Kind;
  if (verdict == Verdict::kNoFault) {
    if (command || parameter.kind != K::kNone) {
      throw ContractError("no-fault instruction carries a command");
    }
    return;
  }
  if (!command) throw ContractError("fault instruction lacks a command");
  K expected = K::kNone;
  switch (*command) {
    case Command::kSetIpAddress:
      expected = K::kAddress;
      break;
    case Command::kSetIpSubnet:
    case Command::kAddNetworkStatement:
      expected = K::kSubnet;
      break;
    default:
      break;
  }
  if (parameter.kind != expected) {
    throw ContractError(std::string("parameter does not fit command ") +
                        std::string(to_token(*command)));
  }
  const int limit = expected == K::kAddress ? kMaxAddresses : kMaxSubnets;
  if (expected != K::kNone &&
      (parameter.index < 1 || parameter.index > limit)) {
    throw ContractError("parameter index out of range");
  }
  if (expected == K::kNone && parameter.index != 0) {
    throw ContractError("NONE parameter carries an index");
  }
}

std::string_view to_token(Protocol p) {
  switch (p) {
    case Protocol::kRip:
      return "RIP";
    case Protocol::kEigrp:
      return "EIGRP";
    case Protocol::kOspf:
      return "OSPF";
  }
  return "";
}

Protocol protocol_from_token(std::string_view token) {
  if (token == "RIP") return Protocol::kRip;
  if (token == "EIGRP") return Protocol::kEigrp;
  if (token == "OSPF") return Protocol::kOspf;
  throw UnknownTokenError(std::string(token));
}

std::string_view to_token(ItemKind k) {
  switch (k) {
    case ItemKind::kPortStatus:
      return "port-status";
    case ItemKind::kIpAddress:
      return "ip-address";
    case ItemKind::kIpSubnet:
      return "ip-subnet";
    case ItemKind::kNetworkStatement:
      return "network-statement";
    case ItemKind::kAutoSummary:
      return "auto-summary";
    case ItemKind::kProtocolVersion:
      return "protocol-version";
  }
  return "";
}

std::string_view to_token(Command c) {
  switch (c) {
    case Command::kNoShutdown:
      return "no-shutdown";
    case Command::kSetIpAddress:
      return "set-ip-address";
    case Command::kSetIpSubnet:
      return "set-ip-subnet";
    case Command::kAddNetworkStatement:
      return "add-network-statement";
    case Command::kNoAutoSummary:
      return "no-auto-summary";
    case Command::kSetVersion2:
      return "set-version-2";
  }
  return "";
}

std::string_view to_token(FaultKind k) {
  switch (k) {
    case FaultKind::kPortClosed:
      return "port-closed";
    case FaultKind::kIncorrectIpAddress:
      return "incorrect-ip-address";
    case FaultKind::kIncorrectIpSubnet:
      return "incorrect-ip-subnet";
    case FaultKind::kMissingIpSubnet:
      return "missing-ip-subnet";
    case FaultKind::kAutoSummaryEnabled:
      return "auto-summary-enabled";
    case FaultKind::kWrongProtocolVersion:
      return "wrong-protocol-version";
  }
  return "";
}

std::string device_name(int index) {
  return std::string("Device-") + static_cast<char>('a' + index);
}

std::string interface_name(int index) {
  return "Port-" + std::to_string(index + 1);
}

std::string address_token(int index) {
  return "ip-address-" + std::to_string(index);
}

std::string subnet_token(int index) {
  return "ip-subnet-" + std::to_string(index);
}

std::string parameter_token(const Parameter& p) {
  switch (p.kind) {
    case Parameter::Kind::kAddress:
      return address_token(p.index);
    case Parameter::Kind::kSubnet:
      return subnet_token(p.index);
    case Parameter::Kind::kNone:
      break;
  }
  return "NONE";
}

std::optional<int> parse_address_token(std::string_view token) {
  return parse_suffix(token, "ip-address-", kMaxAddresses);
}

std::optional<int> parse_subnet_token(std::string_view token) {
  return parse_suffix(token, "ip-subnet-", kMaxSubnets);
}

FaultKind fault_kind_for(ItemKind k) {
  return static_cast<FaultKind>(static_cast<int>(k));
}

Command repair_command_for(ItemKind k) {
  return static_cast<Command>(static_cast<int>(k));
}

bool is_interface_item(ItemKind k) {
  return k == ItemKind::kPortStatus || k == ItemKind::kIpAddress ||
         k == ItemKind::kIpSubnet;
}

std::strong_ordering ItemKey::operator<=>(const ItemKey& o) const {
  auto routing = !is_interface_item(kind);
  auto o_routing = !is_interface_item(o.kind);
  return std::tie(device, routing, interface, kind, subnet) <=>
         std::tie(o.device, o_routing, o.interface, o.kind, o.subnet);
}

std::string ItemKey::to_string() const {
  switch (kind) {
    case ItemKind::kPortStatus:
    case ItemKind::kIpAddress:
    case ItemKind::kIpSubnet:
      return device + "/" + interface + "/" + std::string(to_token(kind));
    case ItemKind::kNetworkStatement:
      return device + "/network/" + subnet_token(subnet);
    case ItemKind::kAutoSummary:
    case ItemKind::kProtocolVersion:
      return device + "/" + std::string(to_token(kind));
  }
  return device;
}

std::optional<ItemKey> ItemKey::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto slash = text.find('/', start);
    parts.push_back(text.substr(start, slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  auto valid_device = [](std::string_view d) {
    for (int i = 0; i < kMaxDevices; ++i) {
      if (d == device_name(i)) return true;
    }
    return false;
  };
  if (parts.empty() || !valid_device(parts[0])) return std::nullopt;
  ItemKey key;
  key.device = std::string(parts[0]);
  if (parts.size() == 2) {
    if (parts[1] == to_token(ItemKind::kAutoSummary)) {
      key.kind = ItemKind::kAutoSummary;
    } else if (parts[1] == to_token(ItemKind::kProtocolVersion)) {
      key.kind = ItemKind::kProtocolVersion;
    } else {
      return std::nullopt;
    }
    return key;
  }
  if (parts.size() != 3) return std::nullopt;
  if (parts[1] == "network") {
    auto subnet = parse_subnet_token(parts[2]);
    if (!subnet) return std::nullopt;
    key.kind = ItemKind::kNetworkStatement;
    key.subnet = *subnet;
    return key;
  }
  bool valid_interface = false;
  for (int i = 0; i < kMaxInterfaces; ++i) {
    valid_interface |= parts[1] == interface_name(i);
  }
  if (!valid_interface) return std::nullopt;
  key.interface = std::string(parts[1]);
  for (auto k : {ItemKind::kPortStatus, ItemKind::kIpAddress,
                 ItemKind::kIpSubnet}) {
    if (parts[2] == to_token(k)) {
      key.kind = k;
      return key;
    }
  }
  return std::nullopt;
}

ItemKey Fault::key() const {
  ItemKey k;
  k.device = device;
  k.interface = interface.value_or("");
  k.kind = static_cast<ItemKind>(static_cast<int>(kind));
  k.subnet = subnet.value_or(0);
  return k;
}

std::optional<std::string> InfoItem::interface() const {
  if (key.interface.empty()) return std::nullopt;
  return key.interface;
}

NetworkDesign generate_design(std::uint64_t seed, const SimConfig& cfg) {
  cfg.validate();
  Rng rng(seed, stream::kDesign);
  NetworkDesign design;

  const int span = cfg.device_max - cfg.device_min + 1;
  const int n = cfg.device_min + static_cast<int>(rng.uniform_index(span));
  for (int i = 0; i < n; ++i) design.devices.push_back(device_name(i));

  // Attachment order: a random root, then each further device is cabled to a
  // uniformly chosen device already in the network.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());

  std::vector<int> free_subnets(cfg.subnet_pool_size);
  std::iota(free_subnets.begin(), free_subnets.end(), 1);
  std::vector<int> ports_used(n, 0);

  for (int k = 1; k < n; ++k) {
    const int child = order[k];
    const int parent = order[rng.uniform_index(k)];

    Link link;
    link.a = {design.devices[parent], interface_name(ports_used[parent]++)};
    link.b = {design.devices[child], interface_name(ports_used[child]++)};
    auto pick = rng.uniform_index(free_subnets.size());
    link.subnet = free_subnets[pick];
    free_subnets.erase(free_subnets.begin() + static_cast<long>(pick));

    const int addr_a =
        1 + static_cast<int>(rng.uniform_index(cfg.address_pool_size));
    const int addr_b = draw_other_index(rng, cfg.address_pool_size, addr_a);
    design.endpoint_addresses[link.a] = addr_a;
    design.endpoint_addresses[link.b] = addr_b;
    design.links.push_back(std::move(link));
  }

  design.protocol = static_cast<Protocol>(rng.uniform_index(3));
  return design;
}

NetworkState healthy_state(const NetworkDesign& design) {
  NetworkState state;
  state.protocol = design.protocol;
  auto& d = state.design;
  for (const auto& link : design.links) {
    for (const auto* ep : {&link.a, &link.b}) {
      ItemKey key{ep->device, ep->interface, ItemKind::kPortStatus, 0};
      d[key] = std::string(kPortOpen);
      key.kind = ItemKind::kIpAddress;
      d[key] = address_token(design.endpoint_addresses.at(*ep));
      key.kind = ItemKind::kIpSubnet;
      d[key] = subnet_token(link.subnet);
      d[ItemKey{ep->device, "", ItemKind::kNetworkStatement, link.subnet}] =
          subnet_token(link.subnet);
    }
  }
  for (const auto& dev : design.devices) {
    if (design.protocol != Protocol::kOspf) {
      d[ItemKey{dev, "", ItemKind::kAutoSummary, 0}] =
          std::string(kSummaryDisabled);
    }
    if (design.protocol == Protocol::kRip) {
      d[ItemKey{dev, "", ItemKind::kProtocolVersion, 0}] =
          std::string(kVersion2);
    }
  }
  state.current = state.design;
  state.faults_remaining = 0;
  return state;
}

InjectionResult inject_faults(const NetworkDesign& design, std::uint64_t seed,
                              const SimConfig& cfg) {
  cfg.validate();
  Rng rng(seed, stream::kFaults);
  InjectionResult result{healthy_state(design), {}};
  auto& state = result.state;

  // Every item is eligible for exactly one fault kind; protocol legality is
  // already encoded by which routing items exist.
  std::vector<ItemKey> keys;
  for (const auto& [key, value] : state.design) keys.push_back(key);

  std::vector<bool> chosen(keys.size(), false);
  std::size_t count = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (rng.bernoulli(cfg.fault_probability)) {
      chosen[i] = true;
      ++count;
    }
  }
  const auto floor = std::min<std::size_t>(cfg.fault_min, keys.size());
  while (count < floor) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (!chosen[i]) open.push_back(i);
    }
    chosen[open[rng.uniform_index(open.size())]] = true;
    ++count;
  }

  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!chosen[i]) continue;
    const auto& key = keys[i];
    const auto& good = state.design.at(key);
    Fault fault;
    fault.kind = fault_kind_for(key.kind);
    fault.device = key.device;
    if (!key.interface.empty()) fault.interface = key.interface;
    if (key.kind == ItemKind::kNetworkStatement) fault.subnet = key.subnet;
    switch (key.kind) {
      case ItemKind::kPortStatus:
        fault.wrong_value = std::string(kPortClosed);
        break;
      case ItemKind::kIpAddress:
        fault.wrong_value = address_token(draw_other_index(
            rng, cfg.address_pool_size, *parse_address_token(good)));
        break;
      case ItemKind::kIpSubnet:
        fault.wrong_value = subnet_token(draw_other_index(
            rng, cfg.subnet_pool_size, *parse_subnet_token(good)));
        break;
      case ItemKind::kNetworkStatement:
        fault.wrong_value = std::string(kAbsent);
        break;
      case ItemKind::kAutoSummary:
        fault.wrong_value = std::string(kSummaryEnabled);
        break;
      case ItemKind::kProtocolVersion:
        fault.wrong_value = std::string(kVersion1);
        break;
    }
    state.current[key] = fault.wrong_value;
    result.faults.push_back(std::move(fault));
  }
  state.faults_remaining = static_cast<int>(result.faults.size());
  return result;
}

std::vector<InfoItem> enumerate_items(const NetworkState& state) {
  std::vector<InfoItem> items;
  items.reserve(state.design.size());
  for (const auto& [key, value] : state.design) {
    items.push_back({key, value, state.current.at(key), state.protocol});
  }
  return items;
}

InfoItem item_at(const NetworkState& state, const ItemKey& key) {
  auto it = state.design.find(key);
  if (it == state.design.end()) {
    throw InstructionMismatchError("no item " + key.to_string());
  }
  return {key, it->second, state.current.at(key), state.protocol};
}

NetworkState apply_instruction(const NetworkState& state, const InfoItem& item,
                               const DeviceInstruction& instr) {
  instr.validate();
  if (!state.design.contains(item.key)) {
    throw InstructionMismatchError("no item " + item.key.to_string());
  }
  if (instr.verdict == Verdict::kNoFault) return state;

  const Command cmd = *instr.command;
  if (cmd != repair_command_for(item.kind())) {
    throw InstructionMismatchError(std::string(to_token(cmd)) +
                                   " does not apply to " +
                                   item.key.to_string());
  }
  std::string value;
  switch (cmd) {
    case Command::kNoShutdown:
      value = kPortOpen;
      break;
    case Command::kSetIpAddress:
    case Command::kSetIpSubnet:
    case Command::kAddNetworkStatement:
      value = parameter_token(instr.parameter);
      break;
    case Command::kNoAutoSummary:
      value = kSummaryDisabled;
      break;
    case Command::kSetVersion2:
      value = kVersion2;
      break;
  }
  NetworkState next = state;
  next.current[item.key] = std::move(value);
  next.faults_remaining = count_faults(next);
  return next;
}

std::vector<SubAction> oracle_steps(const InfoItem& item) {
  if (!item.faulted()) return {Verdict::kNoFault};
  Parameter param;
  switch (item.kind()) {
    case ItemKind::kIpAddress:
      param = Parameter::address(*parse_address_token(item.design_value));
      break;
    case ItemKind::kIpSubnet:
    case ItemKind::kNetworkStatement:
      param = Parameter::subnet(*parse_subnet_token(item.design_value));
      break;
    default:
      break;
  }
  return {Verdict::kFaultDetected, repair_command_for(item.kind()), param};
}

std::vector<ScriptEntry> oracle_script(const NetworkState& state) {
  std::vector<ScriptEntry> script;
  for (auto& item : enumerate_items(state)) {
    auto steps = oracle_steps(item);
    script.push_back({std::move(item), std::move(steps)});
  }
  return script;
}

bool is_repaired(const NetworkState& state) {
  return state.current == state.design;
}

int count_faults(const NetworkState& state) {
  int n = 0;
  for (const auto& [key, value] : state.design) {
    auto it = state.current.find(key);
    if (it == state.current.end() || it->second != value) ++n;
  }
  return n;
}

int device_count(const NetworkState& state) {
  int n = 0;
  const std::string* last = nullptr;
  for (const auto& [key, value] : state.design) {
    if (!last || *last != key.device) {
      ++n;
      last = &key.device;
    }
  }
  return n;
}

std::vector<FaultKind> active_fault_kinds(const NetworkState& state) {
  std::vector<FaultKind> kinds;
  for (const auto& [key, value] : state.design) {
    if (state.current.at(key) != value) kinds.push_back(fault_kind_for(key.kind));
  }
  return kinds;
}

}  // namespace netop::netsim
