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

#include "netop/codec.hpp"

#include <openssl/evp.h>

#include <json.hpp>

#include "netop/errors.hpp"

namespace netop::codec {

namespace {

using netsim::Command;
using netsim::Parameter;
using netsim::Verdict;

std::string hex(const unsigned char* data, unsigned int n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (unsigned int i = 0; i < n; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xf]);
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  return hex(digest, len);
}

}  // namespace

Vocabulary::Vocabulary() {
  auto& t = tables_;
  t[0] = {"PAD", "ABSENT", "NONE"};
  for (int i = 1; i <= netsim::kMaxAddresses; ++i) {
    t[1].push_back(netsim::address_token(i));
  }
  for (int i = 1; i <= netsim::kMaxSubnets; ++i) {
    t[2].push_back(netsim::subnet_token(i));
  }
  for (int i = 0; i < netsim::kMaxDevices; ++i) {
    t[3].push_back(netsim::device_name(i));
  }
  for (int i = 0; i < netsim::kMaxInterfaces; ++i) {
    t[4].push_back(netsim::interface_name(i));
  }
  t[5] = {std::string(netsim::kPortOpen), std::string(netsim::kPortClosed)};
  for (auto p : {netsim::Protocol::kRip, netsim::Protocol::kEigrp,
                 netsim::Protocol::kOspf}) {
    t[6].emplace_back(netsim::to_token(p));
  }
  for (int c = 0; c < netsim::kCommandCount; ++c) {
    t[7].emplace_back(netsim::to_token(static_cast<Command>(c)));
  }
  for (auto p : {Phase::kDiagnose, Phase::kCommand, Phase::kParameter}) {
    t[8].emplace_back(to_token(p));
  }
  t[9] = {std::string(netsim::kSummaryDisabled),
          std::string(netsim::kSummaryEnabled)};
  t[10] = {std::string(netsim::kVersion1), std::string(netsim::kVersion2)};
  for (int k = 0; k < netsim::kItemKindCount; ++k) {
    t[11].emplace_back(netsim::to_token(static_cast<netsim::ItemKind>(k)));
  }

  for (int c = 0; c < kCategoryCount; ++c) {
    for (int i = 0; i < static_cast<int>(t[c].size()); ++i) {
      if (!codes_.emplace(t[c][i], TokenCode{c, i}).second) {
        throw Error("duplicate vocabulary token " + t[c][i]);
      }
    }
  }
}

const Vocabulary& Vocabulary::instance() {
  static const Vocabulary vocab;
  return vocab;
}

TokenCode Vocabulary::encode(std::string_view token) const {
  auto it = codes_.find(std::string(token));
  if (it == codes_.end()) throw UnknownTokenError(std::string(token));
  return it->second;
}

const std::string& Vocabulary::decode(int category, int index) const {
  if (category < 0 || category >= kCategoryCount || index < 0 ||
      index >= static_cast<int>(tables_[category].size())) {
    throw RangeError("token code (" + std::to_string(category) + ", " +
                     std::to_string(index) + ") out of range");
  }
  return tables_[category][index];
}

int Vocabulary::pool_size(int category) const {
  if (category < 0 || category >= kCategoryCount) {
    throw RangeError("category " + std::to_string(category) + " out of range");
  }
  return static_cast<int>(tables_[category].size());
}

const std::vector<std::string>& Vocabulary::category_tokens(
    int category) const {
  pool_size(category);
  return tables_[category];
}

TokenCode encode_token(std::string_view token) {
  return Vocabulary::instance().encode(token);
}

std::string decode_token(int category, int index) {
  return Vocabulary::instance().decode(category, index);
}

double embed(int category, int index) {
  const auto& vocab = Vocabulary::instance();
  vocab.decode(category, index);  // range check
  const double n = vocab.pool_size(category);
  return (category + (index + 1) / (n + 1)) / kCategoryCount;
}

double embed(std::string_view token) {
  auto code = encode_token(token);
  return embed(code.category, code.index);
}

std::string_view to_token(Phase p) {
  switch (p) {
    case Phase::kDiagnose:
      return "diagnose";
    case Phase::kCommand:
      return "command";
    case Phase::kParameter:
      return "parameter";
  }
  return "";
}

ObservationVector build_observation(const netsim::InfoItem& item, Phase phase,
                                    std::optional<Command> pending) {
  if (pending.has_value() != (phase == Phase::kParameter)) {
    throw ContractError("pending command must be set exactly in parameter phase");
  }
  ObservationVector obs{};
  obs[slot::kPhase] = embed(to_token(phase));
  obs[slot::kItemKind] = embed(netsim::to_token(item.kind()));
  obs[slot::kDevice] = embed(item.device());
  if (auto iface = item.interface()) obs[slot::kInterface] = embed(*iface);
  obs[slot::kDesignValue] = embed(item.design_value);
  obs[slot::kCurrentValue] = embed(item.current_value);
  if (pending) obs[slot::kPendingCommand] = embed(netsim::to_token(*pending));
  obs[slot::kProtocol] = embed(netsim::to_token(item.protocol));
  return obs;
}

ActionId encode_action(const netsim::SubAction& component) {
  struct Encoder {
    ActionId operator()(Verdict v) const {
      return v == Verdict::kNoFault ? action::kNoFault : action::kFaultDetected;
    }
    ActionId operator()(Command c) const {
      return ActionId{action::kFirstCommand + static_cast<int>(c)};
    }
    ActionId operator()(const Parameter& p) const {
      switch (p.kind) {
        case Parameter::Kind::kNone:
          return action::kParamNone;
        case Parameter::Kind::kAddress:
          if (p.index < 1 || p.index > netsim::kMaxAddresses) break;
          return ActionId{action::kFirstAddress + p.index - 1};
        case Parameter::Kind::kSubnet:
          if (p.index < 1 || p.index > netsim::kMaxSubnets) break;
          return ActionId{action::kFirstSubnet + p.index - 1};
      }
      throw ContractError("parameter index " + std::to_string(p.index) +
                          " has no action");
    }
  };
  return std::visit(Encoder{}, component);
}

Phase action_phase(ActionId id) {
  const int v = to_int(id);
  if (v < 0 || v >= kActionCount) {
    throw RangeError("action id " + std::to_string(v) + " out of range");
  }
  if (v < action::kFirstCommand) return Phase::kDiagnose;
  if (v < to_int(action::kParamNone)) return Phase::kCommand;
  return Phase::kParameter;
}

std::optional<netsim::SubAction> decode_action(ActionId id, Phase phase) {
  if (action_phase(id) != phase) return std::nullopt;
  const int v = to_int(id);
  switch (phase) {
    case Phase::kDiagnose:
      return v == 0 ? Verdict::kNoFault : Verdict::kFaultDetected;
    case Phase::kCommand:
      return static_cast<Command>(v - action::kFirstCommand);
    case Phase::kParameter:
      if (id == action::kParamNone) return Parameter::none();
      if (v < action::kFirstSubnet) {
        return Parameter::address(v - action::kFirstAddress + 1);
      }
      return Parameter::subnet(v - action::kFirstSubnet + 1);
  }
  return std::nullopt;
}

std::string action_name(ActionId id) {
  static constexpr const char* kCommands[] = {
      "CMD_NO_SHUTDOWN",         "CMD_SET_IP_ADDRESS", "CMD_SET_IP_SUBNET",
      "CMD_ADD_NETWORK_STATEMENT", "CMD_NO_AUTO_SUMMARY", "CMD_SET_VERSION_2"};
  const int v = to_int(id);
  switch (action_phase(id)) {
    case Phase::kDiagnose:
      return v == 0 ? "NO_FAULT" : "FAULT_DETECTED";
    case Phase::kCommand:
      return kCommands[v - action::kFirstCommand];
    case Phase::kParameter:
      break;
  }
  if (id == action::kParamNone) return "PARAM_NONE";
  if (v < action::kFirstSubnet) {
    return "PARAM_ADDR_" + std::to_string(v - action::kFirstAddress + 1);
  }
  return "PARAM_SUBNET_" + std::to_string(v - action::kFirstSubnet + 1);
}

std::string vocabulary_json() {
  using nlohmann::json;
  const auto& vocab = Vocabulary::instance();
  json categories = json::array();
  for (int c = 0; c < kCategoryCount; ++c) {
    categories.push_back(
        {{"category", c}, {"tokens", vocab.category_tokens(c)}});
  }
  json actions = json::array();
  for (int a = 0; a < kActionCount; ++a) {
    actions.push_back(action_name(ActionId{a}));
  }
  json doc = {{"schema", kVocabSchema},
              {"categories", std::move(categories)},
              {"actions", std::move(actions)},
              {"observation_size", kObservationSize}};
  return doc.dump(2) + "\n";
}

const std::string& vocabulary_hash() {
  static const std::string hash = sha256_hex(vocabulary_json());
  return hash;
}

}  // namespace netop::codec
