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

// Observation and action codecs.
//
// Every token the simulator can produce belongs to one of twelve categories.
// A token is first encoded as (category, index) and then embedded as a single
// scalar inside its category's interval [c/12, (c+1)/12), so tokens of the
// same kind sit close together and tokens of different kinds are separated by
// a guaranteed gap.

#ifndef NETOP_CODEC_HPP_
#define NETOP_CODEC_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "netop/netsim.hpp"

namespace netop::codec {

enum class Category : int {
  kSpecial = 0,
  kIpAddress = 1,
  kIpSubnet = 2,
  kDeviceName = 3,
  kInterfaceName = 4,
  kPortStatus = 5,
  kRoutingProtocol = 6,
  kCommand = 7,
  kPhase = 8,
  kBoolean = 9,
  kVersion = 10,
  kItemKind = 11,
};
inline constexpr int kCategoryCount = 12;

struct TokenCode {
  int category = 0;
  int index = 0;
  bool operator==(const TokenCode&) const = default;
};

// Immutable bijection between token text and (category, index).
class Vocabulary {
 public:
  static const Vocabulary& instance();

  TokenCode encode(std::string_view token) const;  // UnknownTokenError
  const std::string& decode(int category, int index) const;  // RangeError
  int pool_size(int category) const;                         // RangeError
  const std::vector<std::string>& category_tokens(int category) const;
  std::size_t size() const { return codes_.size(); }

 private:
  Vocabulary();

  std::array<std::vector<std::string>, kCategoryCount> tables_;
  std::unordered_map<std::string, TokenCode> codes_;
};

TokenCode encode_token(std::string_view token);
std::string decode_token(int category, int index);

// (c + (i + 1) / (N_c + 1)) / 12.
double embed(int category, int index);
double embed(std::string_view token);

enum class Phase { kDiagnose = 0, kCommand = 1, kParameter = 2 };
std::string_view to_token(Phase p);

inline constexpr std::size_t kObservationSize = 16;
using ObservationVector = std::array<double, kObservationSize>;

namespace slot {
inline constexpr std::size_t kPhase = 0;
inline constexpr std::size_t kItemKind = 1;
inline constexpr std::size_t kDevice = 2;
inline constexpr std::size_t kInterface = 3;
inline constexpr std::size_t kDesignValue = 4;
inline constexpr std::size_t kCurrentValue = 5;
inline constexpr std::size_t kPendingCommand = 6;
inline constexpr std::size_t kProtocol = 7;
}  // namespace slot

// PAD slots are exactly 0.0. pending must be set iff phase is kParameter.
ObservationVector build_observation(const netsim::InfoItem& item, Phase phase,
                                    std::optional<netsim::Command> pending);

inline constexpr ObservationVector kPadObservation{};

// Flat action space. The numbering is part of the checkpoint format.
enum class ActionId : int {};
inline constexpr int kActionCount = 104;

namespace action {
inline constexpr ActionId kNoFault{0};
inline constexpr ActionId kFaultDetected{1};
inline constexpr int kFirstCommand = 2;
inline constexpr ActionId kParamNone{8};
inline constexpr int kFirstAddress = 9;   // PARAM_ADDR_1
inline constexpr int kFirstSubnet = 72;   // PARAM_SUBNET_1
}  // namespace action

constexpr int to_int(ActionId a) { return static_cast<int>(a); }

// Throws ContractError for components that have no action (out-of-pool
// parameter indices).
ActionId encode_action(const netsim::SubAction& component);

// Component named by the action, or nullopt if the action is illegal in
// the given phase. Throws RangeError for ids outside [0, 104).
std::optional<netsim::SubAction> decode_action(ActionId id, Phase phase);

// Phase in which the action is legal. Throws RangeError when out of range.
Phase action_phase(ActionId id);

// "NO_FAULT", "CMD_SET_IP_ADDRESS", "PARAM_ADDR_17", "PARAM_SUBNET_1", ...
std::string action_name(ActionId id);

inline constexpr std::string_view kVocabSchema = "netop-vocab-1";

// Vocabulary and action table as a sorted-key JSON document.
std::string vocabulary_json();
// Hex SHA-256 of vocabulary_json(); stored in checkpoints.
const std::string& vocabulary_hash();

}  // namespace netop::codec

#endif  // NETOP_CODEC_HPP_
