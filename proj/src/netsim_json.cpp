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

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "netop/errors.hpp"
#include "netop/netsim.hpp"

namespace netop::netsim {

namespace {

using nlohmann::json;

// Best-effort location of a quoted token in the source text, for error
// reporting on documents that parsed as JSON but fail validation.
std::size_t locate(std::string_view text, std::string_view token,
                   std::size_t from = 0) {
  std::string quoted = "\"" + std::string(token) + "\"";
  auto pos = text.find(quoted, from);
  return pos == std::string_view::npos ? 0 : pos;
}

// Location of `name` inside the object `field`, optionally followed by its
// string value.
std::size_t locate_item(std::string_view text, std::string_view field,
                        std::string_view name,
                        std::optional<std::string_view> value = std::nullopt) {
  const auto key = locate(text, name, locate(text, field));
  if (!value) return key;
  const auto at = locate(text, *value, key + name.size() + 2);
  return at == 0 ? key : at;
}

bool value_fits(ItemKind kind, const std::string& v, bool allow_absent) {
  switch (kind) {
    case ItemKind::kPortStatus:
      return v == kPortOpen || v == kPortClosed;
    case ItemKind::kIpAddress:
      return parse_address_token(v).has_value();
    case ItemKind::kIpSubnet:
      return parse_subnet_token(v).has_value();
    case ItemKind::kNetworkStatement:
      return parse_subnet_token(v).has_value() || (allow_absent && v == kAbsent);
    case ItemKind::kAutoSummary:
      return v == kSummaryDisabled || v == kSummaryEnabled;
    case ItemKind::kProtocolVersion:
      return v == kVersion1 || v == kVersion2;
  }
  return false;
}

std::map<ItemKey, std::string> read_dictionary(const json& doc,
                                               const char* field,
                                               std::string_view text,
                                               bool allow_absent) {
  if (!doc.contains(field) || !doc[field].is_object()) {
    throw ParseError(std::string("missing object '") + field + "'",
                     locate(text, field));
  }
  std::map<ItemKey, std::string> out;
  for (const auto& [name, value] : doc[field].items()) {
    auto key = ItemKey::parse(name);
    if (!key) {
      throw ParseError("bad item key '" + name + "'",
                       locate_item(text, field, name));
    }
    if (!value.is_string()) {
      throw ParseError("item '" + name + "' is not a string",
                       locate_item(text, field, name));
    }
    auto v = value.get<std::string>();
    if (!value_fits(key->kind, v, allow_absent)) {
      throw ParseError("bad value '" + v + "' for item '" + name + "'",
                       locate_item(text, field, name, v));
    }
    out.emplace(std::move(*key), std::move(v));
  }
  return out;
}

}  // namespace

std::string state_to_json(const NetworkState& state) {
  json design = json::object();
  json current = json::object();
  for (const auto& [key, value] : state.design) design[key.to_string()] = value;
  for (const auto& [key, value] : state.current) {
    current[key.to_string()] = value;
  }
  json doc = {
      {"schema", kStateSchema},
      {"protocol", to_token(state.protocol)},
      {"faults_remaining", state.faults_remaining},
      {"design", std::move(design)},
      {"current", std::move(current)},
  };
  return doc.dump(2) + "\n";
}

NetworkState state_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte == 0 ? 0 : e.byte - 1);
  }
  if (!doc.is_object()) throw ParseError("document is not an object", 0);
  if (!doc.contains("schema") || doc["schema"] != kStateSchema) {
    throw ParseError("expected schema netop-state-1", locate(text, "schema"));
  }

  NetworkState state;
  if (!doc.contains("protocol") || !doc["protocol"].is_string()) {
    throw ParseError("missing protocol", locate(text, "protocol"));
  }
  auto protocol = doc["protocol"].get<std::string>();
  try {
    state.protocol = protocol_from_token(protocol);
  } catch (const UnknownTokenError&) {
    throw ParseError("unknown protocol '" + protocol + "'",
                     locate(text, protocol));
  }

  state.design = read_dictionary(doc, "design", text, false);
  state.current = read_dictionary(doc, "current", text, true);
  if (state.design.size() != state.current.size()) {
    throw ParseError("design and current key sets differ",
                     locate(text, "current"));
  }
  for (const auto& [key, value] : state.design) {
    if (!state.current.contains(key)) {
      throw ParseError("current lacks item '" + key.to_string() + "'",
                       locate(text, "current"));
    }
  }

  if (!doc.contains("faults_remaining") ||
      !doc["faults_remaining"].is_number_integer()) {
    throw ParseError("missing faults_remaining",
                     locate(text, "faults_remaining"));
  }
  state.faults_remaining = doc["faults_remaining"].get<int>();
  if (state.faults_remaining != count_faults(state)) {
    throw ParseError("faults_remaining disagrees with the dictionaries",
                     locate(text, "faults_remaining"));
  }
  return state;
}

}  // namespace netop::netsim
