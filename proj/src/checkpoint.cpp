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

#include <bit>
#include <cstring>

#include "netop/errors.hpp"
#include "netop/neural.hpp"

namespace netop::neural {

namespace {

using nlohmann::json;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::string_view in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i]))
         << (8 * i);
  }
  return v;
}

template <class P, class F>
void for_each_array(P& p, F&& fn) {
  for (auto& layer : p.layers) {
    fn(layer.weights.data(), static_cast<std::size_t>(layer.weights.size()));
    fn(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
}

void write_params(std::string& out, const Parameters<float>& p) {
  for_each_array(p, [&](const float* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      put_u32(out, std::bit_cast<std::uint32_t>(data[i]));
    }
  });
}

void read_params(std::string_view in, std::size_t& pos, Parameters<float>& p) {
  for_each_array(p, [&](float* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i, pos += 4) {
      data[i] = std::bit_cast<float>(get_u32(in, pos));
    }
  });
}

std::vector<int> read_dims(const json& meta) {
  if (!meta.contains("dims") || !meta["dims"].is_array()) {
    throw CheckpointError("metadata lacks dims");
  }
  std::vector<int> dims;
  for (const auto& d : meta["dims"]) {
    if (!d.is_number_integer()) throw CheckpointError("dims must be integers");
    dims.push_back(d.get<int>());
  }
  return dims;
}

}  // namespace

std::string save_checkpoint(const QuantileModel& model,
                            const AdamState<float>& adam,
                            const json& extra) {
  if (!extra.is_object()) throw ContractError("metadata must be an object");
  if (!model.params.same_shape(adam.first_moment) ||
      !model.params.same_shape(adam.second_moment)) {
    throw ShapeError("Adam state does not match the model");
  }
  json meta = extra;
  meta["schema"] = kCheckpointSchema;
  meta["dims"] = model.dims();
  meta["actions"] = model.action_count();
  meta["quantiles"] = kQuantiles;
  if (!meta.contains("vocab_hash")) meta["vocab_hash"] = codec::vocabulary_hash();
  if (!meta.contains("training_step")) meta["training_step"] = adam.step;
  meta["adam"] = {{"step", adam.step},
                  {"learning_rate", adam.hyper.learning_rate},
                  {"beta1", adam.hyper.beta1},
                  {"beta2", adam.hyper.beta2},
                  {"epsilon", adam.hyper.epsilon}};
  const std::string text = meta.dump();

  std::string out(kCheckpointMagic);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  out.reserve(out.size() + 12 * model.params.scalar_count());
  write_params(out, model.params);
  write_params(out, adam.first_moment);
  write_params(out, adam.second_moment);
  return out;
}

Checkpoint load_checkpoint(std::string_view bytes) {
  const std::size_t magic_len = kCheckpointMagic.size();
  const auto head = bytes.substr(0, magic_len);
  if (head != kCheckpointMagic.substr(0, head.size())) {
    throw BadMagicError("not a netop checkpoint (bad magic)");
  }
  if (bytes.size() < magic_len + 4) {
    throw TruncatedCheckpointError("checkpoint truncated in header");
  }
  const std::uint32_t meta_len = get_u32(bytes, magic_len);
  std::size_t pos = magic_len + 4;
  if (bytes.size() - pos < meta_len) {
    throw TruncatedCheckpointError("checkpoint truncated in metadata");
  }

  json meta;
  try {
    meta = json::parse(bytes.substr(pos, meta_len));
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("bad checkpoint metadata: ") + e.what());
  }
  pos += meta_len;
  if (!meta.is_object() || meta.value("schema", "") != kCheckpointSchema) {
    throw CheckpointError("metadata schema is not netop-ckpt-1");
  }

  std::vector<int> dims = read_dims(meta);
  QuantileModel model = [&] {
    try {
      return QuantileModel(dims);
    } catch (const ShapeError& e) {
      throw CheckpointError(std::string("bad dims: ") + e.what());
    }
  }();
  if (meta.value("quantiles", 0) != kQuantiles ||
      meta.value("actions", 0) != model.action_count()) {
    throw CheckpointError("metadata action/quantile counts disagree with dims");
  }
  if (!meta.contains("adam") || !meta["adam"].is_object()) {
    throw CheckpointError("metadata lacks adam state");
  }

  const std::size_t need = 12 * model.params.scalar_count();
  if (bytes.size() - pos < need) {
    throw TruncatedCheckpointError("checkpoint truncated in parameters");
  }
  if (bytes.size() - pos > need) {
    throw CheckpointError("trailing bytes after checkpoint payload");
  }

  const auto& a = meta["adam"];
  AdamHyper hyper;
  try {
    hyper.learning_rate = a.at("learning_rate").get<double>();
    hyper.beta1 = a.at("beta1").get<double>();
    hyper.beta2 = a.at("beta2").get<double>();
    hyper.epsilon = a.at("epsilon").get<double>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("bad adam metadata: ") + e.what());
  }
  auto adam = AdamState<float>::for_model(model, hyper);
  adam.step = a.value("step", std::int64_t{0});

  read_params(bytes, pos, model.params);
  read_params(bytes, pos, adam.first_moment);
  read_params(bytes, pos, adam.second_moment);
  return {std::move(model), std::move(adam), std::move(meta)};
}

void require_vocab(const json& metadata) {
  const auto hash = metadata.value("vocab_hash", std::string());
  if (hash != codec::vocabulary_hash()) {
    throw VocabMismatchError("checkpoint vocabulary " + hash +
                             " does not match " + codec::vocabulary_hash());
  }
}

}  // namespace netop::neural
