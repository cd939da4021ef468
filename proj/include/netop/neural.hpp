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

// Quantile scoring network.
//
// A fully connected network with rectifier hidden layers and a logistic
// output layer. The output vector is read as an A x Q grid: entry (a, k) is
// the k-th quantile score of action a, and an action's quality is the mean of
// its Q scores. The model is a template over the scalar type so that the
// exact same code can be checked in double precision against finite
// differences; training and checkpoints use float.

#ifndef NETOP_NEURAL_HPP_
#define NETOP_NEURAL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "netop/codec.hpp"

namespace netop::neural {

inline constexpr int kQuantiles = 7;

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Input size, hidden sizes..., output size (= actions x quantiles).
std::vector<int> default_dims();

template <class T>
struct Layer {
  Matrix<T> weights;  // out x in
  Vector<T> bias;     // out
};

template <class T>
struct Parameters {
  std::vector<Layer<T>> layers;

  static Parameters zeros(const std::vector<int>& dims);
  std::size_t scalar_count() const;
  bool same_shape(const Parameters& other) const;
  bool operator==(const Parameters& other) const;
};

template <class T>
class BasicQuantileModel {
 public:
  // Zero-initialized. Throws ShapeError unless dims has at least two entries,
  // all positive, and the last is a multiple of kQuantiles.
  explicit BasicQuantileModel(std::vector<int> dims);

  // Hidden layers: uniform in +-sqrt(6 / fan_in); output layer: uniform in
  // +-sqrt(3 / fan_in); biases zero. Deterministic per seed.
  static BasicQuantileModel init(std::uint64_t seed, std::vector<int> dims);

  const std::vector<int>& dims() const { return dims_; }
  int input_size() const { return dims_.front(); }
  int output_size() const { return dims_.back(); }
  int action_count() const { return dims_.back() / kQuantiles; }

  Parameters<T> params;

 private:
  std::vector<int> dims_;
};

using QuantileModel = BasicQuantileModel<float>;

// activations[0] is the input batch; activations[l + 1] is the output of
// layer l after its nonlinearity. Post-activations determine both
// derivatives (rectifier: a > 0, logistic: a (1 - a)).
template <class T>
struct ForwardTrace {
  std::vector<Matrix<T>> activations;

  const Matrix<T>& outputs() const { return activations.back(); }
};

// inputs: batch x input_size. Throws ShapeError on dimension mismatch.
template <class T>
ForwardTrace<T> forward(const BasicQuantileModel<T>& model,
                        const Matrix<T>& inputs);

// grad_outputs: batch x output_size, the loss gradient w.r.t. the scores.
template <class T>
Parameters<T> backward(const BasicQuantileModel<T>& model,
                       const ForwardTrace<T>& trace,
                       const Matrix<T>& grad_outputs);

// Training path: only the Q output units of one action per sample are
// computed. Equivalent to forward + backward with a gradient that is zero
// outside those units, at a fraction of the cost.
template <class T>
struct SelectedTrace {
  std::vector<Matrix<T>> activations;  // input and hidden layers only
  std::vector<int> actions;
  Matrix<T> scores;  // batch x Q
};

template <class T>
SelectedTrace<T> forward_selected(const BasicQuantileModel<T>& model,
                                  const Matrix<T>& inputs,
                                  std::span<const int> actions);

template <class T>
Parameters<T> backward_selected(const BasicQuantileModel<T>& model,
                                const SelectedTrace<T>& trace,
                                const Matrix<T>& grad_scores);

// A x Q score grid for one observation.
std::vector<float> score_grid(const QuantileModel& model,
                              const codec::ObservationVector& obs);

template <class T>
std::vector<double> mean_scores(std::span<const T> grid);

// Argmax of the per-action means; ties go to the lowest id.
template <class T>
codec::ActionId greedy_action(std::span<const T> grid);

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamHyper&) const = default;
};

template <class T>
struct AdamState {
  Parameters<T> first_moment;
  Parameters<T> second_moment;
  std::int64_t step = 0;
  AdamHyper hyper;

  static AdamState for_model(const BasicQuantileModel<T>& model,
                             AdamHyper hyper);
};

// Bias-corrected Adam. Throws ShapeError if the shapes disagree.
template <class T>
void adam_step(BasicQuantileModel<T>& model, const Parameters<T>& gradients,
               AdamState<T>& state);

// Checkpoints.
//
//   "NETOPQR1" | u32 LE metadata length | UTF-8 JSON metadata |
//   f32 LE parameters (per layer: weights row-major, then bias) |
//   f32 LE Adam first moments | f32 LE Adam second moments
inline constexpr std::string_view kCheckpointMagic = "NETOPQR1";
inline constexpr std::string_view kCheckpointSchema = "netop-ckpt-1";

struct Checkpoint {
  QuantileModel model;
  AdamState<float> adam;
  nlohmann::json metadata;
};

// `extra` is merged into the metadata object (training step, seed lineage,
// simulator config, ...). The layout fields always win over `extra`.
std::string save_checkpoint(const QuantileModel& model,
                            const AdamState<float>& adam,
                            const nlohmann::json& extra = nlohmann::json::object());

// Throws BadMagicError, TruncatedCheckpointError or CheckpointError.
Checkpoint load_checkpoint(std::string_view bytes);

// Throws VocabMismatchError unless the metadata names the current vocabulary.
void require_vocab(const nlohmann::json& metadata);

}  // namespace netop::neural

#endif  // NETOP_NEURAL_HPP_
