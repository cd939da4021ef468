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

#include "netop/neural.hpp"

#include <algorithm>
#include <cmath>

#include "netop/errors.hpp"
#include "netop/rng.hpp"

namespace netop::neural {

namespace {

// Logits are clamped so that float scores stay strictly inside (0, 1).
constexpr double kLogitLimit = 15.0;

template <class T>
T logistic(T z) {
  const T limit = static_cast<T>(kLogitLimit);
  z = std::clamp(z, -limit, limit);
  return T(1) / (T(1) + std::exp(-z));
}

template <class T>
T logistic_slope(T z, T s) {
  return std::abs(z) < static_cast<T>(kLogitLimit) ? s * (T(1) - s) : T(0);
}

void check_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) throw ShapeError("a model needs at least two layers");
  for (int d : dims) {
    if (d <= 0) throw ShapeError("layer sizes must be positive");
  }
  if (dims.back() % kQuantiles != 0) {
    throw ShapeError("output size must be a multiple of the quantile count");
  }
}

template <class T>
void check_input(const BasicQuantileModel<T>& model, const Matrix<T>& inputs) {
  if (inputs.cols() != model.input_size()) {
    throw ShapeError("expected " + std::to_string(model.input_size()) +
                     " input features, got " + std::to_string(inputs.cols()));
  }
}

// Shared hidden stack. Returns the activations of the input and every hidden
// layer.
template <class T>
std::vector<Matrix<T>> hidden_forward(const BasicQuantileModel<T>& model,
                                      const Matrix<T>& inputs) {
  const auto& layers = model.params.layers;
  std::vector<Matrix<T>> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Matrix<T> z = acts.back() * layers[l].weights.transpose();
    z.rowwise() += layers[l].bias.transpose();
    acts.push_back(z.cwiseMax(T(0)));
  }
  return acts;
}

// Backpropagates `delta` (gradient w.r.t. the pre-activations of the first
// layer above the hidden stack) down through the hidden layers.
template <class T>
void hidden_backward(const BasicQuantileModel<T>& model,
                     const std::vector<Matrix<T>>& acts, Matrix<T> delta,
                     std::size_t top, Parameters<T>& grads) {
  const auto& layers = model.params.layers;
  for (std::size_t l = top; l-- > 0;) {
    delta = (delta * layers[l + 1].weights)
                .cwiseProduct(
                    (acts[l + 1].array() > T(0)).template cast<T>().matrix());
    grads.layers[l].weights.noalias() = delta.transpose() * acts[l];
    grads.layers[l].bias = delta.colwise().sum().transpose();
  }
}

}  // namespace

std::vector<int> default_dims() {
  return {static_cast<int>(codec::kObservationSize), 128, 128,
          codec::kActionCount * kQuantiles};
}

template <class T>
Parameters<T> Parameters<T>::zeros(const std::vector<int>& dims) {
  check_dims(dims);
  Parameters p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    p.layers.push_back({Matrix<T>::Zero(dims[l + 1], dims[l]),
                        Vector<T>::Zero(dims[l + 1])});
  }
  return p;
}

template <class T>
std::size_t Parameters<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  }
  return n;
}

template <class T>
bool Parameters<T>::same_shape(const Parameters& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weights.rows() != other.layers[l].weights.rows() ||
        layers[l].weights.cols() != other.layers[l].weights.cols() ||
        layers[l].bias.size() != other.layers[l].bias.size()) {
      return false;
    }
  }
  return true;
}

template <class T>
bool Parameters<T>::operator==(const Parameters& other) const {
  if (!same_shape(other)) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weights != other.layers[l].weights ||
        layers[l].bias != other.layers[l].bias) {
      return false;
    }
  }
  return true;
}

template <class T>
BasicQuantileModel<T>::BasicQuantileModel(std::vector<int> dims)
    : params(Parameters<T>::zeros(dims)), dims_(std::move(dims)) {}

template <class T>
BasicQuantileModel<T> BasicQuantileModel<T>::init(std::uint64_t seed,
                                                  std::vector<int> dims) {
  BasicQuantileModel model(std::move(dims));
  Rng rng(seed, stream::kInit);
  const std::size_t count = model.params.layers.size();
  for (std::size_t l = 0; l < count; ++l) {
    auto& w = model.params.layers[l].weights;
    const double gain = l + 1 == count ? 3.0 : 6.0;
    const double bound = std::sqrt(gain / static_cast<double>(w.cols()));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w.data()[i] = static_cast<T>(bound * (2.0 * rng.uniform01() - 1.0));
    }
  }
  return model;
}

template <class T>
ForwardTrace<T> forward(const BasicQuantileModel<T>& model,
                        const Matrix<T>& inputs) {
  check_input(model, inputs);
  ForwardTrace<T> trace;
  trace.activations = hidden_forward(model, inputs);
  const auto& out = model.params.layers.back();
  Matrix<T> z = trace.activations.back() * out.weights.transpose();
  z.rowwise() += out.bias.transpose();
  trace.activations.push_back(z.unaryExpr([](T v) { return logistic(v); }));
  return trace;
}

template <class T>
Parameters<T> backward(const BasicQuantileModel<T>& model,
                       const ForwardTrace<T>& trace,
                       const Matrix<T>& grad_outputs) {
  const auto& layers = model.params.layers;
  if (trace.activations.size() != layers.size() + 1) {
    throw ShapeError("trace does not match the model depth");
  }
  const auto& out = trace.outputs();
  if (grad_outputs.rows() != out.rows() || grad_outputs.cols() != out.cols()) {
    throw ShapeError("output gradient shape does not match the trace");
  }
  auto grads = Parameters<T>::zeros(model.dims());
  const std::size_t last = layers.size() - 1;

  // Recover the output logits to honor the clamp in the derivative.
  const auto& below = trace.activations[last];
  Matrix<T> z = below * layers[last].weights.transpose();
  z.rowwise() += layers[last].bias.transpose();
  Matrix<T> delta = grad_outputs.binaryExpr(
      z, [](T g, T zz) { return g * logistic_slope(zz, logistic(zz)); });

  grads.layers[last].weights.noalias() = delta.transpose() * below;
  grads.layers[last].bias = delta.colwise().sum().transpose();
  hidden_backward(model, trace.activations, std::move(delta), last, grads);
  return grads;
}

template <class T>
SelectedTrace<T> forward_selected(const BasicQuantileModel<T>& model,
                                  const Matrix<T>& inputs,
                                  std::span<const int> actions) {
  check_input(model, inputs);
  if (static_cast<Eigen::Index>(actions.size()) != inputs.rows()) {
    throw ShapeError("one action per sample is required");
  }
  SelectedTrace<T> trace;
  trace.activations = hidden_forward(model, inputs);
  trace.actions.assign(actions.begin(), actions.end());
  const auto& out = model.params.layers.back();
  const auto& h = trace.activations.back();
  trace.scores.resize(inputs.rows(), kQuantiles);
  for (Eigen::Index s = 0; s < inputs.rows(); ++s) {
    const int a = actions[s];
    if (a < 0 || a >= model.action_count()) {
      throw ShapeError("action " + std::to_string(a) + " out of range");
    }
    Vector<T> z = out.weights.middleRows(a * kQuantiles, kQuantiles) *
                      h.row(s).transpose() +
                  out.bias.segment(a * kQuantiles, kQuantiles);
    for (int k = 0; k < kQuantiles; ++k) trace.scores(s, k) = logistic(z(k));
  }
  return trace;
}

template <class T>
Parameters<T> backward_selected(const BasicQuantileModel<T>& model,
                                const SelectedTrace<T>& trace,
                                const Matrix<T>& grad_scores) {
  const auto& layers = model.params.layers;
  if (grad_scores.rows() != trace.scores.rows() ||
      grad_scores.cols() != kQuantiles) {
    throw ShapeError("score gradient shape does not match the trace");
  }
  auto grads = Parameters<T>::zeros(model.dims());
  const std::size_t last = layers.size() - 1;
  const auto& out = layers[last];
  const auto& h = trace.activations.back();
  auto& gw = grads.layers[last].weights;
  auto& gb = grads.layers[last].bias;

  Matrix<T> delta_hidden = Matrix<T>::Zero(h.rows(), h.cols());
  for (Eigen::Index s = 0; s < h.rows(); ++s) {
    const int row = trace.actions[s] * kQuantiles;
    Vector<T> z = out.weights.middleRows(row, kQuantiles) * h.row(s).transpose() +
                  out.bias.segment(row, kQuantiles);
    Vector<T> g(kQuantiles);
    for (int k = 0; k < kQuantiles; ++k) {
      g(k) = grad_scores(s, k) * logistic_slope(z(k), trace.scores(s, k));
    }
    gw.middleRows(row, kQuantiles).noalias() += g * h.row(s);
    gb.segment(row, kQuantiles) += g;
    delta_hidden.row(s).noalias() =
        g.transpose() * out.weights.middleRows(row, kQuantiles);
  }
  if (last == 0) return grads;
  // delta_hidden is already the gradient w.r.t. the top hidden activations;
  // convert it to the pre-activation gradient of that layer.
  Matrix<T> delta = delta_hidden.cwiseProduct(
      (h.array() > T(0)).template cast<T>().matrix());
  const std::size_t top = last - 1;
  grads.layers[top].weights.noalias() =
      delta.transpose() * trace.activations[top];
  grads.layers[top].bias = delta.colwise().sum().transpose();
  hidden_backward(model, trace.activations, std::move(delta), top, grads);
  return grads;
}

std::vector<float> score_grid(const QuantileModel& model,
                              const codec::ObservationVector& obs) {
  Matrix<float> input(1, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    input(0, static_cast<Eigen::Index>(i)) = static_cast<float>(obs[i]);
  }
  auto trace = forward(model, input);
  const auto& out = trace.outputs();
  return {out.data(), out.data() + out.size()};
}

template <class T>
std::vector<double> mean_scores(std::span<const T> grid) {
  if (grid.size() % kQuantiles != 0) {
    throw ShapeError("grid size is not a multiple of the quantile count");
  }
  std::vector<double> means(grid.size() / kQuantiles);
  for (std::size_t a = 0; a < means.size(); ++a) {
    double sum = 0.0;
    for (int k = 0; k < kQuantiles; ++k) sum += grid[a * kQuantiles + k];
    means[a] = sum / kQuantiles;
  }
  return means;
}

template <class T>
codec::ActionId greedy_action(std::span<const T> grid) {
  auto means = mean_scores(grid);
  if (means.empty()) throw ShapeError("empty score grid");
  std::size_t best = 0;
  for (std::size_t a = 1; a < means.size(); ++a) {
    if (means[a] > means[best]) best = a;
  }
  return codec::ActionId{static_cast<int>(best)};
}

template <class T>
AdamState<T> AdamState<T>::for_model(const BasicQuantileModel<T>& model,
                                     AdamHyper hyper) {
  AdamState state;
  state.first_moment = Parameters<T>::zeros(model.dims());
  state.second_moment = Parameters<T>::zeros(model.dims());
  state.hyper = hyper;
  return state;
}

template <class T>
void adam_step(BasicQuantileModel<T>& model, const Parameters<T>& gradients,
               AdamState<T>& state) {
  if (!model.params.same_shape(gradients) ||
      !model.params.same_shape(state.first_moment) ||
      !model.params.same_shape(state.second_moment)) {
    throw ShapeError("Adam shapes do not match the model");
  }
  ++state.step;
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(h.beta1);
  const T b2 = static_cast<T>(h.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(h.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(h.beta2, t));
  const T lr = static_cast<T>(h.learning_rate);
  const T eps = static_cast<T>(h.epsilon);

  auto update = [&](auto& w, const auto& g, auto& m, auto& v) {
    m.array() = b1 * m.array() + (T(1) - b1) * g.array();
    v.array() = b2 * v.array() + (T(1) - b2) * g.array().square();
    w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < gradients.layers.size(); ++l) {
    auto& layer = model.params.layers[l];
    const auto& g = gradients.layers[l];
    auto& m = state.first_moment.layers[l];
    auto& v = state.second_moment.layers[l];
    update(layer.weights, g.weights, m.weights, v.weights);
    update(layer.bias, g.bias, m.bias, v.bias);
  }
}

#define NETOP_INSTANTIATE(T)                                                  \
  template struct Parameters<T>;                                              \
  template class BasicQuantileModel<T>;                                       \
  template struct AdamState<T>;                                               \
  template ForwardTrace<T> forward(const BasicQuantileModel<T>&,              \
                                   const Matrix<T>&);                         \
  template Parameters<T> backward(const BasicQuantileModel<T>&,               \
                                  const ForwardTrace<T>&, const Matrix<T>&);  \
  template SelectedTrace<T> forward_selected(                                 \
      const BasicQuantileModel<T>&, const Matrix<T>&, std::span<const int>);  \
  template Parameters<T> backward_selected(                                   \
      const BasicQuantileModel<T>&, const SelectedTrace<T>&,                  \
      const Matrix<T>&);                                                      \
  template std::vector<double> mean_scores(std::span<const T>);               \
  template codec::ActionId greedy_action(std::span<const T>);                 \
  template void adam_step(BasicQuantileModel<T>&, const Parameters<T>&,       \
                          AdamState<T>&);

NETOP_INSTANTIATE(float)
NETOP_INSTANTIATE(double)

#undef NETOP_INSTANTIATE

}  // namespace netop::neural
