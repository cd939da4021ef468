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

// Operator training.
//
// Rewards are immediate, so every stored sample regresses the 7 quantile
// scores of the taken action towards a fixed target: 0.7 for a correct action
// and 0.3 for a wrong one. Each of the 7 loss elements is classified as
// critical or non-critical from its score and the mean score of the action:
//
//   reward +1: non-critical iff score >= 0.7 or mean >= 0.56
//   reward -1: non-critical iff score <= 0.3 or mean <= 0.44
//
// Training runs in two phases. Phase 1 weights every element equally; phase 2
// multiplies critical elements by critical_weight and runs until a held-out
// validation set is solved without a single wrong sub-action.

#ifndef NETOP_TRAINER_HPP_
#define NETOP_TRAINER_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "netop/codec.hpp"
#include "netop/env.hpp"
#include "netop/netsim.hpp"
#include "netop/neural.hpp"
#include "netop/rng.hpp"

namespace netop::trainer {

using neural::kQuantiles;

enum class LossMode { kQuantileHuber, kSquared };

struct TrainConfig {
  double target_correct = 0.7;
  double target_wrong = 0.3;
  double mean_threshold_correct = 0.56;
  double mean_threshold_wrong = 0.44;
  double critical_weight = 10.0;
  double huber_kappa = 1.0;
  LossMode loss_mode = LossMode::kQuantileHuber;

  double learning_rate = 1e-3;
  // Phase-2 learning rate; 0 keeps learning_rate.
  double phase2_learning_rate = 0.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::vector<int> hidden_sizes = {128, 128};

  int batch_size = 64;
  int buffer_capacity = 50000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_steps = 20000;
  // Environment steps collected before the first update of a phase.
  int warmup_steps = 1000;
  // Environment steps collected per gradient step.
  int collect_steps_per_update = 1;

  int phase1_steps = 50000;
  int phase2_max_steps = 20000;
  double phase2_epsilon = 0.05;
  // Also store the oracle action applied on assist as a +1 sample.
  bool store_assisted = false;
  int validation_networks = 100;
  int validation_interval = 1000;
  int log_interval = 100;

  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;

  // (2k - 1) / 14 for k = 1..7.
  static std::array<double, kQuantiles> quantile_fractions();
  neural::AdamHyper adam_hyper() const;
  neural::AdamHyper phase2_adam_hyper() const;
  std::vector<int> model_dims() const;

  bool operator==(const TrainConfig&) const = default;
};

// +1 -> target_correct, -1 -> target_wrong; anything else is a ContractError.
double target_for(int reward, const TrainConfig& cfg);

// true marks a critical element.
using CriticalFlags = std::array<bool, kQuantiles>;
CriticalFlags classify_losses(std::span<const double, kQuantiles> scores,
                              int reward, const TrainConfig& cfg);

// u = target - score; Huber(u) scaled by |tau - [u < 0]|.
double quantile_huber_loss(double score, double target, double tau,
                           double kappa);
// Derivative of quantile_huber_loss with respect to score.
double quantile_huber_gradient(double score, double target, double tau,
                               double kappa);

struct LossReport {
  double mean_loss = 0.0;             // weighted objective
  double unweighted_mean_loss = 0.0;  // same elements, weight 1
  int critical = 0;
  int non_critical = 0;
};

struct BatchLoss {
  double total = 0.0;
  LossReport report;
  neural::Matrix<float> gradient;  // d total / d score, batch x Q
};

// scores: batch x Q scores of the taken actions.
// total = (sum non-critical + weight * sum critical) / (batch * Q).
BatchLoss batch_loss(const neural::Matrix<float>& scores,
                     std::span<const int> rewards, const TrainConfig& cfg,
                     double critical_weight);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  // Overwrites the oldest sample once full.
  void add(env::ReplaySample sample);
  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Storage order, not insertion order, once the ring has wrapped.
  const env::ReplaySample& operator[](std::size_t i) const {
    return samples_[i];
  }
  // Uniform with replacement over the current contents.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<env::ReplaySample> samples_;
};

// Chooses an action given the live episode and its current observation.
using Policy = std::function<codec::ActionId(const env::EpisodeState&,
                                             const codec::ObservationVector&)>;

// Greedy over the model's mean scores. Holds a reference to `model`.
Policy greedy_policy(const neural::QuantileModel& model);
Policy oracle_policy();

struct EpisodeSeeds {
  std::uint64_t design = 0;
  std::uint64_t fault = 0;
};

// Seed spaces: evaluation networks use (base + i, base + i), training
// episodes have bit 63 set and validation networks bits 63..62 = 01, so the
// three sets are disjoint for evaluation bases below 2^62.
EpisodeSeeds evaluation_seeds(std::uint64_t base, std::uint64_t i);
EpisodeSeeds training_seeds(std::uint64_t base, std::uint64_t i);
EpisodeSeeds validation_seeds(std::uint64_t base, std::uint64_t i);

// Epsilon-greedy sample collection over an endless stream of episodes.
class Collector {
 public:
  Collector(netsim::SimConfig sim, std::uint64_t seed,
            bool store_assisted = false);

  // Runs n_steps environment steps and appends one sample per step, plus one
  // for each assisted oracle action when store_assisted is set.
  void collect(const Policy& policy, double epsilon, int n_steps,
               ReplayBuffer& buffer);

  std::uint64_t episodes_started() const { return episodes_; }
  std::uint64_t steps_taken() const { return steps_; }

 private:
  void start_next_episode();

  netsim::SimConfig sim_;
  std::uint64_t seed_;
  bool store_assisted_;
  Rng rng_;
  std::uint64_t episodes_ = 0;
  std::uint64_t steps_ = 0;
  std::optional<env::EpisodeState> episode_;
  codec::ObservationVector obs_{};
};

struct AccuracyReport {
  int networks = 0;
  long long steps = 0;
  long long correct_steps = 0;
  int repaired_unassisted = 0;
  int assisted = 0;
  long long faults = 0;
  long long items = 0;
  double mean_seconds = 0.0;
  double p95_seconds = 0.0;
  double max_seconds = 0.0;
  std::vector<std::uint64_t> failed_design_seeds;
  // Per-network sample traces, only when requested.
  std::vector<std::vector<env::ReplaySample>> traces;

  double sub_action_accuracy() const;
  double repaired_fraction() const;
  double ops_per_network() const;
  bool perfect() const;
  nlohmann::json to_json() const;
};

struct AccuracyOptions {
  int workers = 1;
  bool keep_traces = false;
};

// Runs one episode per network with the given policy (no exploration).
// Assisted episodes count as failures.
AccuracyReport accuracy(const Policy& policy, int n_networks,
                        const std::function<EpisodeSeeds(int)>& seeds,
                        const netsim::SimConfig& sim,
                        const AccuracyOptions& options = {});

struct TrainSnapshot {
  const char* label;  // "phase1" or "final"
  const neural::QuantileModel& model;
  const neural::AdamState<float>& adam;
  std::int64_t step;
};

struct TrainHooks {
  std::function<void(const nlohmann::json&)> on_metrics;
  std::function<void(const TrainSnapshot&)> on_checkpoint;
};

struct TrainResult {
  neural::QuantileModel model;
  neural::AdamState<float> adam;
  std::vector<LossReport> phase1_history;
  std::vector<LossReport> phase2_history;
  bool converged = false;
  AccuracyReport validation;
  double phase2_loss_start = 0.0;
  double phase2_loss_end = 0.0;

  double phase2_loss_reduction() const;
  std::int64_t steps() const {
    return static_cast<std::int64_t>(phase1_history.size() +
                                     phase2_history.size());
  }
};

// Mean of the first and last `window` mean losses of a history
// (window = min(200, max(1, size / 4))).
std::pair<double, double> loss_endpoints(const std::vector<LossReport>& history);

double epsilon_at(const TrainConfig& cfg, std::uint64_t collection_step);

// Both phases from a fresh model.
TrainResult train(const TrainConfig& cfg, const netsim::SimConfig& sim,
                  const TrainHooks& hooks = {});

// Phase 2 only, starting from a phase-1 boundary state. Reproduces the
// second half of train() exactly when given its phase-1 checkpoint.
TrainResult train_phase2(const TrainConfig& cfg, const netsim::SimConfig& sim,
                         neural::QuantileModel model,
                         neural::AdamState<float> adam,
                         std::vector<LossReport> phase1_history,
                         const TrainHooks& hooks = {});

}  // namespace netop::trainer

#endif  // NETOP_TRAINER_HPP_
