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

#include "netop/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "netop/errors.hpp"

namespace netop::trainer {

namespace {

using codec::ActionId;
using neural::Matrix;
using nlohmann::json;

constexpr std::uint64_t kPhase1 = 1;
constexpr std::uint64_t kPhase2 = 2;

void require(bool ok, const char* field, const char* message) {
  if (!ok) throw ConfigError(field, message);
}

LossReport gradient_step(neural::QuantileModel& model,
                         neural::AdamState<float>& adam,
                         const ReplayBuffer& buffer, Rng& sampler,
                         const TrainConfig& cfg, double weight) {
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const auto idx = buffer.sample_indices(batch, sampler);
  Matrix<float> inputs(static_cast<Eigen::Index>(batch),
                       static_cast<Eigen::Index>(codec::kObservationSize));
  std::vector<int> actions(batch);
  std::vector<int> rewards(batch);
  for (std::size_t s = 0; s < batch; ++s) {
    const auto& sample = buffer[idx[s]];
    for (std::size_t j = 0; j < codec::kObservationSize; ++j) {
      inputs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) =
          static_cast<float>(sample.obs[j]);
    }
    actions[s] = codec::to_int(sample.action);
    rewards[s] = sample.reward;
  }
  auto trace = neural::forward_selected(model, inputs, actions);
  auto loss = batch_loss(trace.scores, rewards, cfg, weight);
  auto grads = neural::backward_selected(model, trace, loss.gradient);
  neural::adam_step(model, grads, adam);
  return loss.report;
}

// Accumulates per-step loss reports into one metrics line per interval.
class MetricsWindow {
 public:
  void add(const LossReport& r) {
    loss_ += r.mean_loss;
    unweighted_ += r.unweighted_mean_loss;
    critical_ += r.critical;
    non_critical_ += r.non_critical;
    ++count_;
  }

  json flush(int phase, std::int64_t step, double epsilon,
             std::size_t buffer_size) {
    json line = {{"schema", "netop-metrics-1"},
                 {"event", "train"},
                 {"phase", phase},
                 {"step", step},
                 {"mean_loss", count_ ? loss_ / count_ : 0.0},
                 {"unweighted_mean_loss", count_ ? unweighted_ / count_ : 0.0},
                 {"critical", critical_},
                 {"non_critical", non_critical_},
                 {"epsilon", epsilon},
                 {"buffer", buffer_size}};
    *this = MetricsWindow();
    return line;
  }

 private:
  double loss_ = 0.0;
  double unweighted_ = 0.0;
  long long critical_ = 0;
  long long non_critical_ = 0;
  int count_ = 0;
};

json validation_line(int phase, std::int64_t step, const AccuracyReport& r) {
  return {{"schema", "netop-metrics-1"},
          {"event", "validation"},
          {"phase", phase},
          {"step", step},
          {"networks", r.networks},
          {"sub_action_accuracy", r.sub_action_accuracy()},
          {"repaired_fraction", r.repaired_fraction()}};
}

void emit(const TrainHooks& hooks, const json& line) {
  if (hooks.on_metrics) hooks.on_metrics(line);
}

AccuracyReport validate_model(const neural::QuantileModel& model,
                              const TrainConfig& cfg,
                              const netsim::SimConfig& sim) {
  return accuracy(
      greedy_policy(model), cfg.validation_networks,
      [&](int i) { return validation_seeds(cfg.seed, i); }, sim);
}

}  // namespace

void TrainConfig::validate() const {
  require(0.0 < target_wrong, "target_wrong", "must be positive");
  require(target_wrong < mean_threshold_wrong, "mean_threshold_wrong",
          "must exceed target_wrong");
  require(mean_threshold_wrong < mean_threshold_correct,
          "mean_threshold_correct", "must exceed mean_threshold_wrong");
  require(mean_threshold_correct < target_correct, "target_correct",
          "must exceed mean_threshold_correct");
  require(target_correct < 1.0, "target_correct", "must be below 1");
  require(critical_weight >= 1.0, "critical_weight", "must be >= 1");
  require(huber_kappa > 0.0, "huber_kappa", "must be positive");
  require(learning_rate > 0.0, "learning_rate", "must be positive");
  require(phase2_learning_rate >= 0.0, "phase2_learning_rate",
          "must be non-negative");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1",
          "must lie in [0, 1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2",
          "must lie in [0, 1)");
  require(adam_epsilon > 0.0, "adam_epsilon", "must be positive");
  require(!hidden_sizes.empty(), "hidden_sizes", "needs at least one layer");
  for (int h : hidden_sizes) {
    require(h > 0, "hidden_sizes", "sizes must be positive");
  }
  require(batch_size >= 1, "batch_size", "must be positive");
  require(buffer_capacity >= 1, "buffer_capacity", "must be positive");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0, "epsilon_start",
          "must lie in [0, 1]");
  require(epsilon_end >= 0.0 && epsilon_end <= 1.0, "epsilon_end",
          "must lie in [0, 1]");
  require(epsilon_decay_steps >= 0, "epsilon_decay_steps",
          "must be non-negative");
  require(warmup_steps >= 0, "warmup_steps", "must be non-negative");
  require(collect_steps_per_update >= 1, "collect_steps_per_update",
          "must be positive");
  require(phase1_steps >= 0, "phase1_steps", "must be non-negative");
  require(phase2_max_steps >= 0, "phase2_max_steps", "must be non-negative");
  require(phase2_epsilon >= 0.0 && phase2_epsilon <= 1.0, "phase2_epsilon",
          "must lie in [0, 1]");
  require(validation_networks >= 1, "validation_networks", "must be positive");
  require(validation_interval >= 1, "validation_interval", "must be positive");
  require(log_interval >= 1, "log_interval", "must be positive");
}

std::array<double, kQuantiles> TrainConfig::quantile_fractions() {
  std::array<double, kQuantiles> tau{};
  for (int k = 1; k <= kQuantiles; ++k) {
    tau[k - 1] = (2.0 * k - 1.0) / (2.0 * kQuantiles);
  }
  return tau;
}

neural::AdamHyper TrainConfig::adam_hyper() const {
  return {learning_rate, adam_beta1, adam_beta2, adam_epsilon};
}

neural::AdamHyper TrainConfig::phase2_adam_hyper() const {
  auto hyper = adam_hyper();
  if (phase2_learning_rate > 0.0) hyper.learning_rate = phase2_learning_rate;
  return hyper;
}

std::vector<int> TrainConfig::model_dims() const {
  std::vector<int> dims{static_cast<int>(codec::kObservationSize)};
  dims.insert(dims.end(), hidden_sizes.begin(), hidden_sizes.end());
  dims.push_back(codec::kActionCount * kQuantiles);
  return dims;
}

double target_for(int reward, const TrainConfig& cfg) {
  if (reward == 1) return cfg.target_correct;
  if (reward == -1) return cfg.target_wrong;
  throw ContractError("reward must be +1 or -1, got " + std::to_string(reward));
}

CriticalFlags classify_losses(std::span<const double, kQuantiles> scores,
                              int reward, const TrainConfig& cfg) {
  double sum = 0.0;
  for (double s : scores) sum += s;
  const double mean = sum / kQuantiles;
  // Rounding slack so that, e.g., seven scores of 0.56 count as mean 0.56.
  constexpr double kSlack = 1e-9;
  CriticalFlags critical{};
  for (int k = 0; k < kQuantiles; ++k) {
    bool safe;
    if (reward == 1) {
      safe = scores[k] >= cfg.target_correct - kSlack ||
             mean >= cfg.mean_threshold_correct - kSlack;
    } else {
      safe = scores[k] <= cfg.target_wrong + kSlack ||
             mean <= cfg.mean_threshold_wrong + kSlack;
    }
    critical[k] = !safe;
  }
  return critical;
}

double quantile_huber_loss(double score, double target, double tau,
                           double kappa) {
  const double u = target - score;
  const double a = std::abs(u);
  const double huber = a <= kappa ? 0.5 * u * u : kappa * (a - 0.5 * kappa);
  return std::abs(tau - (u < 0.0 ? 1.0 : 0.0)) * huber;
}

double quantile_huber_gradient(double score, double target, double tau,
                               double kappa) {
  const double u = target - score;
  const double dhuber = std::abs(u) <= kappa ? u : (u < 0.0 ? -kappa : kappa);
  return -std::abs(tau - (u < 0.0 ? 1.0 : 0.0)) * dhuber;
}

BatchLoss batch_loss(const Matrix<float>& scores, std::span<const int> rewards,
                     const TrainConfig& cfg, double critical_weight) {
  const auto batch = scores.rows();
  if (batch == 0) throw ContractError("empty batch");
  if (scores.cols() != kQuantiles ||
      static_cast<Eigen::Index>(rewards.size()) != batch) {
    throw ShapeError("scores must be batch x 7 with one reward per row");
  }
  static const auto tau = TrainConfig::quantile_fractions();
  const double norm = static_cast<double>(batch) * kQuantiles;

  BatchLoss out;
  out.gradient.resize(batch, kQuantiles);
  double weighted = 0.0;
  double plain = 0.0;
  for (Eigen::Index s = 0; s < batch; ++s) {
    const int reward = rewards[s];
    const double target = target_for(reward, cfg);
    std::array<double, kQuantiles> row{};
    for (int k = 0; k < kQuantiles; ++k) row[k] = scores(s, k);
    const auto critical = classify_losses(row, reward, cfg);
    for (int k = 0; k < kQuantiles; ++k) {
      double loss;
      double grad;
      if (cfg.loss_mode == LossMode::kQuantileHuber) {
        loss = quantile_huber_loss(row[k], target, tau[k], cfg.huber_kappa);
        grad = quantile_huber_gradient(row[k], target, tau[k], cfg.huber_kappa);
      } else {
        const double u = row[k] - target;
        loss = u * u;
        grad = 2.0 * u;
      }
      const double w = critical[k] ? critical_weight : 1.0;
      weighted += w * loss;
      plain += loss;
      out.gradient(s, k) = static_cast<float>(w * grad / norm);
      ++(critical[k] ? out.report.critical : out.report.non_critical);
    }
  }
  out.total = weighted / norm;
  out.report.mean_loss = out.total;
  out.report.unweighted_mean_loss = plain / norm;
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractError("replay capacity must be positive");
  samples_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::add(env::ReplaySample sample) {
  if (samples_.size() < capacity_) {
    samples_.push_back(std::move(sample));
  } else {
    samples_[next_] = std::move(sample);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n,
                                                      Rng& rng) const {
  if (samples_.empty()) throw ContractError("sampling from an empty buffer");
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = rng.uniform_index(samples_.size());
  return idx;
}

Policy greedy_policy(const neural::QuantileModel& model) {
  return [&model](const env::EpisodeState&,
                  const codec::ObservationVector& obs) {
    auto grid = neural::score_grid(model, obs);
    return neural::greedy_action<float>(grid);
  };
}

Policy oracle_policy() {
  return [](const env::EpisodeState& state, const codec::ObservationVector&) {
    return env::oracle_action(state);
  };
}

EpisodeSeeds evaluation_seeds(std::uint64_t base, std::uint64_t i) {
  return {base + i, base + i};
}

EpisodeSeeds training_seeds(std::uint64_t base, std::uint64_t i) {
  return {(1ULL << 63) | (derive_seed(base, stream::kEpisodes, 2 * i) >> 1),
          derive_seed(base, stream::kEpisodes, 2 * i + 1)};
}

EpisodeSeeds validation_seeds(std::uint64_t base, std::uint64_t i) {
  return {(1ULL << 62) | (derive_seed(base, stream::kValidation, 2 * i) >> 2),
          derive_seed(base, stream::kValidation, 2 * i + 1)};
}

Collector::Collector(netsim::SimConfig sim, std::uint64_t seed,
                     bool store_assisted)
    : sim_(sim),
      seed_(seed),
      store_assisted_(store_assisted),
      rng_(seed, stream::kCollect) {
  sim_.validate();
}

void Collector::start_next_episode() {
  const auto seeds = training_seeds(seed_, episodes_++);
  auto [state, obs] = env::reset(seeds.design, seeds.fault, sim_);
  episode_ = std::move(state);
  obs_ = obs;
}

void Collector::collect(const Policy& policy, double epsilon, int n_steps,
                        ReplayBuffer& buffer) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ContractError("epsilon must lie in [0, 1]");
  }
  for (int i = 0; i < n_steps; ++i) {
    if (!episode_ || episode_->done) start_next_episode();
    ActionId action;
    if (rng_.bernoulli(epsilon)) {
      action = ActionId{static_cast<int>(rng_.uniform_index(codec::kActionCount))};
    } else {
      action = policy(*episode_, obs_);
    }
    auto result = env::step(*episode_, action);
    buffer.add(
        env::make_sample(obs_, action, result.reward, result.next_observation));
    if (store_assisted_ && result.assisted_action) {
      buffer.add(env::make_sample(obs_, *result.assisted_action, 1,
                                  result.next_observation));
    }
    obs_ = result.next_observation;
    ++steps_;
  }
}

double AccuracyReport::sub_action_accuracy() const {
  return steps == 0 ? 1.0 : static_cast<double>(correct_steps) / steps;
}

double AccuracyReport::repaired_fraction() const {
  return networks == 0 ? 1.0
                       : static_cast<double>(repaired_unassisted) / networks;
}

double AccuracyReport::ops_per_network() const {
  return networks == 0 ? 0.0 : static_cast<double>(steps) / networks;
}

bool AccuracyReport::perfect() const {
  return correct_steps == steps && repaired_unassisted == networks;
}

json AccuracyReport::to_json() const {
  return {{"networks", networks},
          {"steps", steps},
          {"correct_steps", correct_steps},
          {"sub_action_accuracy", sub_action_accuracy()},
          {"repaired_unassisted", repaired_unassisted},
          {"repaired_fraction", repaired_fraction()},
          {"assisted_episodes", assisted},
          {"faults", faults},
          {"items", items},
          {"ops_per_network", ops_per_network()},
          {"mean_seconds_per_network", mean_seconds},
          {"p95_seconds_per_network", p95_seconds},
          {"max_seconds_per_network", max_seconds},
          {"failed_design_seeds", failed_design_seeds}};
}

AccuracyReport accuracy(const Policy& policy, int n_networks,
                        const std::function<EpisodeSeeds(int)>& seeds,
                        const netsim::SimConfig& sim,
                        const AccuracyOptions& options) {
  struct Outcome {
    long long steps = 0;
    long long correct = 0;
    long long faults = 0;
    long long items = 0;
    bool repaired = false;
    bool assisted = false;
    double seconds = 0.0;
    std::uint64_t design_seed = 0;
    std::vector<env::ReplaySample> trace;
  };
  sim.validate();
  const int n = std::max(0, n_networks);
  std::vector<Outcome> outcomes(n);

  auto run_one = [&](int i) {
    auto& out = outcomes[i];
    const auto s = seeds(i);
    const auto start = std::chrono::steady_clock::now();
    auto [state, obs] = env::reset(s.design, s.fault, sim);
    out.design_seed = s.design;
    out.faults = state.fault_count;
    out.items = static_cast<long long>(state.item_count());
    while (!state.done) {
      const auto action = policy(state, obs);
      auto r = env::step(state, action);
      ++out.steps;
      if (r.reward == 1) ++out.correct;
      if (options.keep_traces) {
        out.trace.push_back(
            env::make_sample(obs, action, r.reward, r.next_observation));
      }
      obs = r.next_observation;
    }
    out.repaired = netsim::is_repaired(state.network) && !state.assisted;
    out.assisted = state.assisted;
    out.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  };

  const int workers = std::clamp(options.workers, 1, std::max(1, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) run_one(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int i = w; i < n; i += workers) run_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  AccuracyReport report;
  report.networks = n;
  std::vector<double> times;
  for (auto& o : outcomes) {
    report.steps += o.steps;
    report.correct_steps += o.correct;
    report.faults += o.faults;
    report.items += o.items;
    report.assisted += o.assisted ? 1 : 0;
    if (o.repaired && o.correct == o.steps) {
      ++report.repaired_unassisted;
    } else {
      report.failed_design_seeds.push_back(o.design_seed);
    }
    times.push_back(o.seconds);
    if (options.keep_traces) report.traces.push_back(std::move(o.trace));
  }
  if (!times.empty()) {
    double sum = 0.0;
    for (double t : times) sum += t;
    report.mean_seconds = sum / static_cast<double>(times.size());
    std::sort(times.begin(), times.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(times.size())));
    report.p95_seconds = times[std::max<std::size_t>(rank, 1) - 1];
    report.max_seconds = times.back();
  }
  return report;
}

double TrainResult::phase2_loss_reduction() const {
  if (phase2_loss_start <= 0.0) return 0.0;
  return 1.0 - phase2_loss_end / phase2_loss_start;
}

std::pair<double, double> loss_endpoints(
    const std::vector<LossReport>& history) {
  if (history.empty()) return {0.0, 0.0};
  const std::size_t window =
      std::min<std::size_t>(200, std::max<std::size_t>(1, history.size() / 4));
  double head = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    head += history[i].mean_loss;
    tail += history[history.size() - 1 - i].mean_loss;
  }
  return {head / window, tail / window};
}

double epsilon_at(const TrainConfig& cfg, std::uint64_t collection_step) {
  if (cfg.epsilon_decay_steps <= 0) return cfg.epsilon_end;
  const double frac = std::min(
      1.0, static_cast<double>(collection_step) / cfg.epsilon_decay_steps);
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

TrainResult train(const TrainConfig& cfg, const netsim::SimConfig& sim,
                  const TrainHooks& hooks) {
  cfg.validate();
  sim.validate();
  auto model = neural::QuantileModel::init(cfg.seed, cfg.model_dims());
  auto adam = neural::AdamState<float>::for_model(model, cfg.adam_hyper());

  Collector collector(sim, derive_seed(cfg.seed, stream::kCollect, kPhase1),
                      cfg.store_assisted);
  Rng sampler(cfg.seed, stream::kSample + kPhase1);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  const auto policy = greedy_policy(model);

  auto collect_one = [&] {
    collector.collect(policy, epsilon_at(cfg, collector.steps_taken()), 1,
                      buffer);
  };
  for (int i = 0; i < cfg.warmup_steps; ++i) collect_one();

  std::vector<LossReport> history;
  history.reserve(static_cast<std::size_t>(cfg.phase1_steps));
  MetricsWindow window;
  for (int step = 1; step <= cfg.phase1_steps; ++step) {
    for (int j = 0; j < cfg.collect_steps_per_update; ++j) collect_one();
    history.push_back(gradient_step(model, adam, buffer, sampler, cfg, 1.0));
    window.add(history.back());
    if (step % cfg.log_interval == 0 || step == cfg.phase1_steps) {
      emit(hooks, window.flush(1, adam.step,
                               epsilon_at(cfg, collector.steps_taken()),
                               buffer.size()));
    }
  }
  if (hooks.on_metrics) {
    emit(hooks, validation_line(1, adam.step, validate_model(model, cfg, sim)));
  }
  if (hooks.on_checkpoint) {
    hooks.on_checkpoint({"phase1", model, adam, adam.step});
  }
  return train_phase2(cfg, sim, std::move(model), std::move(adam),
                      std::move(history), hooks);
}

TrainResult train_phase2(const TrainConfig& cfg, const netsim::SimConfig& sim,
                         neural::QuantileModel model,
                         neural::AdamState<float> adam,
                         std::vector<LossReport> phase1_history,
                         const TrainHooks& hooks) {
  cfg.validate();
  sim.validate();
  if (model.dims() != cfg.model_dims()) {
    throw ShapeError("model dims do not match the training config");
  }
  TrainResult result{std::move(model), std::move(adam),
                     std::move(phase1_history), {}, false, {}, 0.0, 0.0};
  auto& m = result.model;
  auto& a = result.adam;
  a.hyper = cfg.phase2_adam_hyper();

  // Phase 2 starts from a fresh, fully seeded collection state so that it can
  // be resumed from the phase-1 checkpoint alone.
  Collector collector(sim, derive_seed(cfg.seed, stream::kCollect, kPhase2),
                      cfg.store_assisted);
  Rng sampler(cfg.seed, stream::kSample + kPhase2);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  const auto policy = greedy_policy(m);
  collector.collect(policy, cfg.phase2_epsilon, cfg.warmup_steps, buffer);

  MetricsWindow window;
  bool validated_last = false;
  for (int step = 1; step <= cfg.phase2_max_steps; ++step) {
    collector.collect(policy, cfg.phase2_epsilon, cfg.collect_steps_per_update,
                      buffer);
    result.phase2_history.push_back(
        gradient_step(m, a, buffer, sampler, cfg, cfg.critical_weight));
    window.add(result.phase2_history.back());
    if (step % cfg.log_interval == 0 || step == cfg.phase2_max_steps) {
      emit(hooks,
           window.flush(2, a.step, cfg.phase2_epsilon, buffer.size()));
    }
    validated_last = false;
    if (step % cfg.validation_interval == 0) {
      result.validation = validate_model(m, cfg, sim);
      validated_last = true;
      emit(hooks, validation_line(2, a.step, result.validation));
      if (result.validation.perfect()) {
        result.converged = true;
        break;
      }
    }
  }
  if (!validated_last) {
    result.validation = validate_model(m, cfg, sim);
    result.converged = result.validation.perfect();
    emit(hooks, validation_line(2, a.step, result.validation));
  }

  std::tie(result.phase2_loss_start, result.phase2_loss_end) =
      loss_endpoints(result.phase2_history);
  emit(hooks, {{"schema", "netop-metrics-1"},
               {"event", "summary"},
               {"step", a.step},
               {"converged", result.converged},
               {"phase1_steps", result.phase1_history.size()},
               {"phase2_steps", result.phase2_history.size()},
               {"phase2_loss_start", result.phase2_loss_start},
               {"phase2_loss_end", result.phase2_loss_end},
               {"phase2_loss_reduction", result.phase2_loss_reduction()},
               {"validation", result.validation.to_json()}});
  if (hooks.on_checkpoint) {
    hooks.on_checkpoint({"final", m, a, a.step});
  }
  return result;
}

}  // namespace netop::trainer
