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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.
//
//   netop_acceptance [--work-dir DIR] [--config DESK_CONFIG] [--only N,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "netop/cli.hpp"
#include "netop/codec.hpp"
#include "netop/env.hpp"
#include "netop/errors.hpp"
#include "netop/netsim.hpp"
#include "netop/neural.hpp"
#include "netop/rng.hpp"
#include "netop/run_config.hpp"
#include "netop/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
  double seconds;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const auto start = Clock::now();
  const int code = netop::cli::run(args, out, err);
  return {code, out.str(), err.str(), seconds_since(start)};
}

// Shared state between the desk-scale criteria.
struct Context {
  fs::path work;
  fs::path desk_config;
  std::string desk_ckpt;
  bool desk_trained = false;
  int desk_exit = -1;
  double desk_seconds = 0.0;
};

// 1. Oracle soundness.
Outcome oracle_soundness() {
  const auto start = Clock::now();
  const netop::netsim::SimConfig sim;
  netop::Rng seeds(20260101);
  int ok = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    auto [state, obs] =
        netop::env::reset(seeds.next_u64(), seeds.next_u64(), sim);
    const int expected =
        static_cast<int>(state.item_count()) + 2 * state.fault_count;
    while (!state.done) {
      netop::env::step(state, netop::env::oracle_action(state));
    }
    if (netop::netsim::is_repaired(state.network) && !state.assisted &&
        state.negative_rewards == 0 && state.total_reward == expected) {
      ++ok;
    }
  }
  const double t = seconds_since(start);
  return {ok == n && t <= 30.0,
          std::to_string(ok) + "/" + std::to_string(n) + " repaired with reward " +
              "items + 2 x faults, " + fmt("%.2f s", t)};
}

void train_desk(Context& ctx) {
  if (ctx.desk_trained) return;
  ctx.desk_trained = true;
  ctx.desk_ckpt = (ctx.work / "desk.ckpt").string();
  const auto r = cli({"train", "--config", ctx.desk_config.string(), "--out",
                      ctx.desk_ckpt, "--quiet"});
  ctx.desk_exit = r.code;
  ctx.desk_seconds = r.seconds;
  std::cout << "  desk training: exit " << r.code << ", "
            << fmt("%.1f s", r.seconds) << "\n";
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);) {
    std::cout << "    " << line << "\n";
  }
  if (!r.err.empty()) std::cout << "    " << r.err;
}

// 2. Desk-scale 100% accuracy on 200 held-out networks.
Outcome desk_accuracy(Context& ctx) {
  train_desk(ctx);
  if (ctx.desk_exit != 0) {
    return {false, "training exit code " + std::to_string(ctx.desk_exit) +
                       " (not converged), " + fmt("%.1f s", ctx.desk_seconds)};
  }
  const auto report = (ctx.work / "desk_eval.json").string();
  const auto r = cli({"evaluate", "--model", ctx.desk_ckpt, "--networks", "200",
                      "--seed", "5000000", "--json", report});
  if (r.code != 0) return {false, "evaluate exit " + std::to_string(r.code)};
  const auto doc = json::parse(slurp(report));
  const double acc = doc["sub_action_accuracy"];
  const double repaired = doc["repaired_fraction"];
  const int assisted = doc["assisted_episodes"];
  const bool pass = acc == 1.0 && repaired == 1.0 && assisted == 0 &&
                    ctx.desk_seconds <= 900.0;
  return {pass, "sub-action " + fmt("%.4f", acc * 100) + "%, repaired " +
                    fmt("%.2f", repaired * 100) + "%, assisted " +
                    std::to_string(assisted) + ", training " +
                    fmt("%.1f s", ctx.desk_seconds) + " (budget 900 s)"};
}

// 3. Phase-2 loss reduction.
Outcome critical_loss_effect(Context& ctx) {
  train_desk(ctx);
  std::ifstream in(ctx.desk_ckpt + ".metrics.jsonl");
  json summary;
  for (std::string line; std::getline(in, line);) {
    auto doc = json::parse(line);
    if (doc["event"] == "summary") summary = doc;
  }
  if (summary.is_null()) return {false, "no summary in metrics log"};
  const double start = summary["phase2_loss_start"];
  const double end = summary["phase2_loss_end"];
  const double reduction = summary["phase2_loss_reduction"];
  return {ctx.desk_exit == 0 && reduction >= 0.90,
          "phase-2 loss " + fmt("%.3e", start) + " -> " + fmt("%.3e", end) +
              " = " + fmt("%.1f", reduction * 100) + "% reduction (gate 90%)" +
              (ctx.desk_exit == 0 ? "" : ", run did not converge")};
}

// 4. Baseline contrast: W = 1 throughout. Observational.
Outcome baseline_contrast(Context& ctx) {
  train_desk(ctx);
  if (!fs::exists(ctx.desk_ckpt + ".phase1")) {
    return {false, "no phase-1 checkpoint to resume from"};
  }
  auto cfg = json::parse(slurp(ctx.desk_config));
  cfg["train"]["critical_weight"] = 1.0;
  const auto cfg_path = ctx.work / "baseline_config.json";
  std::ofstream(cfg_path) << cfg.dump(2);
  const auto ckpt = (ctx.work / "baseline.ckpt").string();
  const auto r = cli({"train", "--config", cfg_path.string(), "--out", ckpt,
                      "--resume", ctx.desk_ckpt + ".phase1", "--quiet"});
  if (r.code != 0 && r.code != 3) {
    return {false, "baseline training exit " + std::to_string(r.code)};
  }
  const auto report = (ctx.work / "baseline_eval.json").string();
  cli({"evaluate", "--model", ckpt, "--networks", "200", "--seed", "5000000",
       "--json", report});
  const auto doc = json::parse(slurp(report));
  return {true, "observational: W = 1 reaches sub-action accuracy " +
                    fmt("%.2f", doc["sub_action_accuracy"].get<double>() * 100) +
                    "%, repaired " +
                    fmt("%.2f", doc["repaired_fraction"].get<double>() * 100) +
                    "% (" + (r.code == 0 ? "converged" : "not converged") +
                    " within the phase-2 budget)"};
}

// 5. Analytic vs central finite-difference gradients.
Outcome gradient_correctness() {
  using netop::neural::BasicQuantileModel;
  using netop::neural::Matrix;
  const auto start = Clock::now();
  netop::Rng rng(555);
  const double h = 1e-5;
  double worst = 0.0;
  int probes = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto m = BasicQuantileModel<double>::init(rng.next_u64(), {16, 8, 8, 14});
    for (auto& layer : m.params.layers) {
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
        layer.bias(i) = 0.2 * (rng.uniform01() - 0.5);
      }
    }
    Matrix<double> x(3, 16);
    Matrix<double> c(3, 14);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform01();
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform01() - 0.5;
    auto loss = [&] {
      return netop::neural::forward(m, x).outputs().cwiseProduct(c).sum();
    };
    const auto g = netop::neural::backward(m, netop::neural::forward(m, x), c);
    for (int p = 0; p < 5; ++p, ++probes) {
      const auto l = rng.uniform_index(m.params.layers.size());
      const bool bias = rng.bernoulli(0.25);
      double* data = bias ? m.params.layers[l].bias.data()
                          : m.params.layers[l].weights.data();
      const auto size = bias ? m.params.layers[l].bias.size()
                             : m.params.layers[l].weights.size();
      const auto i = rng.uniform_index(static_cast<std::uint64_t>(size));
      const double saved = data[i];
      data[i] = saved + h;
      const double up = loss();
      data[i] = saved - h;
      const double down = loss();
      data[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = bias ? g.layers[l].bias.data()[i]
                                   : g.layers[l].weights.data()[i];
      const double denom =
          std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
  }
  const double t = seconds_since(start);
  return {probes == 100 && worst <= 1e-4 && t <= 10.0,
          std::to_string(probes) + " probes on 16-8-8-14, max relative error " +
              fmt("%.2e", worst) + ", " + fmt("%.2f s", t)};
}

// 6. Codec and embedding suite.
Outcome codec_suite() {
  namespace codec = netop::codec;
  const auto& vocab = codec::Vocabulary::instance();
  int tokens = 0;
  int failures = 0;
  struct Point {
    double value;
    int category;
  };
  std::vector<Point> points;
  for (int c = 0; c < codec::kCategoryCount; ++c) {
    double prev = -1.0;
    for (int i = 0; i < vocab.pool_size(c); ++i, ++tokens) {
      const auto text = codec::decode_token(c, i);
      if (!(codec::encode_token(text) == codec::TokenCode{c, i})) ++failures;
      const double e = codec::embed(c, i);
      if (!(e > prev && e > c / 12.0 && e < (c + 1) / 12.0)) ++failures;
      prev = e;
      points.push_back({e, c});
    }
  }
  int actions = 0;
  for (int a = 0; a < codec::kActionCount; ++a, ++actions) {
    const codec::ActionId id{a};
    const auto decoded = codec::decode_action(id, codec::action_phase(id));
    if (!decoded || codec::encode_action(*decoded) != id) ++failures;
  }
  double gap = 1.0;
  for (const auto& p : points) {
    for (const auto& q : points) {
      if (p.category != q.category) gap = std::min(gap, std::abs(p.value - q.value));
    }
  }
  const double bound = 1.0 / (12.0 * 64.0);
  return {failures == 0 && gap >= bound,
          std::to_string(tokens) + " tokens and " + std::to_string(actions) +
              " actions round-trip, " + std::to_string(failures) +
              " failures, min cross-category gap " + fmt("%.6f", gap) +
              " >= " + fmt("%.6f", bound)};
}

// 7. Critical classification against an integer-arithmetic oracle.
Outcome classification_truth_table() {
  const int hundredths[6] = {20, 30, 44, 56, 70, 80};
  auto oracle = [](const std::array<int, 7>& s, int k, int reward) {
    int sum = 0;
    for (int v : s) sum += v;
    if (reward == 1) return !(s[k] >= 70 || sum >= 56 * 7);
    return !(s[k] <= 30 || sum <= 44 * 7);
  };
  // Strata by where the mean falls relative to the two mean thresholds.
  auto stratum = [](const std::array<int, 7>& s) {
    int sum = 0;
    for (int v : s) sum += v;
    if (sum < 44 * 7) return 0;
    if (sum == 44 * 7) return 1;
    if (sum < 56 * 7) return 2;
    if (sum == 56 * 7) return 3;
    return 4;
  };
  std::array<std::vector<std::array<int, 7>>, 5> strata;
  for (int code = 0; code < 279936; ++code) {
    std::array<int, 7> s{};
    int c = code;
    for (int k = 0; k < 7; ++k, c /= 6) s[k] = hundredths[c % 6];
    strata[stratum(s)].push_back(s);
  }
  netop::Rng rng(7);
  std::vector<std::array<int, 7>> cases;
  for (const auto& bucket : strata) {
    for (int i = 0; i < 2000; ++i) {
      cases.push_back(bucket[rng.uniform_index(bucket.size())]);
    }
  }
  for (int v : hundredths) {
    std::array<int, 7> s{};
    s.fill(v);
    cases.push_back(s);
  }
  const netop::trainer::TrainConfig cfg;
  long long mismatches = 0;
  long long elements = 0;
  for (const auto& s : cases) {
    std::array<double, 7> scores{};
    for (int k = 0; k < 7; ++k) scores[k] = s[k] / 100.0;
    for (int reward : {1, -1}) {
      const auto flags = netop::trainer::classify_losses(scores, reward, cfg);
      for (int k = 0; k < 7; ++k, ++elements) {
        if (flags[k] != oracle(s, k, reward)) ++mismatches;
      }
    }
  }
  return {mismatches == 0,
          std::to_string(cases.size()) + " score vectors (10000 stratified + 6 " +
              "boundary) x 2 rewards, " + std::to_string(elements) +
              " elements, " + std::to_string(mismatches) + " mismatches"};
}

// 8. Throughput at default config.
Outcome throughput(Context& ctx) {
  train_desk(ctx);
  std::string model = ctx.desk_ckpt;
  if (!fs::exists(model)) {
    model = (ctx.work / "untrained.ckpt").string();
    const auto m = netop::neural::QuantileModel::init(0, netop::neural::default_dims());
    std::ofstream(model, std::ios::binary) << netop::neural::save_checkpoint(
        m, netop::neural::AdamState<float>::for_model(m, {}));
  }
  const auto cfg_path = ctx.work / "default_config.json";
  std::ofstream(cfg_path) << netop::to_json(netop::RunConfig{}).dump(2);
  const auto report = (ctx.work / "throughput.json").string();
  const auto r = cli({"evaluate", "--model", model, "--config", cfg_path.string(),
                      "--networks", "200", "--seed", "9000000", "--workers", "1",
                      "--json", report});
  if (r.code != 0) return {false, "evaluate exit " + std::to_string(r.code)};
  const auto doc = json::parse(slurp(report));
  const double mean = doc["mean_seconds_per_network"];
  const double p95 = doc["p95_seconds_per_network"];
  return {mean <= 5.0, "mean " + fmt("%.5f", mean) + " s, p95 " +
                           fmt("%.5f", p95) + " s per network (gate 5 s)"};
}

// 9. Determinism of train and generate.
Outcome determinism(Context& ctx) {
  json cfg = json::parse(slurp(ctx.desk_config));
  cfg["train"]["phase1_steps"] = 300;
  cfg["train"]["phase2_max_steps"] = 200;
  cfg["train"]["warmup_steps"] = 200;
  cfg["train"]["validation_networks"] = 10;
  cfg["train"]["validation_interval"] = 100;
  const auto cfg_path = ctx.work / "determinism_config.json";
  std::ofstream(cfg_path) << cfg.dump(2);
  std::vector<std::string> bytes;
  for (const char* name : {"det_a.ckpt", "det_b.ckpt"}) {
    const auto out = (ctx.work / name).string();
    const auto r = cli({"train", "--config", cfg_path.string(), "--out", out,
                        "--quiet"});
    if (r.code != 0 && r.code != 3) {
      return {false, "train exit " + std::to_string(r.code)};
    }
    bytes.push_back(slurp(out));
  }
  const bool same_ckpt = !bytes[0].empty() && bytes[0] == bytes[1];

  bool same_files = true;
  int files = 0;
  for (const char* dir : {"gen_a", "gen_b"}) {
    cli({"generate", "--seed", "42", "--count", "20", "--out",
         (ctx.work / dir).string()});
  }
  for (int i = 0; i < 20; ++i, ++files) {
    const auto name = "net-42-" + std::to_string(i) + ".json";
    const auto a = slurp(ctx.work / "gen_a" / name);
    same_files = same_files && !a.empty() && a == slurp(ctx.work / "gen_b" / name);
  }
  return {same_ckpt && same_files,
          std::string("checkpoints ") + (same_ckpt ? "bit-identical" : "DIFFER") +
              " (" + std::to_string(bytes[0].size()) + " bytes), " +
              std::to_string(files) + " generated files " +
              (same_files ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  ctx.work = fs::temp_directory_path() / "netop_acceptance";
  ctx.desk_config = fs::path(NETOP_CONFIG_DIR) / "desk.json";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work-dir" && i + 1 < argc) {
      ctx.work = argv[++i];
    } else if (arg == "--config" && i + 1 < argc) {
      ctx.desk_config = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) {
        only.insert(std::stoi(item));
      }
    } else {
      std::cerr << "usage: netop_acceptance [--work-dir DIR] [--config PATH] "
                   "[--only N,...]\n";
      return 2;
    }
  }
  fs::remove_all(ctx.work);
  fs::create_directories(ctx.work);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle soundness", oracle_soundness},
      {"desk-scale 100% accuracy", [&] { return desk_accuracy(ctx); }},
      {"critical-loss effect", [&] { return critical_loss_effect(ctx); }},
      {"baseline contrast", [&] { return baseline_contrast(ctx); }},
      {"gradient correctness", gradient_correctness},
      {"codec/embedding suite", codec_suite},
      {"critical-classification truth table", classification_truth_table},
      {"throughput", [&] { return throughput(ctx); }},
      {"determinism", [&] { return determinism(ctx); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(number)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << number << " ("
              << criteria[i].first << "): " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
