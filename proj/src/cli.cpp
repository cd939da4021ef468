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

#include "netop/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "netop/codec.hpp"
#include "netop/env.hpp"
#include "netop/errors.hpp"
#include "netop/netsim.hpp"
#include "netop/neural.hpp"
#include "netop/run_config.hpp"
#include "netop/trainer.hpp"

namespace netop::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Unreadable or unwritable file.
class PathError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PathError("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw PathError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw PathError("cannot write " + path);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw PathError("cannot create directory " + dir);
  const fs::path probe = fs::path(dir) / ".netop-write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw PathError("directory not writable: " + dir);
  }
  fs::remove(probe, ec);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(double fraction) { return fixed(100.0 * fraction, 2) + "%"; }

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("NETOP_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const auto v = std::strtoull(raw, &end, 10);
  if (*end != '\0' || errno != 0 || raw[0] == '-') {
    throw ConfigError("NETOP_SEED", "must be a non-negative integer");
  }
  return v;
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

// Sim/train sections only; paths do not belong in a deterministic artifact.
json model_config_json(const RunConfig& cfg) {
  auto full = to_json(cfg);
  return {{"sim", full["sim"]}, {"train", full["train"]}};
}

void emit_json(const json& report, const std::string& path, std::ostream& out) {
  if (path.empty()) return;
  if (path == "-") {
    out << report.dump(2) << "\n";
  } else {
    write_file(path, report.dump(2) + "\n");
  }
}

// -------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::uint64_t seed = 0;
  int count = 1;
  std::string out_dir;
  std::string config;
  std::string json_path;
};

void cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const auto cfg = config_or_default(a.config);
  if (a.count < 0) throw ConfigError("count", "must be non-negative");
  ensure_dir(a.out_dir);

  std::map<netsim::FaultKind, int> histogram;
  for (int k = 0; k < 6; ++k) histogram[static_cast<netsim::FaultKind>(k)] = 0;
  json files = json::array();
  out << std::left << std::setw(24) << "file" << std::setw(9) << "devices"
      << std::setw(8) << "faults" << "protocol\n";
  for (int i = 0; i < a.count; ++i) {
    const auto seeds = trainer::evaluation_seeds(a.seed, i);
    const auto design = netsim::generate_design(seeds.design, cfg.sim);
    const auto injected = netsim::inject_faults(design, seeds.fault, cfg.sim);
    const std::string name =
        "net-" + std::to_string(a.seed) + "-" + std::to_string(i) + ".json";
    write_file((fs::path(a.out_dir) / name).string(),
               netsim::state_to_json(injected.state));
    for (const auto& f : injected.faults) ++histogram[f.kind];
    const auto protocol = std::string(netsim::to_token(injected.state.protocol));
    out << std::setw(24) << name << std::setw(9)
        << netsim::device_count(injected.state) << std::setw(8)
        << injected.faults.size() << protocol << "\n";
    files.push_back({{"file", name},
                     {"devices", netsim::device_count(injected.state)},
                     {"faults", injected.faults.size()},
                     {"protocol", protocol}});
  }
  json hist = json::object();
  out << "\nfault kind histogram\n";
  for (const auto& [kind, n] : histogram) {
    const auto token = std::string(netsim::to_token(kind));
    out << "  " << std::setw(28) << token << n << "\n";
    hist[token] = n;
  }
  out << std::right;
  emit_json({{"schema", "netop-generate-1"},
             {"seed", a.seed},
             {"count", a.count},
             {"files", files},
             {"fault_kinds", hist}},
            a.json_path, out);
}

// -------------------------------------------------------------------------
// oracle-check

struct OracleArgs {
  std::string config;
  int count = 1000;
  std::uint64_t seed = 0;
  bool corrupt = false;
  std::string json_path;
};

// Test hook: every repair command is replaced by the next one in the table.
codec::ActionId corrupt_action(codec::ActionId id) {
  const int v = codec::to_int(id);
  const int first = codec::action::kFirstCommand;
  constexpr int kCommands = 6;
  if (v >= first && v < first + kCommands) {
    return codec::ActionId{first + (v - first + 1) % kCommands};
  }
  return id;
}

int cmd_oracle_check(const OracleArgs& a, std::ostream& out) {
  const auto cfg = config_or_default(a.config);
  if (a.count < 0) throw ConfigError("count", "must be non-negative");
  int passed = 0;
  long long steps = 0;
  long long faults = 0;
  long long items = 0;
  std::vector<std::uint64_t> failed;
  for (int i = 0; i < a.count; ++i) {
    const auto seeds = trainer::evaluation_seeds(a.seed, i);
    auto [state, obs] = env::reset(seeds.design, seeds.fault, cfg.sim);
    const int expected =
        static_cast<int>(state.item_count()) + 2 * state.fault_count;
    while (!state.done) {
      auto action = env::oracle_action(state);
      if (a.corrupt) action = corrupt_action(action);
      env::step(state, action);
      ++steps;
    }
    faults += state.fault_count;
    items += static_cast<long long>(state.item_count());
    const bool ok = netsim::is_repaired(state.network) && !state.assisted &&
                    state.negative_rewards == 0 &&
                    state.total_reward == expected;
    if (ok) {
      ++passed;
    } else {
      failed.push_back(seeds.design);
    }
  }
  out << "networks   " << a.count << "\n"
      << "repaired   " << passed << "\n"
      << "failed     " << failed.size() << "\n"
      << "faults     " << faults << "\n"
      << "items      " << items << "\n"
      << "sub-steps  " << steps << "\n";
  for (auto s : failed) out << "FAILED seed " << s << "\n";
  emit_json({{"schema", "netop-oracle-1"},
             {"networks", a.count},
             {"repaired", passed},
             {"faults", faults},
             {"items", items},
             {"steps", steps},
             {"failed_seeds", failed}},
            a.json_path, out);
  return failed.empty() ? kOk : kFailure;
}

// -------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config;
  std::string out;
  std::string resume;
  std::string metrics;
  bool quiet = false;
};

json validation_json(const trainer::AccuracyReport& r) {
  return {{"networks", r.networks},
          {"sub_action_accuracy", r.sub_action_accuracy()},
          {"repaired_fraction", r.repaired_fraction()}};
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto cfg = load_run_config(a.config);
  const std::string ckpt = a.out.empty() ? cfg.paths.checkpoint : a.out;
  const std::string metrics_path =
      a.metrics.empty() ? ckpt + ".metrics.jsonl" : a.metrics;
  const json model_cfg = model_config_json(cfg);

  std::optional<neural::Checkpoint> resumed;
  if (!a.resume.empty()) {
    resumed = neural::load_checkpoint(read_file(a.resume));
    neural::require_vocab(resumed->metadata);
    if (resumed->metadata.value("phase", "") != "phase1") {
      throw CheckpointError("resume checkpoint is not a phase-1 checkpoint");
    }
    const auto saved = resumed->metadata.value("config", json::object());
    if (saved.value("sim", json()) != model_cfg["sim"]) {
      throw ConfigError("sim", "differs from the resumed checkpoint");
    }
  }

  // Probe both outputs up front so a bad path fails before training.
  write_file(metrics_path, "");
  write_file(ckpt, "");
  std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc);

  trainer::TrainHooks hooks;
  hooks.on_metrics = [&](const json& line) {
    metrics << line.dump() << "\n";
    metrics.flush();
    if (a.quiet) return;
    if (line["event"] == "validation") {
      out << "phase " << line["phase"] << " step " << line["step"]
          << "  validation accuracy "
          << percent(line["sub_action_accuracy"].get<double>()) << "  repaired "
          << percent(line["repaired_fraction"].get<double>()) << "\n";
    } else if (line["event"] == "train" &&
               line["step"].get<long long>() % 5000 == 0) {
      out << "phase " << line["phase"] << " step " << line["step"] << "  loss "
          << line["mean_loss"].get<double>() << "  critical "
          << line["critical"] << "\n";
    }
  };
  hooks.on_checkpoint = [&](const trainer::TrainSnapshot& snap) {
    if (std::string_view(snap.label) != "phase1") return;
    write_file(ckpt + ".phase1",
               neural::save_checkpoint(snap.model, snap.adam,
                                       {{"phase", "phase1"},
                                        {"config", model_cfg}}));
  };

  const auto start = std::chrono::steady_clock::now();
  trainer::TrainResult result = [&] {
    if (resumed) {
      return trainer::train_phase2(cfg.train, cfg.sim, std::move(resumed->model),
                                   std::move(resumed->adam), {}, hooks);
    }
    return trainer::train(cfg.train, cfg.sim, hooks);
  }();
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();

  write_file(ckpt, neural::save_checkpoint(
                       result.model, result.adam,
                       {{"phase", "final"},
                        {"config", model_cfg},
                        {"converged", result.converged},
                        {"validation", validation_json(result.validation)},
                        {"phase2_loss_start", result.phase2_loss_start},
                        {"phase2_loss_end", result.phase2_loss_end}}));

  out << "converged             " << (result.converged ? "yes" : "no") << "\n"
      << "gradient steps        " << result.adam.step << "\n"
      << "validation accuracy   "
      << percent(result.validation.sub_action_accuracy()) << "\n"
      << "validation repaired   "
      << percent(result.validation.repaired_fraction()) << "\n"
      << "phase-2 loss          " << result.phase2_loss_start << " -> "
      << result.phase2_loss_end << " ("
      << percent(result.phase2_loss_reduction()) << " reduction)\n"
      << "wall time             " << fixed(seconds, 1) << " s\n"
      << "checkpoint            " << ckpt << "\n"
      << "metrics               " << metrics_path << "\n";
  return result.converged ? kOk : kNotConverged;
}

// -------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string model;
  std::string config;
  std::optional<int> networks;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string json_path;
  std::string trace_path;
  bool require_perfect = false;
};

int cmd_evaluate(const EvaluateArgs& a, std::optional<std::uint64_t> env,
                 std::ostream& out) {
  const auto bytes = read_file(a.model);
  auto ckpt = neural::load_checkpoint(bytes);
  neural::require_vocab(ckpt.metadata);

  RunConfig cfg;
  if (!a.config.empty()) {
    cfg = load_run_config(a.config);
  } else if (ckpt.metadata.contains("config")) {
    try {
      cfg = run_config_from_json(ckpt.metadata["config"]);
    } catch (const ConfigError& e) {
      throw CheckpointError(std::string("bad embedded config: ") + e.what());
    }
  }
  const int n = a.networks.value_or(cfg.eval.networks);
  if (n < 0) throw ConfigError("networks", "must be non-negative");
  const std::uint64_t seed = a.seed.value_or(env.value_or(cfg.eval.seed));
  int workers = a.workers.value_or(cfg.eval.workers);
  if (workers < 0) throw ConfigError("workers", "must be non-negative");
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }

  trainer::AccuracyOptions options{workers, !a.trace_path.empty()};
  const auto report = trainer::accuracy(
      trainer::greedy_policy(ckpt.model), n,
      [seed](int i) { return trainer::evaluation_seeds(seed, i); }, cfg.sim,
      options);

  out << "networks              " << report.networks << "\n"
      << "sub-action accuracy   " << percent(report.sub_action_accuracy())
      << "  (" << report.correct_steps << "/" << report.steps << ")\n"
      << "fully repaired        " << percent(report.repaired_fraction())
      << "  (" << report.repaired_unassisted << "/" << report.networks
      << ")\n"
      << "assisted episodes     " << report.assisted << "\n"
      << "operations/network    " << fixed(report.ops_per_network(), 1) << "\n"
      << "faults                " << report.faults << "\n"
      << "mean s/network        " << fixed(report.mean_seconds, 6) << "\n"
      << "p95 s/network         " << fixed(report.p95_seconds, 6) << "\n";

  json doc = report.to_json();
  doc["schema"] = "netop-eval-1";
  doc["seed"] = seed;
  emit_json(doc, a.json_path, out);

  if (!a.trace_path.empty()) {
    std::string lines;
    for (const auto& trace : report.traces) {
      for (const auto& sample : trace) {
        lines += env::sample_to_json_line(sample);
        lines += "\n";
      }
    }
    write_file(a.trace_path, lines);
  }
  return a.require_perfect && !report.perfect() ? kFailure : kOk;
}

// -------------------------------------------------------------------------
// inspect, report, vocab

void cmd_inspect(const std::string& model, std::ostream& out) {
  const auto ckpt = neural::load_checkpoint(read_file(model));
  json meta = ckpt.metadata;
  meta["parameters"] = ckpt.model.params.scalar_count();
  out << meta.dump(2) << "\n";
}

int cmd_report(const std::string& path, const std::string& json_path,
               std::ostream& out) {
  std::istringstream in(read_file(path));
  std::string line;
  std::map<int, json> last_train;
  std::vector<json> validations;
  json summary;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error&) {
      throw ParseError("metrics line " + std::to_string(lineno) +
                           " is not valid JSON",
                       0);
    }
    if (doc.value("schema", "") != "netop-metrics-1") {
      throw ParseError("metrics line " + std::to_string(lineno) +
                           " lacks schema netop-metrics-1",
                       0);
    }
    const auto event = doc.value("event", "");
    if (event == "train") last_train[doc.value("phase", 0)] = doc;
    if (event == "validation") validations.push_back(doc);
    if (event == "summary") summary = doc;
  }

  for (const auto& [phase, doc] : last_train) {
    out << "phase " << phase << " last step " << doc["step"] << "  loss "
        << doc["mean_loss"].get<double>() << "  critical " << doc["critical"]
        << "  non-critical " << doc["non_critical"] << "\n";
  }
  for (const auto& v : validations) {
    out << "validation phase " << v["phase"] << " step " << v["step"]
        << "  accuracy " << percent(v["sub_action_accuracy"].get<double>())
        << "\n";
  }
  if (!summary.is_null()) {
    out << "converged " << (summary["converged"].get<bool>() ? "yes" : "no")
        << "  phase-2 loss reduction "
        << percent(summary["phase2_loss_reduction"].get<double>()) << "\n";
  }
  emit_json({{"schema", "netop-report-1"},
             {"last_train", [&] {
                json j = json::array();
                for (const auto& [phase, doc] : last_train) j.push_back(doc);
                return j;
              }()},
             {"validations", validations},
             {"summary", summary}},
            json_path, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"netop: autonomous network repair operator"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> env;
  try {
    env = env_seed();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  GenerateArgs gen;
  gen.seed = env.value_or(0);
  auto* generate = app.add_subcommand("generate", "Write random faulted networks");
  generate->add_option("--seed", gen.seed, "Base seed");
  generate->add_option("--count", gen.count, "Number of networks");
  generate->add_option("--out", gen.out_dir, "Output directory")->required();
  generate->add_option("--config", gen.config, "Run config (sim section)");
  generate->add_option("--json", gen.json_path, "JSON report path, - for stdout");

  OracleArgs oracle;
  oracle.seed = env.value_or(0);
  auto* check = app.add_subcommand("oracle-check", "Replay the oracle");
  check->add_option("--config", oracle.config, "Run config");
  check->add_option("--count", oracle.count, "Number of networks");
  check->add_option("--seed", oracle.seed, "Base seed");
  check->add_option("--json", oracle.json_path, "JSON report path, - for stdout");
  check->add_flag("--corrupt-action-table", oracle.corrupt)->group("");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train an operator");
  train->add_option("--config", tr.config, "Run config")->required();
  train->add_option("--out", tr.out, "Checkpoint path");
  train->add_option("--resume", tr.resume, "Phase-1 checkpoint to resume from");
  train->add_option("--metrics", tr.metrics, "Metrics log path");
  train->add_flag("--quiet", tr.quiet, "Only print the summary");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  evaluate->add_option("--model", ev.model, "Checkpoint")->required();
  evaluate->add_option("--networks", ev.networks, "Number of networks");
  evaluate->add_option("--seed", ev.seed, "Base seed");
  evaluate->add_option("--config", ev.config, "Run config");
  evaluate->add_option("--workers", ev.workers, "Worker threads, 0 for all cores");
  evaluate->add_option("--json", ev.json_path, "JSON report path, - for stdout");
  evaluate->add_option("--trace", ev.trace_path, "JSON-lines sample trace path");
  evaluate->add_flag("--require-perfect", ev.require_perfect,
                     "Exit 1 unless every network is repaired without error");

  std::string inspect_model;
  auto* inspect = app.add_subcommand("inspect", "Print checkpoint metadata");
  inspect->add_option("--model", inspect_model, "Checkpoint")->required();

  std::string report_path;
  std::string report_json;
  auto* report = app.add_subcommand("report", "Summarize a metrics log");
  report->add_option("--metrics", report_path, "Metrics log")->required();
  report->add_option("--json", report_json, "JSON report path, - for stdout");

  auto* vocab = app.add_subcommand("vocab", "Print the token vocabulary");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*generate) {
      cmd_generate(gen, out);
      return kOk;
    }
    if (*check) return cmd_oracle_check(oracle, out);
    if (*train) return cmd_train(tr, out);
    if (*evaluate) return cmd_evaluate(ev, env, out);
    if (*inspect) {
      cmd_inspect(inspect_model, out);
      return kOk;
    }
    if (*report) return cmd_report(report_path, report_json, out);
    if (*vocab) {
      out << codec::vocabulary_json();
      return kOk;
    }
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << "\n";
    return kCheckpointError;
  } catch (const ConfigError& e) {
    err << "error: config field " << e.what() << "\n";
    return kConfigError;
  } catch (const PathError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kConfigError;
}

}  // namespace netop::cli
