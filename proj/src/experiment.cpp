// Copyright 2026 The flsim Authors. All Rights Reserved.
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

#include "flsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "flsim/data.hpp"
#include "flsim/error.hpp"

namespace flsim {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string dotted(const std::vector<std::string>& path) {
  std::string out;
  for (const auto& p : path) {
    if (!out.empty()) out += '.';
    out += p;
  }
  return out;
}

std::size_t line_at(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class ConfigReader {
 public:
  ConfigReader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
    std::string where = source_;
    if (const auto line = line_of(path)) where += ":" + std::to_string(line);
    throw validation_error(where + ": " + dotted(path) + ": " + message);
  }

 private:
  // Line of the last path component, searched for after its parents.
  std::size_t line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      const auto found = text_.find("\"" + key + "\"", pos);
      if (found == std::string_view::npos) return 0;
      pos = found;
    }
    return path.empty() ? 0 : line_at(text_, pos);
  }

  std::string_view text_;
  std::string source_;
};

class Section {
 public:
  Section(const ConfigReader& reader, const json& node, std::vector<std::string> path)
      : reader_(reader), node_(node), path_(std::move(path)) {
    if (!node_.is_object()) reader_.fail(path_, "must be a JSON object");
  }

  bool has(const std::string& key) {
    known_.insert(key);
    return node_.contains(key);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    reader_.fail(child(key), message);
  }

  void check(bool ok, const std::string& key, const std::string& message) const {
    if (!ok) fail(key, message);
  }

  double real(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double x = v.get<double>();
    check(std::isfinite(x), key, "must be finite");
    return x;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number_unsigned()) fail(key, "must be a non-negative integer (got " + v.dump() + ")");
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }

  std::vector<double> reals(const std::string& key) {
    if (!has(key)) return {};
    const json& v = node_.at(key);
    if (!v.is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Section section(const std::string& key) {
    known_.insert(key);
    static const json empty = json::object();
    return Section(reader_, node_.contains(key) ? node_.at(key) : empty, child(key));
  }

  void reject_unknown() const {
    for (const auto& [key, value] : node_.items()) {
      if (!known_.count(key)) reader_.fail(child(key), "unknown key");
    }
  }

 private:
  std::vector<std::string> child(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    return p;
  }

  const ConfigReader& reader_;
  const json& node_;
  std::vector<std::string> path_;
  std::set<std::string> known_;
};

template <typename Fn>
auto parse_enum(Section& s, const std::string& key, const std::string& fallback, Fn parse) {
  const std::string value = s.text(key, fallback);
  try {
    return parse(value);
  } catch (const Error& e) {
    s.fail(key, e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw runtime_error("write failed for '" + path.string() + "'");
}

json workload_json(const ExperimentConfig& c) {
  const json full = to_json(c);
  return {
      {"model", full["model"]},
      {"dataset", full["dataset"]},
      {"partition", full["partition"]},
      {"rounds", c.rounds},
      {"seeds", {{"data", c.seeds.data}, {"partition", c.seeds.partition}, {"init", c.seeds.init}}},
  };
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source_name) {
  const std::string source(source_name);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw validation_error(source + ":" + std::to_string(line_at(text, e.byte == 0 ? 0 : e.byte - 1)) +
                           ": invalid JSON: " + e.what());
  }
  const ConfigReader reader(text, source);
  Section top(reader, root, {});
  ExperimentConfig c;

  if (!top.has("strategy")) top.fail("strategy", "is required (fedavg or overlap)");
  c.strategy = parse_enum(top, "strategy", "", parse_strategy);
  c.rounds = top.count("rounds", c.rounds);
  top.check(c.rounds >= 1, "rounds", "must be >= 1");

  {
    Section s = top.section("model");
    if (!s.has("kind")) s.fail("kind", "is required");
    c.model.kind = parse_enum(s, "kind", "", parse_model_kind);
    c.model.hidden_dim = s.count("hidden_dim", 0);
    if (s.has("loss")) c.model.loss = parse_enum(s, "loss", "", parse_loss_kind);
    c.model.bias = s.flag("bias", true);
    if (c.model.kind == ModelKind::kMlp) {
      s.check(c.model.hidden_dim >= 1, "hidden_dim", "must be >= 1 for mlp-1hidden");
    } else {
      s.check(c.model.hidden_dim == 0, "hidden_dim", "only applies to mlp-1hidden");
    }
    s.reject_unknown();
  }
  {
    Section s = top.section("dataset");
    auto& d = c.dataset;
    d.source = s.text("source", d.source);
    s.check(d.source == "synthetic" || d.source == "idx", "source", "must be synthetic or idx");
    if (d.source == "synthetic") {
      d.n_samples = s.count("n_samples", d.n_samples);
      d.input_dim = s.count("input_dim", d.input_dim);
      d.class_count = s.count("class_count", d.class_count);
      d.cluster_spread = s.real("cluster_spread", d.cluster_spread);
      s.check(d.n_samples >= 2, "n_samples", "must be >= 2");
      s.check(d.input_dim >= 1, "input_dim", "must be >= 1");
      s.check(d.class_count >= 2, "class_count", "must be >= 2");
      s.check(d.cluster_spread >= 0.0, "cluster_spread", "must be >= 0");
    } else {
      d.images = s.text("images", "");
      d.labels = s.text("labels", "");
      s.check(!d.images.empty(), "images", "is required for idx datasets");
      s.check(!d.labels.empty(), "labels", "is required for idx datasets");
    }
    d.holdout_fraction = s.real("holdout_fraction", d.holdout_fraction);
    s.check(d.holdout_fraction > 0.0 && d.holdout_fraction < 1.0, "holdout_fraction", "must be in (0, 1)");
    s.reject_unknown();
  }
  {
    Section s = top.section("partition");
    auto& p = c.partition;
    p.n_clients = s.count("n_clients", p.n_clients);
    p.label_alpha = s.real("label_alpha", p.label_alpha);
    p.size_alpha = s.real("size_alpha", p.size_alpha);
    s.check(p.n_clients >= 1, "n_clients", "must be >= 1");
    s.check(p.label_alpha > 0.0, "label_alpha", "must be > 0");
    s.check(p.size_alpha > 0.0, "size_alpha", "must be > 0");
    s.reject_unknown();
  }
  {
    Section s = top.section("optimizer");
    auto& o = c.optimizer;
    o.eta = s.real("eta", o.eta);
    o.eta_decay = s.real("eta_decay", o.eta_decay);
    o.server_eta = s.real("server_eta", o.server_eta);
    o.lambda = s.real("lambda", o.lambda);
    o.beta = s.real("beta", o.beta);
    o.nag_mode = parse_enum(s, "nag_mode", "eq8", parse_nag_mode);
    o.compensation = parse_enum(s, "compensation", "aggregate", parse_compensation_mode);
    const auto e = s.count("E", static_cast<std::uint64_t>(o.E));
    const auto e_max = s.count("E_max", static_cast<std::uint64_t>(o.E_max));
    o.fraction_C = s.real("fraction_C", o.fraction_C);
    o.batch_size = s.count("batch_size", o.batch_size);
    s.check(o.eta > 0.0, "eta", "must be > 0");
    s.check(o.eta_decay >= 0.0, "eta_decay", "must be >= 0");
    s.check(o.server_eta >= 0.0, "server_eta", "must be >= 0 (0 means same as eta)");
    s.check(o.lambda >= 0.0, "lambda", "must be >= 0 (got " + format_real(o.lambda) + ")");
    s.check(o.beta >= 0.0 && o.beta < 1.0, "beta", "must be in [0, 1) (got " + format_real(o.beta) + ")");
    s.check(e >= 1 && e <= 1000000, "E", "must be in [1, 1000000]");
    s.check(e_max >= 1 && e_max <= 1000000, "E_max", "must be in [1, 1000000]");
    s.check(o.fraction_C > 0.0 && o.fraction_C <= 1.0, "fraction_C", "must be in (0, 1]");
    if (c.strategy == Strategy::kOverlap) {
      s.check(o.fraction_C == 1.0, "fraction_C", "must be 1 for the overlap strategy");
    }
    o.E = static_cast<int>(e);
    o.E_max = static_cast<int>(e_max);
    s.reject_unknown();
  }
  {
    Section s = top.section("network");
    auto& n = c.network;
    n.latency = s.real("latency", n.latency);
    n.bandwidth = s.real("bandwidth", n.bandwidth);
    n.jitter_frac = s.real("jitter_frac", n.jitter_frac);
    s.check(n.latency >= 0.0, "latency", "must be >= 0 seconds");
    s.check(n.bandwidth > 0.0, "bandwidth", "must be > 0 bytes/second");
    s.check(n.jitter_frac >= 0.0 && n.jitter_frac < 1.0, "jitter_frac", "must be in [0, 1)");
    s.reject_unknown();
  }
  {
    Section s = top.section("compute");
    c.compute.t_train = s.real("t_train", c.compute.t_train);
    c.compute.per_client = s.reals("per_client");
    s.check(c.compute.t_train > 0.0, "t_train", "must be > 0 seconds");
    for (double t : c.compute.per_client) s.check(t > 0.0, "per_client", "entries must be > 0 seconds");
    s.check(c.compute.per_client.empty() || c.compute.per_client.size() == c.partition.n_clients,
            "per_client", "must list one time per client");
    s.reject_unknown();
  }
  {
    Section s = top.section("seeds");
    c.seeds.data = s.count("data", c.seeds.data);
    c.seeds.partition = s.count("partition", c.seeds.partition);
    c.seeds.init = s.count("init", c.seeds.init);
    c.seeds.sampling = s.count("sampling", c.seeds.sampling);
    c.seeds.jitter = s.count("jitter", c.seeds.jitter);
    s.reject_unknown();
  }
  top.reject_unknown();
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text(path), path); }

json to_json(const ExperimentConfig& c) {
  const auto& d = c.dataset;
  json dataset = {{"source", d.source}, {"holdout_fraction", d.holdout_fraction}};
  if (d.source == "synthetic") {
    dataset["n_samples"] = d.n_samples;
    dataset["input_dim"] = d.input_dim;
    dataset["class_count"] = d.class_count;
    dataset["cluster_spread"] = d.cluster_spread;
  } else {
    dataset["images"] = d.images;
    dataset["labels"] = d.labels;
  }
  const LossKind loss = c.model.loss.value_or(
      c.model.kind == ModelKind::kLinearRegression ? LossKind::kMse : LossKind::kCrossEntropy);
  const auto& o = c.optimizer;
  return {
      {"strategy", std::string(to_string(c.strategy))},
      {"rounds", c.rounds},
      {"model",
       {{"kind", std::string(to_string(c.model.kind))},
        {"hidden_dim", c.model.hidden_dim},
        {"loss", std::string(to_string(loss))},
        {"bias", c.model.bias}}},
      {"dataset", dataset},
      {"partition",
       {{"n_clients", c.partition.n_clients},
        {"label_alpha", c.partition.label_alpha},
        {"size_alpha", c.partition.size_alpha}}},
      {"optimizer",
       {{"eta", o.eta},
        {"eta_decay", o.eta_decay},
        {"server_eta", o.server_eta},
        {"lambda", o.lambda},
        {"beta", o.beta},
        {"nag_mode", std::string(to_string(o.nag_mode))},
        {"compensation", std::string(to_string(o.compensation))},
        {"E", o.E},
        {"E_max", o.E_max},
        {"fraction_C", o.fraction_C},
        {"batch_size", o.batch_size}}},
      {"network",
       {{"latency", c.network.latency},
        {"bandwidth", c.network.bandwidth},
        {"jitter_frac", c.network.jitter_frac}}},
      {"compute", {{"t_train", c.compute.t_train}, {"per_client", c.compute.per_client}}},
      {"seeds",
       {{"data", c.seeds.data},
        {"partition", c.seeds.partition},
        {"init", c.seeds.init},
        {"sampling", c.seeds.sampling},
        {"jitter", c.seeds.jitter}}},
  };
}

void set_param(ExperimentConfig& c, std::string_view name, double value) {
  auto& o = c.optimizer;
  const std::string field(name);
  if (!std::isfinite(value)) throw validation_error("optimizer." + field + " must be finite");
  if (name == "lambda") {
    if (!(value >= 0.0)) throw validation_error("optimizer.lambda must be >= 0 (got " + format_real(value) + ")");
    o.lambda = value;
  } else if (name == "beta") {
    if (!(value >= 0.0 && value < 1.0)) {
      throw validation_error("optimizer.beta must be in [0, 1) (got " + format_real(value) + ")");
    }
    o.beta = value;
  } else if (name == "eta") {
    if (!(value > 0.0)) throw validation_error("optimizer.eta must be > 0");
    o.eta = value;
  } else if (name == "eta_decay") {
    if (!(value >= 0.0)) throw validation_error("optimizer.eta_decay must be >= 0");
    o.eta_decay = value;
  } else if (name == "server_eta") {
    if (!(value >= 0.0)) throw validation_error("optimizer.server_eta must be >= 0");
    o.server_eta = value;
  } else {
    throw validation_error("unknown sweep parameter '" + field +
                           "' (expected lambda, beta, eta, eta_decay or server_eta)");
  }
}

ModelSpec resolve_model(const ExperimentConfig& c, std::size_t input_dim, std::size_t classes) {
  ModelSpec spec;
  spec.kind = c.model.kind;
  spec.input_dim = input_dim;
  spec.output_dim = classes;
  spec.hidden_dim = c.model.hidden_dim;
  spec.loss = c.model.loss.value_or(c.model.kind == ModelKind::kLinearRegression ? LossKind::kMse
                                                                                  : LossKind::kCrossEntropy);
  spec.bias = c.model.bias;
  validate(spec);
  return spec;
}

SimConfig build_simulation(const ExperimentConfig& c) {
  const Dataset full = c.dataset.source == "idx"
                           ? load_idx(c.dataset.images, c.dataset.labels)
                           : generate_classification(c.seeds.data, c.dataset.n_samples, c.dataset.input_dim,
                                                     c.dataset.class_count, c.dataset.cluster_spread);
  DataSplit split = holdout_split(full, c.dataset.holdout_fraction, c.seeds.data);

  SimConfig sim;
  sim.strategy = c.strategy;
  sim.model = resolve_model(c, split.train.input_dim, split.train.class_count);
  sim.shards = partition_noniid(split.train, c.partition.n_clients, c.partition.label_alpha,
                                c.partition.size_alpha, c.seeds.partition);
  sim.train = std::make_shared<const Dataset>(std::move(split.train));
  sim.test = std::make_shared<const Dataset>(std::move(split.test));
  sim.optimizer = c.optimizer;
  sim.network = c.network;
  sim.t_train = c.compute.per_client.empty() ? std::vector<double>(c.partition.n_clients, c.compute.t_train)
                                             : c.compute.per_client;
  sim.rounds = c.rounds;
  sim.init_seed = c.seeds.init;
  sim.sampling_seed = c.seeds.sampling;
  sim.jitter_seed = c.seeds.jitter;
  sim.config_fingerprint = fingerprint(to_json(c));
  sim.workload_fingerprint = fingerprint(workload_json(c));
  sim.validate();
  return sim;
}

MetricsLog run_experiment(const ExperimentConfig& config, SimTrace* trace) {
  return run(build_simulation(config), trace);
}

void write_run(const MetricsLog& log, const ExperimentConfig& config, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw runtime_error("cannot create output directory '" + out_dir + "': " + ec.message());
  emit_csv(log, (fs::path(out_dir) / kMetricsFile).string());
  json summary = summary_json(log);
  summary["config"] = to_json(config);
  write_text(fs::path(out_dir) / kSummaryFile, summary.dump(2) + "\n");
}

ComparisonReport compare_runs(const std::string& baseline_dir, const std::string& candidate_dir,
                              const std::string& report_path) {
  auto load = [](const std::string& dir) {
    const fs::path csv = fs::path(dir) / kMetricsFile;
    const fs::path summary = fs::path(dir) / kSummaryFile;
    if (!fs::is_regular_file(csv) || !fs::is_regular_file(summary)) {
      throw validation_error("'" + dir + "' does not contain " + kMetricsFile + " and " + kSummaryFile);
    }
    return load_run(csv.string(), summary.string());
  };
  const MetricsLog baseline = load(baseline_dir);
  const MetricsLog candidate = load(candidate_dir);
  const ComparisonReport report = compare(baseline, candidate);
  if (!report_path.empty()) {
    const fs::path out(report_path);
    std::error_code ec;
    if (out.has_parent_path()) fs::create_directories(out.parent_path(), ec);
    write_text(out, to_json(report).dump(2) + "\n");
  }
  return report;
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, std::string_view param,
                            const std::vector<double>& values, const std::string& out_dir) {
  if (values.empty()) throw validation_error("sweep: no values given");
  std::vector<ExperimentConfig> configs;
  for (double v : values) {
    ExperimentConfig c = base;
    set_param(c, param, v);
    configs.push_back(std::move(c));
  }

  std::vector<std::future<MetricsLog>> runs;
  for (const auto& c : configs) runs.push_back(std::async(std::launch::async, [&c] { return run_experiment(c); }));

  std::vector<SweepRow> rows;
  std::string table = csv_field(param) + ",final_train_loss,final_eval_metric,mean_round_time,mean_utilization\r\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const MetricsLog log = runs[i].get();
    write_run(log, configs[i], (fs::path(out_dir) / (std::string(param) + "=" + format_real(values[i]))).string());
    const RunSummary s = log.summary();
    rows.push_back({values[i], s});
    table += format_real(values[i]) + "," + format_real(s.final_train_loss) + "," + format_real(s.final_eval_metric) +
             "," + format_real(s.mean_round_time) + "," + format_real(s.mean_utilization) + "\r\n";
  }
  write_text(fs::path(out_dir) / "sweep.csv", table);
  return rows;
}

}  // namespace flsim
