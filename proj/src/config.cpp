// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "leftnet/config.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "leftnet/errors.hpp"

namespace leftnet {
namespace {

using nlohmann::json;

// Reads keys out of one JSON object and rejects whatever is left over.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void read(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
      out = v->get<int>();
    }
  }
  void read(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  std::optional<std::string> read_string(const char* key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key " + where(key.c_str()));
    }
  }

  std::string where(const char* key = nullptr) const {
    std::string s = path_.empty() ? "config" : path_;
    return key ? (path_.empty() ? std::string(key) : path_ + "." + key) : s;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

json model_json(const ModelConfig& c) {
  return json{{"num_layers", c.num_layers},
              {"hidden_dim", c.hidden_dim},
              {"vector_channels", c.vector_channels},
              {"use_tensor_channels", c.use_tensor_channels},
              {"mode", c.mode == ScalarMode::kSE3 ? "SE3" : "E3"},
              {"cutoff", c.cutoff},
              {"num_rbf", c.num_rbf},
              {"rbf_gamma", c.rbf_gamma},
              {"readout", c.readout == Readout::kMean ? "mean" : "sum"},
              {"use_lse", c.use_lse},
              {"use_fte", c.use_fte},
              {"energy_scale", c.energy_scale},
              {"energy_shift", c.energy_shift}};
}

ModelConfig read_model(const json& j, const std::string& path) {
  Section s(j, path);
  ModelConfig c;
  s.read("num_layers", c.num_layers);
  s.read("hidden_dim", c.hidden_dim);
  s.read("vector_channels", c.vector_channels);
  s.read("use_tensor_channels", c.use_tensor_channels);
  if (auto mode = s.read_string("mode")) {
    if (*mode == "SE3") {
      c.mode = ScalarMode::kSE3;
    } else if (*mode == "E3") {
      c.mode = ScalarMode::kE3;
    } else {
      throw ConfigError(s.where("mode") + " must be \"SE3\" or \"E3\"");
    }
  }
  s.read("cutoff", c.cutoff);
  s.read("num_rbf", c.num_rbf);
  s.read("rbf_gamma", c.rbf_gamma);
  if (auto readout = s.read_string("readout")) {
    if (*readout == "mean") {
      c.readout = Readout::kMean;
    } else if (*readout == "sum") {
      c.readout = Readout::kSum;
    } else {
      throw ConfigError(s.where("readout") + " must be \"mean\" or \"sum\"");
    }
  }
  s.read("use_lse", c.use_lse);
  s.read("use_fte", c.use_fte);
  s.read("energy_scale", c.energy_scale);
  s.read("energy_shift", c.energy_shift);
  s.finish();
  c.validate();
  return c;
}

json run_json(const RunConfig& c) {
  return json{{"model", model_json(c.model)},
              {"loss", {{"wofe", c.loss.wofe}, {"energy_weight", c.loss.energy_weight}}},
              {"train",
               {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"lr", c.train.schedule.initial},
                {"decay_epochs", c.train.schedule.decay_epochs},
                {"decay_factor", c.train.schedule.factor},
                {"normalize", c.train.normalize},
                {"val_fraction", c.val_fraction}}},
              {"seed", c.seed}};
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Little-endian u64 encoding, independent of host byte order.
void put(std::string& out, std::uint64_t value) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((value >> (8 * b)) & 0xff));
}

std::uint64_t take(std::string_view bytes, std::size_t& pos) {
  if (bytes.size() - pos < 8) throw CheckpointError("checkpoint truncated");
  std::uint64_t value = 0;
  for (int b = 0; b < 8; ++b) {
    value |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(b)])) << (8 * b);
  }
  pos += 8;
  return value;
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  const json j = parse_json(text, "run config");
  Section root(j, "");
  RunConfig c;
  if (const json* m = root.find("model")) c.model = read_model(*m, "model");
  if (const json* l = root.find("loss")) {
    Section s(*l, "loss");
    s.read("wofe", c.loss.wofe);
    s.read("energy_weight", c.loss.energy_weight);
    s.finish();
    if (c.loss.wofe < 0.0 || c.loss.energy_weight < 0.0 || c.loss.wofe + c.loss.energy_weight <= 0.0) {
      throw ConfigError("loss weights must be non-negative and not both zero");
    }
  }
  if (const json* t = root.find("train")) {
    Section s(*t, "train");
    s.read("epochs", c.train.epochs);
    s.read("batch_size", c.train.batch_size);
    s.read("lr", c.train.schedule.initial);
    s.read("decay_epochs", c.train.schedule.decay_epochs);
    s.read("decay_factor", c.train.schedule.factor);
    s.read("normalize", c.train.normalize);
    s.read("val_fraction", c.val_fraction);
    s.finish();
  }
  root.read("seed", c.seed);
  root.finish();
  if (c.train.epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (c.train.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(c.train.schedule.initial > 0.0)) throw ConfigError("train.lr must be positive");
  if (!(c.train.schedule.factor > 0.0)) throw ConfigError("train.decay_factor must be positive");
  if (!(c.val_fraction >= 0.0 && c.val_fraction < 1.0)) throw ConfigError("train.val_fraction must be in [0, 1)");
  c.train.seed = c.seed;
  return c;
}

RunConfig read_run_config_file(const std::string& path) { return parse_run_config(read_file(path)); }

std::string to_json(const RunConfig& cfg) { return run_json(cfg).dump(); }
std::string to_json(const ModelConfig& cfg) { return model_json(cfg).dump(); }

ModelConfig parse_model_config(std::string_view text) {
  return read_model(parse_json(text, "model config"), "model");
}

// ---------------------------------------------------------------------------
// Checkpoint
// ---------------------------------------------------------------------------

std::string checkpoint_bytes(const ModelParams& params, const RunConfig* run) {
  if (params.values.size() != params.layout.total) {
    throw CheckpointError("parameter count does not match the layout");
  }
  json block{{"model", model_json(params.config)}};
  if (run) block["run"] = run_json(*run);
  const std::string text = block.dump();
  std::string out(kCheckpointMagic);
  put(out, text.size());
  out += text;
  for (double v : params.values) put(out, std::bit_cast<std::uint64_t>(v));
  put(out, params.values.size());
  return out;
}

ModelParams parse_checkpoint(std::string_view bytes) {
  constexpr std::size_t kPrefix = kCheckpointMagic.size() - 1;  // "LEFTNET"
  if (bytes.size() < kCheckpointMagic.size() || bytes.substr(0, kPrefix) != kCheckpointMagic.substr(0, kPrefix)) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw CheckpointError("unsupported checkpoint version '" + std::string(bytes.substr(kPrefix, 1)) +
                          "' (expected 1)");
  }
  std::size_t pos = kCheckpointMagic.size();
  const auto length = take(bytes, pos);
  if (bytes.size() - pos < length) throw CheckpointError("checkpoint truncated in config block");
  ModelParams params;
  try {
    const json block = json::parse(bytes.substr(pos, length));
    if (!block.is_object() || !block.contains("model")) throw ConfigError("config block has no model");
    params.config = read_model(block["model"], "model");
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed config block: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("malformed config block: ") + e.what());
  }
  pos += length;
  params.layout = make_layout(params.config);
  const std::size_t n = params.layout.total;
  if ((bytes.size() - pos) != 8 * n + 8) {
    throw CheckpointError("checkpoint holds " + std::to_string(bytes.size() - pos) + " payload bytes, layout needs " +
                          std::to_string(8 * n + 8));
  }
  params.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) params.values[i] = std::bit_cast<double>(take(bytes, pos));
  if (take(bytes, pos) != n) throw CheckpointError("checkpoint length checksum mismatch");
  return params;
}

void save_checkpoint(const std::string& path, const ModelParams& params, const RunConfig* run) {
  const std::string bytes = checkpoint_bytes(params, run);
  std::ofstream out(path, std::ios::binary);
  if (!out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw CheckpointError("cannot write " + path);
  }
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

// ---------------------------------------------------------------------------
// Metric log
// ---------------------------------------------------------------------------

void write_metrics_header(std::ostream& out, const std::string& config_json) {
  out << "# config=" << config_json << '\n' << kMetricsHeader << '\n';
}

void write_metrics_row(std::ostream& out, const EpochMetrics& m) {
  std::ostringstream row;
  row << std::setprecision(10) << m.epoch << ',' << m.lr << ',' << m.train_energy_mae << ',' << m.train_force_mae
      << ',' << m.val_energy_mae << ',' << m.val_force_mae << '\n';
  out << row.str() << std::flush;
}

}  // namespace leftnet
