#pragma once

// Serialization: binary model checkpoints, JSON views of configs and
// reports, and deterministic CSV formatting.
//
// Checkpoint format "LPCK", version 1 (little-endian):
//   byte 0..3   magic "LPCK"
//   byte 4      format version (1)
//   byte 5      model variant (0 = mf-linear, 1 = autoencoder, 2 = joint)
//   byte 6      tied flag (0/1)
//   byte 7      reserved (0)
//   u64 num_nodes, u64 latent_dim
//   f64 rho, f64 keep_hidden, f64 keep_input
//   f64[N*K] encoder (row-major, row m = latent vector of input node m)
//   f64[N*K] decoder (row-major, row j = latent vector of output node j)
//   f64[K] ae_hidden_bias, f64[N] ae_output_bias,
//   f64[K] mf_hidden_bias, f64[N] mf_output_bias
// Round-trips are bit-exact.

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkpred/evaluation.hpp"
#include "linkpred/model.hpp"
#include "linkpred/training.hpp"

namespace linkpred {

inline constexpr char kCheckpointMagic[4] = {'L', 'P', 'C', 'K'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

inline void write_doubles(std::ostream& out, const std::vector<double>& xs) {
  out.write(reinterpret_cast<const char*>(xs.data()),
            static_cast<std::streamsize>(xs.size() * sizeof(double)));
}

inline void read_doubles(std::istream& in, std::vector<double>& xs,
                         std::size_t count) {
  xs.resize(count);
  in.read(reinterpret_cast<char*>(xs.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
}

}  // namespace detail

inline void save_checkpoint(const ModelParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 4);
  const std::uint8_t version = kCheckpointVersion;
  const std::uint8_t variant = static_cast<std::uint8_t>(p.variant);
  const std::uint8_t tied = p.tied ? 1 : 0;
  const std::uint8_t reserved = 0;
  detail::write_raw(out, version);
  detail::write_raw(out, variant);
  detail::write_raw(out, tied);
  detail::write_raw(out, reserved);
  const std::uint64_t n = p.enc.rows, k = p.enc.cols;
  detail::write_raw(out, n);
  detail::write_raw(out, k);
  detail::write_raw(out, p.rho);
  detail::write_raw(out, p.keep_hidden);
  detail::write_raw(out, p.keep_input);
  detail::write_doubles(out, p.enc.data);
  detail::write_doubles(out, p.dec.data);
  detail::write_doubles(out, p.ae_hidden_bias);
  detail::write_doubles(out, p.ae_output_bias);
  detail::write_doubles(out, p.mf_hidden_bias);
  detail::write_doubles(out, p.mf_output_bias);
  if (!out) throw std::runtime_error("short write on checkpoint: " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  std::uint8_t version = 0, variant = 0, tied = 0, reserved = 0;
  detail::read_raw(in, version);
  detail::read_raw(in, variant);
  detail::read_raw(in, tied);
  detail::read_raw(in, reserved);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version) + ": " + path);
  if (variant > 2)
    throw std::runtime_error("unknown model variant in checkpoint: " + path);
  std::uint64_t n = 0, k = 0;
  detail::read_raw(in, n);
  detail::read_raw(in, k);
  if (n == 0 || k == 0 || n > (std::uint64_t{1} << 32) || k > (std::uint64_t{1} << 24))
    throw std::runtime_error("implausible checkpoint shape: " + path);

  ModelParams p;
  p.variant = static_cast<ModelVariant>(variant);
  p.tied = tied != 0;
  p.latent_dim = static_cast<int>(k);
  detail::read_raw(in, p.rho);
  detail::read_raw(in, p.keep_hidden);
  detail::read_raw(in, p.keep_input);
  p.enc = DenseMatrix(n, k);
  p.dec = DenseMatrix(n, k);
  detail::read_doubles(in, p.enc.data, n * k);
  detail::read_doubles(in, p.dec.data, n * k);
  detail::read_doubles(in, p.ae_hidden_bias, k);
  detail::read_doubles(in, p.ae_output_bias, n);
  detail::read_doubles(in, p.mf_hidden_bias, k);
  detail::read_doubles(in, p.mf_output_bias, n);
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return p;
}

/// Shortest round-trip decimal form of a double; deterministic.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

inline nlohmann::json to_json(const TrainConfig& cfg) {
  nlohmann::json j;
  j["learning_rate"] = cfg.learning_rate;
  j["max_epochs"] = cfg.max_epochs;
  j["keep_prob_hidden"] = cfg.keep_prob_hidden;
  j["keep_prob_input"] = cfg.keep_prob_input;
  j["neg_samples_per_node"] = cfg.neg_samples_per_node;
  if (cfg.eta)
    j["eta"] = *cfg.eta;
  else
    j["eta"] = "auto";
  j["weight_decay"] = cfg.weight_decay;
  j["seed"] = cfg.seed;
  j["convergence_tol"] = cfg.convergence_tol;
  j["rho"] = cfg.rho;
  return j;
}

/// Overlays the fields present in `j` onto `cfg`; absent fields keep the
/// values `cfg` came in with, so callers can layer file config over presets.
inline TrainConfig train_config_from_json(const nlohmann::json& j,
                                          TrainConfig cfg = {}) {
  if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("max_epochs")) cfg.max_epochs = j.at("max_epochs").get<int>();
  if (j.contains("keep_prob_hidden"))
    cfg.keep_prob_hidden = j.at("keep_prob_hidden").get<double>();
  if (j.contains("keep_prob_input"))
    cfg.keep_prob_input = j.at("keep_prob_input").get<double>();
  if (j.contains("neg_samples_per_node"))
    cfg.neg_samples_per_node = j.at("neg_samples_per_node").get<int>();
  if (j.contains("eta")) {
    if (j.at("eta").is_string())
      cfg.eta.reset();  // "auto"
    else
      cfg.eta = j.at("eta").get<double>();
  }
  if (j.contains("weight_decay")) cfg.weight_decay = j.at("weight_decay").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("convergence_tol"))
    cfg.convergence_tol = j.at("convergence_tol").get<double>();
  if (j.contains("rho")) cfg.rho = j.at("rho").get<double>();
  return cfg;
}

/// JSON view of a training run. Deliberately excludes wall time so reruns
/// with identical seeds serialize to identical bytes; timing goes to logs.
inline nlohmann::json to_json(const TrainReport& report) {
  nlohmann::json j;
  j["epochs_run"] = report.epochs_run;
  j["converged"] = report.converged;
  j["eta_used"] = report.eta_used;
  j["epoch_losses"] = report.epoch_losses;
  j["final_loss"] =
      report.epoch_losses.empty() ? 0.0 : report.epoch_losses.back();
  return j;
}

inline nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j;
  j["k"] = report.k;
  j["prec_at_k"] = report.prec_at_k;
  j["auc"] = report.auc;
  j["nodes_evaluated"] = report.nodes_evaluated;
  j["nodes_skipped"] = report.nodes_skipped;
  if (!report.per_node.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.per_node) {
      nlohmann::json row;
      row["node"] = r.node;
      row["prec_at_k"] = r.prec_at_k;
      row["auc"] = r.auc;
      row["candidates"] = r.candidates;
      row["positives"] = r.positives;
      rows.push_back(row);
    }
    j["per_node"] = rows;
  }
  return j;
}

inline constexpr const char* kMetricsCsvHeader =
    "dataset,model,prec_at_10,auc,nodes_evaluated,seed";

inline std::string metrics_csv_row(const std::string& dataset,
                                   const std::string& model,
                                   const EvalReport& report,
                                   std::uint64_t seed) {
  return dataset + "," + model + "," + format_double(report.prec_at_k) + "," +
         format_double(report.auc) + "," + std::to_string(report.nodes_evaluated) +
         "," + std::to_string(seed);
}

/// Appends a row to a CSV file, writing the header first when the file does
/// not exist yet or is empty.
inline void append_csv_row(const std::string& path, const std::string& header,
                           const std::string& row) {
  bool need_header = true;
  {
    std::ifstream probe(path);
    if (probe && probe.peek() != std::ifstream::traits_type::eof())
      need_header = false;
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to csv: " + path);
  if (need_header) out << header << '\n';
  out << row << '\n';
  if (!out) throw std::runtime_error("short write on csv: " + path);
}

}  // namespace linkpred
