// Command-line front end: split / train / eval / render / analyze.
//
// Exit codes: 0 success, 2 usage or flag errors, 3 input parse errors,
// 4 numerical divergence during training, 5 I/O failures.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "linkpred/linkpred.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitDiverged = 4;
constexpr int kExitIo = 5;

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("short write on " + path);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string dataset_name(const std::string& explicit_name, const std::string& path) {
  if (!explicit_name.empty()) return explicit_name;
  return std::filesystem::path(path).stem().string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
  std::string input;
  std::string out_dir = ".";
  double fraction = 0.1;
  std::uint64_t seed = 1;
};

int cmd_split(const SplitArgs& args) {
  const linkpred::SparseGraph g = linkpred::parse_edge_list_file(args.input);
  const linkpred::SplitResult split =
      linkpred::split_train_test(g, args.fraction, args.seed);
  ensure_out_dir(args.out_dir);

  const std::string train_path = args.out_dir + "/train.txt";
  const std::string test_path = args.out_dir + "/test.txt";
  {
    std::ofstream out(train_path);
    if (!out) throw IoError("cannot write " + train_path);
    linkpred::write_edge_list(split.train, out);
  }
  {
    std::ofstream out(test_path);
    if (!out) throw IoError("cannot write " + test_path);
    linkpred::write_edge_list(split.test, out);
  }
  nlohmann::json manifest;
  manifest["input"] = args.input;
  manifest["seed"] = args.seed;
  manifest["train_fraction"] = args.fraction;
  manifest["num_nodes"] = g.num_nodes();
  manifest["input_edges"] = g.num_edges();
  manifest["train_edges"] = split.train.num_edges();
  manifest["test_edges"] = split.test.num_edges();
  write_json_file(args.out_dir + "/split.json", manifest);

  std::cerr << "split: " << g.num_nodes() << " nodes, " << g.num_edges()
            << " edges -> " << split.train.num_edges() << " train / "
            << split.test.num_edges() << " test\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string train_path;
  std::string test_path;  // optional; fixes the node space of the pair
  std::string preset_name = "MF+AE";
  std::string out_dir = ".";
  std::string config_path;
  std::string dataset;
  int k_latent = 100;
  bool tied = true;
  bool untied = false;
  linkpred::TrainConfig cfg;
  // Flags that were set explicitly on the command line (override config file).
  CLI::App* app = nullptr;
};

int cmd_train(TrainArgs& args) {
  const auto preset = linkpred::parse_preset(args.preset_name);
  if (!preset) throw UsageError("unknown preset: " + args.preset_name);
  if (!linkpred::is_trainable(*preset))
    throw UsageError("preset " + args.preset_name + " has no training phase");

  auto seen = [&](const std::string& flag) {
    return args.app != nullptr && args.app->count(flag) > 0;
  };

  // Precedence, lowest to highest: defaults, preset, config file, flags.
  linkpred::TrainConfig cfg;
  linkpred::apply_preset(*preset, cfg);
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw IoError("cannot read config " + args.config_path);
    nlohmann::json j;
    in >> j;
    cfg = linkpred::train_config_from_json(j, cfg);
    if (j.contains("k_latent") && !seen("--k-latent"))
      args.k_latent = j.at("k_latent").get<int>();
    if (j.contains("tied") && !seen("--tied") && !seen("--untied"))
      args.tied = j.at("tied").get<bool>();
  }
  if (seen("--lr")) cfg.learning_rate = args.cfg.learning_rate;
  if (seen("--epochs")) cfg.max_epochs = args.cfg.max_epochs;
  if (seen("--keep-hidden")) cfg.keep_prob_hidden = args.cfg.keep_prob_hidden;
  if (seen("--keep-input")) cfg.keep_prob_input = args.cfg.keep_prob_input;
  if (seen("--neg-per-node")) cfg.neg_samples_per_node = args.cfg.neg_samples_per_node;
  if (seen("--eta")) cfg.eta = args.cfg.eta;
  if (seen("--weight-decay")) cfg.weight_decay = args.cfg.weight_decay;
  if (seen("--seed")) cfg.seed = args.cfg.seed;
  if (seen("--convergence-tol")) cfg.convergence_tol = args.cfg.convergence_tol;
  if (seen("--rho")) cfg.rho = args.cfg.rho;
  const bool tied = args.untied ? false : args.tied;

  linkpred::SparseGraph train_graph;
  if (!args.test_path.empty()) {
    auto [tr, te] = linkpred::load_graph_pair(args.train_path, args.test_path);
    train_graph = std::move(tr);
  } else {
    train_graph = linkpred::parse_edge_list_file(args.train_path);
  }

  linkpred::ModelParams init = linkpred::ModelParams::init(
      linkpred::variant_of(*preset), args.k_latent, train_graph.num_nodes(),
      tied, cfg.rho, cfg.seed);
  auto [params, report] = linkpred::train(std::move(init), train_graph, cfg);

  ensure_out_dir(args.out_dir);
  linkpred::save_checkpoint(params, args.out_dir + "/model.ckpt");

  nlohmann::json j;
  j["preset"] = args.preset_name;
  j["variant"] = linkpred::to_string(params.variant);
  j["dataset"] = dataset_name(args.dataset, args.train_path);
  j["k_latent"] = args.k_latent;
  j["tied"] = tied;
  j["num_nodes"] = train_graph.num_nodes();
  j["train_edges"] = train_graph.num_edges();
  j["config"] = linkpred::to_json(cfg);
  j["report"] = linkpred::to_json(report);
  write_json_file(args.out_dir + "/train_report.json", j);

  std::cerr << "train: " << args.preset_name << " on "
            << train_graph.num_nodes() << " nodes, epochs=" << report.epochs_run
            << (report.converged ? " (converged)" : "") << ", final loss "
            << (report.epoch_losses.empty() ? 0.0 : report.epoch_losses.back())
            << ", wall " << report.wall_time_seconds << "s\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string train_path;
  std::string test_path;
  std::string checkpoint;
  std::string preset_name;
  std::string out_dir = ".";
  std::string csv_path;
  std::string dataset;
  std::string model_name;
  int k = 10;
  double restart = 0.5;
  std::uint64_t seed = 0;
  bool per_node = false;
};

int cmd_eval(const EvalArgs& args) {
  auto [train_graph, test_graph] =
      linkpred::load_graph_pair(args.train_path, args.test_path);
  linkpred::SplitResult split;
  split.train = std::move(train_graph);
  split.test = std::move(test_graph);
  split.seed = args.seed;

  linkpred::NodeScorer scorer;
  std::string model_name = args.model_name;
  if (!args.checkpoint.empty()) {
    auto params = std::make_shared<linkpred::ModelParams>(
        linkpred::load_checkpoint(args.checkpoint));
    if (params->num_nodes() != split.train.num_nodes())
      throw UsageError("checkpoint is for " + std::to_string(params->num_nodes()) +
                       " nodes but the split has " +
                       std::to_string(split.train.num_nodes()));
    const linkpred::SparseGraph& g = split.train;
    scorer = [params, &g](linkpred::NodeId i) {
      return linkpred::score_node(*params, g, i);
    };
    if (model_name.empty()) model_name = linkpred::preset_name_of(*params);
  } else if (!args.preset_name.empty()) {
    const auto preset = linkpred::parse_preset(args.preset_name);
    if (!preset) throw UsageError("unknown preset: " + args.preset_name);
    if (linkpred::is_trainable(*preset))
      throw UsageError("preset " + args.preset_name +
                       " needs a checkpoint; pass --checkpoint");
    const linkpred::SparseGraph& g = split.train;
    if (*preset == linkpred::Preset::AdamicAdar) {
      scorer = [&g](linkpred::NodeId i) {
        return linkpred::adamic_adar_scores(g, i).scores;
      };
    } else {
      const double restart = args.restart;
      scorer = [&g, restart](linkpred::NodeId i) {
        return linkpred::rwr_scores(g, i, restart).scores;
      };
    }
    if (model_name.empty()) model_name = args.preset_name;
  } else {
    throw UsageError("eval needs --checkpoint or a baseline --preset");
  }

  const linkpred::EvalReport report =
      linkpred::evaluate(scorer, split, args.k, args.per_node);

  ensure_out_dir(args.out_dir);
  nlohmann::json j = linkpred::to_json(report);
  j["dataset"] = dataset_name(args.dataset, args.train_path);
  j["model"] = model_name;
  j["seed"] = args.seed;
  write_json_file(args.out_dir + "/eval_report.json", j);
  if (!args.csv_path.empty()) {
    linkpred::append_csv_row(
        args.csv_path, linkpred::kMetricsCsvHeader,
        linkpred::metrics_csv_row(dataset_name(args.dataset, args.train_path),
                                  model_name, report, args.seed));
  }
  std::cerr << "eval: " << model_name << " prec@" << args.k << "="
            << report.prec_at_k << " auc=" << report.auc << " over "
            << report.nodes_evaluated << " nodes (" << report.nodes_skipped
            << " skipped)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// render

struct RenderArgs {
  std::string checkpoint;
  std::string train_path;
  std::string test_path;  // optional, only to rebuild the shared node space
  std::string out_path = "adjacency.pgm";
  double threshold = 0.5;
  int stride = 5;
};

int cmd_render(const RenderArgs& args) {
  const linkpred::ModelParams params = linkpred::load_checkpoint(args.checkpoint);
  // A node that only carries test edges still occupies a model row, so the
  // node space must be rebuilt exactly as it was at training time.
  const linkpred::SparseGraph g =
      args.test_path.empty()
          ? linkpred::parse_edge_list_file(args.train_path)
          : linkpred::load_graph_pair(args.train_path, args.test_path).first;
  if (params.num_nodes() != g.num_nodes())
    throw UsageError("checkpoint is for " + std::to_string(params.num_nodes()) +
                     " nodes but the graph has " + std::to_string(g.num_nodes()));
  const auto scorer = [&](linkpred::NodeId i) {
    return linkpred::score_node(params, g, i);
  };
  const std::vector<std::uint8_t> bytes = linkpred::render_adjacency(
      scorer, g.num_nodes(), args.threshold, args.stride);
  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + args.out_path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write on " + args.out_path);
  std::cerr << "render: wrote " << args.out_path << " (" << bytes.size()
            << " bytes)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string case_name = "mf";
  std::string out_path = "gaps.csv";
  int k = 3;
  int n = 4;
  double density = 0.5;
  double weight_range = 0.8;
  std::vector<double> scales = {1.0, 0.5, 0.25, 0.125};
  std::uint64_t seed = 1;
};

int cmd_analyze(const AnalyzeArgs& args) {
  if (args.k < 1 || args.n < 1) throw UsageError("analyze: k and n must be >= 1");
  linkpred::RngState rng(args.seed);
  const std::size_t n = static_cast<std::size_t>(args.n);

  // Random binary matrix; the input-dropout case is kept symmetric and
  // hollow like a graph adjacency.
  linkpred::DenseMatrix a(n, n, 0.0);
  std::vector<linkpred::GapRow> rows;
  if (args.case_name == "mf") {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        a(i, j) = rng.next_double() < args.density ? 1.0 : 0.0;
    const std::size_t k = static_cast<std::size_t>(args.k);
    linkpred::DenseMatrix w1(k, n), w2(n, k);
    for (double& v : w1.data) v = rng.next_uniform(-args.weight_range, args.weight_range);
    for (double& v : w2.data) v = rng.next_uniform(-args.weight_range, args.weight_range);
    rows = linkpred::mf_dropout_gap_report(w1, w2, a, args.scales);
  } else if (args.case_name == "ae-input") {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.next_double() < args.density) a(i, j) = a(j, i) = 1.0;
    linkpred::DenseMatrix w(n, n);
    for (double& v : w.data) v = rng.next_uniform(-args.weight_range, args.weight_range);
    rows = linkpred::ae_input_dropout_gap_report(w, a, args.scales);
  } else {
    throw UsageError("analyze: --case must be 'mf' or 'ae-input'");
  }

  std::string csv = "scale,exact,surrogate,gap\n";
  for (const auto& r : rows) {
    csv += linkpred::format_double(r.scale) + "," +
           linkpred::format_double(r.exact) + "," +
           linkpred::format_double(r.surrogate) + "," +
           linkpred::format_double(r.gap) + "\n";
  }
  write_text_file(args.out_path, csv);
  std::cerr << "analyze: wrote " << args.out_path << " (" << rows.size()
            << " scales)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link prediction with dropout-trained factor and autoencoder models"};
  app.require_subcommand(1);

  SplitArgs split_args;
  CLI::App* split = app.add_subcommand("split", "Split an edge list into train/test");
  split->add_option("--input", split_args.input, "Input edge list")->required();
  split->add_option("--fraction", split_args.fraction, "Train fraction (default 0.1)");
  split->add_option("--seed", split_args.seed, "Split seed");
  split->add_option("--out", split_args.out_dir, "Output directory")->required();

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train a model preset");
  train->add_option("--train", train_args.train_path, "Train edge list")->required();
  train->add_option("--test", train_args.test_path,
                    "Test edge list (fixes the shared node space)");
  train->add_option("--preset", train_args.preset_name,
                    "MF2, AE2, MFd, AEd or MF+AE (default MF+AE)");
  train->add_option("--k-latent", train_args.k_latent, "Hidden width (default 100)");
  train->add_option("--epochs", train_args.cfg.max_epochs, "Epoch cap (default 500)");
  train->add_option("--lr", train_args.cfg.learning_rate, "Learning rate (default 0.05)");
  train->add_option("--keep-hidden", train_args.cfg.keep_prob_hidden,
                    "Hidden keep probability override");
  train->add_option("--keep-input", train_args.cfg.keep_prob_input,
                    "Input keep probability override");
  train->add_option("--neg-per-node", train_args.cfg.neg_samples_per_node,
                    "Negative samples per node (0 = 5 * degree)");
  double eta_value = 0.0;
  train->add_option("--eta", eta_value, "Fixed negative weight (default: auto)");
  train->add_option("--weight-decay", train_args.cfg.weight_decay,
                    "Weight decay override");
  train->add_option("--rho", train_args.cfg.rho, "Joint-loss weight (default 1)");
  train->add_option("--seed", train_args.cfg.seed, "Init/train seed");
  train->add_option("--convergence-tol", train_args.cfg.convergence_tol,
                    "Relative epoch-loss change for convergence");
  train->add_flag("--tied", train_args.tied, "Share encoder/decoder weights (default)");
  train->add_flag("--untied", train_args.untied, "Separate encoder/decoder weights");
  train->add_option("--config", train_args.config_path, "JSON config file");
  train->add_option("--dataset", train_args.dataset, "Dataset name for reports");
  train->add_option("--out", train_args.out_dir, "Output directory")->required();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint or baseline");
  eval->add_option("--train", eval_args.train_path, "Train edge list")->required();
  eval->add_option("--test", eval_args.test_path, "Test edge list")->required();
  eval->add_option("--checkpoint", eval_args.checkpoint, "Model checkpoint");
  eval->add_option("--preset", eval_args.preset_name, "Baseline preset (AA or RW)");
  eval->add_option("--k", eval_args.k, "Ranking cutoff (default 10)");
  eval->add_option("--restart", eval_args.restart, "RW restart probability");
  eval->add_option("--seed", eval_args.seed, "Pipeline seed echoed into reports");
  eval->add_option("--dataset", eval_args.dataset, "Dataset name for reports");
  eval->add_option("--model-name", eval_args.model_name, "Model name for reports");
  eval->add_option("--csv", eval_args.csv_path, "Append a row to this CSV file");
  eval->add_flag("--per-node", eval_args.per_node, "Keep per-node metrics");
  eval->add_option("--out", eval_args.out_dir, "Output directory")->required();

  RenderArgs render_args;
  CLI::App* render = app.add_subcommand("render", "Render thresholded scores as PGM");
  render->add_option("--checkpoint", render_args.checkpoint, "Model checkpoint")->required();
  render->add_option("--train", render_args.train_path, "Train edge list")->required();
  render->add_option("--test", render_args.test_path,
                     "Test edge list (rebuilds the training-time node space)");
  render->add_option("--threshold", render_args.threshold, "Score threshold (default 0.5)");
  render->add_option("--stride", render_args.stride, "Row/column stride (default 5)");
  render->add_option("--out", render_args.out_path, "Output PGM path")->required();

  AnalyzeArgs analyze_args;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Exact vs surrogate dropout objective on a random instance");
  analyze->add_option("--case", analyze_args.case_name, "'mf' or 'ae-input'");
  analyze->add_option("--k", analyze_args.k, "Hidden width (mf case, default 3)");
  analyze->add_option("--n", analyze_args.n, "Node count (default 4)");
  analyze->add_option("--density", analyze_args.density, "Link density (default 0.5)");
  analyze->add_option("--weight-range", analyze_args.weight_range,
                      "Weights drawn uniform in +-range (default 0.8)");
  analyze->add_option("--scales", analyze_args.scales, "Weight scales to probe")
      ->delimiter(',');
  analyze->add_option("--seed", analyze_args.seed, "Instance seed");
  analyze->add_option("--out", analyze_args.out_path, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (split->parsed()) return cmd_split(split_args);
    if (train->parsed()) {
      train_args.app = train;
      if (train->count("--eta") > 0) train_args.cfg.eta = eta_value;
      return cmd_train(train_args);
    }
    if (eval->parsed()) return cmd_eval(eval_args);
    if (render->parsed()) return cmd_render(render_args);
    if (analyze->parsed()) return cmd_analyze(analyze_args);
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const linkpred::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const linkpred::DivergenceError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  }
}
