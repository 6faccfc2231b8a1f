// Black-box tests of the command-line binary: every subcommand, the exit
// code contract, and byte-level determinism of the whole pipeline.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "linkpred/graph.hpp"
#include "support/synthetic.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string out_path =
      ::testing::TempDir() + "cli_stdout_" + std::to_string(counter) + ".txt";
  const std::string err_path =
      ::testing::TempDir() + "cli_stderr_" + std::to_string(counter) + ".txt";
  ++counter;
  const std::string cmd = std::string(LINKPRED_CLI_PATH) + " " + args + " >" +
                          out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  return result;
}

/// Fresh working directory under the test temp root.
std::string make_dir(const std::string& name) {
  const std::string dir = ::testing::TempDir() + name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_graph_file(const std::string& dir, std::uint64_t seed,
                             int n = 40, double density = 0.2) {
  const auto g = synthetic::random_graph(n, density, seed);
  const std::string path = dir + "/graph.txt";
  std::ofstream out(path);
  linkpred::write_edge_list(g, out);
  return path;
}

}  // namespace

TEST(Cli, SplitWritesFilesAndManifest) {
  const std::string dir = make_dir("cli_split");
  const std::string input = write_graph_file(dir, 1);
  const auto r = run_cli("split --input " + input + " --fraction 0.25 --seed 9 --out " + dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;

  const auto train = linkpred::parse_edge_list_file(dir + "/train.txt");
  const auto test = linkpred::parse_edge_list_file(dir + "/test.txt");
  const auto full = linkpred::parse_edge_list_file(input);
  EXPECT_EQ(train.num_edges() + test.num_edges(), full.num_edges());

  const nlohmann::json manifest = nlohmann::json::parse(read_file(dir + "/split.json"));
  EXPECT_EQ(manifest.at("seed"), 9);
  EXPECT_EQ(manifest.at("train_fraction").get<double>(), 0.25);
  EXPECT_EQ(manifest.at("train_edges").get<std::size_t>(), train.num_edges());
  EXPECT_EQ(manifest.at("test_edges").get<std::size_t>(), test.num_edges());
}

TEST(Cli, TrainProducesCheckpointAndReport) {
  const std::string dir = make_dir("cli_train");
  const std::string input = write_graph_file(dir, 2);
  const auto r = run_cli("train --train " + input +
                         " --preset MF2 --k-latent 4 --epochs 3 --seed 5 --out " + dir);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir + "/model.ckpt"));
  const nlohmann::json report = nlohmann::json::parse(read_file(dir + "/train_report.json"));
  EXPECT_EQ(report.at("preset"), "MF2");
  EXPECT_EQ(report.at("variant"), "mf-linear");
  EXPECT_EQ(report.at("k_latent"), 4);
  EXPECT_LE(report.at("report").at("epochs_run").get<int>(), 3);
  EXPECT_FALSE(report.at("report").contains("wall_time_seconds"));
  // The preset pins its regularization family.
  EXPECT_EQ(report.at("config").at("keep_prob_hidden").get<double>(), 1.0);
  EXPECT_EQ(report.at("config").at("weight_decay").get<double>(), 1e-5);
}

TEST(Cli, TrainEvalRenderPipeline) {
  const std::string dir = make_dir("cli_pipe");
  const std::string input = write_graph_file(dir, 3, 60, 0.25);
  ASSERT_EQ(run_cli("split --input " + input + " --fraction 0.3 --seed 2 --out " + dir)
                .exit_code, 0);
  ASSERT_EQ(run_cli("train --train " + dir + "/train.txt --test " + dir +
                    "/test.txt --preset MF+AE --k-latent 8 --epochs 5 --seed 3 --out " + dir)
                .exit_code, 0);

  const auto ev = run_cli("eval --train " + dir + "/train.txt --test " + dir +
                          "/test.txt --checkpoint " + dir + "/model.ckpt --seed 3" +
                          " --csv " + dir + "/metrics.csv --dataset toy --out " + dir);
  ASSERT_EQ(ev.exit_code, 0) << ev.err;
  const nlohmann::json report = nlohmann::json::parse(read_file(dir + "/eval_report.json"));
  EXPECT_EQ(report.at("dataset"), "toy");
  EXPECT_EQ(report.at("model"), "MF+AE");
  EXPECT_GT(report.at("nodes_evaluated").get<int>(), 0);
  EXPECT_GE(report.at("auc").get<double>(), 0.0);
  EXPECT_LE(report.at("auc").get<double>(), 1.0);

  // CSV: header + one row; a second eval appends without a second header.
  ASSERT_EQ(run_cli("eval --train " + dir + "/train.txt --test " + dir +
                    "/test.txt --preset AA --csv " + dir + "/metrics.csv --out " + dir)
                .exit_code, 0);
  std::istringstream csv(read_file(dir + "/metrics.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "dataset,model,prec_at_10,auc,nodes_evaluated,seed");
  EXPECT_EQ(lines[1].substr(0, 10), "toy,MF+AE,");
  EXPECT_EQ(lines[2].substr(0, 3) , "tra");  // dataset defaults to file stem "train"

  const auto render = run_cli("render --checkpoint " + dir + "/model.ckpt --train " +
                              dir + "/train.txt --test " + dir + "/test.txt" +
                              " --stride 2 --out " + dir + "/adj.pgm");
  ASSERT_EQ(render.exit_code, 0) << render.err;
  const std::string pgm = read_file(dir + "/adj.pgm");
  EXPECT_EQ(pgm.substr(0, 3), "P5\n");
  EXPECT_NE(pgm.find("30 30"), std::string::npos);  // ceil(60/2)
}

TEST(Cli, EvalRunsBaselinePresets) {
  const std::string dir = make_dir("cli_baseline");
  const std::string input = write_graph_file(dir, 4, 50, 0.2);
  ASSERT_EQ(run_cli("split --input " + input + " --fraction 0.4 --seed 6 --out " + dir)
                .exit_code, 0);
  for (const std::string preset : {"AA", "RW"}) {
    const auto r = run_cli("eval --train " + dir + "/train.txt --test " + dir +
                           "/test.txt --preset " + preset + " --out " + dir);
    ASSERT_EQ(r.exit_code, 0) << preset << ": " << r.err;
    const nlohmann::json report =
        nlohmann::json::parse(read_file(dir + "/eval_report.json"));
    EXPECT_EQ(report.at("model"), preset);
    EXPECT_GT(report.at("nodes_evaluated").get<int>(), 0);
  }
}

TEST(Cli, AnalyzeWritesGapCsv) {
  const std::string dir = make_dir("cli_analyze");
  for (const std::string which : {"mf", "ae-input"}) {
    const std::string out = dir + "/gaps_" + which + ".csv";
    const auto r = run_cli("analyze --case " + which +
                           " --scales 1,0.5,0.25 --seed 3 --out " + out);
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream csv(read_file(out));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(csv, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 4u) << which;
    EXPECT_EQ(lines[0], "scale,exact,surrogate,gap");
    EXPECT_EQ(lines[1].substr(0, 2), "1,");
    // The gap must shrink as the scale does.
    const auto gap_of = [](const std::string& l) {
      return std::stod(l.substr(l.rfind(',') + 1));
    };
    EXPECT_GT(gap_of(lines[1]), gap_of(lines[2]));
    EXPECT_GT(gap_of(lines[2]), gap_of(lines[3]));
  }
}

TEST(Cli, DeterministicPipelineBytes) {
  const std::string base = make_dir("cli_det");
  const std::string input = write_graph_file(base, 7, 50, 0.2);
  std::vector<std::string> model_bytes, train_bytes, eval_bytes;
  for (int round = 0; round < 2; ++round) {
    const std::string dir = make_dir("cli_det/run" + std::to_string(round));
    ASSERT_EQ(run_cli("split --input " + input + " --fraction 0.3 --seed 11 --out " + dir)
                  .exit_code, 0);
    ASSERT_EQ(run_cli("train --train " + dir + "/train.txt --test " + dir +
                      "/test.txt --preset AEd --k-latent 6 --epochs 4 --seed 13 --out " + dir)
                  .exit_code, 0);
    ASSERT_EQ(run_cli("eval --train " + dir + "/train.txt --test " + dir +
                      "/test.txt --checkpoint " + dir + "/model.ckpt --seed 13 --out " + dir)
                  .exit_code, 0);
    model_bytes.push_back(read_file(dir + "/model.ckpt"));
    train_bytes.push_back(read_file(dir + "/train_report.json"));
    eval_bytes.push_back(read_file(dir + "/eval_report.json"));
  }
  ASSERT_FALSE(model_bytes[0].empty());
  EXPECT_EQ(model_bytes[0], model_bytes[1]);
  EXPECT_EQ(train_bytes[0], train_bytes[1]);
  EXPECT_EQ(eval_bytes[0], eval_bytes[1]);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("frobnicate").exit_code, 2);
  EXPECT_EQ(run_cli("split").exit_code, 2);  // missing required flags
  const std::string dir = make_dir("cli_usage");
  const std::string input = write_graph_file(dir, 8);
  EXPECT_EQ(run_cli("train --train " + input + " --preset NOPE --out " + dir)
                .exit_code, 2);
  EXPECT_EQ(run_cli("train --train " + input + " --preset AA --out " + dir)
                .exit_code, 2);  // baselines have no training phase
  // eval without checkpoint or baseline preset
  ASSERT_EQ(run_cli("split --input " + input + " --fraction 0.3 --seed 2 --out " + dir)
                .exit_code, 0);
  EXPECT_EQ(run_cli("eval --train " + dir + "/train.txt --test " + dir +
                    "/test.txt --out " + dir).exit_code, 2);
}

TEST(Cli, ParseErrorsExitThree) {
  const std::string dir = make_dir("cli_parse");
  const std::string bad = dir + "/bad.txt";
  std::ofstream(bad) << "1 2\nthree four\n";
  EXPECT_EQ(run_cli("split --input " + bad + " --out " + dir).exit_code, 3);
  const auto r = run_cli("train --train " + bad + " --out " + dir);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(Cli, DivergenceExitsFour) {
  const std::string dir = make_dir("cli_diverge");
  const std::string input = write_graph_file(dir, 9, 30, 0.3);
  const auto r = run_cli("train --train " + input +
                         " --preset MF2 --k-latent 4 --epochs 5 --lr 1e200 --out " + dir);
  EXPECT_EQ(r.exit_code, 4) << r.err;
}

TEST(Cli, IoErrorsExitFive) {
  const std::string dir = make_dir("cli_io");
  EXPECT_EQ(run_cli("split --input " + dir + "/does_not_exist.txt --out " + dir)
                .exit_code, 5);
  const std::string input = write_graph_file(dir, 10);
  EXPECT_EQ(run_cli("eval --train " + input + " --test " + input +
                    " --checkpoint " + dir + "/missing.ckpt --out " + dir)
                .exit_code, 5);
}

TEST(Cli, ConfigFileDrivesTrainingButFlagsWin) {
  const std::string dir = make_dir("cli_config");
  const std::string input = write_graph_file(dir, 11);
  const std::string cfg_path = dir + "/config.json";
  {
    nlohmann::json cfg;
    cfg["max_epochs"] = 2;
    cfg["learning_rate"] = 0.01;
    cfg["k_latent"] = 3;
    cfg["seed"] = 21;
    std::ofstream(cfg_path) << cfg.dump();
  }
  ASSERT_EQ(run_cli("train --train " + input + " --preset AE2 --config " + cfg_path +
                    " --out " + dir).exit_code, 0);
  nlohmann::json report = nlohmann::json::parse(read_file(dir + "/train_report.json"));
  EXPECT_EQ(report.at("k_latent"), 3);
  EXPECT_EQ(report.at("config").at("max_epochs"), 2);
  EXPECT_EQ(report.at("config").at("learning_rate").get<double>(), 0.01);

  // An explicit flag overrides the same field in the config file.
  ASSERT_EQ(run_cli("train --train " + input + " --preset AE2 --config " + cfg_path +
                    " --epochs 4 --out " + dir).exit_code, 0);
  report = nlohmann::json::parse(read_file(dir + "/train_report.json"));
  EXPECT_EQ(report.at("config").at("max_epochs"), 4);
}
