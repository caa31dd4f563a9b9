#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oversmooth/dataset.hpp"
#include "oversmooth/gcn.hpp"
#include "oversmooth/metrics.hpp"
#include "oversmooth/results.hpp"
#include "oversmooth/topology.hpp"
#include "oversmooth_cli/cli.hpp"
#include "tempdir.hpp"

using namespace oversmooth;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(std::move(args), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Small SBM settings shared by the training commands.
const std::vector<std::string> kSmall{"--sbm", "--train-per-class", "5", "--valid-per-class", "10",
                                      "--neb-max-order", "1", "--rmt-min-order", "2"};

// Value of `key = value` in analyze output.
double reported(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + " = ");
  if (pos == std::string::npos) throw std::runtime_error("missing " + key);
  return std::stod(text.substr(pos + key.size() + 3));
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"analyze", "--edges", "x"}).code, cli::kUsage);
  EXPECT_EQ(run({"train", "--sbm", "--layers", "7"}).code, cli::kUsage);
  EXPECT_EQ(run({"adaedge", "--sbm", "--order", "sideways"}).code, cli::kUsage);
}

TEST(Cli, InfoNoiseNeedsLabels) {
  TempDir dir;
  const auto edges = dir.write("g.edges", "0 1\n1 2\n");
  const auto emb = dir.write("h.csv", "1,0\n0,1\n1,1\n");
  EXPECT_EQ(run({"analyze", "--edges", edges.string(), "--embeddings", emb.string(), "--info-noise", "2"}).code,
            cli::kUsage);
}

TEST(Cli, AnalyzeExitCodes) {
  TempDir dir;
  const auto tri = dir.write("tri.edges", "0 1\n1 2\n0 2\n");
  const auto loop = dir.write("loop.edges", "0 1\n1 1\n");
  const auto emb = dir.write("h.csv", "1,0\n0,1\n1,1\n");
  // A triangle has no pair beyond order 1, so the remote side is empty.
  EXPECT_EQ(run({"analyze", "--edges", tri.string(), "--embeddings", emb.string(), "--neb-max-order", "1",
                 "--rmt-min-order", "2"}).code,
            cli::kUndefinedMetric);
  EXPECT_EQ(run({"analyze", "--edges", (dir / "missing.edges").string(), "--embeddings", emb.string()}).code,
            cli::kIo);
  EXPECT_EQ(run({"analyze", "--edges", loop.string(), "--embeddings", emb.string()}).code, cli::kUsage);
}

TEST(Cli, AnalyzeReportsLibraryValuesExactly) {
  TempDir dir;
  const auto ds = generate_sbm(fixtures::smoothing_sbm(3));
  save_edge_list(ds.graph, dir / "g.edges");
  save_features(ds.features, dir / "x.csv");
  save_labels(ds.labels, dir / "y.labels");
  const Matrix x = load_features(dir / "x.csv");

  const auto r = run({"analyze", "--edges", (dir / "g.edges").string(), "--embeddings", (dir / "x.csv").string(),
                      "--labels", (dir / "y.labels").string(), "--info-noise", "3", "--neb-max-order", "1",
                      "--rmt-min-order", "2", "--out", (dir / "report.csv").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(reported(r.out, "mad_global"), mad_global(x));
  EXPECT_EQ(reported(r.out, "madgap"), madgap(x, ds.graph, fixtures::kFixtureMetrics));
  EXPECT_EQ(reported(r.out, "info_noise k=1"), *info_to_noise_ratio(ds.graph, ds.labels, 1).global);

  const std::string csv = read_file(dir / "report.csv");
  EXPECT_EQ(csv.rfind("metric,order,value\n", 0), 0u);
  EXPECT_NE(csv.find("info_noise,3,"), std::string::npos);
}

TEST(Cli, AnalyzePath12Golden) {
  TempDir dir;
  std::string edges, emb;
  for (int i = 0; i < 12; ++i) {
    if (i + 1 < 12) edges += std::to_string(i) + " " + std::to_string(i + 1) + "\n";
    emb += std::to_string(i) + ",1\n";
  }
  const auto r = run({"analyze", "--edges", dir.write("p.edges", edges).string(), "--embeddings",
                      dir.write("h.csv", emb).string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NEAR(reported(r.out, "mad_remote"), 0.41875666041877657, 1e-12);
  EXPECT_NEAR(reported(r.out, "mad_neighbour"), 0.08115749498175069, 1e-12);
}

TEST(Cli, AnalyzeNodeSubsetRestrictsPairs) {
  TempDir dir;
  std::string edges, emb;
  for (int i = 0; i < 12; ++i) {
    if (i + 1 < 12) edges += std::to_string(i) + " " + std::to_string(i + 1) + "\n";
    emb += std::to_string(i) + ",1\n";
  }
  const auto e = dir.write("p.edges", edges);
  const auto h = dir.write("h.csv", emb);
  const std::vector<NodeId> subset{0, 1, 2, 9, 10, 11};
  const auto r = run({"analyze", "--edges", e.string(), "--embeddings", h.string(), "--nodes",
                      dir.write("n.txt", "0\n1\n2\n9\n10\n11\n").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const Matrix x = load_features(h);
  EXPECT_EQ(reported(r.out, "madgap"), madgap(x, load_edge_list(e), MetricConfig{}, std::span<const NodeId>(subset)));
}

TEST(Cli, GenSbmMatchesLibrary) {
  TempDir dir;
  ASSERT_EQ(run({"gen-sbm", "--seed", "9", "--out-dir", dir.path().string(), "--prefix", "d"}).code, cli::kOk);
  const auto expected = generate_sbm(fixtures::smoothing_sbm(9));
  const auto loaded = load_dataset(dir / "d.edges", dir / "d.features.csv", dir / "d.labels");
  EXPECT_EQ(loaded.graph, expected.graph);
  EXPECT_EQ(loaded.labels, expected.labels);
  EXPECT_LT((loaded.features - expected.features).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Cli, GoldAdjustDefaultsGiveThreePoints) {
  TempDir dir;
  const auto out = dir / "gold.csv";
  const auto r = run(concat({"goldadjust", "--epochs", "20", "--out", out.string()}, kSmall));
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto rows = load_results(out, ResultFormat::Csv);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].run_id, "remove0-add0");
  EXPECT_EQ(rows[2].run_id, "remove1-add0");
  EXPECT_TRUE(std::filesystem::exists(dir / "gold.edits.json"));
}

TEST(Cli, SingleRoundAdaEdgeIsTrainThenAdjust) {
  TempDir dir;
  const auto adjusted = dir / "adjusted.edges";
  const auto r = run(concat({"adaedge", "--seed", "4", "--epochs", "60", "--max-rounds", "1", "--order",
                             "remove-first", "--num-remove", "50", "--conf-remove", "0.55", "--num-add", "5",
                             "--conf-add", "0.6", "--adjusted-graph", adjusted.string()},
                            kSmall));
  ASSERT_EQ(r.code, cli::kOk) << r.err;

  const auto ds = generate_sbm(fixtures::smoothing_sbm(4));
  const auto split = split_dataset(ds.labels, 4, fixtures::kSmallSplit);
  TrainConfig tc;
  tc.seed = 4;
  tc.max_epochs = 60;
  tc.metric_cfg = fixtures::kFixtureMetrics;
  const auto trained = train_from_scratch({8, 16, 2, 2}, ds.graph, ds.features, ds.labels, split, tc);
  const auto pred = evaluate_model(trained.model, ds.graph, ds.features, ds.labels, split, tc.metric_cfg).prediction;
  AdaEdgeConfig cfg;
  cfg.order = EditOrder::RemoveFirst;
  cfg.num_remove = 50;
  cfg.conf_remove = 0.55;
  cfg.num_add = 5;
  cfg.conf_add = 0.6;
  cfg.seed = 4;
  EXPECT_EQ(load_edge_list(adjusted).edges(), adjust_graph(ds.graph, pred, cfg).graph.edges());
}

TEST(Cli, SweepWritesOneRowPerDepthAndCorrelation) {
  TempDir dir;
  const auto out = dir / "sweep.json";
  const auto r = run(concat({"sweep", "--epochs", "30", "--trials", "100", "--out", out.string()}, kSmall));
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto rows = load_results(out, ResultFormat::Json);
  ASSERT_EQ(rows.size(), 6u);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(rows[static_cast<std::size_t>(i)].layers, i + 1);
  EXPECT_NE(r.out.find("pearson(accuracy, madgap) = "), std::string::npos);
}

TEST(Cli, ProtocolRunsFiftyModels) {
  TempDir dir;
  const auto out = dir / "runs.csv";
  const auto r = run(concat({"train", "--protocol", "--epochs", "2", "--out", out.string()}, kSmall));
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto rows = load_results(out, ResultFormat::Csv);
  ASSERT_EQ(rows.size(), 50u);
  EXPECT_EQ(rows.front().run_id, "split0-seed0");
  EXPECT_EQ(rows.back().run_id, "split4-seed9");
  EXPECT_NE(r.out.find("over 50 runs"), std::string::npos);
}

TEST(Cli, CommandLineOverridesConfigFile) {
  TempDir dir;
  const auto cfg = dir.write("run.ini", "# training\nepochs = 3\nneb_max_order = 1\nrmt-min-order = \"2\"\n");
  const auto history = dir / "h.csv";
  const auto r = run(concat({"train", "--config", cfg.string(), "--epochs", "2", "--history", history.string()},
                            {"--sbm", "--train-per-class", "5", "--valid-per-class", "10"}));
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(load_results(history, ResultFormat::Csv).size(), 2u);
  EXPECT_NE(r.out.find("# epochs = 2"), std::string::npos);
  EXPECT_NE(r.out.find("# neb-max-order = 1"), std::string::npos);
}

TEST(Cli, ConfigFileAloneApplies) {
  TempDir dir;
  const auto cfg = dir.write("run.ini", "epochs = 3\n");
  const auto history = dir / "h.csv";
  const auto r = run(concat({"train", "--config", cfg.string(), "--history", history.string()}, kSmall));
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(load_results(history, ResultFormat::Csv).size(), 3u);
}

TEST(Cli, MadRegChangesTraining) {
  TempDir dir;
  const auto plain = dir / "plain.csv";
  const auto reg = dir / "reg.csv";
  const std::vector<std::string> base{"train", "--epochs", "20", "--layers", "4"};
  ASSERT_EQ(run(concat(concat(base, kSmall), {"--history", plain.string()})).code, cli::kOk);
  ASSERT_EQ(run(concat(concat(base, kSmall), {"--madreg", "--history", reg.string()})).code, cli::kOk);
  const auto a = load_results(plain, ResultFormat::Csv);
  const auto b = load_results(reg, ResultFormat::Csv);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(b.front().lambda, 0.01);
  bool differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) differ = differ || a[i].madgap != b[i].madgap;
  EXPECT_TRUE(differ);
}
