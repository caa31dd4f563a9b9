#include "oversmooth_cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include "CLI11.hpp"
#include "json.hpp"
#include "oversmooth/dataset.hpp"
#include "oversmooth/error.hpp"
#include "oversmooth/gcn.hpp"
#include "oversmooth/metrics.hpp"
#include "oversmooth/results.hpp"
#include "oversmooth/stats.hpp"
#include "oversmooth/topology.hpp"

namespace oversmooth::cli {
namespace {

namespace fs = std::filesystem;

// Raised for invalid flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v, int digits = 9) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, digits);
  return std::string(buf, ptr);
}

// Shortest representation that reads back to the same double.
std::string exact(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::SelfLoopInFile:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::SelfLoopRejected:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ClassTooSmall:
      return kUsage;
    case ErrorCode::EmptyTarget:
    case ErrorCode::NoRemotePairs:
    case ErrorCode::NoNeighbourPairs:
    case ErrorCode::ConstantInput:
    case ErrorCode::UndefinedGap:
    case ErrorCode::ZeroNormRow:
    case ErrorCode::EmptyMask:
      return kUndefinedMetric;
    case ErrorCode::IoError:
      return kIo;
    case ErrorCode::NonFiniteLoss:
      return kFailure;
  }
  return kFailure;
}

// ---------------------------------------------------------------------------
// Option groups shared by several subcommands.

struct DataOptions {
  std::string edges;
  std::string features;
  std::string labels;
  bool sbm = false;
  std::vector<std::size_t> blocks{30, 30};
  double p_intra = 0.7;
  double p_inter = 0.1;
  std::size_t feature_dim = 8;
  double feature_signal = 1.0;
  double noise_std = 1.0;

  void add_sbm(CLI::App* app) {
    app->add_option("--blocks", blocks, "SBM block sizes")->delimiter(',');
    app->add_option("--p-intra", p_intra, "SBM intra-block edge probability");
    app->add_option("--p-inter", p_inter, "SBM inter-block edge probability");
    app->add_option("--feature-dim", feature_dim, "SBM feature dimension");
    app->add_option("--feature-signal", feature_signal, "SBM class-mean magnitude");
    app->add_option("--noise-std", noise_std, "SBM feature noise standard deviation");
  }

  void add(CLI::App* app) {
    app->add_option("--edges", edges, "edge list file");
    app->add_option("--features", features, "node feature CSV");
    app->add_option("--labels", labels, "node label file");
    app->add_flag("--sbm", sbm, "generate a stochastic block model instead of loading files");
    add_sbm(app);
  }

  SbmConfig sbm_config(std::uint64_t seed) const {
    SbmConfig cfg;
    cfg.block_sizes = blocks;
    cfg.p_intra = p_intra;
    cfg.p_inter = p_inter;
    cfg.feature_dim = feature_dim;
    cfg.feature_signal = feature_signal;
    cfg.noise_std = noise_std;
    cfg.seed = seed;
    return cfg;
  }

  Dataset load(std::uint64_t seed) const {
    if (sbm) {
      if (!edges.empty() || !features.empty() || !labels.empty()) {
        throw UsageError("--sbm cannot be combined with --edges/--features/--labels");
      }
      return generate_sbm(sbm_config(seed));
    }
    if (edges.empty() || features.empty() || labels.empty()) {
      throw UsageError("give --edges, --features and --labels, or --sbm");
    }
    return load_dataset(edges, features, labels);
  }
};

struct MetricOptions {
  int neb_max_order = 3;
  int rmt_min_order = 8;
  bool exclude_unreachable = false;

  void add(CLI::App* app) {
    app->add_option("--neb-max-order", neb_max_order, "largest hop order of a neighbouring pair");
    app->add_option("--rmt-min-order", rmt_min_order, "smallest hop order of a remote pair");
    app->add_flag("--exclude-unreachable", exclude_unreachable,
                  "do not count disconnected pairs as remote");
  }

  MetricConfig config() const {
    MetricConfig cfg{neb_max_order, rmt_min_order, !exclude_unreachable};
    cfg.validate();
    return cfg;
  }
};

struct TrainOptions {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  int epochs = 200;
  int patience = 30;
  std::size_t hidden = 16;
  int layers = 2;
  double lambda = 0.0;
  bool madreg = false;
  std::size_t train_per_class = 20;
  std::size_t valid_per_class = 30;
  CLI::Option* lambda_opt = nullptr;

  void add(CLI::App* app, bool with_layers = true) {
    app->add_option("--lr", learning_rate, "learning rate");
    app->add_option("--weight-decay", weight_decay, "L2 weight decay");
    app->add_option("--epochs", epochs, "maximum training epochs");
    app->add_option("--patience", patience, "early-stopping patience in epochs");
    app->add_option("--hidden", hidden, "hidden layer width");
    if (with_layers) app->add_option("--layers", layers, "GCN depth (1-6)");
    lambda_opt = app->add_option("--lambda", lambda, "MADReg coefficient");
    app->add_flag("--madreg", madreg, "enable MADReg (lambda 0.01 unless --lambda is given)");
    app->add_option("--train-per-class", train_per_class, "training nodes per class");
    app->add_option("--valid-per-class", valid_per_class, "validation nodes per class");
  }

  double effective_lambda() const {
    if (madreg && lambda_opt->count() == 0) return 0.01;
    return lambda;
  }

  TrainConfig config(std::uint64_t seed, const MetricConfig& metrics) const {
    TrainConfig tc;
    tc.learning_rate = learning_rate;
    tc.weight_decay = weight_decay;
    tc.max_epochs = epochs;
    tc.patience = patience;
    tc.seed = seed;
    tc.lambda = effective_lambda();
    tc.metric_cfg = metrics;
    return tc;
  }

  GcnArchitecture architecture(const Dataset& ds) const {
    if (layers < 1 || layers > 6) throw UsageError("--layers must lie in [1, 6]");
    return {static_cast<std::size_t>(ds.features.cols()), hidden,
            static_cast<std::size_t>(ds.class_count), layers};
  }

  SplitSizes split_sizes() const { return {train_per_class, valid_per_class}; }
};

// ---------------------------------------------------------------------------
// Small helpers.

std::vector<int> parse_layer_range(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  auto to_int = [&](const std::string& s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw UsageError("bad layer range '" + text + "'");
    return v;
  };
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.push_back(to_int(part));
    } else {
      const int lo = to_int(part.substr(0, dash));
      const int hi = to_int(part.substr(dash + 1));
      if (lo > hi) throw UsageError("bad layer range '" + text + "'");
      for (int l = lo; l <= hi; ++l) out.push_back(l);
    }
  }
  if (out.empty()) throw UsageError("empty layer range");
  return out;
}

std::vector<NodeId> read_node_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<NodeId> nodes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    while (!v.empty() && (v.back() == '\r' || v.back() == ' ')) v.remove_suffix(1);
    if (v.empty()) continue;
    NodeId id = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), id);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw Error(ErrorCode::ParseError, path.string() + ": bad node id", line_no);
    }
    nodes.push_back(id);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

fs::path beside(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension(suffix);
  return p;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  if (v.empty()) return {std::nan(""), std::nan("")};
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    for (double x : v) m.std += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(m.std / static_cast<double>(v.size() - 1));
  }
  return m;
}

std::string rate_tag(double v) { return exact(v); }

// ---------------------------------------------------------------------------
// Subcommands. Each owns its options and runs after a successful parse.

struct Command {
  virtual ~Command() = default;
  CLI::App* app = nullptr;
  std::uint64_t seed = 0;
  virtual int execute(std::ostream& out) = 0;
};

struct AnalyzeCommand : Command {
  std::string edges, embeddings, labels, nodes, output;
  int info_noise = 0;
  MetricOptions metrics;

  void setup(CLI::App& root) {
    app = root.add_subcommand("analyze", "MAD, MADGap and information-to-noise ratios of embeddings");
    app->add_option("--edges", edges, "edge list file")->required();
    app->add_option("--embeddings", embeddings, "embedding CSV, one row per node")->required();
    auto* lab = app->add_option("--labels", labels, "node label file");
    app->add_option("--info-noise", info_noise, "report ratios for orders 1..K (needs --labels)")
        ->check(CLI::NonNegativeNumber)
        ->needs(lab);
    app->add_option("--nodes", nodes, "restrict MADGap to pairs within these node ids (one per line)");
    app->add_option("--out", output, "CSV report (metric,order,value)");
    metrics.add(app);
  }

  int execute(std::ostream& out) override {
    const Graph g = load_edge_list(edges);
    const Matrix h = load_features(embeddings);
    if (static_cast<std::size_t>(h.rows()) != g.num_nodes()) {
      throw Error(ErrorCode::DimensionMismatch, "embeddings have " + std::to_string(h.rows()) +
                                                    " rows, graph has " + std::to_string(g.num_nodes()) + " nodes");
    }
    const auto cfg = metrics.config();
    std::optional<std::vector<NodeId>> subset;
    if (!nodes.empty()) subset = read_node_list(nodes);

    std::ostringstream csv;
    csv << "metric,order,value\n";
    const double mg = mad_global(h);
    out << "mad_global = " << exact(mg) << '\n';
    csv << "mad_global,," << exact(mg) << '\n';

    const auto masks = subset ? madgap_masks(g, cfg, std::span<const NodeId>(*subset)) : madgap_masks(g, cfg);
    const auto terms = madgap_terms(h, masks);
    out << "mad_remote = " << exact(terms.remote) << '\n';
    out << "mad_neighbour = " << exact(terms.neighbour) << '\n';
    out << "madgap = " << exact(terms.gap) << '\n';
    csv << "mad_remote,," << exact(terms.remote) << '\n';
    csv << "mad_neighbour,," << exact(terms.neighbour) << '\n';
    csv << "madgap,," << exact(terms.gap) << '\n';

    if (info_noise > 0) {
      const auto y = load_labels(labels);
      if (y.size() != g.num_nodes()) throw Error(ErrorCode::DimensionMismatch, "label count differs from node count");
      const auto orders = hop_orders(g, info_noise);
      for (int k = 1; k <= info_noise; ++k) {
        const auto r = info_to_noise_ratio(orders, y, k);
        const double v = r.global ? *r.global : std::nan("");
        out << "info_noise k=" << k << " = " << exact(v) << '\n';
        csv << "info_noise," << k << ',' << exact(v) << '\n';
      }
    }
    if (!output.empty()) write_text(output, csv.str());
    return kOk;
  }
};

struct TrainCommand : Command {
  DataOptions data;
  TrainOptions train;
  MetricOptions metrics;
  int seeds = 1;
  int splits = 1;
  bool protocol = false;
  std::string output, history;

  void setup(CLI::App& root) {
    app = root.add_subcommand("train", "train GCNs over splits and seeds");
    data.add(app);
    train.add(app);
    metrics.add(app);
    app->add_option("--seeds", seeds, "model seeds per split (seed, seed+1, ...)")->check(CLI::PositiveNumber);
    app->add_option("--splits", splits, "dataset splits (split seeds seed, seed+1, ...)")->check(CLI::PositiveNumber);
    app->add_flag("--protocol", protocol, "5 splits x 10 seeds");
    app->add_option("--out", output, "results file, one row per run (.csv or .json)");
    app->add_option("--history", history, "per-epoch history file (.csv or .json)");
  }

  int execute(std::ostream& out) override {
    if (protocol) {
      splits = 5;
      seeds = 10;
    }
    const Dataset ds = data.load(seed);
    const auto mcfg = metrics.config();
    const auto arch = train.architecture(ds);

    std::vector<ResultRecord> runs, epochs;
    std::vector<double> test_acc, gaps;
    for (int p = 0; p < splits; ++p) {
      const auto split_seed = seed + static_cast<std::uint64_t>(p);
      const Split split = split_dataset(ds.labels, split_seed, train.split_sizes());
      for (int s = 0; s < seeds; ++s) {
        const auto model_seed = seed + static_cast<std::uint64_t>(s);
        auto tc = train.config(model_seed, mcfg);
        tc.record_metrics = !history.empty();
        const auto result = train_from_scratch(arch, ds.graph, ds.features, ds.labels, split, tc);
        const auto ev = evaluate_model(result.model, ds.graph, ds.features, ds.labels, split, mcfg);
        const std::string run_id = "split" + std::to_string(p) + "-seed" + std::to_string(s);

        ResultRecord r;
        r.run_id = run_id;
        r.seed = model_seed;
        r.layers = arch.layers;
        r.epoch = result.best_epoch;
        r.split = "test";
        r.accuracy = ev.test_accuracy;
        r.mad_global = ev.mad_global;
        r.madgap = ev.madgap;
        r.lambda = tc.lambda;
        runs.push_back(r);
        test_acc.push_back(ev.test_accuracy);
        gaps.push_back(ev.madgap);

        for (const auto& e : result.history) {
          ResultRecord h;
          h.run_id = run_id;
          h.seed = model_seed;
          h.layers = arch.layers;
          h.epoch = e.epoch;
          h.split = "valid";
          h.accuracy = e.val_accuracy;
          h.mad_global = e.mad_global;
          h.madgap = e.madgap;
          h.lambda = tc.lambda;
          epochs.push_back(h);
        }
        out << run_id << " split_seed=" << split_seed << " seed=" << model_seed
            << " best_epoch=" << result.best_epoch << " val=" << fmt(ev.val_accuracy)
            << " test=" << fmt(ev.test_accuracy) << " madgap=" << fmt(ev.madgap) << '\n';
      }
    }
    const auto acc = mean_std(test_acc);
    const auto gap = mean_std(gaps);
    out << "test accuracy " << fmt(acc.mean, 4) << " +- " << fmt(acc.std, 4) << " over " << runs.size()
        << " runs; madgap " << fmt(gap.mean, 4) << " +- " << fmt(gap.std, 4) << '\n';
    if (!output.empty()) emit_results(runs, output, result_format_from_path(output));
    if (!history.empty()) emit_results(epochs, history, result_format_from_path(history));
    return kOk;
  }
};

struct SweepCommand : Command {
  DataOptions data;
  TrainOptions train;
  MetricOptions metrics;
  std::string layers = "1-6";
  std::size_t trials = 1000;
  std::string output;

  void setup(CLI::App& root) {
    app = root.add_subcommand("sweep", "train one GCN per depth and correlate accuracy with MADGap");
    data.add(app);
    train.add(app, false);
    metrics.add(app);
    app->add_option("--layers", layers, "depths, e.g. 1-6 or 2,4,6");
    app->add_option("--trials", trials, "permutations for the p-value (>= 100)");
    app->add_option("--out", output, "results file, one row per depth");
  }

  int execute(std::ostream& out) override {
    const auto depths = parse_layer_range(layers);
    const Dataset ds = data.load(seed);
    const auto mcfg = metrics.config();
    const Split split = split_dataset(ds.labels, seed, train.split_sizes());
    const auto tc = train.config(seed, mcfg);
    const auto rows = layer_sweep(ds.graph, ds.features, ds.labels, split, depths, tc, train.hidden);

    std::vector<ResultRecord> records;
    std::vector<double> acc, gap;
    for (const auto& row : rows) {
      ResultRecord r;
      r.run_id = "sweep";
      r.seed = seed;
      r.layers = row.layers;
      r.split = "test";
      r.accuracy = row.accuracy;
      r.mad_global = row.mad_global;
      r.madgap = row.madgap;
      r.lambda = tc.lambda;
      records.push_back(r);
      acc.push_back(row.accuracy);
      gap.push_back(row.madgap);
      out << "layers=" << row.layers << " test=" << fmt(row.accuracy) << " val=" << fmt(row.val_accuracy)
          << " mad_global=" << fmt(row.mad_global) << " madgap=" << fmt(row.madgap) << '\n';
    }
    if (!output.empty()) emit_results(records, output, result_format_from_path(output));

    if (std::any_of(gap.begin(), gap.end(), [](double v) { return std::isnan(v); })) {
      throw Error(ErrorCode::UndefinedGap, "MADGap undefined at some depth; no correlation");
    }
    const double r = pearson(acc, gap);
    const double p = permutation_pvalue(acc, gap, trials, seed);
    out << "pearson(accuracy, madgap) = " << fmt(r) << " p = " << fmt(p) << " (" << trials
        << " permutations)\n";
    return kOk;
  }
};

struct AdaEdgeOptions {
  std::string order = "add-first";
  std::size_t num_add = 0;
  std::size_t num_remove = 0;
  double conf_add = 1.0;
  double conf_remove = 1.0;
  int max_rounds = 1;
  double skip_prob = 0.0;
  std::optional<std::size_t> degree_min, degree_max;
  std::optional<double> min_class_precision;
  std::size_t sampled_candidates = 0;

  void add(CLI::App* app) {
    app->add_option("--order", order, "edit order")->check(CLI::IsMember({"add-first", "remove-first"}));
    app->add_option("--num-add", num_add, "maximum edges added per round");
    app->add_option("--num-remove", num_remove, "maximum edges removed per round");
    app->add_option("--conf-add", conf_add, "confidence threshold for additions");
    app->add_option("--conf-remove", conf_remove, "confidence threshold for removals");
    app->add_option("--max-rounds", max_rounds, "maximum trainings");
    app->add_option("--skip-prob", skip_prob, "probability of skipping an eligible edit");
    app->add_option("--degree-min", degree_min, "only edit nodes with at least this degree");
    app->add_option("--degree-max", degree_max, "only edit nodes with at most this degree");
    app->add_option("--min-class-precision", min_class_precision,
                    "only edit nodes whose predicted class reaches this validation precision");
    app->add_option("--sampled-candidates", sampled_candidates,
                    "sample this many candidate pairs for additions instead of scanning all");
  }

  AdaEdgeConfig config(std::uint64_t seed) const {
    AdaEdgeConfig c;
    c.order = order == "remove-first" ? EditOrder::RemoveFirst : EditOrder::AddFirst;
    c.num_add = num_add;
    c.num_remove = num_remove;
    c.conf_add = conf_add;
    c.conf_remove = conf_remove;
    c.max_rounds = max_rounds;
    c.skip_prob = skip_prob;
    if (degree_min || degree_max) c.degree_bounds = DegreeBounds{degree_min.value_or(0), degree_max.value_or(DegreeBounds{}.max)};
    c.min_class_precision = min_class_precision;
    if (sampled_candidates > 0) {
      c.candidate_mode = CandidateMode::Sampled;
      c.sampled_candidates = sampled_candidates;
    }
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct AdaEdgeCommand : Command {
  DataOptions data;
  TrainOptions train;
  MetricOptions metrics;
  AdaEdgeOptions edits;
  std::string output, edit_log, adjusted;

  void setup(CLI::App& root) {
    app = root.add_subcommand("adaedge", "iteratively retrain and edit the graph from predictions");
    data.add(app);
    train.add(app);
    metrics.add(app);
    edits.add(app);
    app->add_option("--out", output, "per-round results file");
    app->add_option("--edit-log", edit_log, "edit log JSON (default: beside --out)");
    app->add_option("--adjusted-graph", adjusted, "write the final adjusted graph as an edge list");
  }

  int execute(std::ostream& out) override {
    const Dataset ds = data.load(seed);
    const auto mcfg = metrics.config();
    const auto arch = train.architecture(ds);
    const Split split = split_dataset(ds.labels, seed, train.split_sizes());
    const auto tc = train.config(seed, mcfg);
    auto result = adaedge(ds.graph, ds.features, ds.labels, split, arch, tc, edits.config(seed));
    result.log.annotate_with_labels(ds.labels);

    std::vector<ResultRecord> records;
    for (const auto& round : result.history) {
      for (const auto& [name, acc] : {std::pair{"valid", round.val_accuracy}, std::pair{"test", round.test_accuracy}}) {
        ResultRecord r;
        r.run_id = "adaedge";
        r.seed = round.seed;
        r.layers = arch.layers;
        r.split = name;
        r.accuracy = acc;
        r.mad_global = round.mad_global;
        r.madgap = round.madgap;
        r.lambda = tc.lambda;
        r.round = round.round;
        records.push_back(r);
      }
      out << "round " << round.round << " seed=" << round.seed << " edges=" << round.edges
          << " val=" << fmt(round.val_accuracy) << " test=" << fmt(round.test_accuracy)
          << " madgap=" << fmt(round.madgap) << " added=" << round.edits.added
          << " removed=" << round.edits.removed << '\n';
    }
    out << "best round " << result.best_round << " val " << fmt(result.history.front().val_accuracy) << " -> "
        << fmt(result.history[static_cast<std::size_t>(result.best_round)].val_accuracy) << '\n';

    if (!output.empty()) emit_results(records, output, result_format_from_path(output));
    const std::string log_path = !edit_log.empty() ? edit_log : output.empty() ? "" : beside(output, ".edits.json").string();
    if (!log_path.empty()) write_text(log_path, result.log.to_json() + "\n");
    if (!adjusted.empty()) save_edge_list(result.adjusted, adjusted);
    return kOk;
  }
};

struct GoldAdjustCommand : Command {
  DataOptions data;
  TrainOptions train;
  MetricOptions metrics;
  std::vector<double> remove_rates{0.0, 0.5, 1.0};
  std::vector<double> add_ratios{0.0};
  bool reuse_embeddings = false;
  std::string output, edit_log;

  void setup(CLI::App& root) {
    app = root.add_subcommand("goldadjust", "edit the graph with gold labels and measure the effect");
    data.add(app);
    train.add(app);
    metrics.add(app);
    app->add_option("--remove-rates", remove_rates, "fractions of inter-class edges to remove")->delimiter(',');
    app->add_option("--add-ratios", add_ratios, "intra-class additions relative to |E|")->delimiter(',');
    app->add_flag("--reuse-embeddings", reuse_embeddings,
                  "evaluate one model trained on the original graph instead of retraining per point");
    app->add_option("--out", output, "per-point results file");
    app->add_option("--edit-log", edit_log, "edit logs JSON (default: beside --out)");
  }

  int execute(std::ostream& out) override {
    const Dataset ds = data.load(seed);
    const auto mcfg = metrics.config();
    const auto arch = train.architecture(ds);
    const Split split = split_dataset(ds.labels, seed, train.split_sizes());
    const auto tc = train.config(seed, mcfg);

    std::optional<ForwardPass> fixed;
    if (reuse_embeddings) {
      const auto base = train_from_scratch(arch, ds.graph, ds.features, ds.labels, split, tc);
      fixed = gcn_forward(base.model, normalize_propagation(ds.graph), ds.features);
    }

    std::vector<ResultRecord> records;
    nlohmann::json logs = nlohmann::json::array();
    for (double add : add_ratios) {
      for (double rate : remove_rates) {
        auto edit = gold_label_adjust(ds.graph, ds.labels, rate, add, seed);
        ResultRecord r;
        r.run_id = "remove" + rate_tag(rate) + "-add" + rate_tag(add);
        r.seed = seed;
        r.layers = arch.layers;
        r.split = "test";
        r.lambda = tc.lambda;
        if (fixed) {
          r.accuracy = accuracy(fixed->prediction, ds.labels, split.test);
          r.mad_global = mad_global(fixed->representation());
          try {
            r.madgap = madgap(fixed->representation(), edit.graph, mcfg);
          } catch (const Error& e) {
            if (exit_code_for(e.code()) != kUndefinedMetric) throw;
          }
        } else {
          const auto trained = train_from_scratch(arch, edit.graph, ds.features, ds.labels, split, tc);
          const auto ev = evaluate_model(trained.model, edit.graph, ds.features, ds.labels, split, mcfg);
          r.accuracy = ev.test_accuracy;
          r.mad_global = ev.mad_global;
          r.madgap = ev.madgap;
        }
        records.push_back(r);
        edit.log.annotate_with_labels(ds.labels);
        logs.push_back({{"remove_rate", rate}, {"add_ratio", add}, {"log", nlohmann::json::parse(edit.log.to_json())}});
        out << r.run_id << " edges=" << edit.graph.num_edges() << " test=" << fmt(r.accuracy)
            << " mad_global=" << fmt(r.mad_global) << " madgap=" << fmt(r.madgap) << '\n';
      }
    }
    if (!output.empty()) emit_results(records, output, result_format_from_path(output));
    const std::string log_path = !edit_log.empty() ? edit_log : output.empty() ? "" : beside(output, ".edits.json").string();
    if (!log_path.empty()) write_text(log_path, logs.dump(2) + "\n");
    return kOk;
  }
};

struct GenSbmCommand : Command {
  DataOptions data;
  std::string out_dir = ".";
  std::string prefix = "sbm";

  void setup(CLI::App& root) {
    app = root.add_subcommand("gen-sbm", "write a stochastic block model dataset");
    data.add_sbm(app);
    app->add_option("--out-dir", out_dir, "output directory");
    app->add_option("--prefix", prefix, "file name prefix");
  }

  int execute(std::ostream& out) override {
    const auto ds = generate_sbm(data.sbm_config(seed));
    const fs::path dir = out_dir;
    const auto edges = dir / (prefix + ".edges");
    const auto features = dir / (prefix + ".features.csv");
    const auto labels = dir / (prefix + ".labels");
    save_edge_list(ds.graph, edges);
    save_features(ds.features, features);
    save_labels(ds.labels, labels);
    out << "nodes=" << ds.graph.num_nodes() << " edges=" << ds.graph.num_edges()
        << " classes=" << ds.class_count << '\n'
        << edges.string() << '\n'
        << features.string() << '\n'
        << labels.string() << '\n';
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// Config file handling. Lines are `key = value`; keys name long options of
// the chosen subcommand. They are inserted ahead of the command-line flags,
// and the last occurrence of an option wins, so flags take precedence.

std::vector<std::string> config_arguments(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::vector<std::string> args;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, path.string() + ": expected key = value", line_no);
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw Error(ErrorCode::ParseError, path.string() + ": empty key", line_no);
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

void echo_config(const CLI::App& app, std::ostream& out) {
  out << "# oversmooth " << app.get_name() << '\n';
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    std::string value;
    const auto& res = opt->results();
    if (res.empty()) {
      value = opt->get_default_str();
      if (value.empty() && opt->get_expected_max() == 0) value = "false";
    } else if (opt->get_items_expected_max() > 1) {
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
    } else {
      value = res.back();  // the last occurrence wins
    }
    out << "# " << name << " = " << value << '\n';
  }
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App root{"Over-smoothing analysis toolkit for graph neural networks", "oversmooth"};
  root.require_subcommand(1);
  root.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  AnalyzeCommand analyze;
  TrainCommand train;
  SweepCommand sweep;
  AdaEdgeCommand ada;
  GoldAdjustCommand gold;
  GenSbmCommand gen;
  analyze.setup(root);
  train.setup(root);
  sweep.setup(root);
  ada.setup(root);
  gold.setup(root);
  gen.setup(root);
  std::vector<Command*> commands{&analyze, &train, &sweep, &ada, &gold, &gen};
  for (Command* c : commands) {
    c->app->add_option("--seed", c->seed, "random seed");
    c->app->add_option("--config", "key = value file; command-line flags take precedence");
  }

  try {
    // Pull the config file out of the arguments and splice its entries in
    // right after the subcommand name.
    std::vector<std::string> config_args;
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        continue;
      }
      auto more = config_arguments(path);
      config_args.insert(config_args.end(), more.begin(), more.end());
      --i;
    }
    if (!config_args.empty() && !args.empty()) {
      args.insert(args.begin() + 1, config_args.begin(), config_args.end());
    }

    std::reverse(args.begin(), args.end());
    try {
      root.parse(args);
    } catch (const CLI::ParseError& e) {
      return root.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    for (Command* c : commands) {
      if (!c->app->parsed()) continue;
      echo_config(*c->app, out);
      return c->execute(out);
    }
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace oversmooth::cli
