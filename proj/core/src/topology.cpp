#include "oversmooth/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"
#include "oversmooth/error.hpp"

namespace oversmooth {
namespace {

// Independent streams for the stages that draw random numbers.
enum class Stream : std::uint32_t { AddSkip = 1, RemoveSkip = 2, Sample = 3, GoldRemove = 4, GoldAdd = 5, Round = 6 };

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint32_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), index};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double metric_or_nan(auto&& compute) {
  try {
    return compute();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyTarget || e.code() == ErrorCode::NoRemotePairs ||
        e.code() == ErrorCode::NoNeighbourPairs) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    throw;
  }
}

void check_prediction(const Graph& g, const Prediction& pred) {
  if (pred.label_hat.size() != g.num_nodes() || pred.confidence.size() != g.num_nodes()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction size differs from graph node count");
  }
}

// The endpoint filters shared by both passes.
class NodeFilter {
 public:
  NodeFilter(const Graph& g, const Prediction& pred, const AdaEdgeConfig& cfg,
             std::span<const double> precision, double confidence)
      : g_(g), pred_(pred), cfg_(cfg), precision_(precision), confidence_(confidence) {
    if (cfg.min_class_precision && precision.empty()) {
      throw Error(ErrorCode::InvalidArgument, "min_class_precision set without class precisions");
    }
  }

  bool passes(NodeId i) const {
    if (pred_.confidence[i] < confidence_) return false;
    if (cfg_.degree_bounds) {
      const auto d = g_.degree(i);
      if (d < cfg_.degree_bounds->min || d > cfg_.degree_bounds->max) return false;
    }
    if (cfg_.min_class_precision) {
      const auto c = static_cast<std::size_t>(pred_.label_hat[i]);
      if (c >= precision_.size() || precision_[c] < *cfg_.min_class_precision) return false;
    }
    return true;
  }

 private:
  const Graph& g_;
  const Prediction& pred_;
  const AdaEdgeConfig& cfg_;
  std::span<const double> precision_;
  double confidence_;
};

}  // namespace

void AdaEdgeConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  // Thresholds above 1 are accepted: they simply disable a pass.
  if (!(conf_add >= 0.0) || !(conf_remove >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence thresholds must be >= 0");
  }
  if (!unit(skip_prob)) throw Error(ErrorCode::InvalidArgument, "skip_prob must lie in [0, 1]");
  if (min_class_precision && !unit(*min_class_precision)) {
    throw Error(ErrorCode::InvalidArgument, "min_class_precision must lie in [0, 1]");
  }
  if (max_rounds < 1) throw Error(ErrorCode::InvalidArgument, "max_rounds must be >= 1");
  if (degree_bounds && degree_bounds->min > degree_bounds->max) {
    throw Error(ErrorCode::InvalidArgument, "degree bounds are inverted");
  }
}

void EditLog::append(const EditLog& other) {
  added.insert(added.end(), other.added.begin(), other.added.end());
  removed.insert(removed.end(), other.removed.begin(), other.removed.end());
  rounds.insert(rounds.end(), other.rounds.begin(), other.rounds.end());
  added_intra_class.clear();
  removed_intra_class.clear();
}

void EditLog::annotate_with_labels(std::span<const Label> labels) {
  auto flags = [&](const std::vector<Edge>& edges) {
    std::vector<bool> out;
    out.reserve(edges.size());
    for (const auto& e : edges) out.push_back(labels[e.u] == labels[e.v]);
    return out;
  };
  added_intra_class = flags(added);
  removed_intra_class = flags(removed);
}

std::string EditLog::to_json() const {
  using nlohmann::json;
  auto pairs = [](const std::vector<Edge>& edges) {
    json arr = json::array();
    for (const auto& e : edges) arr.push_back(json::array({e.u, e.v}));
    return arr;
  };
  json rounds_json = json::array();
  for (const auto& r : rounds) rounds_json.push_back({{"added", r.added}, {"removed", r.removed}});
  json out{{"added", pairs(added)}, {"removed", pairs(removed)}, {"rounds", rounds_json}};
  if (!added_intra_class.empty() || !removed_intra_class.empty()) {
    out["added_intra_class"] = added_intra_class;
    out["removed_intra_class"] = removed_intra_class;
  }
  return out.dump(2);
}

std::vector<double> class_precision(const Prediction& pred, std::span<const Label> labels,
                                    std::span<const NodeId> nodes, std::size_t class_count) {
  std::vector<std::size_t> predicted(class_count, 0);
  std::vector<std::size_t> correct(class_count, 0);
  for (NodeId i : nodes) {
    const auto c = static_cast<std::size_t>(pred.label_hat[i]);
    if (c >= class_count) continue;
    ++predicted[c];
    if (pred.label_hat[i] == labels[i]) ++correct[c];
  }
  std::vector<double> out(class_count, 0.0);
  for (std::size_t c = 0; c < class_count; ++c) {
    if (predicted[c] > 0) out[c] = static_cast<double>(correct[c]) / static_cast<double>(predicted[c]);
  }
  return out;
}

EditResult add_edges(const Graph& g, const Prediction& pred, const AdaEdgeConfig& cfg,
                     std::span<const double> precision) {
  cfg.validate();
  check_prediction(g, pred);
  EditResult out{g, {}};
  out.log.rounds.push_back({});
  if (cfg.num_add == 0) return out;

  const NodeFilter filter(g, pred, cfg, precision, cfg.conf_add);
  std::mt19937_64 skip_rng(derive_seed(cfg.seed, Stream::AddSkip));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto try_add = [&](NodeId i, NodeId j) {
    if (g.has_edge(i, j) || out.graph.has_edge(i, j)) return false;
    if (pred.label_hat[i] != pred.label_hat[j]) return false;
    if (!filter.passes(i) || !filter.passes(j)) return false;
    if (unit(skip_rng) < cfg.skip_prob) return false;
    out.graph.add_edge(i, j);
    out.log.added.emplace_back(i, j);
    return true;
  };

  const std::size_t n = g.num_nodes();
  if (cfg.candidate_mode == CandidateMode::Exhaustive) {
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) {
        if (try_add(i, j) && out.log.added.size() >= cfg.num_add) {
          out.log.rounds.back().added = out.log.added.size();
          return out;
        }
      }
    }
  } else if (n >= 2) {
    std::mt19937_64 sample_rng(derive_seed(cfg.seed, Stream::Sample));
    std::uniform_int_distribution<NodeId> node(0, n - 1);
    for (std::size_t s = 0; s < cfg.sampled_candidates && out.log.added.size() < cfg.num_add; ++s) {
      const NodeId a = node(sample_rng);
      const NodeId b = node(sample_rng);
      if (a == b) continue;
      try_add(std::min(a, b), std::max(a, b));
    }
  }
  out.log.rounds.back().added = out.log.added.size();
  return out;
}

EditResult remove_edges(const Graph& g, const Prediction& pred, const AdaEdgeConfig& cfg,
                        std::span<const double> precision) {
  cfg.validate();
  check_prediction(g, pred);
  EditResult out{g, {}};
  out.log.rounds.push_back({});
  if (cfg.num_remove == 0) return out;

  const NodeFilter filter(g, pred, cfg, precision, cfg.conf_remove);
  std::mt19937_64 skip_rng(derive_seed(cfg.seed, Stream::RemoveSkip));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& e : g.edges()) {
    if (pred.label_hat[e.u] == pred.label_hat[e.v]) continue;
    if (!filter.passes(e.u) || !filter.passes(e.v)) continue;
    if (unit(skip_rng) < cfg.skip_prob) continue;
    out.graph.remove_edge(e.u, e.v);
    out.log.removed.push_back(e);
    if (out.log.removed.size() >= cfg.num_remove) break;
  }
  out.log.rounds.back().removed = out.log.removed.size();
  return out;
}

EditResult adjust_graph(const Graph& g, const Prediction& pred, const AdaEdgeConfig& cfg,
                        std::span<const double> precision) {
  const bool add_first = cfg.order == EditOrder::AddFirst;
  auto first = add_first ? add_edges(g, pred, cfg, precision) : remove_edges(g, pred, cfg, precision);
  auto second = add_first ? remove_edges(first.graph, pred, cfg, precision)
                          : add_edges(first.graph, pred, cfg, precision);
  EditResult out{std::move(second.graph), {}};
  out.log.added = add_first ? std::move(first.log.added) : std::move(second.log.added);
  out.log.removed = add_first ? std::move(second.log.removed) : std::move(first.log.removed);
  out.log.rounds.push_back({out.log.added.size(), out.log.removed.size()});
  return out;
}

std::uint64_t adaedge_round_seed(std::uint64_t seed, int round) {
  return derive_seed(seed, Stream::Round, static_cast<std::uint32_t>(round));
}

AdaEdgeResult adaedge(const Graph& g0, const Matrix& x, std::span<const Label> labels,
                      const Split& split, const GcnArchitecture& arch,
                      const TrainConfig& train_cfg, const AdaEdgeConfig& cfg) {
  cfg.validate();

  struct RoundState {
    Graph graph;
    EditResult adjusted;
    GcnModel model;
    double val_accuracy = 0.0;
  };

  // Metrics are measured against the original topology so that every round
  // shares one set of neighbour and remote pairs.
  const auto g0_masks = madgap_masks(g0, train_cfg.metric_cfg);

  auto run_round = [&](const Graph& graph, int round, AdaEdgeResult& result) {
    TrainConfig tc = train_cfg;
    // Round 0 is the ordinary training run; only retrainings get derived seeds.
    if (round > 0) tc.seed = adaedge_round_seed(cfg.seed, round);
    tc.record_metrics = false;
    auto trained = train_from_scratch(arch, graph, x, labels, split, tc);
    auto fp = gcn_forward(trained.model, normalize_propagation(graph), x);

    AdaEdgeRound rec;
    rec.round = round;
    rec.seed = tc.seed;
    rec.edges = graph.num_edges();
    rec.train_accuracy = accuracy(fp.prediction, labels, split.train);
    rec.val_accuracy = accuracy(fp.prediction, labels, split.valid);
    rec.test_accuracy = accuracy(fp.prediction, labels, split.test);
    rec.mad_global = metric_or_nan([&] { return mad_global(fp.representation()); });
    rec.madgap = metric_or_nan([&] { return madgap_terms(fp.representation(), g0_masks).gap; });
    result.history.push_back(rec);
    return std::make_pair(std::move(trained.model), std::move(fp.prediction));
  };

  AdaEdgeResult result;
  auto adjust = [&](const Graph& graph, const Prediction& pred) {
    const auto precision =
        cfg.min_class_precision ? class_precision(pred, labels, split.valid, arch.class_count)
                                : std::vector<double>{};
    return adjust_graph(graph, pred, cfg, precision);
  };

  auto [model0, pred0] = run_round(g0, 0, result);
  RoundState best{g0, adjust(g0, pred0), std::move(model0), result.history.back().val_accuracy};
  result.history.back().edits = best.adjusted.log.rounds.back();
  result.log = best.adjusted.log;

  for (int round = 1; round < cfg.max_rounds; ++round) {
    auto [model, pred] = run_round(best.adjusted.graph, round, result);
    const double val = result.history.back().val_accuracy;
    if (!(val > best.val_accuracy)) break;
    Graph trained_on = best.adjusted.graph;
    auto next = adjust(trained_on, pred);
    result.history.back().edits = next.log.rounds.back();
    result.log.append(next.log);
    best = RoundState{std::move(trained_on), std::move(next), std::move(model), val};
    result.best_round = round;
  }

  result.graph = std::move(best.graph);
  result.adjusted = std::move(best.adjusted.graph);
  result.model = std::move(best.model);
  return result;
}

EditResult gold_label_adjust(const Graph& g, std::span<const Label> labels, double remove_rate,
                             double add_ratio, std::uint64_t seed) {
  if (labels.size() != g.num_nodes()) {
    throw Error(ErrorCode::DimensionMismatch, "labels length differs from node count");
  }
  if (!(remove_rate >= 0.0 && remove_rate <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "remove_rate must lie in [0, 1]");
  }
  if (!(add_ratio >= 0.0)) throw Error(ErrorCode::InvalidArgument, "add_ratio must be >= 0");

  std::vector<Edge> inter;
  for (const auto& e : g.edges()) {
    if (labels[e.u] != labels[e.v]) inter.push_back(e);
  }
  std::mt19937_64 remove_rng(derive_seed(seed, Stream::GoldRemove));
  std::shuffle(inter.begin(), inter.end(), remove_rng);
  const auto remove_count = static_cast<std::size_t>(std::llround(remove_rate * static_cast<double>(inter.size())));
  inter.resize(std::min(remove_count, inter.size()));
  std::sort(inter.begin(), inter.end());

  std::vector<Edge> additions;
  const auto target = static_cast<std::size_t>(std::llround(add_ratio * static_cast<double>(g.num_edges())));
  if (target > 0) {
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
      for (NodeId j = i + 1; j < g.num_nodes(); ++j) {
        if (labels[i] == labels[j] && !g.has_edge(i, j)) additions.emplace_back(i, j);
      }
    }
    std::mt19937_64 add_rng(derive_seed(seed, Stream::GoldAdd));
    std::shuffle(additions.begin(), additions.end(), add_rng);
    additions.resize(std::min(target, additions.size()));
    std::sort(additions.begin(), additions.end());
  }

  EditResult out{g, {}};
  for (const auto& e : inter) out.graph.remove_edge(e.u, e.v);
  for (const auto& e : additions) out.graph.add_edge(e.u, e.v);
  out.log.removed = std::move(inter);
  out.log.added = std::move(additions);
  out.log.rounds.push_back({out.log.added.size(), out.log.removed.size()});
  return out;
}

}  // namespace oversmooth
