#include "oversmooth/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <string>
#include <string_view>

#include "oversmooth/error.hpp"

namespace oversmooth {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line,
                              const std::string& what) {
  throw Error(ErrorCode::ParseError,
              path.string() + ":" + std::to_string(line) + ": " + what, line);
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto start = s.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    auto stop = s.find_first_of(" \t", start);
    if (stop == std::string_view::npos) stop = s.size();
    out.push_back(s.substr(start, stop - start));
    pos = stop;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void Dataset::validate() const {
  const auto n = graph.num_nodes();
  if (static_cast<std::size_t>(features.rows()) != n || labels.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "graph has " + std::to_string(n) + " nodes, features " +
                    std::to_string(features.rows()) + " rows, labels " +
                    std::to_string(labels.size()) + " entries");
  }
  for (Label l : labels) {
    if (l < 0 || l >= class_count) {
      throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(l) + " outside [0, " +
                                                  std::to_string(class_count) + ")");
    }
  }
}

Split split_dataset(std::span<const Label> labels, std::uint64_t seed, SplitSizes sizes) {
  Label max_label = -1;
  for (Label l : labels) {
    if (l < 0) throw Error(ErrorCode::InvalidArgument, "negative label");
    max_label = std::max(max_label, l);
  }
  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(max_label + 1));
  for (NodeId i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);

  const std::size_t needed = sizes.train_per_class + sizes.valid_per_class;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].size() < needed) {
      throw Error(ErrorCode::ClassTooSmall, "class " + std::to_string(c) + " has " +
                                                std::to_string(by_class[c].size()) +
                                                " nodes, needs " + std::to_string(needed));
    }
  }

  std::mt19937_64 rng(seed);
  Split split;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    auto train_end = members.begin() + static_cast<std::ptrdiff_t>(sizes.train_per_class);
    auto valid_end = train_end + static_cast<std::ptrdiff_t>(sizes.valid_per_class);
    split.train.insert(split.train.end(), members.begin(), train_end);
    split.valid.insert(split.valid.end(), train_end, valid_end);
    split.test.insert(split.test.end(), valid_end, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.valid.begin(), split.valid.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void SbmConfig::validate() const {
  if (block_sizes.empty()) throw Error(ErrorCode::InvalidArgument, "SBM needs at least one block");
  for (auto s : block_sizes) {
    if (s == 0) throw Error(ErrorCode::InvalidArgument, "SBM block sizes must be positive");
  }
  if (p_intra < 0.0 || p_intra > 1.0 || p_inter < 0.0 || p_inter > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "SBM probabilities must lie in [0, 1]");
  }
  if (feature_dim == 0) throw Error(ErrorCode::InvalidArgument, "SBM feature_dim must be >= 1");
  if (!(noise_std >= 0.0)) throw Error(ErrorCode::InvalidArgument, "SBM noise_std must be >= 0");
}

Dataset generate_sbm(const SbmConfig& cfg) {
  cfg.validate();
  Dataset ds;
  for (std::size_t b = 0; b < cfg.block_sizes.size(); ++b) {
    ds.labels.insert(ds.labels.end(), cfg.block_sizes[b], static_cast<Label>(b));
  }
  ds.class_count = static_cast<int>(cfg.block_sizes.size());
  const std::size_t n = ds.labels.size();

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ds.graph = Graph(n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double p = ds.labels[i] == ds.labels[j] ? cfg.p_intra : cfg.p_inter;
      if (unit(rng) < p) ds.graph.add_edge(i, j);
    }
  }

  const auto dim = static_cast<Eigen::Index>(cfg.feature_dim);
  ds.features = Matrix::Zero(static_cast<Eigen::Index>(n), dim);
  std::normal_distribution<double> noise(0.0, cfg.noise_std > 0.0 ? cfg.noise_std : 1.0);
  for (NodeId i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    ds.features(row, static_cast<Eigen::Index>(static_cast<std::size_t>(ds.labels[i]) % cfg.feature_dim)) =
        cfg.feature_signal;
    if (cfg.noise_std > 0.0) {
      for (Eigen::Index c = 0; c < dim; ++c) ds.features(row, c) += noise(rng);
    }
  }
  return ds;
}

Graph load_edge_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Edge> edges;
  std::size_t declared_n = 0;
  bool has_declared_n = false;
  NodeId max_id = 0;
  bool any_edge = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto tokens = split_whitespace(view);
    if (tokens[0] == "%n") {
      if (tokens.size() != 2 || !parse_number(tokens[1], declared_n)) {
        parse_error(path, line_no, "malformed %n header");
      }
      has_declared_n = true;
      continue;
    }
    NodeId u = 0;
    NodeId v = 0;
    if (tokens.size() != 2 || !parse_number(tokens[0], u) || !parse_number(tokens[1], v)) {
      parse_error(path, line_no, "expected two non-negative node ids");
    }
    if (u == v) {
      throw Error(ErrorCode::SelfLoopInFile,
                  path.string() + ":" + std::to_string(line_no) + ": self-loop on node " +
                      std::to_string(u),
                  line_no);
    }
    edges.emplace_back(u, v);
    max_id = std::max({max_id, u, v});
    any_edge = true;
  }
  const std::size_t n = has_declared_n ? declared_n : (any_edge ? max_id + 1 : 0);
  if (any_edge && max_id >= n) {
    throw Error(ErrorCode::IndexOutOfRange, path.string() + ": node id " +
                                                std::to_string(max_id) + " >= declared count " +
                                                std::to_string(n));
  }
  return Graph(n, edges);
}

Matrix load_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const auto comma = view.find(',', pos);
      const auto field = trim(view.substr(pos, comma == std::string_view::npos ? view.npos : comma - pos));
      double value = 0.0;
      if (!parse_number(field, value)) parse_error(path, line_no, "bad number '" + std::string(field) + "'");
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_error(path, line_no, "expected " + std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto cols = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
  Matrix x(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) x(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
  }
  return x;
}

std::vector<Label> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Label> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    Label l = 0;
    if (!parse_number(view, l) || l < 0) parse_error(path, line_no, "expected a non-negative class id");
    labels.push_back(l);
  }
  return labels;
}

void save_edge_list(const Graph& g, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "%n " << g.num_nodes() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  finish_output(out, path);
}

void save_features(const Matrix& x, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(x(i, c));
    }
    out << '\n';
  }
  finish_output(out, path);
}

void save_labels(std::span<const Label> labels, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (Label l : labels) out << l << '\n';
  finish_output(out, path);
}

Dataset load_dataset(const std::filesystem::path& edges, const std::filesystem::path& features,
                     const std::filesystem::path& labels) {
  Dataset ds;
  ds.graph = load_edge_list(edges);
  ds.features = load_features(features);
  ds.labels = load_labels(labels);
  // Trailing isolated nodes may be absent from an edge list without %n.
  if (ds.graph.num_nodes() < ds.labels.size()) {
    Graph padded(ds.labels.size(), ds.graph.edges());
    ds.graph = std::move(padded);
  }
  Label max_label = -1;
  for (Label l : ds.labels) max_label = std::max(max_label, l);
  ds.class_count = max_label + 1;
  ds.validate();
  return ds;
}

}  // namespace oversmooth
