#include "oversmooth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oversmooth/error.hpp"

namespace oversmooth {
namespace {

struct RowGeometry {
  Matrix unit;
  Eigen::VectorXd norms;
};

RowGeometry row_geometry(const Matrix& h) {
  RowGeometry g{h, h.rowwise().norm()};
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    if (g.norms(i) > 0.0) g.unit.row(i) /= g.norms(i);
  }
  return g;
}

double clamp_cosine(double c) { return std::clamp(c, -1.0, 1.0); }

double snap_distance(double d) { return d <= kZeroDistanceTolerance ? 0.0 : d; }

double pair_distance(const RowGeometry& g, Eigen::Index i, Eigen::Index j) {
  if (g.norms(i) == 0.0 || g.norms(j) == 0.0) return 1.0;
  if (i == j) return 0.0;
  return snap_distance(1.0 - clamp_cosine(g.unit.row(i).dot(g.unit.row(j))));
}

void check_finite(const Matrix& h) {
  if (!h.allFinite()) throw Error(ErrorCode::InvalidArgument, "embedding matrix has non-finite entries");
}

void check_mask(const Matrix& h, const PairMask& mask) {
  if (static_cast<std::size_t>(h.rows()) != mask.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mask is " + std::to_string(mask.size()) +
                                                  " square but H has " + std::to_string(h.rows()) +
                                                  " rows");
  }
}

double mad_with(const RowGeometry& geo, const PairMask& mask) {
  const auto n = static_cast<Eigen::Index>(mask.size());
  double row_sum_total = 0.0;
  std::size_t rows_counted = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    std::size_t positive = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!mask(i, j)) continue;
      const double d = pair_distance(geo, i, j);
      if (d > 0.0) {
        sum += d;
        ++positive;
      }
    }
    if (positive > 0) {
      row_sum_total += sum / static_cast<double>(positive);
      ++rows_counted;
    }
  }
  if (rows_counted == 0) throw Error(ErrorCode::EmptyTarget, "no positive masked distance");
  return row_sum_total / static_cast<double>(rows_counted);
}

// Accumulates scale * dMAD/dH into grad. Zero when no row has a positive
// masked distance.
void accumulate_mad_gradient(const RowGeometry& geo, const PairMask& mask, double scale,
                             Matrix& grad) {
  const auto n = static_cast<Eigen::Index>(mask.size());
  std::vector<std::size_t> positive(static_cast<std::size_t>(n), 0);
  std::size_t rows_counted = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!mask(i, j)) continue;
      if (geo.norms(i) == 0.0 || geo.norms(j) == 0.0) {
        throw Error(ErrorCode::ZeroNormRow, "selected pair (" + std::to_string(i) + ", " +
                                                std::to_string(j) + ") touches a zero row");
      }
      if (pair_distance(geo, i, j) > 0.0) ++positive[static_cast<std::size_t>(i)];
    }
    if (positive[static_cast<std::size_t>(i)] > 0) ++rows_counted;
  }
  if (rows_counted == 0) return;

  const double outer = scale / static_cast<double>(rows_counted);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto count = positive[static_cast<std::size_t>(i)];
    if (count == 0) continue;
    const double w = outer / static_cast<double>(count);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!mask(i, j) || pair_distance(geo, i, j) <= 0.0) continue;
      const double cosine = clamp_cosine(geo.unit.row(i).dot(geo.unit.row(j)));
      // d(1 - cos)/dH_i = -(u_j - cos u_i) / |H_i|, symmetric in j.
      grad.row(i) -= (w / geo.norms(i)) * (geo.unit.row(j) - cosine * geo.unit.row(i));
      grad.row(j) -= (w / geo.norms(j)) * (geo.unit.row(i) - cosine * geo.unit.row(j));
    }
  }
}

template <typename Pred>
PairMask build_mask(std::size_t n, std::optional<std::span<const NodeId>> subset, Pred&& selected) {
  PairMask mask(n);
  if (subset) {
    for (NodeId a : *subset) {
      if (a >= n) throw Error(ErrorCode::IndexOutOfRange, "subset node " + std::to_string(a));
    }
    for (NodeId a : *subset) {
      for (NodeId b : *subset) {
        if (a != b && selected(a, b)) mask.select(a, b);
      }
    }
    return mask;
  }
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (selected(i, j)) mask.select(i, j);
    }
  }
  return mask;
}

}  // namespace

PairMask PairMask::all_pairs(std::size_t n) {
  PairMask m(n);
  std::fill(m.bits_.begin(), m.bits_.end(), 1);
  for (std::size_t i = 0; i < n; ++i) m.bits_[i * n + i] = 0;
  return m;
}

void PairMask::select(NodeId i, NodeId j) {
  if (i >= n_ || j >= n_) throw Error(ErrorCode::IndexOutOfRange, "mask pair out of range");
  if (i == j) return;
  bits_[i * n_ + j] = 1;
  bits_[j * n_ + i] = 1;
}

std::size_t PairMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

PairMask PairMask::restricted_to(std::span<const NodeId> nodes) const {
  PairMask out(nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      if (a != b && (*this)(nodes[a], nodes[b])) out.bits_[a * out.n_ + b] = 1;
    }
  }
  return out;
}

void MetricConfig::validate() const {
  if (neb_max_order < 1 || neb_max_order >= rmt_min_order) {
    throw Error(ErrorCode::InvalidArgument, "need 1 <= neb_max_order < rmt_min_order, got " +
                                                std::to_string(neb_max_order) + " and " +
                                                std::to_string(rmt_min_order));
  }
}

Matrix cosine_distance_matrix(const Matrix& h) {
  check_finite(h);
  const auto geo = row_geometry(h);
  const auto n = h.rows();
  Matrix cos = geo.unit * geo.unit.transpose();
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (geo.norms(i) == 0.0 || geo.norms(j) == 0.0) {
        d(i, j) = 1.0;
      } else if (i == j) {
        d(i, j) = 0.0;
      } else {
        // Symmetrize so rounding in the product cannot break D == D^T.
        d(i, j) = snap_distance(1.0 - clamp_cosine(i < j ? cos(i, j) : cos(j, i)));
      }
    }
  }
  return d;
}

double mad(const Matrix& h, const PairMask& mask) {
  check_finite(h);
  check_mask(h, mask);
  return mad_with(row_geometry(h), mask);
}

double mad_global(const Matrix& h) {
  return mad(h, PairMask::all_pairs(static_cast<std::size_t>(h.rows())));
}

PairMask neighbour_mask(const HopOrderMatrix& orders, const MetricConfig& cfg,
                        std::optional<std::span<const NodeId>> subset) {
  cfg.validate();
  return build_mask(orders.size(), subset, [&](NodeId i, NodeId j) {
    const auto o = orders(i, j);
    if (o == HopOrderMatrix::kUnreachable) return false;
    return o >= 1 && o <= cfg.neb_max_order;
  });
}

PairMask remote_mask(const HopOrderMatrix& orders, const MetricConfig& cfg,
                     std::optional<std::span<const NodeId>> subset) {
  cfg.validate();
  if (orders.max_order() < cfg.rmt_min_order) {
    throw Error(ErrorCode::InvalidArgument, "hop orders truncated at " +
                                                std::to_string(orders.max_order()) +
                                                ", below rmt_min_order " +
                                                std::to_string(cfg.rmt_min_order));
  }
  return build_mask(orders.size(), subset, [&](NodeId i, NodeId j) {
    const auto o = orders(i, j);
    if (o != HopOrderMatrix::kUnreachable) return static_cast<int>(o) >= cfg.rmt_min_order;
    if (orders.connected(i, j)) return true;
    return cfg.include_unreachable_in_remote;
  });
}

MadGapMasks madgap_masks(const Graph& g, const MetricConfig& cfg,
                         std::optional<std::span<const NodeId>> subset) {
  cfg.validate();
  const auto orders = hop_orders(g, cfg.rmt_min_order);
  return {neighbour_mask(orders, cfg, subset), remote_mask(orders, cfg, subset)};
}

MadGapTerms madgap_terms(const Matrix& h, const MadGapMasks& masks) {
  check_finite(h);
  check_mask(h, masks.remote);
  check_mask(h, masks.neighbour);
  const auto geo = row_geometry(h);
  MadGapTerms t;
  try {
    t.remote = mad_with(geo, masks.remote);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyTarget) throw;
    throw Error(ErrorCode::NoRemotePairs, "MAD over remote pairs is undefined");
  }
  try {
    t.neighbour = mad_with(geo, masks.neighbour);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyTarget) throw;
    throw Error(ErrorCode::NoNeighbourPairs, "MAD over neighbouring pairs is undefined");
  }
  t.gap = t.remote - t.neighbour;
  return t;
}

double madgap(const Matrix& h, const Graph& g, const MetricConfig& cfg,
              std::optional<std::span<const NodeId>> subset) {
  if (static_cast<std::size_t>(h.rows()) != g.num_nodes()) {
    throw Error(ErrorCode::DimensionMismatch, "H rows differ from graph node count");
  }
  return madgap_terms(h, madgap_masks(g, cfg, subset)).gap;
}

Matrix madgap_gradient(const Matrix& h, const MadGapMasks& masks) {
  check_finite(h);
  check_mask(h, masks.remote);
  check_mask(h, masks.neighbour);
  if (masks.remote.empty() || masks.neighbour.empty()) {
    throw Error(ErrorCode::UndefinedGap, "MADGap needs both remote and neighbouring pairs");
  }
  const auto geo = row_geometry(h);
  Matrix grad = Matrix::Zero(h.rows(), h.cols());
  accumulate_mad_gradient(geo, masks.remote, 1.0, grad);
  accumulate_mad_gradient(geo, masks.neighbour, -1.0, grad);
  return grad;
}

Matrix madgap_gradient(const Matrix& h, const Graph& g, const MetricConfig& cfg) {
  if (static_cast<std::size_t>(h.rows()) != g.num_nodes()) {
    throw Error(ErrorCode::DimensionMismatch, "H rows differ from graph node count");
  }
  return madgap_gradient(h, madgap_masks(g, cfg));
}

InfoNoiseReport info_to_noise_ratio(const Graph& g, std::span<const Label> labels, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "order k must be >= 1");
  return info_to_noise_ratio(hop_orders(g, k), labels, k);
}

InfoNoiseReport info_to_noise_ratio(const HopOrderMatrix& orders, std::span<const Label> labels,
                                    int k) {
  if (k < 1 || k > orders.max_order()) {
    throw Error(ErrorCode::InvalidArgument, "order k must lie in [1, max_order]");
  }
  const std::size_t n = orders.size();
  if (labels.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "labels length differs from node count");
  }
  InfoNoiseReport report;
  report.order_k = k;
  report.per_node.resize(n);
  std::size_t intra_total = 0;
  std::size_t contact_total = 0;
  for (NodeId i = 0; i < n; ++i) {
    std::size_t intra = 0;
    std::size_t contact = 0;
    for (NodeId j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto o = orders(i, j);
      if (o == HopOrderMatrix::kUnreachable || o < 1 || o > k) continue;
      ++contact;
      if (labels[j] == labels[i]) ++intra;
    }
    if (contact > 0) {
      report.per_node[i] = static_cast<double>(intra) / static_cast<double>(contact);
    }
    intra_total += intra;
    contact_total += contact;
  }
  if (contact_total > 0) {
    report.global = static_cast<double>(intra_total) / static_cast<double>(contact_total);
  }
  return report;
}

}  // namespace oversmooth
