#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "laf/dbscan.hpp"

namespace laf {

/// Sparse co-occurrence counts between two labelings of the same points.
/// Rows index distinct `truth` labels, columns distinct `pred` labels, both
/// in order of first appearance.
struct ContingencyTable {
  struct Cell {
    std::size_t row;
    std::size_t col;
    std::size_t count;
  };
  std::vector<Cell> cells; // nonzero cells only
  std::vector<std::size_t> row_sums;
  std::vector<std::size_t> col_sums;
  std::size_t total = 0;

  template <typename L>
  static ContingencyTable build(std::span<const L> truth, std::span<const L> pred) {
    if (truth.size() != pred.size()) {
      throw InvalidArgument("label arrays differ in length: " + std::to_string(truth.size()) + " vs " +
                            std::to_string(pred.size()));
    }
    ContingencyTable t;
    std::unordered_map<L, std::size_t> rows, cols;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> counts;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      auto [ri, r_new] = rows.try_emplace(truth[i], rows.size());
      auto [ci, c_new] = cols.try_emplace(pred[i], cols.size());
      if (r_new) t.row_sums.push_back(0);
      if (c_new) t.col_sums.push_back(0);
      ++t.row_sums[ri->second];
      ++t.col_sums[ci->second];
      ++counts[{ri->second, ci->second}];
    }
    for (const auto& [rc, n] : counts) t.cells.push_back({rc.first, rc.second, n});
    t.total = truth.size();
    return t;
  }
};

namespace detail {

inline double choose2(std::size_t n) {
  const auto x = static_cast<double>(n);
  return x * (x - 1.0) / 2.0;
}

template <typename L>
bool same_partition_labels(std::span<const L> a, std::span<const L> b) {
  std::unordered_map<L, L> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [x, nx] = ab.try_emplace(a[i], b[i]);
    auto [y, ny] = ba.try_emplace(b[i], a[i]);
    if (x->second != b[i] || y->second != a[i]) return false;
  }
  return true;
}

inline double entropy(const std::vector<std::size_t>& sums, std::size_t total) {
  double h = 0.0;
  const auto n = static_cast<double>(total);
  for (std::size_t s : sums) {
    if (s == 0) continue;
    const double p = static_cast<double>(s) / n;
    h -= p * std::log(p);
  }
  return h;
}

} // namespace detail

/// Mutual information (natural log) of a contingency table.
inline double mutual_information(const ContingencyTable& t) {
  const auto n = static_cast<double>(t.total);
  double mi = 0.0;
  for (const auto& c : t.cells) {
    const auto nij = static_cast<double>(c.count);
    mi += nij / n *
          std::log(n * nij / (static_cast<double>(t.row_sums[c.row]) * static_cast<double>(t.col_sums[c.col])));
  }
  return std::max(0.0, mi);
}

/// Expected mutual information under random permutation of the labels
/// (hypergeometric model), summed exactly with log-factorials.
inline double expected_mutual_information(const ContingencyTable& t) {
  const std::size_t n = t.total;
  if (n == 0) return 0.0;
  const auto nd = static_cast<double>(n);
  std::vector<double> lfact(n + 1);
  for (std::size_t i = 0; i <= n; ++i) lfact[i] = std::lgamma(static_cast<double>(i) + 1.0);
  double emi = 0.0;
  for (std::size_t a : t.row_sums) {
    for (std::size_t b : t.col_sums) {
      const std::size_t lo = std::max<std::size_t>(1, a + b > n ? a + b - n : 0);
      const std::size_t hi = std::min(a, b);
      const double fixed = lfact[a] + lfact[b] + lfact[n - a] + lfact[n - b] - lfact[n];
      for (std::size_t k = lo; k <= hi; ++k) {
        const auto kd = static_cast<double>(k);
        const double log_p = fixed - lfact[k] - lfact[a - k] - lfact[b - k] - lfact[n - a - b + k];
        emi += kd / nd * std::log(nd * kd / (static_cast<double>(a) * static_cast<double>(b))) * std::exp(log_p);
      }
    }
  }
  return emi;
}

/// Adjusted Rand index of two labelings. When both partitions are trivial
/// in a way that makes the index 0/0, returns 1 if they are the same
/// partition and 0 otherwise.
template <typename L>
double adjusted_rand_index(std::span<const L> truth, std::span<const L> pred) {
  const auto t = ContingencyTable::build(truth, pred);
  if (t.total < 2) return 1.0;
  double index = 0.0;
  for (const auto& c : t.cells) index += detail::choose2(c.count);
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (std::size_t a : t.row_sums) sum_a += detail::choose2(a);
  for (std::size_t b : t.col_sums) sum_b += detail::choose2(b);
  const double expected = sum_a * sum_b / detail::choose2(t.total);
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (std::abs(denom) < 1e-12) return detail::same_partition_labels(truth, pred) ? 1.0 : 0.0;
  return (index - expected) / denom;
}

/// Adjusted mutual information with arithmetic-mean normalisation. A zero
/// denominator yields 1 for identical partitions and 0 otherwise.
template <typename L>
double adjusted_mutual_information(std::span<const L> truth, std::span<const L> pred) {
  const auto t = ContingencyTable::build(truth, pred);
  if (t.total == 0) return 1.0;
  const double mi = mutual_information(t);
  const double emi = expected_mutual_information(t);
  const double mean_h =
      0.5 * (detail::entropy(t.row_sums, t.total) + detail::entropy(t.col_sums, t.total));
  const double denom = mean_h - emi;
  if (std::abs(denom) < 1e-12) return detail::same_partition_labels(truth, pred) ? 1.0 : 0.0;
  return (mi - emi) / denom;
}

template <typename L>
double adjusted_rand_index(const std::vector<L>& truth, const std::vector<L>& pred) {
  return adjusted_rand_index(std::span<const L>(truth), std::span<const L>(pred));
}

template <typename L>
double adjusted_mutual_information(const std::vector<L>& truth, const std::vector<L>& pred) {
  return adjusted_mutual_information(std::span<const L>(truth), std::span<const L>(pred));
}

/// How noise points enter ARI/AMI.
enum class NoiseMode {
  shared,    // all noise points form one pseudo-cluster
  singleton, // each noise point is its own cluster
};

/// Labels suitable for the generic metrics under `mode`.
inline std::vector<std::int64_t> metric_labels(const ClusterAssignment& c, NoiseMode mode) {
  std::vector<std::int64_t> out(c.labels.size());
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    const Label l = c.labels[i];
    if (l > 0) {
      out[i] = l;
    } else if (mode == NoiseMode::shared) {
      out[i] = 0;
    } else {
      out[i] = -static_cast<std::int64_t>(i) - 1;
    }
  }
  return out;
}

inline double adjusted_rand_index(const ClusterAssignment& truth, const ClusterAssignment& pred,
                                  NoiseMode mode = NoiseMode::shared) {
  return adjusted_rand_index(metric_labels(truth, mode), metric_labels(pred, mode));
}

inline double adjusted_mutual_information(const ClusterAssignment& truth, const ClusterAssignment& pred,
                                          NoiseMode mode = NoiseMode::shared) {
  return adjusted_mutual_information(metric_labels(truth, mode), metric_labels(pred, mode));
}

inline double noise_ratio(const ClusterAssignment& c) {
  if (c.labels.empty()) return 0.0;
  const auto noise = std::count(c.labels.begin(), c.labels.end(), kNoise);
  return static_cast<double>(noise) / static_cast<double>(c.labels.size());
}

/// Number of distinct cluster ids present.
inline std::size_t cluster_count(const ClusterAssignment& c) {
  std::vector<Label> ids;
  for (Label l : c.labels) {
    if (l > 0) ids.push_back(l);
  }
  std::sort(ids.begin(), ids.end());
  return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

// ---------------------------------------------------------------------------

struct GridThresholds {
  double max_noise_ratio = 0.6; // qualifying cells have strictly lower noise
  std::size_t min_clusters = 20; // and strictly more clusters
};

struct GridCell {
  double eps = 0.0;
  std::size_t tau = 0;
  double noise_ratio = 0.0;
  std::size_t cluster_count = 0;
  bool qualifies = false;
};

/// Runs reference DBSCAN for every (eps, tau) combination, eps-major, and
/// flags the cells meeting `limits`. Cells are spread over `threads`
/// workers; the output order does not depend on the thread count.
inline std::vector<GridCell> parameter_grid_search(const Dataset& data, std::span<const double> eps_grid,
                                                   std::span<const std::size_t> tau_grid,
                                                   const GridThresholds& limits = {},
                                                   DistanceMetric metric = DistanceMetric::cosine,
                                                   unsigned threads = 1) {
  if (eps_grid.empty() || tau_grid.empty()) throw InvalidArgument("grid search needs non-empty grids");
  std::vector<GridCell> cells;
  for (double eps : eps_grid) {
    for (std::size_t tau : tau_grid) cells.push_back({eps, tau, 0.0, 0, false});
  }
  for (auto& cell : cells) ClusterParams{cell.eps, cell.tau, 1.0, metric}.validate();

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      auto& cell = cells[i];
      const auto c = dbscan(data, ClusterParams{cell.eps, cell.tau, 1.0, metric});
      cell.noise_ratio = noise_ratio(c);
      cell.cluster_count = cluster_count(c);
      cell.qualifies = cell.noise_ratio < limits.max_noise_ratio && cell.cluster_count > limits.min_clusters;
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  return cells;
}

/// Ground-truth clusters whose every point is noise in the prediction.
struct MissedClusterReport {
  std::size_t missed_clusters = 0;  // MC
  std::size_t total_clusters = 0;   // TC
  std::size_t missed_points = 0;    // MP
  std::size_t clustered_points = 0; // TPC, non-noise ground-truth points
  double avg_missed_size = 0.0;     // ASMC = MP / MC, 0 when MC = 0
};

inline MissedClusterReport missed_cluster_report(const ClusterAssignment& truth, const ClusterAssignment& pred) {
  if (truth.size() != pred.size()) throw InvalidArgument("assignments differ in length");
  std::map<Label, std::pair<std::size_t, bool>> clusters; // size, fully missed so far
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Label l = truth.labels[i];
    if (l <= 0) continue;
    auto& [size, missed] = clusters.try_emplace(l, 0, true).first->second;
    ++size;
    missed = missed && pred.labels[i] == kNoise;
  }
  MissedClusterReport r;
  r.total_clusters = clusters.size();
  for (const auto& [id, info] : clusters) {
    r.clustered_points += info.first;
    if (info.second) {
      ++r.missed_clusters;
      r.missed_points += info.first;
    }
  }
  if (r.missed_clusters > 0) {
    r.avg_missed_size = static_cast<double>(r.missed_points) / static_cast<double>(r.missed_clusters);
  }
  return r;
}

} // namespace laf
