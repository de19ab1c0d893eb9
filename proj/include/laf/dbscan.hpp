#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "laf/neighbors.hpp"

namespace laf {

using Label = std::int32_t;

/// Label of a point not yet visited. Never present in a finished run.
inline constexpr Label kUndefined = 0;
inline constexpr Label kNoise = -1;

/// Parameters of one clustering run.
struct ClusterParams {
  double eps = 0.5;   // strict neighbor radius, in units of `metric`
  std::size_t tau = 5; // minimum neighborhood size, self included
  double alpha = 1.0; // estimator gate factor; ignored by the reference algorithm
  DistanceMetric metric = DistanceMetric::cosine;

  void validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw InvalidArgument("eps must be a positive finite number");
    }
    if (tau < 1) throw InvalidArgument("tau must be at least 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw InvalidArgument("alpha must be a positive finite number");
    }
  }

  /// Gate threshold alpha * tau.
  double gate() const { return alpha * static_cast<double>(tau); }

  /// eps expressed as a cosine distance, the unit estimators are trained on.
  double cosine_eps() const {
    if (metric == DistanceMetric::cosine) return eps;
    return 0.5 * eps * eps;
  }
};

/// Point -> cluster map. Cluster ids are 1..num_clusters; kNoise marks noise.
struct ClusterAssignment {
  std::vector<Label> labels;
  Label num_clusters = 0;

  std::size_t size() const { return labels.size(); }
  bool operator==(const ClusterAssignment&) const = default;
};

/// Relabels clusters in order of first appearance (by point index). Two
/// assignments describe the same partition iff their canonical forms match.
inline ClusterAssignment canonical(const ClusterAssignment& c) {
  ClusterAssignment out;
  out.labels.resize(c.labels.size());
  std::unordered_map<Label, Label> remap;
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    const Label l = c.labels[i];
    if (l == kNoise || l == kUndefined) {
      out.labels[i] = l;
      continue;
    }
    auto [it, inserted] = remap.try_emplace(l, static_cast<Label>(remap.size() + 1));
    out.labels[i] = it->second;
  }
  out.num_clusters = static_cast<Label>(remap.size());
  return out;
}

inline bool same_partition(const ClusterAssignment& a, const ClusterAssignment& b) {
  return canonical(a).labels == canonical(b).labels;
}

/// Maps surviving cluster ids to 1..k preserving their relative order.
inline void compact_cluster_ids(ClusterAssignment& c) {
  Label max_id = 0;
  for (Label l : c.labels) max_id = std::max(max_id, l);
  std::vector<Label> remap(static_cast<std::size_t>(max_id) + 1, 0);
  for (Label l : c.labels) {
    if (l > 0) remap[static_cast<std::size_t>(l)] = 1;
  }
  Label next = 0;
  for (auto& r : remap) {
    if (r) r = ++next;
  }
  for (Label& l : c.labels) {
    if (l > 0) l = remap[static_cast<std::size_t>(l)];
  }
  c.num_clusters = next;
}

/// Optional record of which points were queried and which were found core.
struct DbscanTrace {
  std::vector<std::size_t> queried;
  std::vector<std::size_t> core;
};

/// Exact DBSCAN over `searcher`'s dataset.
///
/// Points are visited in ascending index order. A border point reachable
/// from several clusters keeps the first cluster that reaches it. Every
/// point is range-queried at most once.
inline ClusterAssignment dbscan(RangeSearcher& searcher, const ClusterParams& params,
                                DbscanTrace* trace = nullptr) {
  params.validate();
  const std::size_t n = searcher.dataset().size();
  ClusterAssignment c;
  c.labels.assign(n, kUndefined);

  auto query = [&](std::size_t p) {
    auto nb = searcher.range_query(p, params.eps);
    if (trace) {
      trace->queried.push_back(p);
      if (nb.size() >= params.tau) trace->core.push_back(p);
    }
    return nb;
  };

  std::vector<std::uint8_t> in_seeds(n, 0);
  std::vector<std::size_t> seeds;
  for (std::size_t p = 0; p < n; ++p) {
    if (c.labels[p] != kUndefined) continue;
    auto nb = query(p);
    if (nb.size() < params.tau) {
      c.labels[p] = kNoise;
      continue;
    }
    const Label id = ++c.num_clusters;
    c.labels[p] = id;

    seeds.clear();
    in_seeds[p] = 1;
    for (std::size_t q : nb) {
      if (!in_seeds[q]) {
        in_seeds[q] = 1;
        seeds.push_back(q);
      }
    }
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const std::size_t q = seeds[k];
      if (c.labels[q] == kNoise) c.labels[q] = id;
      if (c.labels[q] != kUndefined) continue;
      c.labels[q] = id;
      auto qnb = query(q);
      if (qnb.size() >= params.tau) {
        for (std::size_t r : qnb) {
          if (!in_seeds[r]) {
            in_seeds[r] = 1;
            seeds.push_back(r);
          }
        }
      }
    }
    in_seeds[p] = 0;
    for (std::size_t q : seeds) in_seeds[q] = 0;
  }
  return c;
}

inline ClusterAssignment dbscan(const Dataset& data, const ClusterParams& params) {
  RangeSearcher searcher(data, params.metric);
  return dbscan(searcher, params);
}

} // namespace laf
