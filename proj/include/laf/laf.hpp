#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "laf/cardest.hpp"
#include "laf/dbscan.hpp"
#include "laf/detail/random.hpp"

namespace laf {

/// Predicted stop points and the partial neighbors found for them so far.
///
/// Keys are created only when the estimator gates a point out; a key's set
/// only ever receives points whose executed range query contained it.
class PartialNeighborMap {
public:
  using Entries = std::map<std::size_t, std::set<std::size_t>>;

  bool contains(std::size_t p) const { return entries_.count(p) != 0; }

  /// Adds `p` with an empty set unless already present.
  void ensure(std::size_t p) { entries_.try_emplace(p); }

  void add(std::size_t key, std::size_t neighbor) { entries_.at(key).insert(neighbor); }

  const std::set<std::size_t>& at(std::size_t p) const { return entries_.at(p); }
  const Entries& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool operator==(const PartialNeighborMap&) const = default;

private:
  Entries entries_;
};

/// For each neighbor already tracked in `e`, records `p` as one of its
/// partial neighbors. Never creates keys.
inline void update_partial_neighbors(std::size_t p, std::span<const std::size_t> neighbors,
                                     PartialNeighborMap& e) {
  if (e.empty()) return;
  for (std::size_t q : neighbors) {
    if (e.contains(q)) e.add(q, p);
  }
}

struct RunReport {
  std::uint64_t executed_queries = 0;
  std::uint64_t skipped_queries = 0;
  std::uint64_t estimator_calls = 0;
  std::uint64_t merges_performed = 0;
  std::chrono::nanoseconds wall_time{0};

  double wall_ms() const { return std::chrono::duration<double, std::milli>(wall_time).count(); }
};

/// How post-processing chooses the destination cluster. Only the resulting
/// cluster id differs between modes; the partition is the same.
struct MergeOptions {
  bool random_destination = false;
  std::uint64_t seed = 0;
};

/// Repairs clusters split by falsely gated core points.
///
/// Every P in `e` with at least `tau` partial neighbors is a proven core
/// point. All clusters containing one of its non-noise partial neighbors,
/// plus P's own cluster, are merged into the destination cluster, and P
/// joins it. Noise partial neighbors stay noise. Entries are processed in
/// ascending index; merges compose through a union-find over cluster ids,
/// and ids are compacted to 1..k at the end (order preserved).
inline ClusterAssignment post_processing(ClusterAssignment c, const PartialNeighborMap& e, std::size_t tau,
                                         const MergeOptions& opt = {}, std::uint64_t* merges = nullptr) {
  const auto k = static_cast<std::size_t>(c.num_clusters);
  std::vector<Label> parent(k + 1);
  std::iota(parent.begin(), parent.end(), Label{0});
  auto find = [&](Label x) {
    Label root = x;
    while (parent[root] != root) root = parent[root];
    while (parent[x] != root) {
      const Label next = parent[x];
      parent[x] = root;
      x = next;
    }
    return root;
  };
  std::uint64_t unions = 0;
  auto unite = [&](Label a, Label b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
    ++unions;
  };

  detail::Rng rng(opt.seed);
  std::vector<std::pair<std::size_t, Label>> joins;
  for (const auto& [p, partial] : e.entries()) {
    if (partial.size() < tau) continue;
    std::vector<std::size_t> members;
    for (std::size_t q : partial) {
      if (c.labels.at(q) > 0) members.push_back(q);
    }
    if (members.empty()) continue;

    std::size_t chosen = members.front();
    if (opt.random_destination) {
      chosen = members[rng.below(members.size())];
    } else {
      for (std::size_t q : members) {
        if (c.labels[q] < c.labels[chosen]) chosen = q;
      }
    }
    const Label dest = c.labels[chosen];
    for (std::size_t q : members) unite(dest, c.labels[q]);
    if (c.labels.at(p) > 0) {
      unite(dest, c.labels[p]);
    } else {
      joins.emplace_back(p, dest);
    }
  }

  for (Label& l : c.labels) {
    if (l > 0) l = find(l);
  }
  for (const auto& [p, dest] : joins) c.labels[p] = find(dest);
  compact_cluster_ids(c);
  if (merges) *merges = unions;
  return c;
}

struct LafOptions {
  MergeOptions merge;
};

struct LafResult {
  ClusterAssignment assignment;
  /// Labels before post-processing.
  ClusterAssignment pre_merge;
  PartialNeighborMap partial_neighbors;
  RunReport report;
};

namespace detail {

inline double checked_predict(const CardinalityEstimator& est, const Dataset& data, std::size_t p, double eps) {
  try {
    return est.predict(data[p], eps);
  } catch (const std::exception& ex) {
    throw Error("cardinality estimation failed for point " + std::to_string(p) + ": " + ex.what());
  }
}

inline void check_estimator(const CardinalityEstimator& est, const Dataset& data) {
  if (est.dim() != data.dim()) {
    throw InvalidArgument("estimator dimension " + std::to_string(est.dim()) +
                          " does not match dataset dimension " + std::to_string(data.dim()));
  }
}

} // namespace detail

/// DBSCAN with every range query gated by the cardinality estimator.
///
/// A point whose predicted count is below alpha * tau is treated as a stop
/// point and its query is skipped; it is recorded in the partial-neighbor
/// map, which later queries fill in. Post-processing then merges clusters
/// split by points that turn out to have at least tau partial neighbors.
inline LafResult laf_dbscan(RangeSearcher& searcher, const ClusterParams& params,
                            const CardinalityEstimator& estimator, const LafOptions& opt = {}) {
  params.validate();
  const Dataset& data = searcher.dataset();
  detail::check_estimator(estimator, data);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = data.size();
  const double gate = params.gate();
  const double est_eps = params.cosine_eps();

  LafResult r;
  auto& c = r.assignment;
  auto& e = r.partial_neighbors;
  auto& rep = r.report;
  c.labels.assign(n, kUndefined);

  auto predicted_core = [&](std::size_t p) {
    ++rep.estimator_calls;
    return detail::checked_predict(estimator, data, p, est_eps) >= gate;
  };
  auto query = [&](std::size_t p) {
    ++rep.executed_queries;
    auto nb = searcher.range_query(p, params.eps);
    update_partial_neighbors(p, nb, e);
    return nb;
  };

  std::vector<std::uint8_t> in_seeds(n, 0);
  std::vector<std::size_t> seeds;
  for (std::size_t p = 0; p < n; ++p) {
    if (c.labels[p] != kUndefined) continue;
    if (!predicted_core(p)) {
      c.labels[p] = kNoise;
      e.ensure(p);
      ++rep.skipped_queries;
      continue;
    }
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
      if (predicted_core(q)) {
        auto qnb = query(q);
        if (qnb.size() >= params.tau) {
          for (std::size_t s : qnb) {
            if (!in_seeds[s]) {
              in_seeds[s] = 1;
              seeds.push_back(s);
            }
          }
        }
      } else {
        e.ensure(q);
        ++rep.skipped_queries;
      }
    }
    in_seeds[p] = 0;
    for (std::size_t q : seeds) in_seeds[q] = 0;
  }

  r.pre_merge = c;
  c = post_processing(std::move(c), e, params.tau, opt.merge, &rep.merges_performed);
  rep.wall_time = std::chrono::steady_clock::now() - start;
  return r;
}

inline LafResult laf_dbscan(const Dataset& data, const ClusterParams& params,
                            const CardinalityEstimator& estimator, const LafOptions& opt = {}) {
  RangeSearcher searcher(data, params.metric);
  return laf_dbscan(searcher, params, estimator, opt);
}

} // namespace laf
