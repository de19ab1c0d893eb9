#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "laf/laf.hpp"

namespace laf {

struct SamplingParams {
  double p = 1.0;     // sample fraction in (0, 1]
  double delta = 0.1; // offset added to the predicted core ratio when auto_p is set
  std::uint64_t seed = 0;
  bool auto_p = false;
  /// Non-sampled points farther than eps from every core point become noise.
  /// When false they join the globally nearest core point instead.
  bool bounded_assignment = true;
};

struct SamplingResult {
  ClusterAssignment assignment;
  ClusterAssignment pre_merge;
  PartialNeighborMap partial_neighbors;
  RunReport report;
  std::vector<std::size_t> sampled;
  double effective_p = 0.0;
};

/// Fraction of points whose predicted count reaches tau.
inline double predicted_core_ratio(const Dataset& data, const ClusterParams& params,
                                   const CardinalityEstimator& estimator) {
  if (data.empty()) return 0.0;
  detail::check_estimator(estimator, data);
  const double eps = params.cosine_eps();
  const auto tau = static_cast<double>(params.tau);
  std::size_t core = 0;
  for (std::size_t p = 0; p < data.size(); ++p) {
    if (detail::checked_predict(estimator, data, p, eps) >= tau) ++core;
  }
  return static_cast<double>(core) / static_cast<double>(data.size());
}

namespace detail {

/// Shared body of DBSCAN++ and its gated variant. `gate` may be null.
inline SamplingResult run_sampled(RangeSearcher& searcher, const ClusterParams& params,
                                  const SamplingParams& s, const CardinalityEstimator* gate,
                                  const CardinalityEstimator* ratio_estimator, const MergeOptions& merge) {
  params.validate();
  const auto start = std::chrono::steady_clock::now();
  const Dataset& data = searcher.dataset();
  const std::size_t n = data.size();
  SamplingResult r;
  auto& c = r.assignment;
  auto& rep = r.report;
  auto& e = r.partial_neighbors;
  c.labels.assign(n, kUndefined);
  if (gate) check_estimator(*gate, data);

  double frac = s.p;
  if (s.auto_p) {
    if (!(s.delta >= 0.0 && s.delta < 1.0)) throw InvalidArgument("delta must be in [0, 1)");
    if (!ratio_estimator) throw InvalidArgument("automatic sample fraction needs an estimator");
    frac = std::min(1.0, s.delta + predicted_core_ratio(data, params, *ratio_estimator));
  }
  if (!(frac > 0.0 && frac <= 1.0)) throw InvalidArgument("sample fraction must be in (0, 1]");
  if (frac * static_cast<double>(n) < 1.0) {
    throw InvalidArgument("sample fraction " + std::to_string(frac) + " selects no point out of " +
                          std::to_string(n));
  }
  r.effective_p = frac;
  const auto m = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-9));
  r.sampled = sample_without_replacement(n, m, s.seed);
  std::vector<std::uint8_t> sampled(n, 0);
  for (std::size_t p : r.sampled) sampled[p] = 1;

  // Core detection on the sample, against the full dataset. All gate
  // decisions are taken before the first query; every executed query then
  // feeds the partial-neighbor map.
  std::vector<std::uint8_t> skip(n, 0);
  if (gate) {
    const double gate_value = params.gate();
    const double eps = params.cosine_eps();
    for (std::size_t p : r.sampled) {
      ++rep.estimator_calls;
      if (checked_predict(*gate, data, p, eps) < gate_value) {
        skip[p] = 1;
        e.ensure(p);
        ++rep.skipped_queries;
      }
    }
  }
  std::unordered_map<std::size_t, std::vector<std::size_t>> core_neighbors;
  for (std::size_t p : r.sampled) {
    if (skip[p]) continue;
    auto nb = searcher.range_query(p, params.eps);
    ++rep.executed_queries;
    if (gate) update_partial_neighbors(p, nb, e);
    if (nb.size() >= params.tau) core_neighbors.emplace(p, std::move(nb));
  }
  auto is_core = [&](std::size_t p) { return core_neighbors.count(p) != 0; };

  // Cluster growth inside the sample.
  std::vector<std::uint8_t> in_seeds(n, 0);
  std::vector<std::size_t> seeds;
  auto push_sampled = [&](const std::vector<std::size_t>& nb) {
    for (std::size_t q : nb) {
      if (sampled[q] && !in_seeds[q]) {
        in_seeds[q] = 1;
        seeds.push_back(q);
      }
    }
  };
  for (std::size_t p : r.sampled) {
    if (c.labels[p] != kUndefined) continue;
    if (!is_core(p)) {
      c.labels[p] = kNoise;
      continue;
    }
    const Label id = ++c.num_clusters;
    c.labels[p] = id;
    seeds.clear();
    in_seeds[p] = 1;
    push_sampled(core_neighbors.at(p));
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const std::size_t q = seeds[k];
      if (c.labels[q] == kNoise) c.labels[q] = id;
      if (c.labels[q] != kUndefined) continue;
      c.labels[q] = id;
      if (is_core(q)) push_sampled(core_neighbors.at(q));
    }
    in_seeds[p] = 0;
    for (std::size_t q : seeds) in_seeds[q] = 0;
  }

  // Remaining points join their closest core point.
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> owner(n, n);
  std::vector<std::size_t> cores;
  cores.reserve(core_neighbors.size());
  for (std::size_t p : r.sampled) {
    if (is_core(p)) cores.push_back(p);
  }
  auto offer = [&](std::size_t q, std::size_t core) {
    const double d = distance(params.metric, data[q], data[core]);
    if (d < best[q] || (d == best[q] && core < owner[q])) {
      best[q] = d;
      owner[q] = core;
    }
  };
  for (std::size_t core : cores) {
    for (std::size_t q : core_neighbors.at(core)) {
      if (!sampled[q]) offer(q, core);
    }
  }
  for (std::size_t q = 0; q < n; ++q) {
    if (sampled[q]) continue;
    if (owner[q] == n && !s.bounded_assignment) {
      for (std::size_t core : cores) offer(q, core);
    }
    c.labels[q] = owner[q] == n ? kNoise : c.labels[owner[q]];
  }

  r.pre_merge = c;
  if (gate) c = post_processing(std::move(c), e, params.tau, merge, &rep.merges_performed);
  rep.wall_time = std::chrono::steady_clock::now() - start;
  return r;
}

} // namespace detail

/// DBSCAN++: only a uniform sample of ceil(p * n) points is range-queried and
/// clusters grow over the sampled core points. Every other point takes the
/// cluster of its closest core point, or noise if none lies within eps
/// (unless unbounded assignment is requested).
///
/// `ratio_estimator` is consulted only when `s.auto_p` is set.
inline SamplingResult dbscan_pp(RangeSearcher& searcher, const ClusterParams& params, const SamplingParams& s,
                                const CardinalityEstimator* ratio_estimator = nullptr) {
  return detail::run_sampled(searcher, params, s, nullptr, ratio_estimator, {});
}

inline SamplingResult dbscan_pp(const Dataset& data, const ClusterParams& params, const SamplingParams& s,
                                const CardinalityEstimator* ratio_estimator = nullptr) {
  RangeSearcher searcher(data, params.metric);
  return dbscan_pp(searcher, params, s, ratio_estimator);
}

/// DBSCAN++ with each sampled point's range query gated by `estimator`,
/// partial-neighbor tracking, and the post-processing merge.
inline SamplingResult laf_dbscan_pp(RangeSearcher& searcher, const ClusterParams& params,
                                    const SamplingParams& s, const CardinalityEstimator& estimator,
                                    const LafOptions& opt = {}) {
  return detail::run_sampled(searcher, params, s, &estimator, &estimator, opt.merge);
}

inline SamplingResult laf_dbscan_pp(const Dataset& data, const ClusterParams& params, const SamplingParams& s,
                                    const CardinalityEstimator& estimator, const LafOptions& opt = {}) {
  RangeSearcher searcher(data, params.metric);
  return laf_dbscan_pp(searcher, params, s, estimator, opt);
}

} // namespace laf
