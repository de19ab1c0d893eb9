#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "laf/laf.hpp"
#include "support/fixtures.hpp"

using namespace laf;

namespace {

PartialNeighborMap make_map(std::initializer_list<std::pair<std::size_t, std::set<std::size_t>>> init) {
  PartialNeighborMap e;
  for (const auto& [k, v] : init) {
    e.ensure(k);
    for (std::size_t x : v) e.add(k, x);
  }
  return e;
}

} // namespace

TEST(UpdatePartialNeighbors, EmptyMapUnchanged) {
  PartialNeighborMap e;
  const std::vector<std::size_t> nb{0, 1, 2};
  update_partial_neighbors(0, nb, e);
  EXPECT_TRUE(e.empty());
}

TEST(UpdatePartialNeighbors, SingleKey) {
  constexpr std::size_t A = 0, B = 1;
  auto e = make_map({{B, {}}});
  const std::vector<std::size_t> nb{A, B};
  update_partial_neighbors(A, nb, e);
  EXPECT_EQ(e, make_map({{B, {A}}}));
}

TEST(UpdatePartialNeighbors, HandTrace) {
  constexpr std::size_t A = 0, B = 1, C = 2, D = 3, X = 4;
  auto e = make_map({{B, {X}}, {C, {}}});
  const std::vector<std::size_t> nb{B, C, D};
  update_partial_neighbors(A, nb, e);
  EXPECT_EQ(e, make_map({{B, {X, A}}, {C, {A}}}));
  EXPECT_FALSE(e.contains(D));
}

TEST(PostProcessing, EmptyMapUnchanged) {
  const ClusterAssignment c{{1, 1, kNoise, 2}, 2};
  EXPECT_EQ(post_processing(c, {}, 2), c);
}

TEST(PostProcessing, MergesThroughNoiseBridge) {
  constexpr std::size_t A = 0, B = 1, P = 2;
  const ClusterAssignment c{{1, 2, kNoise}, 2};
  std::uint64_t merges = 0;
  const auto out = post_processing(c, make_map({{P, {A, B}}}), 2, {}, &merges);
  EXPECT_EQ(out.labels, (std::vector<Label>{1, 1, 1}));
  EXPECT_EQ(out.num_clusters, 1);
  EXPECT_EQ(merges, 1u);
}

TEST(PostProcessing, BelowThresholdUnchanged) {
  const ClusterAssignment c{{1, 2, kNoise}, 2};
  EXPECT_EQ(post_processing(c, make_map({{2, {0, 1}}}), 3), c);
}

TEST(PostProcessing, NoisePartialNeighborsStayNoise) {
  // 3 is noise; P has three partial neighbors so it is core, but only the
  // clustered ones move.
  const ClusterAssignment c{{1, 2, kNoise, kNoise, 3}, 3};
  const auto out = post_processing(c, make_map({{2, {0, 1, 3}}}), 3);
  EXPECT_EQ(out.labels, (std::vector<Label>{1, 1, 1, kNoise, 2}));
  EXPECT_EQ(out.num_clusters, 2);
}

TEST(PostProcessing, ChainedMergesCompose) {
  const ClusterAssignment c{{1, 2, 3, kNoise, kNoise}, 3};
  const auto out = post_processing(c, make_map({{3, {1, 2}}, {4, {0, 1}}}), 2);
  EXPECT_EQ(out.labels, (std::vector<Label>{1, 1, 1, 1, 1}));
  EXPECT_EQ(out.num_clusters, 1);
}

TEST(PostProcessing, RandomDestinationSamePartition) {
  const ClusterAssignment c{{1, 2, 3, kNoise, 4, 4}, 4};
  const auto e = make_map({{3, {0, 1, 2}}});
  const auto fixed = post_processing(c, e, 3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    MergeOptions opt;
    opt.random_destination = true;
    opt.seed = seed;
    EXPECT_TRUE(same_partition(post_processing(c, e, 3, opt), fixed));
  }
}

TEST(LafDbscan, WorkedCircleExample) {
  const Dataset d = laf::testing::six_point_circle();
  ClusterParams p;
  p.eps = 0.01;
  p.tau = 3;
  OracleEstimator oracle(d);
  RangeSearcher s(d, p.metric);
  const auto r = laf_dbscan(s, p, oracle);
  EXPECT_EQ(r.report.executed_queries, 1u);
  EXPECT_EQ(r.report.skipped_queries, 5u);
  EXPECT_EQ(s.query_count(), 1u);
  EXPECT_EQ(r.report.merges_performed, 0u);
  EXPECT_EQ(r.assignment, dbscan(d, p));
}

TEST(LafDbscan, OracleEquivalence) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = laf::testing::random_mixture(seed, 200, 16, 3, 0.3);
    OracleEstimator oracle(d);
    for (double eps : {0.05, 0.1, 0.2}) {
      for (std::size_t tau : {3, 6}) {
        ClusterParams p;
        p.eps = eps;
        p.tau = tau;
        const auto r = laf_dbscan(d, p, oracle);
        EXPECT_EQ(r.assignment, dbscan(d, p));
        EXPECT_EQ(r.report.merges_performed, 0u);
      }
    }
  }
}

TEST(LafDbscan, OracleEquivalenceEuclidean) {
  const Dataset d = laf::testing::random_mixture(21, 300, 8, 3, 0.3);
  ClusterParams p;
  p.metric = DistanceMetric::euclidean_equivalent;
  p.eps = 0.4;
  p.tau = 5;
  OracleEstimator oracle(d, p.metric);
  EXPECT_EQ(laf_dbscan(d, p, oracle).assignment, dbscan(d, p));
}

TEST(LafDbscan, AlwaysZeroEstimatorAllNoise) {
  const Dataset d = laf::testing::circle({0, 10, 20});
  ClusterParams p;
  p.eps = 2.1;
  p.tau = 1;
  ConstantEstimator zero(d.dim(), 0.0);
  const auto r = laf_dbscan(d, p, zero);
  EXPECT_EQ(r.assignment.labels, (std::vector<Label>(3, kNoise)));
  EXPECT_EQ(r.report.executed_queries, 0u);
  EXPECT_EQ(r.report.skipped_queries, 3u);
  EXPECT_EQ(r.partial_neighbors.size(), 3u);
}

TEST(LafDbscan, HugeEstimatorMatchesReferenceQueries) {
  const Dataset d = laf::testing::random_mixture(5, 150, 8, 3, 0.3);
  ClusterParams p;
  p.eps = 0.1;
  p.tau = 4;
  ConstantEstimator huge(d.dim(), std::numeric_limits<double>::infinity());
  const auto r = laf_dbscan(d, p, huge);
  EXPECT_EQ(r.assignment, dbscan(d, p));
  EXPECT_EQ(r.report.executed_queries, d.size());
  EXPECT_EQ(r.report.skipped_queries, 0u);
}

TEST(LafDbscan, ExecutedPlusSkippedIsAtMostN) {
  const Dataset d = laf::testing::random_mixture(6, 300, 16, 4, 0.3);
  ClusterParams p;
  p.eps = 0.1;
  p.tau = 5;
  SampleEstimator est(d, 0.3, 9);
  RangeSearcher s(d, p.metric);
  const auto r = laf_dbscan(s, p, est);
  EXPECT_EQ(r.report.executed_queries, s.query_count());
  EXPECT_LE(r.report.executed_queries + r.report.skipped_queries, d.size());
  EXPECT_EQ(r.report.estimator_calls, r.report.executed_queries + r.report.skipped_queries);
}

TEST(LafDbscan, PartialNeighborsOnlyForSkippedPoints) {
  const Dataset d = laf::testing::random_mixture(7, 300, 16, 4, 0.3);
  ClusterParams p;
  p.eps = 0.1;
  p.tau = 5;
  SampleEstimator est(d, 0.2, 3);
  const auto r = laf_dbscan(d, p, est);
  EXPECT_EQ(r.partial_neighbors.size(), r.report.skipped_queries);
  for (const auto& [key, partial] : r.partial_neighbors.entries()) {
    const auto truth = laf::testing::naive_neighbors(d, p.metric, key, p.eps);
    for (std::size_t q : partial) EXPECT_TRUE(std::binary_search(truth.begin(), truth.end(), q));
  }
}

TEST(LafDbscan, RepairsFalselyGatedBridge) {
  // Left chain, bridge at index 0, right chain; the bridge is the only link.
  const Dataset d = laf::testing::circle({0, -30, -24, -18, -12, -6, 6, 12, 18, 24, 30});
  ClusterParams p;
  p.eps = 1.0 - std::cos(8.0 * std::numbers::pi / 180.0);
  p.tau = 2;
  OracleEstimator oracle(d);
  laf::testing::ScriptedEstimator est(d, [&](std::size_t i, double eps) {
    return i == 0 ? 0.0 : oracle.predict(d[i], eps);
  });
  const auto r = laf_dbscan(d, p, est);
  EXPECT_EQ(r.pre_merge.num_clusters, 2);
  EXPECT_EQ(r.partial_neighbors.at(0), (std::set<std::size_t>{5, 6}));
  EXPECT_EQ(r.assignment.num_clusters, 1);
  EXPECT_TRUE(same_partition(r.assignment, dbscan(d, p)));
}

TEST(LafDbscan, DimensionMismatchRejected) {
  const Dataset d = laf::testing::six_point_circle();
  ConstantEstimator est(3, 1.0);
  EXPECT_THROW(laf_dbscan(d, ClusterParams{}, est), InvalidArgument);
}

TEST(LafDbscan, EstimatorErrorNamesPoint) {
  const Dataset d = laf::testing::six_point_circle();
  laf::testing::ScriptedEstimator est(d, [](std::size_t i, double) -> double {
    if (i == 2) throw std::runtime_error("boom");
    return 100.0;
  });
  ClusterParams p;
  p.eps = 0.01;
  p.tau = 3;
  try {
    laf_dbscan(d, p, est);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("point 2"), std::string::npos);
  }
}
