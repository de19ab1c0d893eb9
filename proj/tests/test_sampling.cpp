#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "laf/sampling.hpp"
#include "support/fixtures.hpp"

using namespace laf;
namespace lt = laf::testing;

namespace {

ClusterParams circle_params() {
  ClusterParams p;
  p.eps = 0.01;
  p.tau = 3;
  return p;
}

} // namespace

TEST(DbscanPP, FullSampleEqualsDbscan) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Dataset d = lt::random_mixture(seed, 200, 16, 3, 0.3);
    for (double eps : {0.05, 0.15}) {
      ClusterParams p;
      p.eps = eps;
      p.tau = 4;
      SamplingParams s;
      s.p = 1.0;
      s.seed = seed;
      const auto r = dbscan_pp(d, p, s);
      EXPECT_TRUE(same_partition(r.assignment, dbscan(d, p)));
      EXPECT_EQ(r.report.executed_queries, d.size());
    }
  }
}

TEST(DbscanPP, WorkedCircleExample) {
  const Dataset d = lt::six_point_circle();
  SamplingParams s;
  const auto r = dbscan_pp(d, circle_params(), s);
  EXPECT_EQ(r.assignment, dbscan(d, circle_params()));
}

TEST(DbscanPP, QueriesOnlySample) {
  const Dataset d = lt::random_mixture(3, 400, 8, 3, 0.3);
  ClusterParams p;
  p.eps = 0.1;
  p.tau = 5;
  SamplingParams s;
  s.p = 0.25;
  s.seed = 11;
  RangeSearcher searcher(d, p.metric);
  const auto r = dbscan_pp(searcher, p, s);
  EXPECT_EQ(r.sampled.size(), 100u);
  EXPECT_TRUE(std::is_sorted(r.sampled.begin(), r.sampled.end()));
  EXPECT_EQ(searcher.query_count(), 100u);
  EXPECT_EQ(r.report.executed_queries, 100u);
  EXPECT_DOUBLE_EQ(r.effective_p, 0.25);
}

TEST(DbscanPP, SampleSizeRoundsUp) {
  const Dataset d = lt::random_mixture(3, 10, 4, 1, 0.3);
  SamplingParams s;
  s.p = 0.15;
  EXPECT_EQ(dbscan_pp(d, circle_params(), s).sampled.size(), 2u);
}

TEST(DbscanPP, SeedDeterminism) {
  const Dataset d = lt::random_mixture(4, 300, 8, 3, 0.3);
  ClusterParams p;
  p.eps = 0.1;
  p.tau = 4;
  SamplingParams s;
  s.p = 0.3;
  s.seed = 5;
  const auto a = dbscan_pp(d, p, s);
  const auto b = dbscan_pp(d, p, s);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.sampled, b.sampled);
  s.seed = 6;
  EXPECT_NE(dbscan_pp(d, p, s).sampled, a.sampled);
}

TEST(DbscanPP, NoCoreInSampleAllNoise) {
  const Dataset d = lt::six_point_circle();
  SamplingParams s;
  s.p = 0.5;
  // Find a seed whose sample misses the only core point (index 1).
  for (std::uint64_t seed = 0;; ++seed) {
    s.seed = seed;
    const auto r = dbscan_pp(d, circle_params(), s);
    if (std::find(r.sampled.begin(), r.sampled.end(), 1u) != r.sampled.end()) continue;
    EXPECT_EQ(r.assignment.labels, std::vector<Label>(6, kNoise));
    EXPECT_EQ(r.assignment.num_clusters, 0);
    break;
  }
}

TEST(DbscanPP, AssignmentToNearestCore) {
  const Dataset d = lt::random_mixture(8, 300, 8, 3, 0.3);
  ClusterParams p;
  p.eps = 0.1;
  p.tau = 5;
  SamplingParams s;
  s.p = 0.3;
  s.seed = 2;
  const auto r = dbscan_pp(d, p, s);
  std::vector<bool> sampled(d.size());
  for (std::size_t q : r.sampled) sampled[q] = true;
  std::vector<std::size_t> cores;
  for (std::size_t q : r.sampled) {
    if (lt::naive_neighbors(d, p.metric, q, p.eps).size() >= p.tau) cores.push_back(q);
  }
  for (std::size_t q = 0; q < d.size(); ++q) {
    if (sampled[q]) continue;
    double best = std::numeric_limits<double>::infinity();
    std::size_t owner = d.size();
    for (std::size_t c : cores) {
      const double dist = cosine_distance(d[q], d[c]);
      if (dist < best) {
        best = dist;
        owner = c;
      }
    }
    if (best < p.eps) {
      EXPECT_EQ(r.assignment.labels[q], r.assignment.labels[owner]);
    } else {
      EXPECT_EQ(r.assignment.labels[q], kNoise);
    }
  }
}

TEST(DbscanPP, UnboundedAssignmentLeavesNoNonSampledNoise) {
  const Dataset d = lt::random_mixture(8, 300, 8, 3, 0.3);
  ClusterParams p;
  p.eps = 0.1;
  p.tau = 5;
  SamplingParams s;
  s.p = 0.3;
  s.seed = 2;
  s.bounded_assignment = false;
  const auto r = dbscan_pp(d, p, s);
  std::vector<bool> sampled(d.size());
  for (std::size_t q : r.sampled) sampled[q] = true;
  ASSERT_GT(r.assignment.num_clusters, 0);
  for (std::size_t q = 0; q < d.size(); ++q) {
    if (!sampled[q]) {
      EXPECT_NE(r.assignment.labels[q], kNoise);
    }
  }
}

TEST(DbscanPP, Errors) {
  const Dataset d = lt::six_point_circle();
  SamplingParams s;
  s.p = 0.1;
  EXPECT_THROW(dbscan_pp(d, circle_params(), s), InvalidArgument);
  s.p = 0.0;
  EXPECT_THROW(dbscan_pp(d, circle_params(), s), InvalidArgument);
  s.p = 1.0;
  s.auto_p = true;
  EXPECT_THROW(dbscan_pp(d, circle_params(), s), InvalidArgument);
}

TEST(DbscanPP, AutoFractionFromPredictedCoreRatio) {
  const Dataset d = lt::six_point_circle();
  OracleEstimator oracle(d);
  SamplingParams s;
  s.auto_p = true;
  s.delta = 0.5;
  const auto r = dbscan_pp(d, circle_params(), s, &oracle);
  EXPECT_NEAR(r.effective_p, 0.5 + 1.0 / 6.0, 1e-12);
  EXPECT_EQ(r.sampled.size(), 4u);
  s.delta = 0.9;
  EXPECT_DOUBLE_EQ(dbscan_pp(d, circle_params(), s, &oracle).effective_p, 1.0);
}

TEST(PredictedCoreRatio, Examples) {
  const Dataset d = lt::six_point_circle();
  OracleEstimator oracle(d);
  EXPECT_DOUBLE_EQ(predicted_core_ratio(d, circle_params(), oracle), 1.0 / 6.0);
  ConstantEstimator zero(2, 0.0);
  EXPECT_DOUBLE_EQ(predicted_core_ratio(d, circle_params(), zero), 0.0);
}

TEST(LafDbscanPP, OracleEqualsDbscanPP) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Dataset d = lt::random_mixture(seed, 200, 16, 3, 0.3);
    OracleEstimator oracle(d);
    ClusterParams p;
    p.eps = 0.1;
    p.tau = 4;
    SamplingParams s;
    s.p = 0.5;
    s.seed = seed;
    const auto plain = dbscan_pp(d, p, s);
    const auto gated = laf_dbscan_pp(d, p, s, oracle);
    EXPECT_EQ(gated.assignment, plain.assignment);
    EXPECT_EQ(gated.sampled, plain.sampled);
    EXPECT_LE(gated.report.executed_queries, plain.report.executed_queries);
    s.p = 1.0;
    EXPECT_TRUE(same_partition(laf_dbscan_pp(d, p, s, oracle).assignment, dbscan(d, p)));
  }
}

TEST(LafDbscanPP, HugeEstimatorNeverSkips) {
  const Dataset d = lt::random_mixture(1, 200, 8, 3, 0.3);
  ClusterParams p;
  p.eps = 0.1;
  p.tau = 4;
  SamplingParams s;
  s.p = 0.4;
  s.seed = 3;
  ConstantEstimator huge(d.dim(), std::numeric_limits<double>::infinity());
  const auto r = laf_dbscan_pp(d, p, s, huge);
  EXPECT_EQ(r.report.skipped_queries, 0u);
  EXPECT_EQ(r.assignment, dbscan_pp(d, p, s).assignment);
}

TEST(LafDbscanPP, ZeroEstimatorSkipsEverything) {
  const Dataset d = lt::circle({0, 1, 2, 3});
  ClusterParams p;
  p.eps = 0.5;
  p.tau = 2;
  SamplingParams s;
  ConstantEstimator zero(d.dim(), 0.0);
  const auto r = laf_dbscan_pp(d, p, s, zero);
  EXPECT_EQ(r.report.skipped_queries, 4u);
  EXPECT_EQ(r.report.executed_queries, 0u);
  EXPECT_EQ(r.assignment.labels, std::vector<Label>(4, kNoise));
  for (const auto& [key, partial] : r.partial_neighbors.entries()) EXPECT_TRUE(partial.empty());
}
