#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "bootperc/graph.hpp"
#include "bootperc/model.hpp"

using namespace bootperc;

TEST(CriticalScale, QuadraticThresholdIsFifty) {
  ModelParams m{1000000, 0, 1e-4, 0.0, 0.0, 2, 50, 0};
  const CriticalScale s = derive_critical_scale(m);
  EXPECT_NEAR(s.g1, 50.0, 1e-12);
  EXPECT_NEAR(s.alpha1, 1.0, 1e-14);
}

TEST(CriticalScale, CubicThresholdMatchesHighPrecision) {
  // mpmath: (2/3) * sqrt(2000)
  EXPECT_NEAR(critical_seed_count(1000000, 1e-3, 3), 29.814239699997195952, 1e-12);
}

TEST(CriticalScale, RejectsZeroProbability) {
  EXPECT_THROW(critical_seed_count(100, 0.0, 2), std::invalid_argument);
  ModelParams m{10, 10, 0.0, 0.1, 0.1, 2, 0, 0};
  EXPECT_THROW(derive_critical_scale(m), std::invalid_argument);
}

TEST(ModelParams, ValidateRejectsBadInput) {
  EXPECT_THROW((ModelParams{10, 10, 0.1, 0.1, 0.1, 1, 0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((ModelParams{10, 10, 1.5, 0.1, 0.1, 2, 0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((ModelParams{10, 10, 0.1, 0.1, 0.1, 2, 11, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((ModelParams{10, 10, 0.1, 0.1, 0.1, 2, 10, 10}.validate()));
}

TEST(ModelParams, WindowReportIsAdvisory) {
  EXPECT_TRUE(check_window({100000, 100000, 1e-4, 1e-4, 1e-5, 2, 0, 0}).in_window());
  const auto dense = check_window({1000, 1000, 0.5, 0.5, 0.1, 2, 0, 0});
  EXPECT_FALSE(dense.in_window());
  EXPECT_EQ(dense.warnings.size(), 2u);
}

TEST(GenerateGraph, ZeroProbabilityGivesIsolatedNodes) {
  const SbmGraph g = generate_graph({2, 2, 0.0, 0.0, 0.0, 2, 0, 0}, 1);
  EXPECT_EQ(g.num_nodes(), 4);
  EXPECT_EQ(g.num_edges(), 0);
}

TEST(GenerateGraph, ProbabilityOneGivesTriangle) {
  const SbmGraph g = generate_graph({3, 0, 1.0, 0.0, 0.0, 2, 0, 0}, 1);
  EXPECT_EQ(g.num_edges(), 3);
  for (NodeId v = 0; v < 3; ++v) EXPECT_EQ(g.degree(v), 2u);
}

TEST(GenerateGraph, CompleteBipartiteAndCliques) {
  const SbmGraph g = generate_graph({4, 5, 1.0, 1.0, 1.0, 2, 0, 0}, 9);
  EXPECT_EQ(g.num_edges(), 36);  // C(9, 2)
  EXPECT_TRUE(g.check_invariants());
}

TEST(GenerateGraph, MeanEdgeCountWithinThreeSigma) {
  const ModelParams m{1000, 1000, 0.01, 0.01, 0.01, 2, 0, 0};
  const int reps = 1000;
  double sum = 0.0;
  for (int s = 0; s < reps; ++s) sum += static_cast<double>(generate_graph(m, s).num_edges());
  const double expected = (499500.0 + 499500.0 + 1e6) * 0.01;
  ASSERT_DOUBLE_EQ(expected, 19990.0);
  const double sd_mean = std::sqrt(1999000.0 * 0.01 * 0.99 / reps);
  EXPECT_NEAR(sum / reps, expected, 3 * sd_mean);
}

TEST(GenerateGraph, InvariantsAndCommunityLayout) {
  const ModelParams m{300, 200, 0.05, 0.08, 0.02, 2, 0, 0};
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SbmGraph g = generate_graph(m, s);
    ASSERT_TRUE(g.check_invariants());
    EXPECT_EQ(g.community(299), Community::one);
    EXPECT_EQ(g.community(300), Community::two);
  }
}

TEST(GenerateGraph, CommunityOneDegreeMean) {
  const ModelParams m{2000, 2000, 0.01, 0.01, 0.005, 2, 0, 0};
  const SbmGraph g = generate_graph(m, 42);
  double sum = 0.0;
  for (NodeId v = 0; v < 2000; ++v) sum += static_cast<double>(g.degree(v));
  const double mean = sum / 2000;
  const double expected = 1999 * 0.01 + 2000 * 0.005;
  // mean degree = (2 E11 + E12) / n1 with E11 ~ Bin(C(n1,2), p1), E12 ~ Bin(n1 n2, q)
  const double var = (4 * 1999000.0 * 0.01 * 0.99 + 4e6 * 0.005 * 0.995) / (2000.0 * 2000.0);
  EXPECT_NEAR(mean, expected, 3 * std::sqrt(var));
}

TEST(GenerateGraph, SameSeedSameGraph) {
  const ModelParams m{400, 300, 0.03, 0.02, 0.01, 3, 5, 5};
  EXPECT_EQ(generate_graph(m, 77), generate_graph(m, 77));
  EXPECT_FALSE(generate_graph(m, 77) == generate_graph(m, 78));
  EXPECT_EQ(sample_seeds(m, 77), sample_seeds(m, 77));
}

TEST(GenerateGraph, EdgeCapRaisesResourceError) {
  const ModelParams m{100000, 100000, 0.5, 0.5, 0.5, 2, 0, 0};
  EXPECT_THROW(generate_graph(m, 1), ResourceError);
  EXPECT_THROW(generate_graph({100, 100, 0.5, 0.5, 0.5, 2, 0, 0}, 1, 10.0), ResourceError);
}

TEST(SbmGraph, FromEdgesRejectsMalformedInput) {
  const std::vector<Edge> loop{{1, 1}};
  const std::vector<Edge> dup{{0, 1}, {1, 0}};
  const std::vector<Edge> range{{0, 5}};
  EXPECT_THROW(SbmGraph::from_edges(3, 0, loop), std::invalid_argument);
  EXPECT_THROW(SbmGraph::from_edges(3, 0, dup), std::invalid_argument);
  EXPECT_THROW(SbmGraph::from_edges(3, 0, range), std::invalid_argument);
}

TEST(SampleSeeds, EmptyAndExhaustive) {
  EXPECT_TRUE(sample_seeds({10, 10, 0.1, 0.1, 0.1, 2, 0, 0}, 3).empty());
  const SeedSet all = sample_seeds({10, 7, 0.1, 0.1, 0.1, 2, 10, 7}, 3);
  ASSERT_EQ(all.one.size(), 10u);
  ASSERT_EQ(all.two.size(), 7u);
  for (NodeId v = 0; v < 10; ++v) EXPECT_EQ(all.one[v], v);
  for (NodeId v = 0; v < 7; ++v) EXPECT_EQ(all.two[v], 10 + v);
}

TEST(SampleSeeds, SortedUniqueInRange) {
  const ModelParams m{50, 40, 0.1, 0.1, 0.1, 2, 30, 25};
  for (std::uint64_t s = 0; s < 50; ++s) {
    const SeedSet set = sample_seeds(m, s);
    ASSERT_EQ(set.one.size(), 30u);
    ASSERT_EQ(set.two.size(), 25u);
    for (std::size_t k = 1; k < set.one.size(); ++k) ASSERT_LT(set.one[k - 1], set.one[k]);
    for (std::size_t k = 1; k < set.two.size(); ++k) ASSERT_LT(set.two[k - 1], set.two[k]);
    EXPECT_LT(set.one.back(), 50u);
    EXPECT_GE(set.two.front(), 50u);
    EXPECT_LT(set.two.back(), 90u);
  }
}

TEST(SampleSeeds, InclusionFrequencyIsUniform) {
  const ModelParams m{10000, 0, 0.001, 0.0, 0.0, 2, 100, 0};
  const int draws = 10000;
  std::vector<int> hits(10000, 0);
  for (int s = 0; s < draws; ++s) {
    for (NodeId v : sample_seeds(m, static_cast<std::uint64_t>(s)).one) ++hits[v];
  }
  const double sigma = std::sqrt(0.01 * 0.99 / draws);
  int within = 0;
  double worst = 0.0;
  for (int h : hits) {
    const double dev = std::abs(h / static_cast<double>(draws) - 0.01) / sigma;
    within += dev <= 3.0;
    worst = std::max(worst, dev);
  }
  EXPECT_GE(within, 9900);  // about 99.7% expected
  EXPECT_LT(worst, 5.5);
}

TEST(EdgeList, HeaderAndOrdering) {
  const std::vector<Edge> e{{2, 0}, {1, 3}, {0, 1}};
  const SbmGraph g = SbmGraph::from_edges(2, 2, e);
  std::ostringstream os;
  write_edge_list(os, g, 12);
  EXPECT_EQ(os.str(), "# sbm n1=2 n2=2 seed=12\n0 1\n0 2\n1 3\n");
}
