#include <gtest/gtest.h>

#include <set>

#include "unilamp/oracles/partition.hpp"

using namespace unilamp;

namespace {

// Independent reference: loops over all edge pairs (i<j), (k<l) directly.
bool reference_conflict_free(const std::vector<std::size_t>& a, const WeightedGraph& w, const Partition& pi) {
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 1; i <= w.k(); ++i)
    for (std::size_t j = i + 1; j <= w.k(); ++j)
      if (w(i, j) > 0) {
        auto s = pi.block_of(i);
        auto t = pi.block_of(j);
        pairs.insert({std::min(s, t), std::max(s, t)});
      }
  std::vector<std::size_t> bv(pi.size());
  for (std::size_t s = 1; s <= pi.k(); ++s) bv[pi.block_of(s)] = a[s - 1];
  for (const auto& p : pairs)
    for (const auto& q : pairs)
      if (p != q && ((bv[p.first] - 1) ^ (bv[p.second] - 1)) == ((bv[q.first] - 1) ^ (bv[q.second] - 1))) return false;
  return true;
}

}  // namespace

TEST(Partitions, BellNumbers) {
  const std::size_t bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (std::size_t k = 1; k <= 8; ++k) EXPECT_EQ(enumerate_partitions(k).size(), bell[k]) << "k=" << k;
  EXPECT_THROW(enumerate_partitions(9), Error);
  EXPECT_THROW(enumerate_partitions(0), Error);
}

TEST(Partitions, BlocksCoverDisjointly) {
  for (const auto& pi : enumerate_partitions(5)) {
    std::set<std::size_t> seen;
    for (const auto& b : pi.blocks()) {
      EXPECT_FALSE(b.empty());
      for (auto e : b) EXPECT_TRUE(seen.insert(e).second);
    }
    EXPECT_EQ(seen.size(), 5u);
    EXPECT_EQ(Partition::from_blocks(5, pi.blocks()), pi);
  }
}

TEST(Partitions, Validation) {
  EXPECT_THROW(Partition::from_rgs({2, 1}), Error);
  EXPECT_THROW(Partition::from_rgs({1, 3}), Error);
  EXPECT_THROW(Partition::from_blocks(3, {{1, 2}, {2, 3}}), Error);
  EXPECT_THROW(Partition::from_blocks(3, {{1, 2}}), Error);
}

TEST(WeightedGraphs, DegreesAndNorm) {
  auto w = WeightedGraph::line(4);
  EXPECT_EQ(w.degree(1), 1);
  EXPECT_EQ(w.degree(2), 2);
  EXPECT_EQ(w.norm(), 3);
  w.set(1, 4, 2);
  EXPECT_EQ(w.norm(), 5);
  Eigen::MatrixXi bad(2, 2);
  bad << 0, 1, 2, 0;
  EXPECT_THROW(WeightedGraph::from_matrix(bad), Error);
  bad << 1, 0, 0, 0;
  EXPECT_THROW(WeightedGraph::from_matrix(bad), Error);
}

TEST(Wst, SpecialCases) {
  const auto pi = Partition::from_blocks(4, {{1, 3}, {2}, {4}});
  EXPECT_TRUE(wst(WeightedGraph(4), pi).isZero());
  const auto w = WeightedGraph::line(4);
  EXPECT_EQ(wst(w, Partition::singletons(4)), w.matrix());
  // Brute force over edges for ℓ₄ and {1,3}{2}{4}: edges 12, 23, 34 map to block pairs (1,2), (2,1), (1,3).
  Eigen::MatrixXi expected = Eigen::MatrixXi::Zero(3, 3);
  for (std::size_t i = 1; i <= 4; ++i)
    for (std::size_t j = i + 1; j <= 4; ++j)
      if (w(i, j)) {
        expected(static_cast<Eigen::Index>(pi.block_of(i)), static_cast<Eigen::Index>(pi.block_of(j))) += w(i, j);
        if (pi.block_of(i) != pi.block_of(j))
          expected(static_cast<Eigen::Index>(pi.block_of(j)), static_cast<Eigen::Index>(pi.block_of(i))) += w(i, j);
      }
  EXPECT_EQ(wst(w, pi), expected);
  EXPECT_EQ(expected(0, 1), 2);
  EXPECT_EQ(expected(0, 2), 1);
}

TEST(Disassortative, Cases) {
  EXPECT_TRUE(is_disassortative(WeightedGraph(3), Partition::from_rgs({1, 1, 1})));
  EXPECT_TRUE(is_disassortative(WeightedGraph::line(5), Partition::singletons(5)));
  WeightedGraph w(3);
  w.set(1, 2, 1);
  EXPECT_FALSE(is_disassortative(w, Partition::from_blocks(3, {{1, 2}, {3}})));
}

TEST(Labellings, Membership) {
  const auto pi = Partition::from_blocks(3, {{1, 3}, {2}});
  EXPECT_NO_THROW(Labelling(pi, {5, 2, 5}, 8));
  EXPECT_THROW(Labelling(pi, {5, 5, 5}, 8), Error);
  EXPECT_THROW(Labelling(pi, {5, 2, 4}, 8), Error);
  EXPECT_THROW(Labelling(pi, {9, 2, 9}, 8), Error);
  const auto a = Labelling::from_block_values(pi, {7, 1}, 8);
  EXPECT_EQ(a.values(), (std::vector<std::size_t>{7, 1, 7}));
}

TEST(ConflictFree, TwoBlocksAlwaysFree) {
  const auto pi = Partition::singletons(2);
  WeightedGraph w(2);
  w.set(1, 2, 3);
  for (std::size_t a = 1; a <= 8; ++a)
    for (std::size_t b = 1; b <= 8; ++b)
      if (a != b) {
        EXPECT_TRUE(is_conflict_free(Labelling(pi, {a, b}, 8), w, pi, 8));
      }
}

TEST(ConflictFree, HandExample) {
  // 0-based: 0⊕1 = 1, 1⊕2 = 3, 2⊕3 = 1 → pairs (1,2) and (3,4) conflict.
  const auto pi = Partition::singletons(4);
  const auto w = WeightedGraph::line(4);
  EXPECT_FALSE(is_conflict_free(Labelling(pi, {1, 2, 3, 4}, 8), w, pi, 8));
  // 0⊕1 = 1, 1⊕2 = 3, 2⊕4 = 6 → no conflict.
  EXPECT_TRUE(is_conflict_free(Labelling(pi, {1, 2, 3, 5}, 8), w, pi, 8));
  EXPECT_THROW(is_conflict_free(Labelling(pi, {1, 2, 3, 5}, 8), w, pi, 12), Error);
  WeightedGraph intra(4);
  intra.set(1, 2, 1);
  const auto merged = Partition::from_blocks(4, {{1, 2}, {3}, {4}});
  EXPECT_THROW(is_conflict_free(Labelling(merged, {1, 1, 3, 5}, 8), intra, merged, 8), Error);
}

TEST(ConflictFree, AgreesWithReferenceExhaustively) {
  const std::size_t m = 8;
  for (const auto& pi : enumerate_partitions(4)) {
    WeightedGraph w(4);
    // Weight every cross-block pair, so (w, π) is disassortative with as many pairs as possible.
    for (std::size_t i = 1; i <= 4; ++i)
      for (std::size_t j = i + 1; j <= 4; ++j)
        if (pi.block_of(i) != pi.block_of(j)) w.set(i, j, 1);
    std::vector<std::size_t> vals(pi.size());
    auto recurse = [&](auto&& self, std::size_t depth) -> void {
      if (depth == vals.size()) {
        const auto a = Labelling::from_block_values(pi, vals, m);
        ASSERT_EQ(is_conflict_free(a, w, pi, m), reference_conflict_free(a.values(), w, pi));
        return;
      }
      for (std::size_t v = 1; v <= m; ++v) {
        if (std::find(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(depth), v) != vals.begin() + static_cast<std::ptrdiff_t>(depth)) continue;
        vals[depth] = v;
        self(self, depth + 1);
      }
    };
    recurse(recurse, 0);
  }
}

TEST(CountConflictFree, Cases) {
  const auto one = count_conflict_free(WeightedGraph(3), Partition::from_rgs({1, 1, 1}), 16);
  EXPECT_EQ(one.cset, 16u);
  EXPECT_EQ(one.conflict_free, 16u);

  WeightedGraph w3(3);
  w3.set(1, 2, 1);
  w3.set(2, 3, 1);
  EXPECT_EQ(count_conflict_free(w3, Partition::singletons(3), 16).cset, 3360u);

  // ℓ₄ with singletons conflicts iff a1⊕a2⊕a3⊕a4 = 0 (0-based): m(m−1)(m−2) labellings.
  double prev = 0.0;
  for (std::size_t m : {8u, 16u, 32u}) {
    const auto c = count_conflict_free(WeightedGraph::line(4), Partition::singletons(4), m);
    EXPECT_EQ(c.cset, m * (m - 1) * (m - 2) * (m - 3));
    EXPECT_EQ(c.cset - c.conflict_free, m * (m - 1) * (m - 2));
    EXPECT_EQ(c.bound, 256u * m * m * m);
    EXPECT_TRUE(c.within_bound);
    const double ratio = static_cast<double>(c.conflict_free) / std::pow(static_cast<double>(m), 4);
    EXPECT_GT(ratio, prev);
    prev = ratio;
  }
  EXPECT_THROW(count_conflict_free(WeightedGraph::line(4), Partition::singletons(4), 128), Error);
  EXPECT_THROW(count_conflict_free(WeightedGraph::line(6), Partition::singletons(6), 8), Error);
}
