#include "treelift/portrait.hpp"

#include <gtest/gtest.h>

#include <map>

#include "test_util.hpp"
#include "treelift/stats.hpp"

namespace treelift {
namespace {

using testing::cell_index;
using testing::oracle_leaf_images;

const LocalPerm kSwap{1, 0};

TEST(PermGroupTest, Construction) {
  EXPECT_EQ(PermGroup::symmetric(3).order(), 6u);
  EXPECT_EQ(PermGroup::symmetric(4).order(), 24u);
  EXPECT_EQ(PermGroup::cyclic(5).order(), 5u);
  // D4 acting on the square's corners
  const auto d4 = PermGroup::generated_by(4, {{1, 2, 3, 0}, {3, 2, 1, 0}});
  EXPECT_EQ(d4.order(), 8u);
  EXPECT_TRUE(d4.contains(LocalPerm{2, 3, 0, 1}));
  EXPECT_FALSE(d4.contains(LocalPerm{1, 0, 2, 3}));
  // <(0 1)> on three points is not transitive
  EXPECT_THROW(PermGroup::generated_by(3, {{1, 0, 2}}), Error);
  EXPECT_THROW(PermGroup::generated_by(3, {{1, 1, 2}}), Error);
}

TEST(PortraitTest, ApplyIdentity) {
  const Portrait id(TreeShape(3, 3));
  for (std::uint64_t c = 0; c < 27; ++c) EXPECT_EQ(apply(id, {3, c}), (VertexId{3, c}));
}

TEST(PortraitTest, ApplyRootSwapFlipsFirstDigit) {
  Portrait g(TreeShape(2, 2));
  g.set_label(kRoot, kSwap);
  EXPECT_EQ(apply(g, {2, 0b00}), (VertexId{2, 0b10}));
}

TEST(PortraitTest, ApplyTwoLabels) {
  Portrait g(TreeShape(2, 2));
  g.set_label(kRoot, kSwap);
  g.set_label({1, 1}, kSwap);
  // Labels sit at the source vertex: 01 -> root swaps to 1, label at (1,0) is
  // the identity, so the second digit stays 1.
  EXPECT_EQ(apply(g, {2, 0b01}), (VertexId{2, 0b11}));
  EXPECT_EQ(apply(g, {2, 0b00}), (VertexId{2, 0b10}));
  EXPECT_EQ(apply(g, {2, 0b10}), (VertexId{2, 0b01}));
  EXPECT_EQ(apply(g, {2, 0b11}), (VertexId{2, 0b00}));
}

TEST(PortraitTest, ApplyThrowsBeyondDepth) {
  const Portrait g(TreeShape(2, 2));
  EXPECT_THROW(apply(g, {3, 0}), Error);
}

class RandomPortraits : public ::testing::Test {
 protected:
  Rng rng{12345};
  PermGroup z2 = PermGroup::cyclic(2);
  PermGroup s3 = PermGroup::symmetric(3);
};

TEST_F(RandomPortraits, LevelActionIsABijectionMatchingOracle) {
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = sample_haar(s3, TreeShape(3, 4), rng);
    for (int n = 0; n <= 4; ++n) {
      const auto img = level_action(g, n);
      const auto oracle = oracle_leaf_images(g, n);
      std::vector<bool> seen(img.size(), false);
      for (std::size_t x = 0; x < img.size(); ++x) {
        EXPECT_EQ(img[x], oracle[x]);
        EXPECT_EQ(apply(g, {n, x}).code, img[x]);
        EXPECT_FALSE(seen[img[x]]);
        seen[img[x]] = true;
      }
    }
  }
}

TEST_F(RandomPortraits, ComposeIsRightAction) {
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = sample_haar(z2, TreeShape(2, 3), rng);
    const auto h = sample_haar(z2, TreeShape(2, 3), rng);
    const auto gh = oracle_leaf_images(compose(g, h), 3);
    const auto og = oracle_leaf_images(g, 3);
    const auto oh = oracle_leaf_images(h, 3);
    for (std::size_t x = 0; x < 8; ++x) EXPECT_EQ(gh[x], oh[og[x]]);
  }
}

TEST_F(RandomPortraits, ComposeWithIdentityAndInverse) {
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = sample_haar(s3, TreeShape(3, 3), rng);
    const Portrait id(g.shape());
    EXPECT_EQ(compose(g, id), g);
    EXPECT_EQ(compose(id, g), g);
    EXPECT_TRUE(compose(g, inverse(g)).is_identity());
    EXPECT_TRUE(compose(inverse(g), g).is_identity());
  }
  EXPECT_THROW(compose(Portrait(TreeShape(2, 2)), Portrait(TreeShape(2, 3))), Error);
}

TEST_F(RandomPortraits, PsiIsAHomomorphism) {
  const auto g = sample_haar(z2, TreeShape(2, 4), rng);
  EXPECT_TRUE(psi(g, 0).is_identity());
  EXPECT_EQ(psi(g, 0).depth(), 0);
  EXPECT_EQ(psi(g, 4), g);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = sample_haar(z2, TreeShape(2, 4), rng);
    const auto b = sample_haar(z2, TreeShape(2, 4), rng);
    EXPECT_EQ(psi(compose(a, b), 2), compose(psi(a, 2), psi(b, 2)));
  }
}

TEST_F(RandomPortraits, LocalCocycleBasics) {
  const auto g = sample_haar(z2, TreeShape(2, 4), rng);
  EXPECT_EQ(local_cocycle(g, kRoot), g);
  EXPECT_TRUE(local_cocycle(Portrait(TreeShape(2, 4)), {2, 3}).is_identity());
  EXPECT_EQ(local_cocycle(g, {3, 5}).depth(), 1);
  EXPECT_EQ(local_cocycle(g, {4, 5}).depth(), 0);
}

TEST_F(RandomPortraits, LocalCocycleMatchesSubtreeDefinition) {
  // beta(g, v) = tau_v^-1 g tau_{v^g}: u -> tau(v^g, (v.u)^g)
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = sample_haar(s3, TreeShape(3, 4), rng);
    const VertexId v{2, uniform_below(rng, 9)};
    const auto b = local_cocycle(g, v);
    const auto vg = apply(g, v);
    for (std::uint64_t u = 0; u < 9; ++u)
      EXPECT_EQ(apply(b, {2, u}), tau(vg, apply(g, concat(v, {2, u}, 3)), 3));
  }
}

TEST_F(RandomPortraits, CocycleEquality) {
  for (int trial = 0; trial < 500; ++trial) {
    const auto g = sample_haar(z2, TreeShape(2, 5), rng);
    const auto h = sample_haar(z2, TreeShape(2, 5), rng);
    const int lvl = static_cast<int>(uniform_below(rng, 6));
    const VertexId v{lvl, uniform_below(rng, ipow(2, lvl))};
    EXPECT_EQ(local_cocycle(compose(g, h), v),
              compose(local_cocycle(g, v), local_cocycle(h, apply(g, v))));
  }
}

TEST_F(RandomPortraits, CocycleStaysInsideWH) {
  const auto d4 = PermGroup::generated_by(4, {{1, 2, 3, 0}, {3, 2, 1, 0}});
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = sample_haar(d4, TreeShape(4, 3), rng);
    ASSERT_TRUE(g.is_in(d4));
    for (std::uint64_t c = 0; c < 16; ++c) EXPECT_TRUE(local_cocycle(g, {2, c}).is_in(d4));
  }
}

TEST_F(RandomPortraits, InverseByRelabelingMatchesLeafInverse) {
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = sample_haar(s3, TreeShape(3, 3), rng);
    const auto fwd = oracle_leaf_images(g, 3);
    const auto back = oracle_leaf_images(inverse(g), 3);
    for (std::size_t x = 0; x < fwd.size(); ++x) EXPECT_EQ(back[fwd[x]], x);
  }
}

TEST_F(RandomPortraits, HaarRootLabelIsFair) {
  // H = Z/2, d = 2, N = 1: root label uniform on {id, swap}.
  std::uint64_t swaps = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i)
    if (!sample_haar(z2, TreeShape(2, 1), rng).is_identity()) ++swaps;
  EXPECT_LT(std::abs(binomial_z(swaps, draws, 0.5)), 3.0);
}

TEST_F(RandomPortraits, HaarIsUniformOnW2) {
  // |W_2(Z/2)| = 2^3 = 8 cells.
  std::vector<std::uint64_t> counts(8, 0);
  for (int i = 0; i < 8000; ++i) ++counts[cell_index(sample_haar(z2, TreeShape(2, 2), rng), z2)];
  EXPECT_GT(chi_square_uniform(counts).p_value, 1e-3);
}

TEST_F(RandomPortraits, TruncatedDeepSampleIsHaarAtLowerDepth) {
  std::vector<std::uint64_t> counts(8, 0);
  for (int i = 0; i < 8000; ++i)
    ++counts[cell_index(psi(sample_haar(z2, TreeShape(2, 5), rng), 2), z2)];
  EXPECT_GT(chi_square_uniform(counts).p_value, 1e-3);
}

TEST_F(RandomPortraits, DepthZeroSampleIsTrivial) {
  for (int i = 0; i < 5; ++i) EXPECT_TRUE(sample_haar(s3, TreeShape(3, 0), rng).is_identity());
}

TEST_F(RandomPortraits, ExtendKeepsPrefix) {
  const auto g = sample_haar(s3, TreeShape(3, 2), rng);
  const auto e = extend_haar(g, s3, 4, rng);
  EXPECT_EQ(psi(e, 2), g);
  EXPECT_TRUE(e.is_in(s3));
}

TEST_F(RandomPortraits, Distance) {
  const auto a = sample_haar(z2, TreeShape(2, 4), rng);
  const auto same = distance(a, a);
  EXPECT_TRUE(same.identical);
  EXPECT_EQ(same.displacement, 4);
  EXPECT_EQ(same.distance(), 0.0);

  Portrait b = a;
  LocalPerm root(a.label(kRoot).begin(), a.label(kRoot).end());
  std::swap(root[0], root[1]);
  b.set_label(kRoot, root);
  EXPECT_EQ(distance(a, b).displacement, 0);
  EXPECT_EQ(distance(a, b).distance(), 1.0);
}

TEST_F(RandomPortraits, DistanceAgreesWithQuotientRouteAndIsInvariant) {
  for (int trial = 0; trial < 200; ++trial) {
    const TreeShape shape(2, 4);
    const auto a = sample_haar(z2, shape, rng);
    // perturb below a random level so all displacements occur
    auto b = a;
    const int from = static_cast<int>(uniform_below(rng, 5));
    for (std::uint64_t i = shape.vertices_above(from); i < shape.internal_count(); ++i)
      if (rng() & 1) {
        auto lab = b.mutable_label_at(i);
        std::swap(lab[0], lab[1]);
      }
    const auto c = sample_haar(z2, shape, rng);
    const auto m = distance(a, b);
    const auto q = compose(inverse(a), b);
    int v = 0;
    while (v < 4 && psi(q, v + 1).is_identity()) ++v;
    if (m.identical) {
      EXPECT_TRUE(q.is_identity());
    } else {
      EXPECT_EQ(m.displacement, v);
    }
    const auto shifted = distance(compose(c, a), compose(c, b));
    EXPECT_EQ(shifted.displacement, m.displacement);
    EXPECT_EQ(shifted.identical, m.identical);
  }
}

TEST_F(RandomPortraits, StrongTriangleInequality) {
  for (int trial = 0; trial < 300; ++trial) {
    const TreeShape shape(2, 5);
    const auto base = sample_haar(z2, shape, rng);
    std::vector<Portrait> pts;
    for (int k = 0; k < 3; ++k) {
      // share a random prefix so distances are not all 1
      auto p = extend_haar(psi(base, static_cast<int>(uniform_below(rng, 6))), z2, 5, rng);
      pts.push_back(p);
    }
    const double ab = distance(pts[0], pts[1]).distance();
    const double bc = distance(pts[1], pts[2]).distance();
    const double ac = distance(pts[0], pts[2]).distance();
    EXPECT_LE(ac, std::max(ab, bc));
  }
}

TEST_F(RandomPortraits, SerializationRoundTrip) {
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = sample_haar(s3, TreeShape(3, 3), rng);
    EXPECT_EQ(parse_portrait(serialize(g)), g);
  }
  EXPECT_EQ(serialize(Portrait(TreeShape(2, 1))), "portrait 2 1\n0 1\nend\n");
  EXPECT_THROW(parse_portrait("portrait 2 1\n0 0\nend\n"), Error);
  EXPECT_THROW(parse_portrait("portrait 2 1\n0 1\n"), Error);
}

}  // namespace
}  // namespace treelift
