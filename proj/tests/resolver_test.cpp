#include "treelift/resolver.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "test_util.hpp"

namespace treelift {
namespace {

std::vector<Portrait> haar_gens(int m, int depth, Rng& rng, const PermGroup& h = PermGroup::cyclic(2)) {
  std::vector<Portrait> out;
  for (int i = 0; i < m; ++i) out.push_back(sample_haar(h, TreeShape(h.degree(), depth), rng));
  return out;
}

// Literal reading of the short-path condition: enumerate every
// non-backtracking Y path of length 1..R, freely reduce the concatenated
// X word, walk it and look for a repeated vertex.
bool oracle_short_paths(const ImmersionMap& imm, std::size_t radius) {
  const auto& x = imm.x();
  const auto& y = imm.y();
  const int rank = static_cast<int>(x.generator_count());
  struct State {
    std::uint32_t start;
    std::uint32_t at;
    std::optional<DirectedEdge> last;
    std::vector<Letter> raw;
  };
  std::vector<State> frontier;
  for (std::uint32_t v = 0; v < y.vertex_count(); ++v) frontier.push_back({v, v, std::nullopt, {}});
  for (std::size_t len = 1; len <= radius; ++len) {
    std::vector<State> next;
    for (const auto& s : frontier)
      for (std::size_t k = 0; k < y.degree(); ++k) {
        const auto f = y.out_edge(s.at, k);
        if (s.last && f == y.reverse(*s.last)) continue;
        State t{s.start, y.target(f), f, s.raw};
        const auto& w = imm.words()[f.gen];
        if (f.sign > 0) {
          t.raw.insert(t.raw.end(), w.letters().begin(), w.letters().end());
        } else {
          for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it) t.raw.push_back(it->inverse());
        }
        const auto red = reduce(rank, t.raw);
        std::set<std::uint32_t> seen{t.start};
        std::uint32_t u = t.start;
        for (const auto& l : red.letters()) {
          u = x.target({u, static_cast<std::uint32_t>(l.gen - 1), l.exp});
          if (!seen.insert(u).second) return false;
        }
        next.push_back(std::move(t));
      }
    frontier = std::move(next);
  }
  return true;
}

bool oracle_injective(const ImmersionMap& imm) {
  const auto& x = imm.x();
  const auto& y = imm.y();
  for (std::uint32_t v = 0; v < y.vertex_count(); ++v)
    for (std::size_t s = 0; s < y.generator_count(); ++s) {
      std::set<EdgeId> used;
      std::uint32_t u = v;
      for (const auto& l : imm.words()[s].letters()) {
        const DirectedEdge e{u, static_cast<std::uint32_t>(l.gen - 1), l.exp};
        if (!used.insert(x.geometric(e)).second) return false;
        u = x.target(e);
      }
    }
  return true;
}

TEST(ResolverTest, IdentityGeneratorsNeverStable) {
  const TreeShape shape(2, 6);
  const std::vector<Portrait> gens{Portrait(shape), Portrait(shape)};
  const auto words = parse_words("x1 x2, x2 x1", 2);
  try {
    stable_level(gens, words, 2, 6);
    FAIL() << "expected ResolverError";
  } catch (const ResolverError& e) {
    EXPECT_EQ(e.condition(), "girth(X_N) >= R");
  }
}

TEST(ResolverTest, StabilityMatchesPathEnumeration) {
  const auto words = parse_words("x1 x2, x2 x1", 2);
  Rng rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const auto gens = haar_gens(2, 7, rng);
    for (std::size_t radius : {1u, 2u, 3u}) {
      std::optional<int> expected;
      for (int n = 0; n <= 7 && !expected; ++n) {
        const auto x = build_schreier(gens, n);
        const auto y = build_schreier(words, x);
        const auto imm = immersion(x, y, words);
        const bool ok = girth(x) >= radius && girth(y) >= radius && oracle_injective(imm) &&
                        oracle_short_paths(imm, radius);
        const auto chk = check_stability(imm, radius);
        EXPECT_EQ(chk.ok(), ok) << "trial " << trial << " level " << n << " R " << radius;
        if (ok) expected = n;
      }
      if (expected) {
        EXPECT_EQ(stable_level(gens, words, radius, 7).level, *expected);
      } else {
        EXPECT_THROW(stable_level(gens, words, radius, 7), ResolverError);
      }
    }
  }
}

TEST(ResolverTest, StableLevelArgumentErrors) {
  Rng rng(2);
  const auto gens = haar_gens(2, 4, rng);
  const auto words = parse_words("x1 x2, x2 x1", 2);
  EXPECT_THROW(stable_level(gens, words, 0, 4), Error);
  EXPECT_THROW(stable_level(gens, words, 2, 5), Error);
}

// Recomputes (3) and (4) from zeta() and a BFS over Z.
TEST(ResolverTest, CandidateChecksMatchOracle) {
  const auto words = parse_words("x1 x2, x2 x1", 2);
  Rng rng(5);
  int connected_seen = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto gens = haar_gens(2, 6, rng);
    const int n = 3 + trial % 4;
    const auto x = build_schreier(gens, n);
    const auto y = build_schreier(words, x);
    const auto imm = immersion(x, y, words);
    const auto comps = components(y);
    for (std::size_t c = 0; c < comps.count(); ++c) {
      const auto& mem = comps.members[c];
      const auto t = y.generator_count();
      if (mem.size() * t < 2) continue;
      const std::vector<EdgeId> reps{mem[0] * t, mem.back() * t + 1};
      const auto chk = check_candidate(imm, comps, c, reps);
      if (!chk.distinct || !chk.injective || !chk.separated) continue;
      std::vector<EdgeId> marked{imm.edges_of(reps[0])[0], imm.edges_of(reps[1])[0]};
      EXPECT_EQ(chk.marked, marked);
      std::vector<EdgeId> z;
      for (auto f : zeta(imm, marked))
        if (comps.of[y.positive(f).origin] == c) z.push_back(f);
      EXPECT_EQ(chk.zeta, z);

      std::set<std::uint32_t> touched;
      for (auto f : z) {
        touched.insert(y.positive(f).origin);
        touched.insert(y.target(y.positive(f)));
      }
      const bool free = std::any_of(mem.begin(), mem.end(), [&](auto v) { return !touched.count(v); });
      EXPECT_EQ(chk.free_vertex, free);
      if (!free) continue;
      EXPECT_FALSE(touched.count(chk.base_vertex));

      std::set<std::uint32_t> reached{mem[0]};
      std::queue<std::uint32_t> q;
      q.push(mem[0]);
      while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        for (std::size_t k = 0; k < y.degree(); ++k) {
          const auto e = y.out_edge(u, k);
          if (std::count(z.begin(), z.end(), y.geometric(e))) continue;
          if (reached.insert(y.target(e)).second) q.push(y.target(e));
        }
      }
      EXPECT_EQ(chk.connected, reached.size() == mem.size());
      connected_seen += chk.connected;
    }
  }
  EXPECT_GT(connected_seen, 0);
}

TEST(ResolverTest, CandidateOutsideComponentRejected) {
  Rng rng(8);
  const auto gens = haar_gens(2, 5, rng);
  const auto words = parse_words("x1, x2", 2);
  const auto x = build_schreier(gens, 5);
  const auto y = build_schreier(words, x);
  const auto imm = immersion(x, y, words);
  const auto comps = components(y);
  const std::vector<EdgeId> bad{y.edge_count()};
  EXPECT_THROW(check_candidate(imm, comps, 0, bad), Error);
}

TEST(ResolverTest, CyclicWordsRejected) {
  Rng rng(3);
  const auto gens = haar_gens(2, 8, rng);
  const auto words = parse_words("x1 x2, x1 x2 x1 x2", 2);
  try {
    find_configuration(gens, words, 2, rng, {8, 16});
    FAIL() << "expected Error";
  } catch (const ResolverError&) {
    FAIL() << "cyclic words are a precondition failure, not a budget failure";
  } catch (const Error&) {
  }
  EXPECT_THROW(find_configuration(gens, parse_words("x1, x2", 2), 0, rng, {8, 16}), Error);
  EXPECT_THROW(find_configuration(gens, parse_words("x1, x2", 2), 1, rng, {9, 16}), Error);
}

TEST(ResolverTest, WholeGroupOneLoop) {
  const auto words = parse_words("x1, x2", 2);
  Rng rng(21);
  int found = 0;
  for (int seed = 0; seed < 10; ++seed) {
    const auto gens = haar_gens(2, 10, rng);
    try {
      const auto res = find_configuration(gens, words, 1, rng, {10, 64});
      const auto a = audit(gens, res);
      EXPECT_TRUE(a.ok) << a.failure;
      ++found;
    } catch (const ResolverError& e) {
      EXPECT_FALSE(e.condition().empty());
    }
  }
  EXPECT_GE(found, 8);
}

TEST(ResolverTest, SymmetricWordsResolveAndAudit) {
  const auto words = parse_words("x1 x2, x2 x1", 2);
  int found = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = derive_stream(99, seed);
    const auto gens = haar_gens(2, 12, rng);
    try {
      const auto res = find_configuration(gens, words, 2, rng, {12, 256});
      const auto a = audit(gens, res);
      ASSERT_TRUE(a.ok) << "seed " << seed << ": " << a.failure;
      for (const auto& t : a.traversals) {
        ASSERT_EQ(t.size(), 2u);
        EXPECT_EQ(t[0], (std::vector<int>{1, 0}));
        EXPECT_EQ(t[1], (std::vector<int>{0, 1}));
      }
      for (const auto& c : res.components)
        for (const auto& w : c.loop_words) EXPECT_FALSE(w.empty());
      ++found;
    } catch (const ResolverError& e) {
      EXPECT_NE(std::string(e.what()).find(e.condition()), std::string::npos);
    }
  }
  EXPECT_GE(found, 16);
}

TEST(ResolverTest, AuditCatchesTampering) {
  const auto words = parse_words("x1 x2, x2 x1", 2);
  auto rng = derive_stream(4, 0);
  const auto gens = haar_gens(2, 12, rng);
  const auto res = find_configuration(gens, words, 2, rng, {12, 256});
  ASSERT_TRUE(audit(gens, res).ok);

  auto doubled = res;
  auto& c = doubled.components[0];
  c.loops[0].insert(c.loops[0].end(), c.loops[1].begin(), c.loops[1].end());
  c.loop_words[0] = c.loop_words[0] * c.loop_words[1];
  const auto a = audit(gens, doubled);
  EXPECT_FALSE(a.ok);
  EXPECT_NE(a.failure.find("crosses e_2"), std::string::npos) << a.failure;

  auto dropped = res;
  dropped.components.pop_back();
  EXPECT_FALSE(audit(gens, dropped).ok);

  auto broken = res;
  broken.components[0].loops[0].pop_back();
  EXPECT_FALSE(audit(gens, broken).ok);
}

// The section at a fixed vertex v read off the leaf action of the whole
// element: (v.w)^g = v.w^(g_v).
std::vector<std::uint64_t> oracle_section(const Portrait& g, VertexId v, int depth) {
  const auto leaves = testing::oracle_leaf_images(g, depth);
  const auto below = ipow(g.arity(), depth - v.level);
  std::vector<std::uint64_t> out(below);
  for (std::uint64_t w = 0; w < below; ++w) out[w] = leaves[v.code * below + w] % below;
  return out;
}

TEST(ResolverTest, ResolveMatchesSectionOracle) {
  const auto words = parse_words("x1 x2, x2 x1", 2);
  auto rng = derive_stream(17, 3);
  const int depth = 12;
  const auto gens = haar_gens(2, depth, rng);
  const auto res = find_configuration(gens, words, 2, rng, {10, 256});
  const auto betas = resolve(gens, res);
  ASSERT_EQ(betas.size(), res.components.size());
  for (std::size_t c = 0; c < betas.size(); ++c) {
    const auto& comp = res.components[c];
    for (std::size_t k = 0; k < betas[c].size(); ++k) {
      EXPECT_EQ(betas[c][k].depth(), depth - res.level);
      const auto g = substitute(expand(comp.loop_words[k], words), gens);
      const VertexId v{res.level, comp.base_vertex};
      EXPECT_EQ(apply(g, v), v);
      EXPECT_EQ(testing::oracle_leaf_images(betas[c][k], depth - res.level), oracle_section(g, v, depth));
    }
  }
}

TEST(ResolverTest, EmptyPathIsIdentity) {
  Rng rng(1);
  const auto gens = haar_gens(2, 6, rng);
  const auto id = cocycle_along(gens, 2, {});
  EXPECT_TRUE(id.is_identity());
  EXPECT_EQ(id.depth(), 4);
  EXPECT_TRUE(expand(FreeWord(2, {}), parse_words("x1 x2, x2 x1", 2)).empty());
  EXPECT_EQ(to_string(expand(parse_word("x1 x2^-1", 2), parse_words("x1 x2, x2 x1", 2))), "x1 x2 x1^-1 x2^-1");
}

TEST(ResolverTest, ExpandSubstitutes) {
  const auto words = parse_words("x1 x2, x2 x1", 2);
  const auto alpha = FreeWord(2, {{1, 1}, {2, -1}, {1, 1}});
  // x1 x2 . x1^-1 x2^-1 . x1 x2
  EXPECT_EQ(expand(alpha, words), FreeWord(2, {{1, 1}, {2, 1}, {1, -1}, {2, -1}, {1, 1}, {2, 1}}));
  EXPECT_THROW(expand(FreeWord(3, {{3, 1}}), words), Error);
}

TEST(ResolverTest, HaarSingleLoopBinomial) {
  HaarConfig cfg;
  cfg.words = parse_words("x1 x2, x2 x1", 2);
  cfg.k = 1;
  cfg.truncation = 1;
  cfg.samples = 400;
  cfg.seed = 5;
  cfg.resolver.max_depth = 10;
  const auto rep = verify_haar(cfg);
  EXPECT_EQ(rep.cells_per_factor, 2u);
  EXPECT_EQ(rep.joint_cells, 2u);
  ASSERT_EQ(rep.marginals.size(), 1u);
  EXPECT_GT(rep.resolved, 380u);
  EXPECT_GT(rep.joint.p_value, 1e-3);
  // the same count as a binomial z-score
  std::uint64_t swaps = 0;
  for (std::uint64_t i = 0; i < cfg.samples; ++i) {
    const auto r = haar_run(cfg, i);
    if (r.resolved) swaps += r.cells[0];
  }
  EXPECT_LT(std::abs(binomial_z(swaps, rep.resolved, 0.5)), 3.3);
}

TEST(ResolverTest, HaarRunsAreReproducible) {
  HaarConfig cfg;
  cfg.words = parse_words("x1 x2, x2 x1", 2);
  cfg.resolver.max_depth = 10;
  for (std::uint64_t run = 0; run < 5; ++run) {
    const auto a = haar_run(cfg, run);
    const auto b = haar_run(cfg, run);
    EXPECT_EQ(a.resolved, b.resolved);
    EXPECT_EQ(a.level, b.level);
    EXPECT_EQ(a.cells, b.cells);
  }
}

TEST(ResolverTest, HaarParallelMatchesSerial) {
  HaarConfig cfg;
  cfg.words = parse_words("x1 x2, x2 x1", 2);
  cfg.k = 1;
  cfg.truncation = 1;
  cfg.samples = 60;
  cfg.resolver.max_depth = 8;
  const auto serial = verify_haar(cfg);
  cfg.jobs = 3;
  const auto parallel = verify_haar(cfg);
  EXPECT_EQ(serial.resolved, parallel.resolved);
  EXPECT_EQ(serial.joint.statistic, parallel.joint.statistic);
  EXPECT_EQ(serial.level_histogram, parallel.level_histogram);
}

TEST(ResolverTest, HaarDemandsEnoughSamples) {
  HaarConfig cfg;
  cfg.words = parse_words("x1 x2, x2 x1", 2);
  cfg.samples = 1000;  // 64 cells need 1280
  EXPECT_THROW(verify_haar(cfg), Error);
  cfg.k = 0;
  EXPECT_THROW(verify_haar(cfg), Error);
}

PermGroup alternating4() { return PermGroup::generated_by(4, {{1, 2, 0, 3}, {0, 2, 3, 1}}); }
PermGroup dihedral4() { return PermGroup::generated_by(4, {{1, 2, 3, 0}, {0, 3, 2, 1}}); }

TEST(ResolverTest, ProductLawExactlyUniform) {
  const std::vector<PermGroup> groups{PermGroup::symmetric(4), alternating4(), dihedral4(), PermGroup::cyclic(5),
                                      PermGroup::symmetric(3), PermGroup::cyclic(2)};
  const std::vector<std::size_t> orders{24, 12, 8, 5, 6, 2};
  Rng rng(31);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    ASSERT_EQ(groups[g].order(), orders[g]);
    for (int k : {1, 2}) {
      for (const auto& coupling : adversarial_couplings(groups[g], k, rng)) {
        const auto chk = product_distribution_check(groups[g], k, coupling);
        EXPECT_EQ(chk.cells, k == 1 ? orders[g] : orders[g] * orders[g]);
        EXPECT_TRUE(chk.uniform) << groups[g].name() << " K=" << k << " " << coupling.name;
      }
    }
  }
}

TEST(ResolverTest, ProductCheckCountsWeights) {
  const auto s3 = PermGroup::symmetric(3);
  Coupling c{"two atoms", {{{0, 1, 2, 3}, 3}, {{5, 5, 5, 5}, 4}}};
  const auto chk = product_distribution_check(s3, 2, c);
  EXPECT_EQ(chk.per_cell, 7u);
  EXPECT_EQ(chk.cells, 36u);
  EXPECT_TRUE(chk.uniform);
  Coupling bad{"short atom", {{{0, 1}, 1}}};
  EXPECT_THROW(product_distribution_check(s3, 2, bad), Error);
}

}  // namespace
}  // namespace treelift
