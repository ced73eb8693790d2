#include "treelift/resolver.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>

#include "treelift/parallel.hpp"

namespace treelift {

namespace {

// Checks that the freely reduced image of every non-backtracking Y path of
// length <= radius is an embedded X path. A depth-first search keeps the
// reduced X path as a stack and undoes its moves on return.
class EmbeddedPathSearch {
 public:
  EmbeddedPathSearch(const ImmersionMap& imm, std::size_t radius)
      : imm_(imm), radius_(radius), on_path_(imm.x().vertex_count(), 0) {}

  bool run() {
    const auto& y = imm_.y();
    for (std::uint32_t v = 0; v < y.vertex_count(); ++v) {
      start_ = v;
      on_path_[v] = 1;
      const bool ok = extend(v, std::nullopt, 0);
      on_path_[v] = 0;
      if (!ok) return false;
    }
    return true;
  }

 private:
  struct Step {
    Letter letter;
    std::uint32_t vertex;  // X vertex reached by the letter
  };

  std::uint32_t current() const { return stack_.empty() ? start_ : stack_.back().vertex; }

  bool extend(std::uint32_t v, std::optional<DirectedEdge> last, std::size_t depth) {
    if (depth == radius_) return true;
    const auto& y = imm_.y();
    for (std::size_t k = 0; k < y.degree(); ++k) {
      const auto f = y.out_edge(v, k);
      if (last && f == y.reverse(*last)) continue;
      std::vector<Step> popped;
      std::size_t pushed = 0;
      const auto& w = imm_.words()[f.gen];
      auto apply = [&](Letter l) {
        if (!stack_.empty() && stack_.back().letter == l.inverse()) {
          leave(stack_.back().vertex);
          if (pushed > 0) {
            --pushed;
          } else {
            popped.push_back(stack_.back());
          }
          stack_.pop_back();
          return;
        }
        const auto t = imm_.x().target({current(), static_cast<std::uint32_t>(l.gen - 1), l.exp});
        enter(t);
        stack_.push_back({l, t});
        ++pushed;
      };
      if (f.sign > 0) {
        for (const auto& l : w.letters()) apply(l);
      } else {
        for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it) apply(it->inverse());
      }
      const bool ok = repeats_ == 0 && extend(y.target(f), f, depth + 1);
      // undo: drop what this step pushed, restore what it popped
      for (std::size_t i = 0; i < pushed; ++i) {
        leave(stack_.back().vertex);
        stack_.pop_back();
      }
      for (auto it = popped.rbegin(); it != popped.rend(); ++it) {
        enter(it->vertex);
        stack_.push_back(*it);
      }
      if (!ok) return false;
    }
    return true;
  }

  // Only whole Y edges are judged; a repeat in the middle of a word may
  // cancel before the edge ends.
  void enter(std::uint32_t v) {
    if (++on_path_[v] == 2) ++repeats_;
  }
  void leave(std::uint32_t v) {
    if (on_path_[v]-- == 2) --repeats_;
  }

  const ImmersionMap& imm_;
  std::size_t radius_;
  std::size_t repeats_ = 0;
  std::uint32_t start_ = 0;
  std::vector<Step> stack_;
  std::vector<int> on_path_;
};

bool edge_injective(const ImmersionMap& imm, std::span<const EdgeId> y_edges) {
  std::vector<EdgeId> seen;
  for (auto f : y_edges) {
    const auto path = imm.edges_of(f);
    seen.assign(path.begin(), path.end());
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) return false;
  }
  return true;
}

std::vector<DirectedEdge> reversed(const LevelGraph& g, const std::vector<DirectedEdge>& path) {
  std::vector<DirectedEdge> out;
  for (auto it = path.rbegin(); it != path.rend(); ++it) out.push_back(g.reverse(*it));
  return out;
}

// Breadth-first tree of Z minus `removed`, rooted at `root`; parent[x] is the
// directed edge entering x.
std::vector<std::optional<DirectedEdge>> bfs_tree(const LevelGraph& y, std::uint32_t root,
                                                  const std::vector<EdgeId>& removed) {
  std::vector<std::optional<DirectedEdge>> parent(y.vertex_count());
  std::vector<bool> seen(y.vertex_count(), false);
  std::queue<std::uint32_t> q;
  q.push(root);
  seen[root] = true;
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (std::size_t k = 0; k < y.degree(); ++k) {
      const auto e = y.out_edge(u, k);
      if (std::binary_search(removed.begin(), removed.end(), y.geometric(e))) continue;
      const auto t = y.target(e);
      if (seen[t]) continue;
      seen[t] = true;
      parent[t] = e;
      q.push(t);
    }
  }
  return parent;
}

std::vector<DirectedEdge> tree_path(const std::vector<std::optional<DirectedEdge>>& parent, std::uint32_t root,
                                    std::uint32_t x) {
  std::vector<DirectedEdge> out;
  while (x != root) {
    const auto e = *parent[x];
    out.push_back(e);
    x = e.origin;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

FreeWord loop_word(int rank, const std::vector<DirectedEdge>& loop) {
  std::vector<Letter> raw;
  for (const auto& e : loop) raw.push_back({static_cast<int>(e.gen) + 1, e.sign});
  return FreeWord(rank, std::move(raw));
}

ComponentResolution build_loops(const ImmersionMap& imm, std::size_t component, std::span<const EdgeId> reps,
                                const CandidateCheck& chk) {
  const auto& y = imm.y();
  ComponentResolution out;
  out.component = component;
  out.base_vertex = chk.base_vertex;
  out.representatives.assign(reps.begin(), reps.end());
  out.marked = chk.marked;
  const auto parent = bfs_tree(y, chk.base_vertex, chk.zeta);
  for (auto id : reps) {
    const auto f = y.positive(id);
    auto loop = tree_path(parent, chk.base_vertex, f.origin);
    loop.push_back(f);
    const auto back = reversed(y, tree_path(parent, chk.base_vertex, y.target(f)));
    loop.insert(loop.end(), back.begin(), back.end());
    out.loop_words.push_back(loop_word(static_cast<int>(y.generator_count()), loop));
    out.loops.push_back(std::move(loop));
  }
  return out;
}

// How far a candidate got; higher is better.
int progress(const CandidateCheck& c) {
  if (!c.distinct) return 0;
  if (!c.injective) return 1;
  if (!c.separated) return 2;
  if (!c.free_vertex) return 3;
  if (!c.connected) return c.no_tree ? 5 : 4;
  return 6;
}

struct Level {
  LevelGraph x;
  LevelGraph y;
  ImmersionMap imm;
  Components comps;
};

Level build_level(std::span<const Portrait> fgens, std::span<const FreeWord> words, int n) {
  auto x = build_schreier(fgens, n);
  auto y = build_schreier(words, x);
  auto imm = immersion(x, y, words);
  auto comps = components(imm.y());
  return {std::move(x), std::move(y), std::move(imm), std::move(comps)};
}

std::uint64_t portrait_cell(const Portrait& g, const PermGroup& h) {
  std::uint64_t idx = 0;
  for (std::uint64_t i = 0; i < g.shape().internal_count(); ++i) {
    const auto j = h.index_of(g.label_at(i));
    if (j < 0) throw Error("portrait_cell: label outside the local group");
    idx = idx * h.order() + static_cast<std::uint64_t>(j);
  }
  return idx;
}

std::vector<DirectedEdge> x_path_of(const ImmersionMap& imm, const std::vector<DirectedEdge>& loop) {
  std::vector<DirectedEdge> out;
  for (const auto& f : loop) {
    const auto p = imm.path(f);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<Portrait> resolve_component(std::span<const Portrait> fgens, const Resolution& res,
                                        const ComponentResolution& c, const ImmersionMap& imm) {
  std::vector<Portrait> out;
  const VertexId v{res.level, c.base_vertex};
  for (std::size_t k = 0; k < c.loops.size(); ++k) {
    auto along = cocycle_along(fgens, res.level, x_path_of(imm, c.loops[k]));
    const auto direct = local_cocycle(substitute(expand(c.loop_words[k], res.words), fgens), v);
    if (!(along == direct))
      throw Error("resolve: cocycle product along the path disagrees with the substituted word");
    out.push_back(std::move(along));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string StabilityCheck::failing() const {
  if (!girth_x_ok) return "girth(X_N) >= R";
  if (!girth_y_ok) return "girth(Y_N) >= R";
  if (!edge_injective) return "iota injective on edges";
  if (!short_paths_embedded) return "short paths contractible";
  return "";
}

StabilityCheck check_stability(const ImmersionMap& imm, std::size_t radius) {
  if (radius < 1) throw Error("stable_level: R must be at least 1");
  StabilityCheck c;
  c.level = imm.x().level();
  c.radius = radius;
  const auto l = imm.max_word_length();
  c.girth_x = girth(imm.x(), std::max(radius, l * radius + 1));
  c.girth_y = girth(imm.y(), radius);
  c.girth_x_ok = c.girth_x >= radius;
  c.girth_y_ok = c.girth_y >= radius;
  std::vector<EdgeId> all(imm.y().edge_count());
  std::iota(all.begin(), all.end(), EdgeId{0});
  c.edge_injective = edge_injective(imm, all);
  if (!(c.girth_x_ok && c.girth_y_ok && c.edge_injective)) return c;
  // Reduced paths shorter than the girth cannot close up.
  c.short_paths_embedded = c.girth_x > l * radius || EmbeddedPathSearch(imm, radius).run();
  return c;
}

StabilityCertificate stable_level(std::span<const Portrait> fgens, std::span<const FreeWord> words,
                                  std::size_t radius, int max_depth) {
  if (fgens.empty() || words.empty()) throw Error("stable_level: need generators and words");
  if (max_depth > fgens[0].depth()) throw Error("stable_level: maxDepth exceeds portrait depth");
  StabilityCheck last;
  for (int n = 0; n <= max_depth; ++n) {
    const auto x = build_schreier(fgens, n);
    const auto y = build_schreier(words, x);
    last = check_stability(immersion(x, y, words), radius);
    if (last.ok()) return last;
  }
  throw ResolverError("stable_level: no level <= " + std::to_string(max_depth) + " is stable for R = " +
                          std::to_string(radius) + "; at level " + std::to_string(max_depth) +
                          " the failing condition is " + last.failing(),
                      last.failing());
}

// ---------------------------------------------------------------------------

std::string CandidateCheck::failing() const {
  switch (progress(*this)) {
    case 0: return "distinct marked edges";
    case 1: return "(1) iota injective on zeta(E)";
    case 2: return "(2) marked edges separated";
    case 3: return "(3) vertex outside zeta(E)";
    case 4: return "(4) connected complement; (5) a complement component is a tree";
    case 5: return "(4) connected complement";
    default: return "";
  }
}

CandidateCheck check_candidate(const ImmersionMap& imm, const Components& comps, std::size_t component,
                               std::span<const EdgeId> reps) {
  const auto& y = imm.y();
  const auto& members = comps.members.at(component);
  CandidateCheck c;
  for (auto f : reps) {
    if (f >= y.edge_count() || comps.of[y.positive(f).origin] != component)
      throw Error("check_candidate: representative outside the component");
    c.marked.push_back(imm.edges_of(f)[0]);
  }
  {
    std::vector<EdgeId> a(reps.begin(), reps.end());
    auto b = c.marked;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    c.distinct = std::adjacent_find(a.begin(), a.end()) == a.end() &&
                 std::adjacent_find(b.begin(), b.end()) == b.end();
  }
  if (!c.distinct) return c;

  // zeta(e_k) inside Z
  std::vector<std::vector<EdgeId>> per_mark;
  for (auto e : c.marked) {
    per_mark.emplace_back();
    for (auto f : imm.preimage(e))
      if (comps.of[y.positive(f).origin] == component) per_mark.back().push_back(f);
    c.zeta.insert(c.zeta.end(), per_mark.back().begin(), per_mark.back().end());
  }
  std::sort(c.zeta.begin(), c.zeta.end());
  c.zeta.erase(std::unique(c.zeta.begin(), c.zeta.end()), c.zeta.end());

  c.injective = edge_injective(imm, c.zeta);
  if (!c.injective) return c;

  c.separated = true;
  for (std::size_t k = 0; k < c.marked.size() && c.separated; ++k)
    for (auto f : per_mark[k]) {
      const auto path = imm.edges_of(f);
      for (std::size_t j = 0; j < c.marked.size(); ++j)
        if (j != k && std::find(path.begin(), path.end(), c.marked[j]) != path.end()) c.separated = false;
    }
  if (!c.separated) return c;

  std::vector<bool> touched(y.vertex_count(), false);
  for (auto f : c.zeta) {
    const auto [a, b] = y.endpoints(f);
    touched[a] = touched[b] = true;
  }
  c.free_vertex = false;
  for (auto v : members)
    if (!touched[v]) {
      c.free_vertex = true;
      c.base_vertex = v;
      break;
    }
  if (!c.free_vertex) return c;

  // Components of Z minus zeta(E): connectivity and the tree test.
  std::vector<std::uint32_t> root(y.vertex_count());
  std::iota(root.begin(), root.end(), 0u);
  auto find = [&](std::uint32_t v) {
    while (root[v] != v) v = root[v] = root[root[v]];
    return v;
  };
  std::vector<std::size_t> edges_in(y.vertex_count(), 0);
  std::vector<std::size_t> verts_in(y.vertex_count(), 0);
  for (auto v : members)
    for (std::size_t s = 0; s < y.generator_count(); ++s) {
      const EdgeId id = static_cast<EdgeId>(v) * y.generator_count() + s;
      if (std::binary_search(c.zeta.begin(), c.zeta.end(), id)) continue;
      const auto a = find(v);
      const auto b = find(y.forward(s)[v]);
      if (a != b) root[std::max(a, b)] = std::min(a, b);
    }
  for (auto v : members) ++verts_in[find(v)];
  for (auto v : members)
    for (std::size_t s = 0; s < y.generator_count(); ++s) {
      const EdgeId id = static_cast<EdgeId>(v) * y.generator_count() + s;
      if (!std::binary_search(c.zeta.begin(), c.zeta.end(), id)) ++edges_in[find(v)];
    }
  std::size_t parts = 0;
  c.no_tree = true;
  for (auto v : members)
    if (find(v) == v) {
      ++parts;
      if (edges_in[v] + 1 == verts_in[v]) c.no_tree = false;
    }
  c.connected = parts == 1;
  return c;
}

const ComponentResolution& Resolution::containing(std::uint32_t vertex, const Components& comps) const {
  const auto id = comps.of.at(vertex);
  for (const auto& c : components)
    if (c.component == id) return c;
  throw Error("Resolution: no component contains the vertex");
}

Resolution find_configuration(std::span<const Portrait> fgens, std::span<const FreeWord> words, int k, Rng& rng,
                              const ResolverOptions& opt) {
  if (k < 1) throw Error("find_configuration: K must be at least 1");
  if (fgens.empty()) throw Error("find_configuration: no generators");
  if (!noncyclic_pair(words)) throw Error("find_configuration: the words generate a cyclic subgroup");
  if (opt.max_depth > fgens[0].depth()) throw Error("find_configuration: maxDepth exceeds portrait depth");
  const auto kk = static_cast<std::size_t>(k);
  const auto d = static_cast<std::uint32_t>(fgens[0].arity());

  // Candidates that passed everything except connectivity, by component, for
  // lifting to the next level.
  std::vector<std::optional<std::vector<EdgeId>>> carried;
  std::optional<Components> prev_comps;
  std::string blocking = "none";
  std::string detail;
  for (int n = 0; n <= opt.max_depth; ++n) {
    const auto lvl = build_level(fgens, words, n);
    const auto& y = lvl.y;
    const auto t = y.generator_count();
    std::vector<std::optional<std::vector<EdgeId>>> next_carried(lvl.comps.count());
    Resolution res;
    res.level = n;
    res.words.assign(words.begin(), words.end());
    bool all_ok = true;
    int worst = 7;
    for (std::size_t c = 0; c < lvl.comps.count(); ++c) {
      const auto& mem = lvl.comps.members[c];
      std::optional<std::pair<std::vector<EdgeId>, CandidateCheck>> found;
      int best = -1;
      CandidateCheck best_check;
      auto consider = [&](std::vector<EdgeId> reps) {
        auto chk = check_candidate(lvl.imm, lvl.comps, c, reps);
        const int p = progress(chk);
        if (p > best) {
          best = p;
          best_check = chk;
        }
        if (p == 5 && !next_carried[c]) next_carried[c] = reps;
        if (chk.ok()) found.emplace(std::move(reps), std::move(chk));
      };
      // Lifts of the previous level's candidate, every f_k taken in the same fibre.
      if (prev_comps) {
        const auto& prev = carried[prev_comps->of[mem.front() / d]];
        for (std::uint32_t i = 0; prev && i < d && !found; ++i) {
          std::vector<EdgeId> lift;
          for (auto id : *prev) {
            const EdgeId up = (static_cast<EdgeId>(id / t) * d + i) * t + id % t;
            if (lvl.comps.of[static_cast<std::size_t>(up / t)] == c) lift.push_back(up);
          }
          if (lift.size() == kk) consider(std::move(lift));
        }
      }
      const auto edges = mem.size() * t;
      for (std::size_t a = 0; a < opt.attempts && !found && edges >= kk; ++a) {
        std::vector<EdgeId> reps;
        while (reps.size() < kk) {
          const auto r = uniform_below(rng, edges);
          const EdgeId id = static_cast<EdgeId>(mem[r / t]) * t + r % t;
          if (std::find(reps.begin(), reps.end(), id) == reps.end()) reps.push_back(id);
        }
        consider(std::move(reps));
      }
      if (!found) {
        all_ok = false;
        if (best < worst) {
          worst = best;
          blocking = best < 0 ? "too few edges" : best_check.failing();
          detail = "component " + std::to_string(c) + " of size " + std::to_string(mem.size());
        }
        continue;
      }
      res.components.push_back(build_loops(lvl.imm, c, found->first, found->second));
    }
    if (all_ok) return res;
    carried = std::move(next_carried);
    prev_comps = lvl.comps;
  }
  throw ResolverError("find_configuration: no configuration up to level " + std::to_string(opt.max_depth) +
                          "; at the last level " + detail + " was blocked by " + blocking,
                      blocking);
}

Audit audit(std::span<const Portrait> fgens, const Resolution& res) {
  Audit out;
  auto fail = [&](const std::string& why) {
    if (out.ok) out.failure = why;
    out.ok = false;
  };
  const auto lvl = build_level(fgens, res.words, res.level);
  const auto& y = lvl.y;
  const auto& x = lvl.x;
  std::vector<bool> covered(lvl.comps.count(), false);
  for (const auto& c : res.components) {
    if (c.component >= lvl.comps.count()) {
      fail("component index out of range");
      continue;
    }
    covered[c.component] = true;
    const auto K = c.loops.size();
    if (c.marked.size() != K || c.representatives.size() != K || c.loop_words.size() != K) {
      fail("component " + std::to_string(c.component) + ": inconsistent sizes");
      continue;
    }
    const auto chk = check_candidate(lvl.imm, lvl.comps, c.component, c.representatives);
    if (!chk.ok()) fail("component " + std::to_string(c.component) + ": condition " + chk.failing());
    if (chk.marked != c.marked) fail("component " + std::to_string(c.component) + ": marked edges differ");
    if (lvl.comps.of[c.base_vertex] != c.component) fail("base vertex outside its component");
    std::vector<std::vector<int>> counts(K, std::vector<int>(K, 0));
    for (std::size_t j = 0; j < K; ++j) {
      const auto& loop = c.loops[j];
      std::uint32_t at = c.base_vertex;
      for (const auto& f : loop) {
        if (f.origin != at) fail("loop is not a walk");
        at = y.target(f);
      }
      if (at != c.base_vertex) fail("loop does not close at the base vertex");
      if (!(loop_word(static_cast<int>(y.generator_count()), loop) == c.loop_words[j]))
        fail("loop word does not match its edges");
      for (const auto& e : x_path_of(lvl.imm, loop)) {
        const auto g = x.geometric(e);
        for (std::size_t kx = 0; kx < K; ++kx)
          if (g == c.marked[kx]) ++counts[j][kx];
      }
      for (std::size_t kx = 0; kx < K; ++kx)
        if (counts[j][kx] != (j == kx ? 1 : 0))
          fail("component " + std::to_string(c.component) + ": alpha_" + std::to_string(j + 1) + " crosses e_" +
               std::to_string(kx + 1) + " " + std::to_string(counts[j][kx]) + " times");
    }
    out.traversals.push_back(std::move(counts));
  }
  for (std::size_t i = 0; i < covered.size(); ++i)
    if (!covered[i]) fail("component " + std::to_string(i) + " has no resolution");
  return out;
}

FreeWord expand(const FreeWord& alpha, std::span<const FreeWord> words) {
  if (static_cast<std::size_t>(alpha.rank()) != words.size())
    throw Error("expand: word rank does not match the generator count");
  const int rank = words.empty() ? 0 : words[0].rank();
  std::vector<Letter> raw;
  for (const auto& l : alpha.letters()) {
    const auto& w = words[static_cast<std::size_t>(l.gen - 1)];
    if (l.exp > 0) {
      raw.insert(raw.end(), w.letters().begin(), w.letters().end());
    } else {
      for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it) raw.push_back(it->inverse());
    }
  }
  return FreeWord(rank, std::move(raw));
}

Portrait cocycle_along(std::span<const Portrait> fgens, int level, std::span<const DirectedEdge> x_path) {
  if (fgens.empty()) throw Error("cocycle_along: no generators");
  std::vector<std::optional<Portrait>> inverses(fgens.size());
  Portrait acc(TreeShape(fgens[0].arity(), fgens[0].depth() - level));
  for (const auto& e : x_path) {
    const Portrait* g = &fgens[e.gen];
    if (e.sign < 0) {
      if (!inverses[e.gen]) inverses[e.gen] = inverse(fgens[e.gen]);
      g = &*inverses[e.gen];
    }
    acc = compose(acc, local_cocycle(*g, {level, e.origin}));
  }
  return acc;
}

std::vector<std::vector<Portrait>> resolve(std::span<const Portrait> fgens, const Resolution& res) {
  const auto lvl = build_level(fgens, res.words, res.level);
  std::vector<std::vector<Portrait>> out;
  for (const auto& c : res.components) out.push_back(resolve_component(fgens, res, c, lvl.imm));
  return out;
}

// ---------------------------------------------------------------------------

HaarRun haar_run(const HaarConfig& cfg, std::uint64_t run) {
  HaarRun out;
  auto rng = derive_stream(cfg.seed, run);
  const int depth = cfg.resolver.max_depth + cfg.truncation;
  std::vector<Portrait> fgens;
  for (int i = 0; i < cfg.rank; ++i) fgens.push_back(sample_haar(cfg.group, TreeShape(cfg.group.degree(), depth), rng));
  Resolution res;
  try {
    res = find_configuration(fgens, cfg.words, cfg.k, rng, cfg.resolver);
  } catch (const ResolverError& e) {
    out.failure = e.condition();
    return out;
  }
  out.resolved = true;
  out.level = res.level;
  std::vector<Portrait> truncated;
  for (const auto& g : fgens) truncated.push_back(psi(g, res.level + cfg.truncation));
  const auto lvl = build_level(truncated, res.words, res.level);
  const auto& comp = res.containing(0, lvl.comps);
  for (const auto& beta : resolve_component(truncated, res, comp, lvl.imm))
    out.cells.push_back(portrait_cell(beta, cfg.group));
  return out;
}

HaarReport verify_haar(const HaarConfig& cfg) {
  if (cfg.k < 1) throw Error("verify_haar: K must be at least 1");
  if (cfg.truncation < 1) throw Error("verify_haar: truncation must be at least 1");
  HaarReport rep;
  const TreeShape cut(cfg.group.degree(), cfg.truncation);
  rep.cells_per_factor = 1;
  for (std::uint64_t i = 0; i < cut.internal_count(); ++i) rep.cells_per_factor *= cfg.group.order();
  rep.joint_cells = 1;
  for (int i = 0; i < cfg.k; ++i) rep.joint_cells *= rep.cells_per_factor;
  if (rep.joint_cells > 10000) throw Error("verify_haar: more than 10^4 joint cells; lower K or the truncation");
  const auto need = 20 * rep.joint_cells;
  if (cfg.samples < need)
    throw Error("verify_haar: " + std::to_string(cfg.samples) + " samples give fewer than 20 expected per cell; use at least " +
                std::to_string(need));

  std::vector<HaarRun> runs(cfg.samples);
  parallel_for(cfg.samples, cfg.jobs, [&](std::size_t i) { runs[i] = haar_run(cfg, i); });

  rep.runs = runs.size();
  rep.level_histogram.assign(static_cast<std::size_t>(cfg.resolver.max_depth) + 1, 0);
  std::vector<std::vector<std::uint64_t>> marg(static_cast<std::size_t>(cfg.k),
                                               std::vector<std::uint64_t>(rep.cells_per_factor, 0));
  std::vector<std::uint64_t> joint(rep.joint_cells, 0);
  std::vector<std::uint64_t> control(rep.joint_cells, 0);
  for (const auto& r : runs) {
    if (!r.resolved) continue;
    ++rep.resolved;
    ++rep.level_histogram[static_cast<std::size_t>(r.level)];
    std::uint64_t j = 0;
    std::uint64_t c = 0;
    for (std::size_t k = 0; k < r.cells.size(); ++k) {
      ++marg[k][r.cells[k]];
      j = j * rep.cells_per_factor + r.cells[k];
      c = c * rep.cells_per_factor + r.cells[k == 1 ? 0 : k];
    }
    ++joint[j];
    ++control[c];
  }
  if (rep.resolved < need)
    throw Error("verify_haar: only " + std::to_string(rep.resolved) + " of " + std::to_string(rep.runs) +
                " runs resolved, fewer than 20 expected per cell; raise the sample count or maxDepth");
  for (const auto& m : marg) rep.marginals.push_back(chi_square_uniform(m));
  rep.joint = chi_square_uniform(joint);
  if (cfg.k >= 2) rep.control = chi_square_uniform(control);
  return rep;
}

// ---------------------------------------------------------------------------

ProductCheck product_distribution_check(const PermGroup& group, int k, const Coupling& coupling) {
  const auto& el = group.elements();
  const auto n = el.size();
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::size_t> mul(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) mul[a * n + b] = static_cast<std::size_t>(group.index_of(then(el[a], el[b])));
  ProductCheck out;
  out.cells = 1;
  for (std::size_t i = 0; i < kk; ++i) out.cells *= n;
  std::vector<std::uint64_t> counts(out.cells, 0);
  std::vector<std::size_t> gamma(kk, 0);
  for (const auto& [atom, weight] : coupling.atoms) {
    if (atom.size() != 2 * kk) throw Error("product_distribution_check: atom needs 2K entries");
    out.per_cell += weight;
    std::fill(gamma.begin(), gamma.end(), 0);
    for (std::uint64_t g = 0; g < out.cells; ++g) {
      std::uint64_t cell = 0;
      for (std::size_t i = 0; i < kk; ++i) {
        const auto eta = mul[mul[atom[i] * n + gamma[i]] * n + atom[kk + i]];
        cell = cell * n + eta;
      }
      counts[cell] += weight;
      for (std::size_t i = 0; i < kk && ++gamma[i] == n; ++i) gamma[i] = 0;
    }
  }
  out.uniform = std::all_of(counts.begin(), counts.end(), [&](std::uint64_t c) { return c == out.per_cell; });
  return out;
}

std::vector<Coupling> adversarial_couplings(const PermGroup& group, int k, Rng& rng) {
  const auto& el = group.elements();
  const auto n = el.size();
  const auto kk = static_cast<std::size_t>(k);
  auto inv = [&](std::size_t a) { return static_cast<std::size_t>(group.index_of(invert(el[a]))); };
  std::vector<Coupling> out;

  Coupling point{"point mass", {}};
  std::vector<std::size_t> atom(2 * kk);
  for (auto& a : atom) a = uniform_below(rng, n);
  point.atoms.emplace_back(atom, 1);
  out.push_back(point);

  Coupling equal{"all factors equal", {}};
  for (std::size_t b = 0; b < n; ++b) equal.atoms.emplace_back(std::vector<std::size_t>(2 * kk, b), 1);
  out.push_back(equal);

  Coupling cancel{"delta = beta^-1, betas equal", {}};
  for (std::size_t b = 0; b < n; ++b) {
    std::vector<std::size_t> a(2 * kk);
    for (std::size_t i = 0; i < kk; ++i) {
      a[i] = b;
      a[kk + i] = inv(b);
    }
    cancel.atoms.emplace_back(a, 1);
  }
  out.push_back(cancel);

  Coupling chained{"delta_k = beta_(k+1)", {}};
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t c = 0; c < n; ++c) {
      std::vector<std::size_t> a(2 * kk);
      for (std::size_t i = 0; i < kk; ++i) {
        a[i] = (i % 2 == 0) ? b : c;
        a[kk + i] = (i % 2 == 0) ? c : inv(b);
      }
      chained.atoms.emplace_back(a, 1 + (b * 7 + c) % 5);
    }
  out.push_back(chained);

  Coupling random{"random weighted law", {}};
  for (int i = 0; i < 64; ++i) {
    std::vector<std::size_t> a(2 * kk);
    for (auto& x : a) x = uniform_below(rng, n);
    random.atoms.emplace_back(a, 1 + uniform_below(rng, 1000));
  }
  out.push_back(random);
  return out;
}

}  // namespace treelift
