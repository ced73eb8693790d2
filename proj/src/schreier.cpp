#include "treelift/schreier.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <queue>

#include "treelift/error.hpp"

namespace treelift {

Perm invert(const Perm& p) {
  Perm r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<std::uint32_t>(i);
  return r;
}

LevelGraph::LevelGraph(int level, int arity, std::vector<Perm> generators)
    : level_(level), arity_(arity), vertex_count_(ipow(arity, level)), forward_(std::move(generators)) {
  backward_.reserve(forward_.size());
  for (const auto& p : forward_) {
    if (p.size() != vertex_count_) throw Error("level graph: generator has wrong degree");
    std::vector<bool> seen(p.size(), false);
    for (auto x : p) {
      if (x >= p.size() || seen[x]) throw Error("level graph: generator is not a bijection");
      seen[x] = true;
    }
    backward_.push_back(invert(p));
  }
}

std::pair<std::uint32_t, std::uint32_t> LevelGraph::endpoints(EdgeId id) const {
  const auto e = positive(id);
  const auto t = target(e);
  return {std::min(e.origin, t), std::max(e.origin, t)};
}

LevelGraph build_schreier(std::span<const Portrait> gens, int n) {
  if (gens.empty()) throw Error("build_schreier: no generators");
  std::vector<Perm> perms;
  perms.reserve(gens.size());
  for (const auto& g : gens) {
    if (g.arity() != gens[0].arity()) throw Error("build_schreier: generator arities differ");
    perms.push_back(level_action(g, n));
  }
  return LevelGraph(n, gens[0].arity(), std::move(perms));
}

LevelGraph build_schreier(std::span<const FreeWord> words, const LevelGraph& x) {
  std::vector<Perm> backward;
  for (std::size_t i = 0; i < x.generator_count(); ++i) backward.push_back(x.backward(i));
  std::vector<Perm> perms;
  perms.reserve(words.size());
  for (const auto& w : words) perms.push_back(substitute_level(w, x.generators(), backward));
  return LevelGraph(x.level(), x.arity(), std::move(perms));
}

namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Components components(const LevelGraph& g) {
  const auto n = g.vertex_count();
  UnionFind uf(n);
  for (std::size_t s = 0; s < g.generator_count(); ++s) {
    const auto& p = g.forward(s);
    for (std::uint32_t v = 0; v < n; ++v) uf.unite(v, p[v]);
  }
  Components c;
  c.of.assign(n, 0);
  std::vector<std::uint32_t> id_of_root(n, UINT32_MAX);
  for (std::uint32_t v = 0; v < n; ++v) {
    const auto r = uf.find(v);
    if (id_of_root[r] == UINT32_MAX) {
      id_of_root[r] = static_cast<std::uint32_t>(c.members.size());
      c.members.emplace_back();
    }
    c.of[v] = id_of_root[r];
    c.members[id_of_root[r]].push_back(v);
  }
  return c;
}

std::vector<std::uint32_t> covering_map(const LevelGraph& upper, const LevelGraph& lower) {
  if (upper.level() != lower.level() + 1) throw Error("covering_map: levels are not adjacent");
  if (upper.arity() != lower.arity() || upper.generator_count() != lower.generator_count())
    throw Error("covering_map: graphs use different generators");
  const auto d = static_cast<std::uint32_t>(upper.arity());
  std::vector<std::uint32_t> map(upper.vertex_count());
  for (std::uint32_t v = 0; v < map.size(); ++v) map[v] = v / d;
  for (std::size_t s = 0; s < upper.generator_count(); ++s)
    for (std::uint32_t v = 0; v < map.size(); ++v)
      if (map[upper.forward(s)[v]] != lower.forward(s)[map[v]])
        throw Error("covering_map: generator actions are not compatible with the parent map");
  return map;
}

ImmersionMap::ImmersionMap(LevelGraph x, LevelGraph y, std::vector<FreeWord> words)
    : x_(std::move(x)), y_(std::move(y)), words_(std::move(words)) {
  if (words_.size() != y_.generator_count()) throw Error("immersion: one word per Y generator required");
  if (x_.level() != y_.level() || x_.arity() != y_.arity()) throw Error("immersion: level mismatch");
  word_offset_.push_back(0);
  for (const auto& w : words_) {
    if (w.rank() != static_cast<int>(x_.generator_count())) throw Error("immersion: word rank mismatch");
    word_offset_.push_back(word_offset_.back() + w.length());
  }
  stride_ = word_offset_.back();
  const auto n = y_.vertex_count();
  path_edges_.resize(n * stride_);
  for (std::uint32_t v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      std::uint32_t u = v;
      std::size_t slot = v * stride_ + word_offset_[i];
      for (const auto& l : words_[i].letters()) {
        const DirectedEdge e{u, static_cast<std::uint32_t>(l.gen - 1), l.exp};
        path_edges_[slot++] = x_.geometric(e);
        u = x_.target(e);
      }
      if (u != y_.forward(i)[v]) throw Error("immersion: path endpoint disagrees with Y edge");
    }
  }
  // Inverted index X edge -> Y edges, each Y edge listed once per X edge.
  const auto nx = x_.edge_count();
  std::vector<std::vector<EdgeId>> buckets(nx);
  for (std::uint32_t v = 0; v < n; ++v)
    for (std::size_t i = 0; i < words_.size(); ++i) {
      const EdgeId f = static_cast<EdgeId>(v) * words_.size() + i;
      for (auto e : edges_of(f))
        if (buckets[e].empty() || buckets[e].back() != f) buckets[e].push_back(f);
    }
  zeta_start_.assign(nx + 1, 0);
  for (std::size_t e = 0; e < nx; ++e) {
    std::sort(buckets[e].begin(), buckets[e].end());
    buckets[e].erase(std::unique(buckets[e].begin(), buckets[e].end()), buckets[e].end());
    zeta_start_[e + 1] = zeta_start_[e] + static_cast<std::uint32_t>(buckets[e].size());
  }
  zeta_items_.reserve(zeta_start_.back());
  for (auto& b : buckets) zeta_items_.insert(zeta_items_.end(), b.begin(), b.end());
}

std::size_t ImmersionMap::max_word_length() const {
  std::size_t l = 0;
  for (const auto& w : words_) l = std::max(l, w.length());
  return l;
}

std::span<const EdgeId> ImmersionMap::edges_of(EdgeId y_edge) const {
  const auto v = y_edge / words_.size();
  const auto i = y_edge % words_.size();
  return {path_edges_.data() + v * stride_ + word_offset_[i], words_[i].length()};
}

std::span<const EdgeId> ImmersionMap::preimage(EdgeId x_edge) const {
  return {zeta_items_.data() + zeta_start_[x_edge], zeta_start_[x_edge + 1] - zeta_start_[x_edge]};
}

std::vector<DirectedEdge> ImmersionMap::path(DirectedEdge y_edge) const {
  const auto& w = words_[y_edge.gen];
  std::vector<DirectedEdge> out;
  out.reserve(w.length());
  if (y_edge.sign > 0) {
    std::uint32_t u = y_edge.origin;
    for (const auto& l : w.letters()) {
      const DirectedEdge e{u, static_cast<std::uint32_t>(l.gen - 1), l.exp};
      out.push_back(e);
      u = x_.target(e);
    }
  } else {
    // Reverse of the positive path ending at origin.
    const auto start = y_.backward(y_edge.gen)[y_edge.origin];
    auto fwd = path({start, y_edge.gen, 1});
    for (auto it = fwd.rbegin(); it != fwd.rend(); ++it) out.push_back(x_.reverse(*it));
  }
  return out;
}

ImmersionMap immersion(const LevelGraph& x, const LevelGraph& y, std::span<const FreeWord> words) {
  return ImmersionMap(x, y, {words.begin(), words.end()});
}

std::size_t girth(const LevelGraph& g, std::size_t cap) {
  const auto n = g.vertex_count();
  const auto deg = g.degree();
  std::size_t best = cap;
  std::vector<std::uint32_t> dist(n, UINT32_MAX);
  std::vector<EdgeId> via(n);
  std::vector<std::uint32_t> touched;
  std::vector<std::uint32_t> queue;
  for (std::uint32_t r = 0; r < n && best > 1; ++r) {
    for (auto v : touched) dist[v] = UINT32_MAX;
    touched.clear();
    queue.clear();
    dist[r] = 0;
    touched.push_back(r);
    queue.push_back(r);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto u = queue[head];
      // Any cycle closed from here has length >= 2 dist(u).
      if (best != kInfiniteGirth && 2 * static_cast<std::size_t>(dist[u]) >= best) break;
      for (std::size_t k = 0; k < deg; ++k) {
        const auto e = g.out_edge(u, k);
        const auto id = g.geometric(e);
        if (u != r && id == via[u]) continue;
        const auto w = g.target(e);
        if (dist[w] == UINT32_MAX) {
          dist[w] = dist[u] + 1;
          via[w] = id;
          touched.push_back(w);
          queue.push_back(w);
        } else {
          // A loop is seen from both of its directions; count it once.
          const std::size_t len = static_cast<std::size_t>(dist[u]) + dist[w] + 1;
          if (w == u && e.sign < 0) continue;
          best = std::min(best, len);
        }
      }
    }
  }
  return best;
}

std::vector<EdgeId> zeta(const ImmersionMap& imm, std::span<const EdgeId> x_edges) {
  std::vector<EdgeId> out;
  for (auto e : x_edges) {
    const auto pre = imm.preimage(e);
    out.insert(out.end(), pre.begin(), pre.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void write_edge_csv(std::ostream& os, const LevelGraph& g) {
  os << "# treelift level-graph v1\n";
  os << "level,origin,target,generator,sign\n";
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v)
    for (std::size_t k = 0; k < g.degree(); ++k) {
      const auto e = g.out_edge(v, k);
      os << g.level() << ',' << v << ',' << g.target(e) << ',' << (e.gen + 1) << ',' << e.sign << '\n';
    }
}

}  // namespace treelift
