#include "treelift/grouporder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "treelift/error.hpp"

namespace treelift {

double log_big(const BigInt& x) {
  if (x <= 0) throw Error("log_big: non-positive argument");
  const auto bits = static_cast<long>(boost::multiprecision::msb(x)) + 1;
  if (bits <= 60) return std::log(static_cast<double>(static_cast<std::uint64_t>(x)));
  const long shift = bits - 60;
  const auto top = static_cast<std::uint64_t>(BigInt(x >> shift));
  return std::log(static_cast<double>(top)) + static_cast<double>(shift) * std::log(2.0);
}

std::size_t decimal_digits(const BigInt& x) {
  if (x == 0) return 1;
  return (x < 0 ? -x : x).str().size();
}

namespace {

void multiply_into(const Perm& a, const Perm& b, Perm& out) {
  // a then b
  out.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = b[a[i]];
}

bool is_identity(const Perm& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != i) return false;
  return true;
}

Perm identity(std::size_t n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), 0u);
  return p;
}

}  // namespace

long StabChain::Level::find(std::uint32_t x) const {
  // Orbits are tiny for tree groups; fall back to a scan.
  for (std::size_t k = 0; k < orbit.size(); ++k)
    if (orbit[k] == x) return static_cast<long>(k);
  return -1;
}

StabChain::StabChain(std::size_t degree, std::span<const Perm> generators,
                     std::span<const std::uint32_t> base_order, std::uint64_t seed)
    : degree_(degree) {
  if (base_order.empty()) {
    base_order_.resize(degree);
    std::iota(base_order_.begin(), base_order_.end(), 0u);
  } else {
    base_order_.assign(base_order.begin(), base_order.end());
  }
  if (base_order_.size() != degree) throw Error("StabChain: base order must list every point");
  base_rank_.assign(degree, UINT32_MAX);
  for (std::size_t r = 0; r < degree; ++r) {
    if (base_order_[r] >= degree || base_rank_[base_order_[r]] != UINT32_MAX)
      throw Error("StabChain: base order is not a permutation of the points");
    base_rank_[base_order_[r]] = static_cast<std::uint32_t>(r);
  }
  for (const auto& g : generators) {
    if (g.size() != degree) throw Error("order: permutation has wrong degree");
    std::vector<bool> seen(degree, false);
    for (auto x : g) {
      if (x >= degree || seen[x]) throw Error("order: input is not a bijection");
      seen[x] = true;
    }
    if (!is_identity(g)) strong_.push_back(g);
  }
  if (strong_.empty()) return;

  // Initial base: every generator moves some base point.
  for (const auto& g : strong_) {
    bool moves = false;
    for (const auto& lvl : levels_) moves = moves || g[lvl.point] != lvl.point;
    if (!moves) {
      levels_.emplace_back();
      levels_.back().point = next_base_point(g);
    }
  }
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    for (std::size_t s = 0; s < strong_.size(); ++s) {
      bool fixes = true;
      for (std::size_t j = 0; j < i && fixes; ++j) fixes = strong_[s][levels_[j].point] == levels_[j].point;
      if (fixes) levels_[i].gens.push_back(s);
    }
    rebuild_orbit(i);
  }
  random_phase(seed);
  verify();
}

std::uint32_t StabChain::next_base_point(const Perm& g) const {
  for (auto x : base_order_)
    if (g[x] != x) return x;
  throw Error("StabChain: identity has no base point");
}

void StabChain::rebuild_orbit(std::size_t i) {
  auto& lvl = levels_[i];
  lvl.orbit.assign(1, lvl.point);
  lvl.rep.assign(1, identity(degree_));
  lvl.rep_inv.assign(1, identity(degree_));
  for (std::size_t k = 0; k < lvl.orbit.size(); ++k) {
    for (auto s : lvl.gens) {
      const auto y = strong_[s][lvl.orbit[k]];
      if (lvl.find(y) >= 0) continue;
      Perm r;
      multiply_into(lvl.rep[k], strong_[s], r);
      lvl.orbit.push_back(y);
      lvl.rep_inv.push_back(invert(r));
      lvl.rep.push_back(std::move(r));
    }
  }
}

std::size_t StabChain::sift(Perm& g, std::size_t from) const {
  Perm tmp;
  for (std::size_t i = from; i < levels_.size(); ++i) {
    const auto& lvl = levels_[i];
    const auto beta = g[lvl.point];
    if (beta == lvl.point) continue;
    const auto k = lvl.find(beta);
    if (k < 0) return i;
    multiply_into(g, lvl.rep_inv[static_cast<std::size_t>(k)], tmp);
    g.swap(tmp);
  }
  return levels_.size();
}

void StabChain::add_strong(Perm g, std::size_t from, std::size_t drop) {
  if (drop == levels_.size()) {
    levels_.emplace_back();
    levels_.back().point = next_base_point(g);
  }
  strong_.push_back(std::move(g));
  const auto idx = strong_.size() - 1;
  for (std::size_t l = from; l <= drop; ++l) {
    levels_[l].gens.push_back(idx);
    rebuild_orbit(l);
  }
}

void StabChain::random_phase(std::uint64_t seed) {
  // Product replacement.
  Rng rng = derive_stream(seed, 0x5eed);
  std::vector<Perm> state;
  const std::size_t width = std::max<std::size_t>(10, strong_.size());
  for (std::size_t k = 0; k < width; ++k) state.push_back(strong_[k % strong_.size()]);
  Perm acc = identity(degree_);
  Perm tmp;
  auto step = [&] {
    const auto i = uniform_below(rng, width);
    auto j = uniform_below(rng, width - 1);
    if (j >= i) ++j;
    if (rng() & 1) {
      multiply_into(state[i], state[j], tmp);
    } else {
      multiply_into(state[i], invert(state[j]), tmp);
    }
    state[i].swap(tmp);
    multiply_into(acc, state[i], tmp);
    acc.swap(tmp);
  };
  for (int k = 0; k < 50; ++k) step();
  int quiet = 0;
  for (int iter = 0; quiet < 24 && iter < 100000; ++iter) {
    step();
    Perm g = acc;
    const auto drop = sift(g, 0);
    if (drop == levels_.size() && is_identity(g)) {
      ++quiet;
      continue;
    }
    quiet = 0;
    add_strong(std::move(g), drop == 0 ? 0 : 1, drop);
  }
}

void StabChain::verify() {
  // Deterministic Schreier-Sims: every Schreier generator at level i must sift
  // through levels i+1.. to the identity.
  long i = static_cast<long>(levels_.size()) - 1;
  Perm h;
  Perm tmp;
  while (i >= 0) {
    bool clean = true;
    const auto li = static_cast<std::size_t>(i);
    for (std::size_t k = 0; k < levels_[li].orbit.size() && clean; ++k) {
      for (std::size_t gi = 0; gi < levels_[li].gens.size() && clean; ++gi) {
        const auto& lvl = levels_[li];
        const auto& s = strong_[lvl.gens[gi]];
        // rep(point) = id and s fixing the point gives s itself, which already
        // generates the next level.
        if (k == 0 && s[lvl.point] == lvl.point) continue;
        const auto k2 = lvl.find(s[lvl.orbit[k]]);
        multiply_into(lvl.rep[k], s, tmp);
        multiply_into(tmp, lvl.rep_inv[static_cast<std::size_t>(k2)], h);
        const auto drop = sift(h, li + 1);
        if (drop == levels_.size() && is_identity(h)) continue;
        add_strong(h, li + 1, drop);
        i = static_cast<long>(drop);
        clean = false;
      }
    }
    if (clean) --i;
  }
}

std::vector<std::uint32_t> StabChain::base() const {
  std::vector<std::uint32_t> b;
  for (const auto& l : levels_) b.push_back(l.point);
  return b;
}

std::vector<std::size_t> StabChain::transversal_sizes() const {
  std::vector<std::size_t> t;
  for (const auto& l : levels_) t.push_back(l.orbit.size());
  return t;
}

BigInt StabChain::order() const {
  BigInt r = 1;
  for (const auto& l : levels_) r *= l.orbit.size();
  return r;
}

double StabChain::log_order() const { return log_big(order()); }

bool StabChain::contains(const Perm& g) const {
  if (g.size() != degree_) return false;
  Perm h = g;
  return sift(h, 0) == levels_.size() && is_identity(h);
}

BigInt order(std::span<const Perm> perms) {
  if (perms.empty()) return 1;
  return StabChain(perms[0].size(), perms).order();
}

BigInt wreath_order(const PermGroup& group, int n) {
  if (n < 0) throw Error("wreath_order: negative level");
  const auto exponent = (ipow(group.degree(), n) - 1) / static_cast<std::uint64_t>(group.degree() - 1);
  BigInt r = 1;
  const BigInt h = group.order();
  for (std::uint64_t i = 0; i < exponent; ++i) r *= h;
  return r;
}

double log_wreath_order(const PermGroup& group, int n) {
  const auto exponent = (ipow(group.degree(), n) - 1) / static_cast<std::uint64_t>(group.degree() - 1);
  return std::log(static_cast<double>(group.order())) * static_cast<double>(exponent);
}

std::vector<Portrait> wreath_generators(const PermGroup& group, int depth) {
  std::vector<Portrait> out;
  const TreeShape shape(group.degree(), depth);
  for (int k = 0; k < depth; ++k)
    for (const auto& h : group.generators()) {
      Portrait g(shape);
      g.set_label({k, 0}, h);
      out.push_back(std::move(g));
    }
  return out;
}

Perm tree_action(std::span<const Perm> level_perms) {
  Perm out;
  for (const auto& p : level_perms) {
    const auto offset = static_cast<std::uint32_t>(out.size());
    for (auto x : p) out.push_back(x + offset);
  }
  return out;
}

std::vector<std::uint32_t> tree_base_order(int arity, int n) {
  const TreeShape shape(arity, n);
  std::vector<std::uint32_t> order(shape.vertices_above(n + 1) - 1);
  std::iota(order.begin(), order.end(), 0u);
  return order;
}

BigInt level_group_order(std::span<const Portrait> gens, int n, std::uint64_t seed) {
  if (gens.empty() || n == 0) return 1;
  std::vector<Perm> perms;
  for (const auto& g : gens) {
    std::vector<Perm> levels;
    for (int k = 1; k <= n; ++k) levels.push_back(level_action(g, k));
    perms.push_back(tree_action(levels));
  }
  const auto base = tree_base_order(gens[0].arity(), n);
  return StabChain(perms[0].size(), perms, base, seed).order();
}

DensitySequence density_sequence(std::span<const FreeWord> words, std::span<const Portrait> gens,
                                 const PermGroup& group, int max_level, const DensityOptions& opt) {
  if (gens.empty()) throw Error("density_sequence: no generators");
  if (max_level < 1) throw Error("density_sequence: need max level >= 1");
  if (max_level > gens[0].depth()) throw Error("density_sequence: level exceeds portrait depth");
  if (ipow(group.degree(), max_level) > opt.degree_budget)
    throw BudgetError("density_sequence: d^n = " + std::to_string(ipow(group.degree(), max_level)) +
                      " exceeds the permutation degree budget " + std::to_string(opt.degree_budget));
  std::vector<Portrait> truncated;
  for (const auto& g : gens) truncated.push_back(psi(g, max_level));
  std::vector<Portrait> sub;
  for (const auto& w : words) sub.push_back(substitute(w, truncated));

  DensitySequence seq;
  for (int n = 1; n <= max_level; ++n) {
    DensityRow row;
    row.level = n;
    row.order = level_group_order(sub, n, opt.seed + static_cast<std::uint64_t>(n));
    row.log_order = log_big(row.order);
    row.log_wreath = log_wreath_order(group, n);
    row.gamma = row.log_order / row.log_wreath;
    seq.rows.push_back(std::move(row));
  }
  seq.liminf_estimate = 1.0;
  for (const auto& r : seq.rows)
    if (r.level >= max_level - 3) seq.liminf_estimate = std::min(seq.liminf_estimate, r.gamma);
  return seq;
}

double subtree_density_bound(int arity, int n, int level_n, double gamma_sub) {
  const double num = static_cast<double>(ipow(arity, n - level_n)) - 1.0;
  const double den = static_cast<double>(ipow(arity, n)) - 1.0;
  return num / den * gamma_sub;
}

void write_density_csv(std::ostream& os, std::uint64_t seed, const DensitySequence& seq, bool header) {
  if (header) os << "# treelift density v1\nseed,n,order_digits,gamma\n";
  for (const auto& r : seq.rows) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", r.gamma);
    os << seed << ',' << r.level << ',' << decimal_digits(r.order) << ',' << buf << '\n';
  }
}

}  // namespace treelift
