#include "treelift/perm_group.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

#include "treelift/error.hpp"

namespace treelift {

LocalPerm identity_perm(int degree) {
  LocalPerm p(static_cast<std::size_t>(degree));
  std::iota(p.begin(), p.end(), std::uint8_t{0});
  return p;
}

LocalPerm invert(std::span<const std::uint8_t> p) {
  LocalPerm r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<std::uint8_t>(i);
  return r;
}

LocalPerm then(std::span<const std::uint8_t> p, std::span<const std::uint8_t> q) {
  LocalPerm r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = q[p[i]];
  return r;
}

bool is_identity(std::span<const std::uint8_t> p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != i) return false;
  return true;
}

std::string to_string(std::span<const std::uint8_t> p) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? " " : "") << int(p[i]);
  os << ']';
  return os.str();
}

namespace {

void check_perm(std::span<const std::uint8_t> p, int degree) {
  if (static_cast<int>(p.size()) != degree) throw Error("permutation has wrong degree");
  std::vector<bool> seen(p.size(), false);
  for (auto x : p) {
    if (x >= p.size() || seen[x]) throw Error("not a permutation: " + to_string(p));
    seen[x] = true;
  }
}

}  // namespace

std::uint64_t PermGroup::encode(std::span<const std::uint8_t> p) {
  std::uint64_t c = 0;
  for (auto x : p) c = (c << 4) | x;
  return c;
}

PermGroup::PermGroup(int degree, GroupKind kind, std::vector<LocalPerm> generators)
    : degree_(degree), kind_(kind), generators_(std::move(generators)) {
  if (degree < 2 || degree > 16) throw Error("permutation group degree must lie in [2, 16]");
  for (const auto& g : generators_) check_perm(g, degree);

  // Closure by breadth-first multiplication.
  std::vector<std::uint64_t> seen_codes;
  auto add = [&](LocalPerm p) {
    const auto c = encode(p);
    auto it = std::lower_bound(seen_codes.begin(), seen_codes.end(), c);
    if (it != seen_codes.end() && *it == c) return false;
    seen_codes.insert(it, c);
    elements_.push_back(std::move(p));
    return true;
  };
  add(identity_perm(degree));
  for (std::size_t head = 0; head < elements_.size(); ++head) {
    if (elements_.size() > 40320) throw Error("permutation group too large to enumerate");
    for (const auto& g : generators_) {
      LocalPerm next = then(elements_[head], g);
      add(std::move(next));
    }
  }

  lookup_.reserve(elements_.size());
  for (std::size_t i = 0; i < elements_.size(); ++i) lookup_.emplace_back(encode(elements_[i]), i);
  std::sort(lookup_.begin(), lookup_.end());

  // Transitivity: the orbit of 0 must be everything.
  std::vector<bool> hit(static_cast<std::size_t>(degree), false);
  for (const auto& e : elements_) hit[e[0]] = true;
  if (std::find(hit.begin(), hit.end(), false) != hit.end())
    throw Error("permutation group is not transitive on {0.." + std::to_string(degree - 1) + "}");
}

PermGroup PermGroup::symmetric(int degree) {
  if (degree > 8) throw Error("symmetric group degree must be at most 8");
  std::vector<LocalPerm> gens;
  LocalPerm cycle(static_cast<std::size_t>(degree));
  for (int i = 0; i < degree; ++i) cycle[i] = static_cast<std::uint8_t>((i + 1) % degree);
  gens.push_back(cycle);
  if (degree > 2) {
    LocalPerm swap = identity_perm(degree);
    std::swap(swap[0], swap[1]);
    gens.push_back(swap);
  }
  return PermGroup(degree, GroupKind::kSymmetric, std::move(gens));
}

PermGroup PermGroup::cyclic(int degree) {
  LocalPerm cycle(static_cast<std::size_t>(degree));
  for (int i = 0; i < degree; ++i) cycle[i] = static_cast<std::uint8_t>((i + 1) % degree);
  return PermGroup(degree, GroupKind::kCyclic, {cycle});
}

PermGroup PermGroup::generated_by(int degree, std::vector<LocalPerm> generators) {
  return PermGroup(degree, GroupKind::kExplicit, std::move(generators));
}

long PermGroup::index_of(std::span<const std::uint8_t> p) const {
  if (static_cast<int>(p.size()) != degree_) return -1;
  const auto c = encode(p);
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::make_pair(c, std::size_t{0}));
  if (it == lookup_.end() || it->first != c) return -1;
  return static_cast<long>(it->second);
}

bool PermGroup::contains(std::span<const std::uint8_t> p) const { return index_of(p) >= 0; }

std::string PermGroup::name() const {
  switch (kind_) {
    case GroupKind::kSymmetric: return "Sym(" + std::to_string(degree_) + ")";
    case GroupKind::kCyclic: return "Z/" + std::to_string(degree_);
    case GroupKind::kExplicit: break;
  }
  return "H<Sym(" + std::to_string(degree_) + "), order " + std::to_string(order());
}

}  // namespace treelift
