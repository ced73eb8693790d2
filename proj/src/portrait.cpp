#include "treelift/portrait.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "treelift/error.hpp"

namespace treelift {

Portrait::Portrait(TreeShape shape) : shape_(shape) {
  const auto d = arity_u();
  labels_.resize(shape_.internal_count() * d);
  for (std::size_t i = 0; i < labels_.size(); ++i) labels_[i] = static_cast<std::uint8_t>(i % d);
}

std::span<const std::uint8_t> Portrait::label(VertexId v) const {
  if (v.level < 0 || v.level >= shape_.max_depth) throw Error("label: vertex is not internal");
  return label_at(level_order_index(v, shape_));
}

void Portrait::set_label(VertexId v, std::span<const std::uint8_t> perm) {
  if (v.level < 0 || v.level >= shape_.max_depth) throw Error("set_label: vertex is not internal");
  if (perm.size() != arity_u()) throw Error("set_label: permutation has wrong degree");
  std::vector<bool> seen(perm.size(), false);
  for (auto x : perm) {
    if (x >= perm.size() || seen[x]) throw Error("set_label: not a permutation");
    seen[x] = true;
  }
  auto dst = mutable_label_at(level_order_index(v, shape_));
  std::copy(perm.begin(), perm.end(), dst.begin());
}

bool Portrait::is_identity() const {
  const auto d = arity_u();
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] != i % d) return false;
  return true;
}

bool Portrait::is_in(const PermGroup& group) const {
  if (group.degree() != shape_.arity) return false;
  const auto n = shape_.internal_count();
  for (std::uint64_t i = 0; i < n; ++i)
    if (!group.contains(label_at(i))) return false;
  return true;
}

VertexId apply(const Portrait& g, VertexId x) {
  if (x.level > g.depth()) throw Error("apply: vertex is beyond truncation depth");
  const int d = g.arity();
  VertexId source = kRoot;
  VertexId image = kRoot;
  for (int i = 0; i < x.level; ++i) {
    const int digit = digit_at(x, i, d);
    const auto sigma = g.label_at(level_order_index(source, g.shape()));
    image = child(image, sigma[digit], d);
    source = child(source, digit, d);
  }
  return image;
}

std::vector<std::uint32_t> level_action(const Portrait& g, int n) {
  if (n < 0 || n > g.depth()) throw Error("level_action: level beyond truncation depth");
  const auto d = static_cast<std::uint32_t>(g.arity());
  std::vector<std::uint32_t> img{0};
  std::vector<std::uint32_t> next;
  for (int k = 0; k < n; ++k) {
    const auto base = g.shape().vertices_above(k);
    next.resize(img.size() * d);
    for (std::size_t u = 0; u < img.size(); ++u) {
      const auto sigma = g.label_at(base + u);
      for (std::uint32_t i = 0; i < d; ++i) next[u * d + i] = img[u] * d + sigma[i];
    }
    img.swap(next);
  }
  return img;
}

namespace {

void require_same_shape(const Portrait& g, const Portrait& h, const char* op) {
  if (!(g.shape() == h.shape())) throw Error(std::string(op) + ": portrait shapes differ");
}

}  // namespace

Portrait compose(const Portrait& g, const Portrait& h) {
  require_same_shape(g, h, "compose");
  const auto& shape = g.shape();
  const auto d = static_cast<std::uint32_t>(shape.arity);
  Portrait out(shape);
  std::vector<std::uint32_t> img{0};
  std::vector<std::uint32_t> next;
  for (int k = 0; k < shape.max_depth; ++k) {
    const auto base = shape.vertices_above(k);
    next.resize(img.size() * d);
    for (std::size_t u = 0; u < img.size(); ++u) {
      const auto sg = g.label_at(base + u);
      const auto sh = h.label_at(base + img[u]);
      auto dst = out.mutable_label_at(base + u);
      for (std::uint32_t i = 0; i < d; ++i) {
        dst[i] = sh[sg[i]];
        next[u * d + i] = img[u] * d + sg[i];
      }
    }
    img.swap(next);
  }
  return out;
}

Portrait inverse(const Portrait& g) {
  const auto& shape = g.shape();
  const auto d = static_cast<std::uint32_t>(shape.arity);
  Portrait out(shape);
  std::vector<std::uint32_t> img{0};
  std::vector<std::uint32_t> next;
  for (int k = 0; k < shape.max_depth; ++k) {
    const auto base = shape.vertices_above(k);
    next.resize(img.size() * d);
    for (std::size_t u = 0; u < img.size(); ++u) {
      const auto sg = g.label_at(base + u);
      auto dst = out.mutable_label_at(base + img[u]);
      for (std::uint32_t i = 0; i < d; ++i) {
        dst[sg[i]] = static_cast<std::uint8_t>(i);
        next[u * d + i] = img[u] * d + sg[i];
      }
    }
    img.swap(next);
  }
  return out;
}

Portrait psi(const Portrait& g, int n) {
  if (n < 0 || n > g.depth()) throw Error("psi: level beyond truncation depth");
  Portrait out(TreeShape(g.arity(), n));
  const auto& src = g.raw();
  const auto count = out.shape().internal_count() * static_cast<std::uint64_t>(g.arity());
  // Level-order storage makes Psi_n a prefix copy.
  std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(count), out.mutable_raw().begin());
  return out;
}

Portrait local_cocycle(const Portrait& g, VertexId v) {
  if (v.level > g.depth()) throw Error("local_cocycle: vertex is beyond truncation depth");
  const int d = g.arity();
  const TreeShape sub(d, g.depth() - v.level);
  Portrait out(sub);
  // Descendants of v at relative level k occupy a contiguous code block.
  for (int k = 0; k < sub.max_depth; ++k) {
    const auto width = sub.level_size(k);
    const auto src_start = g.shape().vertices_above(v.level + k) + v.code * width;
    const auto dst_start = sub.vertices_above(k);
    const auto& raw = g.raw();
    auto dst = out.mutable_raw().begin() + static_cast<std::ptrdiff_t>(dst_start * d);
    std::copy(raw.begin() + static_cast<std::ptrdiff_t>(src_start * d),
              raw.begin() + static_cast<std::ptrdiff_t>((src_start + width) * d), dst);
  }
  return out;
}

Portrait sample_haar(const PermGroup& group, TreeShape shape, Rng& rng) {
  return extend_haar(Portrait(TreeShape(shape.arity, 0)), group, shape.max_depth, rng);
}

Portrait extend_haar(const Portrait& g, const PermGroup& group, int new_depth, Rng& rng) {
  if (group.degree() != g.arity()) throw Error("extend_haar: group degree does not match tree arity");
  if (new_depth < g.depth()) throw Error("extend_haar: cannot shrink a portrait");
  Portrait out(TreeShape(g.arity(), new_depth));
  std::copy(g.labels_.begin(), g.labels_.end(), out.labels_.begin());
  const auto& elems = group.elements();
  const auto d = static_cast<std::size_t>(g.arity());
  for (std::uint64_t i = g.shape().internal_count(); i < out.shape().internal_count(); ++i) {
    const auto& e = elems[uniform_below(rng, elems.size())];
    std::copy(e.begin(), e.end(), out.labels_.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return out;
}

double Ultrametric::distance() const {
  if (identical) return 0.0;
  return std::pow(static_cast<double>(arity), -displacement);
}

Ultrametric distance(const Portrait& a, const Portrait& b) {
  require_same_shape(a, b, "distance");
  // Psi_n(a^-1 b) is trivial exactly when a and b carry the same labels on
  // every level above n.
  const auto& shape = a.shape();
  const auto d = static_cast<std::uint64_t>(shape.arity);
  for (int k = 0; k < shape.max_depth; ++k) {
    const auto lo = shape.vertices_above(k) * d;
    const auto hi = shape.vertices_above(k + 1) * d;
    for (auto i = lo; i < hi; ++i)
      if (a.raw()[i] != b.raw()[i]) return {k, false, shape.arity};
  }
  return {shape.max_depth, true, shape.arity};
}

void write_portrait(std::ostream& os, const Portrait& g) {
  os << "portrait " << g.arity() << ' ' << g.depth() << '\n';
  const auto n = g.shape().internal_count();
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto p = g.label_at(i);
    for (std::size_t j = 0; j < p.size(); ++j) os << (j ? " " : "") << int(p[j]);
    os << '\n';
  }
  os << "end\n";
}

Portrait read_portrait(std::istream& is) {
  std::string word;
  int d = 0;
  int depth = 0;
  if (!(is >> word) || word != "portrait" || !(is >> d >> depth))
    throw Error("portrait: expected header 'portrait <arity> <depth>'");
  Portrait g{TreeShape(d, depth)};
  const auto n = g.shape().internal_count();
  LocalPerm p(static_cast<std::size_t>(d));
  for (std::uint64_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      int x = -1;
      if (!(is >> x) || x < 0 || x >= d) throw Error("portrait: malformed label line");
      p[j] = static_cast<std::uint8_t>(x);
    }
    const auto level = [&] {
      int k = 0;
      while (g.shape().vertices_above(k + 1) <= i) ++k;
      return k;
    }();
    g.set_label({level, i - g.shape().vertices_above(level)}, p);
  }
  if (!(is >> word) || word != "end") throw Error("portrait: missing 'end'");
  return g;
}

std::string serialize(const Portrait& g) {
  std::ostringstream os;
  write_portrait(os, g);
  return os.str();
}

Portrait parse_portrait(const std::string& text) {
  std::istringstream is(text);
  return read_portrait(is);
}

}  // namespace treelift
