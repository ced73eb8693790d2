#pragma once

#include <vector>

#include "treelift/portrait.hpp"

namespace treelift::testing {

// Leaf images computed by walking digits directly from the definition
// (x.i)^g = x^g . label(x)[i]; independent of level_action and compose.
inline std::vector<std::uint64_t> oracle_leaf_images(const Portrait& g, int n) {
  const int d = g.arity();
  std::vector<std::uint64_t> out(ipow(d, n));
  for (std::uint64_t code = 0; code < out.size(); ++code) {
    std::vector<int> digits(n);
    auto c = code;
    for (int i = n - 1; i >= 0; --i) {
      digits[i] = static_cast<int>(c % d);
      c /= d;
    }
    std::uint64_t src = 0;
    std::uint64_t img = 0;
    for (int i = 0; i < n; ++i) {
      const auto lab = g.label({i, src});
      img = img * d + lab[digits[i]];
      src = src * d + digits[i];
    }
    out[code] = img;
  }
  return out;
}

// Index of a portrait in W_n(H), labels read as base-|H| digits.
inline std::uint64_t cell_index(const Portrait& g, const PermGroup& h) {
  std::uint64_t idx = 0;
  for (std::uint64_t i = 0; i < g.shape().internal_count(); ++i)
    idx = idx * h.order() + static_cast<std::uint64_t>(h.index_of(g.label_at(i)));
  return idx;
}

}  // namespace treelift::testing
