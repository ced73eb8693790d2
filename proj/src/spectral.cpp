#include "treelift/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "treelift/error.hpp"
#include "treelift/rng.hpp"

namespace treelift {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::uint32_t> all_vertices(const LevelGraph& g) {
  std::vector<std::uint32_t> v(g.vertex_count());
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

// Local index of every member, UINT32_MAX for vertices outside.
std::vector<std::uint32_t> local_index(const LevelGraph& g, std::span<const std::uint32_t> members) {
  std::vector<std::uint32_t> idx(g.vertex_count(), UINT32_MAX);
  for (std::uint32_t i = 0; i < members.size(); ++i) idx[members[i]] = i;
  return idx;
}

Spectrum from_eigen(const Eigen::VectorXd& ev) {
  Spectrum s;
  s.values.assign(ev.data(), ev.data() + ev.size());
  std::sort(s.values.begin(), s.values.end(), std::greater<>());
  return s;
}

Spectrum tridiagonal_spectrum(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const auto k = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    t(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
  }
  return spectrum(t);
}

// Lanczos with full reorthogonalisation on the orthogonal complement of the
// constant vector. Returns the Ritz spectrum.
Spectrum lanczos_deflated(const LevelGraph& g, std::span<const std::uint32_t> members, int steps) {
  const auto idx = local_index(g, members);
  const auto n = static_cast<Eigen::Index>(members.size());
  auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y.setZero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto v = members[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < g.degree(); ++k) y(i) += x(idx[g.target(g.out_edge(v, k))]);
    }
  };
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  Rng rng(0x1a2c305);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  q -= ones.dot(q) * ones;
  q.normalize();
  const int k_max = static_cast<int>(std::min<Eigen::Index>(steps, n - 1));
  std::vector<Eigen::VectorXd> basis{q};
  std::vector<double> alpha;
  std::vector<double> beta;
  Eigen::VectorXd w;
  for (int j = 0; j < k_max; ++j) {
    apply(basis.back(), w);
    alpha.push_back(basis.back().dot(w));
    w -= ones.dot(w) * ones;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b.dot(w) * b;
    const double b = w.norm();
    if (j + 1 == k_max || b < 1e-10) break;
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return tridiagonal_spectrum(alpha, beta);
}

}  // namespace

double Spectrum::lambda2() const { return values.size() < 2 ? kNaN : values[1]; }

std::vector<std::pair<double, std::size_t>> Spectrum::multiplicities(double tol) const {
  std::vector<std::pair<double, std::size_t>> out;
  for (double x : values) {
    if (!out.empty() && std::abs(out.back().first - x) <= tol) {
      ++out.back().second;
    } else {
      out.emplace_back(x, 1);
    }
  }
  return out;
}

Eigen::MatrixXd adjacency_matrix(const LevelGraph& g, std::span<const std::uint32_t> members) {
  std::vector<std::uint32_t> all;
  if (members.empty()) {
    all = all_vertices(g);
    members = all;
  }
  const auto idx = local_index(g, members);
  const auto n = static_cast<Eigen::Index>(members.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto v = members[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < g.degree(); ++k) {
      const auto w = idx[g.target(g.out_edge(v, k))];
      if (w == UINT32_MAX) throw Error("adjacency_matrix: member set is not closed under edges");
      a(i, w) += 1.0;
    }
  }
  return a;
}

Spectrum spectrum(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("spectrum: eigensolver did not converge");
  return from_eigen(solver.eigenvalues());
}

Spectrum spectrum(const LevelGraph& g, std::span<const std::uint32_t> members, const SpectralOptions& opt) {
  const auto size = members.empty() ? g.vertex_count() : members.size();
  if (size > opt.dense_budget)
    throw BudgetError("spectrum: " + std::to_string(size) + " vertices exceed the dense budget of " +
                      std::to_string(opt.dense_budget) + "; use extremal eigenvalues instead");
  return spectrum(adjacency_matrix(g, members));
}

Extremal extremal_eigenvalues(const LevelGraph& g, std::span<const std::uint32_t> members,
                              const SpectralOptions& opt) {
  std::vector<std::uint32_t> all;
  if (members.empty()) {
    all = all_vertices(g);
    members = all;
  }
  Extremal out;
  if (members.size() <= opt.dense_budget) {
    const auto s = spectrum(g, members, opt);
    out.lambda1 = s.lambda1();
    out.lambda2 = s.lambda2();
    out.lambda_min = s.lambda_min();
    return out;
  }
  const auto ritz = lanczos_deflated(g, members, opt.lanczos_steps);
  out.dense = false;
  out.lambda1 = static_cast<double>(g.degree());
  out.lambda2 = ritz.lambda1();
  out.lambda_min = ritz.lambda_min();
  return out;
}

Eigen::MatrixXd SignedAdjacency::matrix() const {
  const auto n = static_cast<Eigen::Index>(base->vertex_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (EdgeId id = 0; id < base->edge_count(); ++id) {
    const auto e = base->positive(id);
    const auto t = base->target(e);
    const double s = sign[id];
    // each geometric edge is two directed edges; a loop puts both on the diagonal
    a(e.origin, t) += s;
    a(t, e.origin) += s;
  }
  return a;
}

SignedAdjacency lift_signs(const LevelGraph& lower, const LevelGraph& upper) {
  if (lower.arity() != 2) throw Error("lift_signs: 2-lifts need a binary tree");
  covering_map(upper, lower);  // throws unless upper covers lower
  SignedAdjacency s;
  s.base = &lower;
  s.sign.resize(lower.edge_count());
  for (EdgeId id = 0; id < lower.edge_count(); ++id) {
    const auto e = lower.positive(id);
    const auto up = upper.forward(e.gen)[2 * e.origin];
    s.sign[id] = (up == 2 * lower.target(e)) ? 1 : -1;
  }
  return s;
}

Spectrum new_eigenvalues(const LevelGraph& lower, const LevelGraph& upper) {
  return spectrum(lift_signs(lower, upper).matrix());
}

CheegerReport cheeger_exact(const Eigen::MatrixXd& adjacency) {
  const auto n = static_cast<std::size_t>(adjacency.rows());
  if (n < 2) throw Error("cheeger_exact: need at least two vertices");
  if (n > kCheegerExactBudget)
    throw BudgetError("cheeger_exact: " + std::to_string(n) + " vertices exceed the enumeration budget of " +
                      std::to_string(kCheegerExactBudget));
  CheegerReport rep;
  rep.degree = adjacency.rowwise().sum().maxCoeff();
  rep.lambda2 = spectrum(adjacency).lambda2();
  const double gap = std::max(0.0, rep.degree - rep.lambda2);
  rep.lower = gap / 2;
  rep.upper = std::sqrt(2 * rep.degree * gap);

  std::vector<std::vector<std::pair<std::size_t, long>>> nbr(n);
  std::vector<long> out_deg(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && adjacency(i, j) != 0) {
        const auto w = std::lround(adjacency(i, j));
        nbr[i].emplace_back(j, w);
        out_deg[i] += w;
      }
  // Gray code over subsets of the first n-1 vertices; the last vertex stays
  // outside, which loses nothing since a cut and its complement tie.
  std::vector<long> into_a(n, 0);  // edge weight from each vertex into A
  std::vector<bool> in_a(n, false);
  long cut = 0;
  std::size_t size = 0;
  long best_cut = 1;
  std::size_t best_den = 0;  // best ratio so far is best_cut / best_den; den 0 = none
  std::uint64_t best_mask = 0;
  std::uint64_t mask = 0;
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t k = 1; k < count; ++k) {
    const auto v = static_cast<std::size_t>(std::countr_zero(k));
    mask ^= std::uint64_t{1} << v;
    if (!in_a[v]) {
      cut += out_deg[v] - 2 * into_a[v];
      in_a[v] = true;
      ++size;
      for (auto [u, w] : nbr[v]) into_a[u] += w;
    } else {
      cut -= out_deg[v] - 2 * into_a[v];
      in_a[v] = false;
      --size;
      for (auto [u, w] : nbr[v]) into_a[u] -= w;
    }
    const auto den = std::min(size, n - size);
    if (best_den == 0 || cut * static_cast<long>(best_den) < best_cut * static_cast<long>(den)) {
      best_cut = cut;
      best_den = den;
      best_mask = mask;
    }
  }
  rep.exact = static_cast<double>(best_cut) / static_cast<double>(best_den);
  const bool small_side_is_a = static_cast<std::size_t>(std::popcount(best_mask)) * 2 <= n;
  for (std::uint32_t i = 0; i < n; ++i)
    if ((((best_mask >> i) & 1) != 0) == small_side_is_a) rep.witness.push_back(i);
  return rep;
}

CheegerReport cheeger_exact(const LevelGraph& g, std::span<const std::uint32_t> members) {
  std::vector<std::uint32_t> all;
  if (members.empty()) {
    all = all_vertices(g);
    members = all;
  }
  if (members.size() > kCheegerExactBudget)
    throw BudgetError("cheeger_exact: " + std::to_string(members.size()) +
                      " vertices exceed the enumeration budget of " + std::to_string(kCheegerExactBudget));
  auto rep = cheeger_exact(adjacency_matrix(g, members));
  for (auto& w : rep.witness) w = members[w];
  return rep;
}

std::vector<ScanRow> expander_scan(std::span<const Portrait> gens, int max_level, std::uint64_t seed,
                                   const ScanOptions& opt) {
  std::vector<ScanRow> rows;
  for (int n = 1; n <= max_level; ++n) {
    const auto g = build_schreier(gens, n);
    const auto comps = components(g);
    const auto deg = static_cast<double>(g.degree());
    for (std::size_t c = 0; c < comps.count(); ++c) {
      const auto& mem = comps.members[c];
      ScanRow row;
      row.seed = seed;
      row.level = n;
      row.component_id = c;
      row.size = mem.size();
      const auto ext = extremal_eigenvalues(g, mem, opt.spectral);
      row.lambda1 = ext.lambda1;
      row.lambda2 = ext.lambda2;
      row.lambda_min = ext.lambda_min;
      if (mem.size() >= 2) {
        const double gap = std::max(0.0, deg - row.lambda2);
        row.h_lower = gap / 2;
        row.h_upper = std::sqrt(2 * deg * gap);
        if (mem.size() <= std::min(opt.exact_cheeger_max, kCheegerExactBudget))
          row.h_exact = cheeger_exact(g, mem).exact;
      } else {
        row.h_lower = row.h_upper = kNaN;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

double min_normalized_gap(std::span<const ScanRow> rows, double degree) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rows)
    if (r.size >= 2) best = std::min(best, (degree - r.lambda2) / degree);
  return best;
}

EnvelopeReport envelope_check(std::span<const Portrait> gens, int max_level) {
  EnvelopeReport rep;
  const double r = 2.0 * static_cast<double>(gens.size());
  rep.threshold = 10 * std::sqrt(r * std::log2(r));
  auto lower = build_schreier(gens, 0);
  for (int n = 0; n < max_level; ++n) {
    auto upper = build_schreier(gens, n + 1);
    const double deg = static_cast<double>(lower.degree());
    for (double x : new_eigenvalues(lower, upper).values) {
      if (std::abs(x) >= deg - 1e-9) continue;  // trivial eigenvalues of disconnected lifts
      ++rep.checked;
      rep.max_new = std::max(rep.max_new, std::abs(x));
      if (std::abs(x) > rep.threshold) ++rep.violations;
    }
    lower = std::move(upper);
  }
  rep.fitted_c = rep.max_new / std::sqrt(r * std::pow(std::log(r), 3));
  return rep;
}

GeneratorComparison cheeger_generator_comparison(std::span<const FreeWord> delta,
                                                 std::span<const FreeWord> sub,
                                                 std::span<const Portrait> gens, int level) {
  const auto x = build_schreier(gens, level);
  const auto y = build_schreier(delta, x);
  const auto z = build_schreier(sub, y);
  GeneratorComparison out;
  out.h_y = *cheeger_exact(y).exact;
  out.h_z = *cheeger_exact(z).exact;
  std::size_t longest = 0;
  for (const auto& v : sub) longest = std::max(longest, v.length());
  out.constant = 2.0 * static_cast<double>(sub.size() * longest);
  out.holds = out.h_z <= out.constant * out.h_y + 1e-12;
  return out;
}

void write_scan_csv(std::ostream& os, std::span<const ScanRow> rows, bool header) {
  if (header)
    os << "# treelift expander-scan v1\n"
          "seed,level,component_id,size,lambda1,lambda2,lambda_min,h_lower,h_exact_or_blank,h_upper\n";
  auto num = [&](double x) {
    if (std::isnan(x)) return;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10f", std::abs(x) < 5e-11 ? 0.0 : x);
    os << buf;
  };
  for (const auto& r : rows) {
    os << r.seed << ',' << r.level << ',' << r.component_id << ',' << r.size << ',';
    num(r.lambda1);
    os << ',';
    num(r.lambda2);
    os << ',';
    num(r.lambda_min);
    os << ',';
    num(r.h_lower);
    os << ',';
    if (r.h_exact) num(*r.h_exact);
    os << ',';
    num(r.h_upper);
    os << '\n';
  }
}

}  // namespace treelift
