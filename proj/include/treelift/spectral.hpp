#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "treelift/schreier.hpp"

namespace treelift {

// Eigenvalues of a symmetric operator, largest first.
struct Spectrum {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double lambda1() const { return values.front(); }
  // Second largest; NaN for a one-point spectrum.
  double lambda2() const;
  double lambda_min() const { return values.back(); }
  // Distinct values (merged within `tol`) with their multiplicities.
  std::vector<std::pair<double, std::size_t>> multiplicities(double tol = 1e-9) const;
};

// Adjacency matrix of the subgraph induced on `members` (all vertices when
// empty). Entry (v, w) counts directed edges from v to w, so a loop adds 2.
Eigen::MatrixXd adjacency_matrix(const LevelGraph& g, std::span<const std::uint32_t> members = {});

Spectrum spectrum(const Eigen::MatrixXd& symmetric);

struct SpectralOptions {
  std::size_t dense_budget = 4096;
  int lanczos_steps = 300;
};

// Full spectrum of one component; throws BudgetError above the dense budget.
Spectrum spectrum(const LevelGraph& g, std::span<const std::uint32_t> members = {},
                  const SpectralOptions& opt = {});

struct Extremal {
  double lambda1 = 0;
  double lambda2 = 0;
  double lambda_min = 0;
  bool dense = true;
};

// lambda1, lambda2 and lambda_min of a connected regular component: dense
// within budget, Lanczos on the complement of the constant vector above it.
Extremal extremal_eigenvalues(const LevelGraph& g, std::span<const std::uint32_t> members,
                              const SpectralOptions& opt = {});

// Signs of a 2-lift: for each geometric edge (v, s) of the lower graph, +1 when
// the lift sends child 2v to child 2v^s and -1 when it crosses over.
struct SignedAdjacency {
  const LevelGraph* base = nullptr;
  std::vector<int> sign;  // indexed by EdgeId of the base graph

  Eigen::MatrixXd matrix() const;
};

SignedAdjacency lift_signs(const LevelGraph& lower, const LevelGraph& upper);

// Spectrum of the signed matrix; Spec(upper) = Spec(lower) + these.
Spectrum new_eigenvalues(const LevelGraph& lower, const LevelGraph& upper);

struct CheegerReport {
  double lambda2 = 0;
  double degree = 0;
  double lower = 0;  // (deg - lambda2) / 2
  double upper = 0;  // sqrt(2 deg (deg - lambda2))
  std::optional<double> exact;
  std::vector<std::uint32_t> witness;  // the smaller side of an optimal cut
};

inline constexpr std::size_t kCheegerExactBudget = 24;

// min over nonempty proper A of e(A, A^c) / min(|A|, |A^c|). `adjacency` holds
// edge multiplicities off the diagonal; the diagonal is ignored. Throws
// BudgetError above kCheegerExactBudget vertices.
CheegerReport cheeger_exact(const Eigen::MatrixXd& adjacency);
CheegerReport cheeger_exact(const LevelGraph& g, std::span<const std::uint32_t> members = {});

struct ScanRow {
  std::uint64_t seed = 0;
  int level = 0;
  std::size_t component_id = 0;
  std::size_t size = 0;
  double lambda1 = 0;
  double lambda2 = 0;  // NaN for one-vertex components
  double lambda_min = 0;
  double h_lower = 0;
  double h_upper = 0;
  std::optional<double> h_exact;
};

struct ScanOptions {
  SpectralOptions spectral;
  std::size_t exact_cheeger_max = 20;
};

// Per component of X_1..X_maxLevel: extremal eigenvalues and Cheeger data.
std::vector<ScanRow> expander_scan(std::span<const Portrait> gens, int max_level, std::uint64_t seed,
                                   const ScanOptions& opt = {});

// Smallest (deg - lambda2)/deg over rows with at least two vertices.
double min_normalized_gap(std::span<const ScanRow> rows, double degree);

struct EnvelopeReport {
  double max_new = 0;        // largest |lambda| among non-trivial new eigenvalues
  double fitted_c = 0;       // max_new / sqrt(2m log^3(2m))
  double threshold = 0;      // 10 sqrt(r log2 r) with r = 2m
  std::size_t checked = 0;
  std::size_t violations = 0;
};

// New eigenvalues of each lift X_n -> X_(n+1), n < max_level.
EnvelopeReport envelope_check(std::span<const Portrait> gens, int max_level);

struct GeneratorComparison {
  double h_y = 0;
  double h_z = 0;
  double constant = 0;  // 2 |V| max |v|
  bool holds = true;
};

// Cheeger comparison of two generating sets on level `level`. Y is the
// Schreier graph of the words `delta` in the portraits, Z that of `sub`,
// written in the letters of `delta`. Checks h(Z) <= C h(Y) on the whole level.
GeneratorComparison cheeger_generator_comparison(std::span<const FreeWord> delta,
                                                 std::span<const FreeWord> sub,
                                                 std::span<const Portrait> gens, int level);

void write_scan_csv(std::ostream& os, std::span<const ScanRow> rows, bool header);

}  // namespace treelift
