#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treelift/error.hpp"
#include "treelift/perm_group.hpp"
#include "treelift/portrait.hpp"
#include "treelift/rng.hpp"
#include "treelift/schreier.hpp"
#include "treelift/stats.hpp"
#include "treelift/words.hpp"

namespace treelift {

// Budget exhausted without a certificate or configuration; `condition` names
// the check that blocked progress at the deepest level tried.
class ResolverError : public BudgetError {
 public:
  ResolverError(const std::string& what, std::string condition)
      : BudgetError(what), condition_(std::move(condition)) {}
  const std::string& condition() const { return condition_; }

 private:
  std::string condition_;
};

// ---------------------------------------------------------------------------
// Stable levels

struct StabilityCheck {
  int level = 0;
  std::size_t radius = 0;
  std::size_t girth_x = 0;
  std::size_t girth_y = 0;
  bool girth_x_ok = false;
  bool girth_y_ok = false;
  bool edge_injective = false;      // no iota(f) repeats a geometric X edge
  bool short_paths_embedded = false;  // reduced images of Y paths of length <= R are lines

  bool ok() const { return girth_x_ok && girth_y_ok && edge_injective && short_paths_embedded; }
  // Name of the first failing condition, empty when ok().
  std::string failing() const;
};

using StabilityCertificate = StabilityCheck;

StabilityCheck check_stability(const ImmersionMap& imm, std::size_t radius);

// Smallest N <= max_depth at which check_stability passes.
StabilityCertificate stable_level(std::span<const Portrait> fgens, std::span<const FreeWord> words,
                                  std::size_t radius, int max_depth);

// ---------------------------------------------------------------------------
// Configurations

// The edge conditions for one component Z of Y_N and a choice of
// representatives f_1..f_K (geometric Y edges of Z). e_k is the first X edge
// of iota(f_k); zeta is taken inside Z.
struct CandidateCheck {
  std::vector<EdgeId> marked;  // e_k
  std::vector<EdgeId> zeta;    // zeta(E) within Z
  bool distinct = false;       // the f_k and the e_k are pairwise distinct
  bool injective = false;      // (1) iota injective on zeta(E)
  bool separated = false;      // (2) f in zeta(e_k) => E cap iota(f) = {e_k}
  bool free_vertex = false;    // (3) some vertex of Z misses every zeta(E) edge
  bool connected = false;      // (4) Z minus zeta(E) is connected
  bool no_tree = false;        // (5) no component of Z minus zeta(E) is a tree
  std::uint32_t base_vertex = 0;

  bool ok() const { return distinct && injective && separated && free_vertex && connected; }
  std::string failing() const;
};

CandidateCheck check_candidate(const ImmersionMap& imm, const Components& comps, std::size_t component,
                               std::span<const EdgeId> representatives);

struct ComponentResolution {
  std::size_t component = 0;
  std::uint32_t base_vertex = 0;
  std::vector<EdgeId> representatives;           // f_k, geometric Y edges
  std::vector<EdgeId> marked;                    // e_k, geometric X edges
  std::vector<std::vector<DirectedEdge>> loops;  // alpha_k as directed Y edges
  std::vector<FreeWord> loop_words;              // alpha_k in the letters of Delta
};

struct Resolution {
  int level = 0;
  std::vector<FreeWord> words;
  std::vector<ComponentResolution> components;

  // Component containing `vertex` of Y_N.
  const ComponentResolution& containing(std::uint32_t vertex, const Components& comps) const;
};

struct ResolverOptions {
  int max_depth = 12;
  std::size_t attempts = 256;  // random candidates per component and level
};

Resolution find_configuration(std::span<const Portrait> fgens, std::span<const FreeWord> words, int k,
                              Rng& rng, const ResolverOptions& opt = {});

struct Audit {
  bool ok = true;
  std::string failure;
  // traversals[c][j][k]: times iota(alpha_j) crosses e_k in component c
  std::vector<std::vector<std::vector<int>>> traversals;
};

// Rebuilds the level graphs and replays every loop edge by edge.
Audit audit(std::span<const Portrait> fgens, const Resolution& res);

// alpha as a word in the generators of F.
FreeWord expand(const FreeWord& alpha, std::span<const FreeWord> words);

// Product of local cocycles along a directed X path starting at level-N
// vertices; the route that decomposes the cocycle edge by edge.
Portrait cocycle_along(std::span<const Portrait> fgens, int level, std::span<const DirectedEdge> x_path);

// beta(alpha_k, v(Z)) for every component, computed by both routes; throws
// if they disagree. Output depth is the generator depth minus N.
std::vector<std::vector<Portrait>> resolve(std::span<const Portrait> fgens, const Resolution& res);

// ---------------------------------------------------------------------------
// Statistical verification

struct HaarConfig {
  PermGroup group = PermGroup::cyclic(2);
  int rank = 2;  // m, the number of Haar generators
  std::vector<FreeWord> words;
  int k = 2;
  int truncation = 2;  // m*
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  ResolverOptions resolver;
  unsigned jobs = 1;
};

struct HaarRun {
  bool resolved = false;
  int level = -1;
  std::vector<std::uint64_t> cells;  // per k, index in W_{m*}(H)
  std::string failure;
};

struct HaarReport {
  std::size_t runs = 0;
  std::size_t resolved = 0;
  std::uint64_t cells_per_factor = 0;
  std::uint64_t joint_cells = 0;
  std::vector<ChiSquare> marginals;
  ChiSquare joint;
  ChiSquare control;  // alpha_2 replaced by alpha_1
  std::vector<std::size_t> level_histogram;
};

// One pipeline run: fresh generators from stream `run`, a configuration, and
// the truncated cocycles on the component of leaf 0.
HaarRun haar_run(const HaarConfig& cfg, std::uint64_t run);

HaarReport verify_haar(const HaarConfig& cfg);

// ---------------------------------------------------------------------------
// Exhaustive product-distribution check on a finite group

// A finitely supported joint law of (beta_1..beta_K, delta_1..delta_K): each
// atom lists 2K element indices and an integer weight.
struct Coupling {
  std::string name;
  std::vector<std::pair<std::vector<std::size_t>, std::uint64_t>> atoms;
};

struct ProductCheck {
  std::uint64_t cells = 0;
  std::uint64_t per_cell = 0;  // expected count in every cell
  bool uniform = false;
};

// Distribution of (beta_k gamma_k delta_k)_k with gamma_k independent and
// uniform, by enumerating every gamma tuple against every atom.
ProductCheck product_distribution_check(const PermGroup& group, int k, const Coupling& coupling);

// Point masses, inverse and equal couplings, shared-factor couplings and a
// random weighted law.
std::vector<Coupling> adversarial_couplings(const PermGroup& group, int k, Rng& rng);

}  // namespace treelift
