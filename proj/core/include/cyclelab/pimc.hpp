#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cyclelab/idealgas.hpp"
#include "cyclelab/kernels.hpp"

// Stochastic sampling of the symmetrized Brownian-bridge measure on the
// torus: permutations plus discretized world lines. The interaction-free
// chain is validated exactly against the recursion machinery (its stationary
// cycle statistics are known in closed form), which isolates permutation
// sampling from discretization error.

namespace cyclelab::pimc {

struct PimcConfig {
  SystemParams system;  // dim, box, lambda (beta folded into lambda)
  int n_particles = 2;
  int slices = 32;  // M, a power of two
  kernels::PotentialSpec potential = kernels::PotentialSpec::zero();
  // Pair interactions are capped at this value after periodization so coarse
  // time steps keep finite actions; every output records the cap.
  double action_cap = std::numeric_limits<double>::infinity();
  long sweeps = 20000;
  double equilibration_fraction = 0.2;
  int batches = 32;
  int measure_every = 1;
  int winding_shells = 6;
  std::uint64_t seed = 1;

  void validate() const;
};

// Deterministic random stream: the standard 64-bit Mersenne generator (its
// output sequence is fixed by the C++ standard, unlike distribution objects,
// so runs are bit-reproducible across platforms) plus a hand-rolled
// Box-Muller transform with a cached spare.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }
  double normal();
  int uniform_index(int n);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// World-line state. Bead positions are reduced to the primary cell; each
// time link carries the integer image offset of its step, so the unreduced
// displacement of step m is bead(m+1) - bead(m) + box * link(m). Slice M of
// strand i duplicates slice 0 of its successor perm[i] bit for bit, which
// makes the continuity invariant checkable by exact equality.
struct WorldLines {
  int n_particles = 0;
  int dim = 0;
  int slices = 0;
  double box = 0.0;
  std::vector<int> perm;
  std::vector<double> beads;  // ((i*(slices+1) + m)*dim + j), wrapped
  std::vector<int> links;     // ((i*slices + m)*dim + j)

  double* bead(int i, int m) {
    return beads.data() + (static_cast<long>(i) * (slices + 1) + m) * dim;
  }
  const double* bead(int i, int m) const {
    return beads.data() + (static_cast<long>(i) * (slices + 1) + m) * dim;
  }
  int* link(int i, int m) {
    return links.data() + (static_cast<long>(i) * slices + m) * dim;
  }
  const int* link(int i, int m) const {
    return links.data() + (static_cast<long>(i) * slices + m) * dim;
  }

  int cycle_length(int start) const;
  bool continuity_ok() const;
  // Total winding of strand i (sum of its link offsets).
  std::vector<int> strand_winding(int i) const;
};

// Identity permutation, particles spread on a deterministic grid, straight
// (constant) strands. A valid, exactly continuous starting point.
WorldLines initial_state(const PimcConfig& cfg);

// One free bridge draw between wrapped endpoints x and y: winding sampled
// from the truncated discrete Gaussian over |z| <= shells per axis, interior
// filled by midpoint bisection. path holds slices 0..M unreduced (path[M] =
// y + box*z); log_density is the full proposal density (winding mass plus
// interior Gaussians), which move acceptances and the balance audit reuse.
struct BridgeDraw {
  std::vector<double> path;  // (slices+1) * dim, unreduced
  std::vector<int> winding;
  double log_density = 0.0;
};

BridgeDraw sample_bridge(std::span<const double> x, std::span<const double> y,
                         double lambda_duration, double box, int slices,
                         int shells, Rng& rng);

// Density the sampler above would assign to an existing unreduced path with
// the same endpoints; exact reversal counterpart of sample_bridge.
double bridge_log_density(std::span<const double> path,
                          std::span<const double> y, double lambda_duration,
                          double box, int slices, int shells);

// log of the winding-summed displacement weight
// prod_j sum_{|z| <= shells} exp(-pi (delta_j + box z)^2 / lambda^2).
// The lambda^{-d} normalization is omitted; it cancels in every ratio used.
double kernel_log_weight(std::span<const double> delta, double lambda,
                         double box, int shells);

// Mass ratio of the |z| <= shells truncation against a much wider sum, at
// worst-case displacement; documents the winding truncation error.
double winding_truncation_ratio(double box_over_lambda, int shells);

// Dimensionless trapezoid action: (beta/M) sum_{s=0}^{M-1} U(slice s) with
// the periodized pair potential, capped at cfg.action_cap. A hard-core
// contact yields +infinity (certain rejection).
double action(const WorldLines& state, const PimcConfig& cfg);

// Sum of log step Gaussians over all strands (free-measure log density up to
// action); used by the detailed-balance audit.
double log_free_weight(const WorldLines& state, const PimcConfig& cfg);

struct MoveStats {
  long proposed = 0;
  long accepted = 0;
  double rate() const { return proposed ? double(accepted) / proposed : 0.0; }
};

// Transposition proposal pi -> pi (i j) with heat-bath redraw of both
// affected strands; merges two cycles or splits one. Acceptance is the
// full-duration kernel-weight ratio times the action difference.
bool move_swap(WorldLines& state, const PimcConfig& cfg, Rng& rng,
               MoveStats& merge_stats, MoveStats& split_stats);
// Heat-bath redraw of one strand (winding plus interior); acceptance is the
// action difference alone, identically one for the free gas.
bool move_redraw(WorldLines& state, const PimcConfig& cfg, Rng& rng,
                 MoveStats& stats);
// Rigid translation of one whole cycle by a uniform shift; free weight is
// translation invariant, so only the action enters.
bool move_translate(WorldLines& state, const PimcConfig& cfg, Rng& rng,
                    MoveStats& stats);

struct RunStats {
  long measurements = 0;
  std::vector<long> histogram;      // index len-1; total = measurements * N
  std::vector<double> probability;  // histogram / total
  std::vector<double> std_error;    // batch means
  MoveStats swap_merge;
  MoveStats swap_split;
  MoveStats redraw;
  MoveStats translate;
  std::vector<double> action_batch_means;
  double mean_action = 0.0;
  std::uint64_t seed = 0;
  double action_cap = std::numeric_limits<double>::infinity();
  long total_draws() const;
};

struct PimcResult {
  idealgas::CycleDistribution distribution;  // provenance: sampled
  RunStats stats;
  WorldLines final_state;
};

PimcResult estimate_cycles(const PimcConfig& cfg);
// Same run started from an explicit state (a loaded checkpoint) instead of
// the deterministic initial configuration.
PimcResult estimate_cycles(const PimcConfig& cfg, WorldLines start);

// Pooled statistics of independent chains; commutative and associative
// (histograms add, batch means pool as sorted multisets).
RunStats merge_stats(const RunStats& a, const RunStats& b);

struct MuRatioEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool available = false;
};

// N * P(cycle = 1) / q_1: the downward partition-function ratio for the free
// gas; compared against the exact recursion in tests.
MuRatioEstimate estimate_mu_ratio(const PimcResult& result,
                                  const PimcConfig& cfg);

// Relabeled copy: particle k becomes sigma[k]. Estimators must be invariant.
WorldLines relabel(const WorldLines& state, std::span<const int> sigma);

// Versioned binary checkpoint with an embedded config digest; loading with a
// different digest is refused.
void save_worldlines(const WorldLines& state, const std::string& path,
                     const std::string& config_digest);
WorldLines load_worldlines(const std::string& path,
                           const std::string& expected_digest);

// Deterministic audit of the acceptance algebra: runs one forced swap on a
// frozen state and compares the implemented log acceptance ratio with the
// explicit log[measure(new) q(reverse)] - log[measure(old) q(forward)].
struct BalanceAudit {
  double log_ratio_implementation = 0.0;
  double log_ratio_explicit = 0.0;
  double residual = 0.0;
};

BalanceAudit detailed_balance_audit(const PimcConfig& cfg,
                                    std::uint64_t audit_seed);

}  // namespace cyclelab::pimc
