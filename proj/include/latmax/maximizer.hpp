#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "latmax/lattice.hpp"
#include "latmax/oracle.hpp"

namespace latmax {

// Parameters for one maximization run.  grid holds the per-axis giant-step
// subdivisions a_1..a_n with prod a_i within a factor of two of
// ((1/bound) det)^(1-delta).
struct TuningParams {
  double bound = 1;                    // probe primes p <= bound
  double delta = 0.5;                  // baby-stock exponent
  std::vector<unsigned long> grid;     // giant-grid subdivisions
  unsigned long long memory_cap = 0;   // max baby-stock entries, 0 = none
};

// Optimal parameters with no memory constraint: delta = 1/2 and
// bound = det^(1/(2n+1)) * n^(-2/(2n+1)), clamped to >= 1.
TuningParams tune_unbounded(double det, std::size_t n);

// Baby-stock size the unbounded optimum uses: det^(n/(2n+1)) * n^(1/(2n+1)).
double unbounded_stock(double det, std::size_t n);

// Parameters under a cap of at most `cap` stored baby steps:
// delta = (1+n) log cap / (log cap + n log det), bound = (det/cap)^(1/(n+1)),
// which makes the predicted stock (det/bound)^delta equal cap.  Throws
// MemoryCapExceeded if cap <= 1, CapNotBinding if the cap is looser than the
// unbounded optimum's stock.
TuningParams tune_memory_limited(double det, std::size_t n,
                                 unsigned long long cap);

// Primes p <= bound, ascending.
std::vector<unsigned long> sieve_primes(double bound);

// The p^(n-1) probe points (1/p)(a_1 v_1 + ... + a_{n-1} v_{n-1} + v_n),
// a_i in {0..p-1}; detecting p | index needs only these once the sweep
// covers the rest.
struct CandidateSet {
  unsigned long prime = 2;
  std::vector<LogVector> points;
};

CandidateSet candidate_set(const LatticeBasis& basis, unsigned long p);

// One generator per order-p cyclic subgroup of (Z/p)^m: the tuples
// (v_1..v_i, 1, 0..0); (p^m - 1)/(p - 1) of them.  Test utility — the scan
// itself uses candidate_set.
std::vector<std::vector<unsigned long>> cyclic_subgroup_representatives(
    unsigned long p, std::size_t m);

// Per-axis subdivision counts with prod in [target, 2*target] (target >= 1),
// finer along longer basis vectors: a_i ~ target^(1/n) * |v_i| / geomean.
std::vector<unsigned long> make_grid(double target,
                                     const std::vector<double>& norms);

enum class HitSource { prime_probe, sweep };

struct EnlargementRecord {
  HitSource source;
  mpz_class prime;   // probed prime for prime_probe hits, 0 for sweep hits
  mpz_class ratio;   // index gained, integer > 1
};

struct RunStats {
  unsigned long long membership_tests = 0;
  unsigned long long baby_steps = 0;
  unsigned long long giant_steps = 0;
  unsigned long long restarts = 0;
  unsigned long long primes_scanned = 0;
  unsigned long long sweeps = 0;
  unsigned long long max_baby_stock = 0;
  Scalar final_det = Scalar::integer(0);
  mpz_class index_found = 1;
  std::vector<EnlargementRecord> enlargements;

  unsigned long long total_ops() const {
    return membership_tests + baby_steps + giant_steps;
  }
};

// Probe every candidate_set point for every prime <= bound, enlarging the
// basis on each hit and restarting the scan from p = 2, until a full pass
// is clean.  Returns the (reduced) enlarged basis.
LatticeBasis prime_scan(const LatticeBasis& basis, LatticeOracle& oracle,
                        double bound, RunStats& stats);

// Sweep the shrunken fundamental domain V_B = sum_{i<n} [0,1) v_i +
// [0, 1/bound) v_n cell by cell over params.grid; returns the first point
// of the hidden lattice found outside the current one, or nullopt if the
// sweep is clean.  Throws MemoryCapExceeded if the baby stock would exceed
// params.memory_cap.
std::optional<LogVector> bsgs_search(const LatticeBasis& basis,
                                     LatticeOracle& oracle,
                                     const TuningParams& params,
                                     RunStats& stats);

struct MaximizeResult {
  LatticeBasis basis;
  RunStats stats;
  TuningParams params;
};

// Grow `basis` to the full hidden lattice: LLL-reduce, run the prime scan,
// then alternate V_B sweeps (grid re-derived for the current basis each
// sweep) with further scans after every enlargement, until both phases come
// back clean.  Absent params, tune_unbounded picks them.
MaximizeResult maximize(const LatticeBasis& basis, LatticeOracle& oracle,
                        std::optional<TuningParams> params = std::nullopt);

}  // namespace latmax
