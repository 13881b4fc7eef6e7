#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "latmax/maximizer.hpp"
#include "latmax/oracle.hpp"
#include "latmax/scalar.hpp"

namespace latmax {

// Real quadratic field Q(sqrt(D)), the rank-1 backend.
struct QuadField {
  mpz_class D;           // squarefree radicand >= 2
  mpz_class delta;       // fundamental discriminant: D if D = 1 mod 4, else 4D
  mpz_class sqrt_floor;  // floor(sqrt(delta))
  long prec = kDefaultPrecision;
  mpq_class window;      // walk window w = max(1/4 log delta, 1), upper bound
};

// Throws Error if D < 2 or a square factor is found (trial division up to
// 2^16; larger square factors silently yield a non-maximal order).
QuadField make_field(const mpz_class& D, long prec = kDefaultPrecision);

// Primitive ideal Z*Q + Z*(P + sqrt(delta))/2 together with the accumulated
// log of the relative generator along the walk that produced it.
struct ReducedIdeal {
  mpz_class Q;
  mpz_class P;
  Scalar distance;
};

// 0 < P < sqrt(delta) < P + 2Q, in integer form.
bool is_reduced(const QuadField& F, const mpz_class& Q, const mpz_class& P);

ReducedIdeal unit_ideal(const QuadField& F);

// Certified enclosure of log(|P + sqrt(delta)| / (2Q)), Q > 0.
Scalar log_generator(const QuadField& F, const mpz_class& P,
                     const mpz_class& Q);

// Adjacent reduced ideal in the positive direction; distance grows by
// log((P' + sqrt(delta)) / (2Q)) > 0.  Periodic with period distance R.
ReducedIdeal rho_step(const QuadField& F, const ReducedIdeal& I,
                      OracleWork* work = nullptr);

// Inverse walk step: rho_inverse(rho_step(I)) == I.
ReducedIdeal rho_inverse(const QuadField& F, const ReducedIdeal& I,
                         OracleWork* work = nullptr);

// Ideal composition followed by reduction: a reduced ideal at distance
// distance(I) + distance(J) + c with |c| <= 2 log delta.
ReducedIdeal giant_step(const QuadField& F, const ReducedIdeal& I,
                        const ReducedIdeal& J, OracleWork* work = nullptr);

// Reduced principal ideal with |distance - x| <= window, via binary-powering
// giant steps plus rho adjustment; O(log x) compositions.
ReducedIdeal target_distance(const QuadField& F, const Scalar& x,
                             OracleWork* work = nullptr);

// Is |t| within 2^(-prec/2) of an integer multiple of the regulator?
// Throws PrecisionExhausted when the window check is ambiguous.
bool contains(const QuadField& F, const Scalar& t, OracleWork* work = nullptr);

// Contiguous rho-orbit segment around the unit ideal, keyed by (Q, P); a key
// holds several distances when the segment spans more than one period.
struct BabyStock {
  std::map<std::pair<mpz_class, mpz_class>, std::vector<Scalar>> table;
  double lo = 0;            // distance range certainly covered
  double hi = 0;
  std::size_t entries = 0;  // stored (key, distance) pairs
  ReducedIdeal front;       // endpoint reached walking backward
  ReducedIdeal back;        // endpoint reached walking forward
};

// Stock covering distances [lo, hi] (lo <= 0 <= hi) around the unit ideal.
// Throws MemoryCapExceeded when more than `cap` entries would be stored
// (cap = 0 means unlimited).
BabyStock build_baby_stock(const QuadField& F, double lo, double hi,
                           unsigned long long cap,
                           OracleWork* work = nullptr);

// All positive multiples of the regulator below `limit`, ascending, found by
// giant-stepping across baby-stock-covered cells.
std::vector<Scalar> search(const QuadField& F, const Scalar& limit,
                           unsigned long long memory_cap = 0,
                           OracleWork* work = nullptr);

// Independent ground truth: classical continued-fraction period of
// sqrt(delta), accumulating the fundamental unit exactly and taking one log.
// Throws OracleTooLarge for delta >= 10^10.
Scalar regulator_cf(const QuadField& F);

// Membership/search oracle over the regulator lattice R*Z.
class QuadOracle final : public LatticeOracle {
 public:
  explicit QuadOracle(QuadField F, unsigned long long memory_cap = 0);

  std::size_t rank() const override { return 1; }
  bool contains(const LogVector& v) override;
  std::vector<LogVector> search(const Parallelepiped& box) override;
  // Every real quadratic regulator exceeds log((1+sqrt 5)/2) > 12/25.
  mpq_class covolume_floor() const override { return {12, 25}; }
  Scalar discriminant_hint() const override {
    return Scalar::integer(field_.delta);
  }
  bool self_instrumenting() const override { return true; }
  OracleWork work() const override { return work_; }

  const QuadField& field() const { return field_; }
  const BabyStock& stock() const { return stock_; }

 private:
  void ensure_stock(double cell_len);
  void ensure_anchor(const Scalar& a);

  QuadField field_;
  unsigned long long cap_;
  OracleWork work_;
  BabyStock stock_;
  bool stock_ready_ = false;
  std::optional<ReducedIdeal> anchor_;
  std::optional<ReducedIdeal> jumper_;  // cached cell-length giant step
  double jumper_len_ = 0;
};

struct CertifyResult {
  Scalar regulator;
  mpz_class index;  // S / R
  RunStats stats;
  TuningParams params;
  long precision_used = kDefaultPrecision;
};

// maximize over the quad oracle with basis [S].  S must be a multiple of the
// regulator (NotAMultiple otherwise).  PrecisionExhausted inside the run is
// retried with doubled precision, at most three doublings.
CertifyResult certify_run(const QuadField& F, const Scalar& S,
                          std::optional<TuningParams> params = std::nullopt);

// The certified regulator from certify_run.
Scalar certify(const QuadField& F, const Scalar& S,
               std::optional<TuningParams> params = std::nullopt);

}  // namespace latmax
