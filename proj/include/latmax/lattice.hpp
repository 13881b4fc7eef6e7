#pragma once

#include <cstddef>
#include <vector>

#include "latmax/scalar.hpp"

namespace latmax {

// A point in log-embedding space, one Scalar per coordinate.
using LogVector = std::vector<Scalar>;

LogVector operator+(const LogVector& a, const LogVector& b);
LogVector operator-(const LogVector& a, const LogVector& b);
LogVector scaled(const mpq_class& c, const LogVector& v);
Scalar dot(const LogVector& a, const LogVector& b);
Scalar norm_sq(const LogVector& v);

// One axis of a parallelepiped region: coefficient interval with
// individually open or closed endpoints ([lo, hi) by default).
struct AxisRange {
  mpq_class lo = 0;
  mpq_class hi = 1;
  bool closed_lo = true;
  bool closed_hi = false;
};

// Region origin + sum t_i * generators[i] with t_i ranging over extents[i].
struct Parallelepiped {
  LogVector origin;
  std::vector<LogVector> generators;
  std::vector<AxisRange> extents;
};

Scalar volume(const Parallelepiped& box);

// Full-rank lattice basis, stored as rows.
class LatticeBasis {
 public:
  LatticeBasis() = default;
  explicit LatticeBasis(std::vector<LogVector> rows);

  std::size_t rank() const { return rows_.size(); }
  const LogVector& operator[](std::size_t i) const { return rows_[i]; }
  const std::vector<LogVector>& rows() const { return rows_; }

  // |det| of the row matrix; throws DegenerateBasis if it vanishes.
  Scalar determinant() const;

  // Coordinates c with v = sum c_i * row_i.
  std::vector<Scalar> coords_in(const LogVector& v) const;

  // prod ||row_i||^2 / det^2  (>= 1, == 1 iff orthogonal).
  Scalar defect_sq() const;

 private:
  std::vector<LogVector> rows_;
  mutable Scalar det_;
  mutable bool det_cached_ = false;
};

// Lovasz-0.99 LLL reduction; the returned basis spans the same lattice.
LatticeBasis reduce_basis(const LatticeBasis& basis);

struct Extension {
  LatticeBasis basis;   // superlattice basis
  mpz_class index;      // [new : old], integer > 1
};

// Adjoin w to the lattice.  Coordinates of w in `basis` are recovered
// exactly, or (for approx scalars) reconstructed as the simplest rational
// in the coordinate enclosure with denominator <= denom_bound; pass
// denom_bound = 0 to require exact coordinates.  Throws AlreadyMember if
// w is already in the lattice, NotInQuotient if coordinates cannot be
// certified rational.
Extension extend_basis(const LatticeBasis& basis, const LogVector& w,
                       const mpz_class& denom_bound);

// Exact-mode check that two bases generate the same lattice.
bool spans_same_lattice(const LatticeBasis& a, const LatticeBasis& b);

// Row Hermite normal form of an m x n integer matrix (m >= n, full column
// rank): the n x n upper-triangular form with positive diagonal and reduced
// above-diagonal entries.
std::vector<std::vector<mpz_class>> row_hnf(
    std::vector<std::vector<mpz_class>> M);

}  // namespace latmax
