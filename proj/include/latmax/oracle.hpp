#pragma once

#include <vector>

#include "latmax/lattice.hpp"

namespace latmax {

// Cumulative effort counters reported by oracles that do real work per query.
struct OracleWork {
  unsigned long long baby_steps = 0;   // stored short-range steps
  unsigned long long giant_steps = 0;  // long-range jumps / compositions
  unsigned long long max_stock = 0;    // high-water mark of stored entries
};

// Black-box access to the unknown full lattice containing the working
// sublattice.
class LatticeOracle {
 public:
  virtual ~LatticeOracle() = default;

  virtual std::size_t rank() const = 0;

  // Is v a point of the hidden lattice?
  virtual bool contains(const LogVector& v) = 0;

  // Every nonzero hidden-lattice point inside the region.  May throw
  // RegionTooLarge if the box is beyond the oracle's enumeration budget.
  virtual std::vector<LogVector> search(const Parallelepiped& box) = 0;

  // Lower bound on the hidden lattice's covolume when the backend knows one
  // (0 = unknown).  Bounds coordinate denominators when a search hit has to
  // be rounded from approximate coordinates.
  virtual mpq_class covolume_floor() const { return 0; }

  // Backend discriminant when one exists (0 = none); informs window sizing
  // inside distance-based backends.
  virtual Scalar discriminant_hint() const { return Scalar::integer(0); }

  // Oracles with a real per-step cost report it via work(); the driver then
  // uses those counters instead of its own cost model.
  virtual bool self_instrumenting() const { return false; }
  virtual OracleWork work() const { return {}; }
};

}  // namespace latmax
