#pragma once

#include <vector>

#include "latmax/lattice.hpp"
#include "latmax/oracle.hpp"

namespace latmax {

// Ground-truth lattice for verification; only contains/search semantics are
// visible through the oracle interface.
struct HiddenLattice {
  LatticeBasis secret_basis;  // exact mode
};

// Recipe for a planted recovery problem.
struct InstanceSpec {
  std::size_t n = 1;
  std::vector<unsigned long> index_factors;  // primes; planted index = product
  unsigned long long seed = 0;
  unsigned long basis_entry_bound = 4;  // hidden diagonal entries in [1, bound]
};

// Exact oracle over a hidden rational lattice; membership and region
// enumeration are decided by exact coordinate solves.
class SyntheticOracle final : public LatticeOracle {
 public:
  explicit SyntheticOracle(HiddenLattice hidden);

  std::size_t rank() const override { return hidden_.secret_basis.rank(); }
  bool contains(const LogVector& v) override;
  std::vector<LogVector> search(const Parallelepiped& box) override;

  const LatticeBasis& secret_basis() const { return hidden_.secret_basis; }

 private:
  HiddenLattice hidden_;
};

struct Instance {
  HiddenLattice hidden;
  LatticeBasis sublattice;
  mpz_class planted_index;
};

// Hidden lattice = random unimodular image of a random integer diagonal
// lattice; sublattice = random basis directions scaled by the index factors,
// re-randomized unimodularly.  Deterministic for a fixed recipe across
// platforms.
Instance gen_instance(const InstanceSpec& spec);

}  // namespace latmax
