#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "latmax/errors.hpp"
#include "latmax/lattice.hpp"
#include "latmax/maximizer.hpp"
#include "latmax/synthetic.hpp"

using namespace latmax;

namespace {

LogVector vec(std::initializer_list<long> xs) {
  LogVector v;
  for (long x : xs) v.push_back(Scalar::integer(x));
  return v;
}

LatticeBasis zn(std::size_t n) {
  std::vector<LogVector> rows(n, LogVector(n, Scalar::integer(0)));
  for (std::size_t i = 0; i < n; ++i) rows[i][i] = Scalar::integer(1);
  return LatticeBasis(rows);
}

std::set<std::vector<mpq_class>> point_set(const std::vector<LogVector>& ps) {
  std::set<std::vector<mpq_class>> out;
  for (const auto& p : ps) {
    std::vector<mpq_class> row;
    for (const auto& x : p) row.push_back(x.rat());
    out.insert(row);
  }
  return out;
}

}  // namespace

TEST_CASE("prime sieve") {
  CHECK(sieve_primes(10) == std::vector<unsigned long>{2, 3, 5, 7});
  CHECK(sieve_primes(1).empty());
  CHECK(sieve_primes(2) == std::vector<unsigned long>{2});
  CHECK(sieve_primes(30) ==
        std::vector<unsigned long>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29});
}

TEST_CASE("candidate sets") {
  CandidateSet c1 = candidate_set(LatticeBasis({vec({6})}), 5);
  CHECK(c1.prime == 5);
  REQUIRE(c1.points.size() == 1);
  CHECK(c1.points[0][0].rat() == mpq_class(6, 5));

  CandidateSet c2 = candidate_set(zn(2), 3);
  REQUIRE(c2.points.size() == 3);
  std::set<std::vector<mpq_class>> want{
      {mpq_class(0), mpq_class(1, 3)},
      {mpq_class(1, 3), mpq_class(1, 3)},
      {mpq_class(2, 3), mpq_class(1, 3)}};
  CHECK(point_set(c2.points) == want);

  CandidateSet c3 = candidate_set(zn(3), 2);
  CHECK(c3.points.size() == 4);  // p^(n-1)

  // p * point lies in the spanning lattice, exactly
  for (unsigned long p : {2ul, 3ul, 5ul}) {
    LatticeBasis b({vec({2, 1, 0}), vec({-1, 3, 1}), vec({0, 2, 7})});
    CandidateSet cs = candidate_set(b, p);
    CHECK(cs.points.size() ==
          static_cast<std::size_t>(std::pow(double(p), 2.0)));
    for (const auto& pt : cs.points) {
      auto coords = b.coords_in(scaled(mpq_class(p), pt));
      for (const auto& c : coords) CHECK(c.rat().get_den() == 1);
    }
  }
}

TEST_CASE("cyclic subgroup representatives") {
  auto r22 = cyclic_subgroup_representatives(2, 2);
  std::set<std::vector<unsigned long>> got(r22.begin(), r22.end());
  std::set<std::vector<unsigned long>> want{{1, 0}, {0, 1}, {1, 1}};
  CHECK(got == want);

  auto r31 = cyclic_subgroup_representatives(3, 1);
  REQUIRE(r31.size() == 1);
  CHECK(r31[0] == std::vector<unsigned long>{1});

  CHECK(cyclic_subgroup_representatives(3, 2).size() == 4);

  // sizes: (p^m - 1)/(p - 1)
  for (unsigned long p : {2ul, 3ul, 5ul, 7ul})
    for (std::size_t m = 1; m <= 3; ++m) {
      unsigned long pm = 1;
      for (std::size_t i = 0; i < m; ++i) pm *= p;
      CHECK(cyclic_subgroup_representatives(p, m).size() ==
            (pm - 1) / (p - 1));
    }

  // every order-p subgroup of (Z/p)^2 meets the list exactly once
  for (unsigned long p : {2ul, 3ul, 5ul}) {
    auto reps = cyclic_subgroup_representatives(p, 2);
    std::set<std::set<std::vector<unsigned long>>> subgroups;
    for (unsigned long x = 0; x < p; ++x)
      for (unsigned long y = 0; y < p; ++y) {
        if (x == 0 && y == 0) continue;
        std::set<std::vector<unsigned long>> sub;
        for (unsigned long k = 1; k < p; ++k)
          sub.insert({k * x % p, k * y % p});
        subgroups.insert(sub);
      }
    CHECK(subgroups.size() == p + 1);
    for (const auto& sub : subgroups) {
      int hits = 0;
      for (const auto& r : reps)
        if (sub.count(r)) ++hits;
      CHECK(hits == 1);
    }
  }
}

TEST_CASE("grid factorization") {
  auto g = make_grid(4, {1, 1});
  double prod = 1;
  for (auto a : g) prod *= static_cast<double>(a);
  CHECK(prod >= 4);
  CHECK(prod <= 8);

  // longer vectors get finer subdivision
  auto gw = make_grid(16, {1, 4});
  REQUIRE(gw.size() == 2);
  CHECK(gw[1] > gw[0]);

  // clamped to >= 1 even with wild norms
  auto gc = make_grid(1, {100, 0.01, 1});
  for (auto a : gc) CHECK(a >= 1);
}

TEST_CASE("unbounded tuner") {
  TuningParams t1 = tune_unbounded(64, 1);
  CHECK(t1.bound == doctest::Approx(4.0));
  CHECK(t1.delta == doctest::Approx(0.5));
  double prod = 1;
  for (auto a : t1.grid) prod *= static_cast<double>(a);
  CHECK(prod >= 4);   // (64/4)^(1/2)
  CHECK(prod <= 8);

  TuningParams t2 = tune_unbounded(1e5, 2);
  CHECK(t2.bound == doctest::Approx(10.0 * std::pow(2.0, -0.4)));
  CHECK(t2.bound == doctest::Approx(7.5785828325).epsilon(1e-9));
  CHECK(t2.delta == doctest::Approx(0.5));

  CHECK(tune_unbounded(1, 1).bound == doctest::Approx(1.0));
  CHECK(tune_unbounded(0.5, 1).bound == doctest::Approx(1.0));  // clamp

  CHECK(unbounded_stock(64, 1) == doctest::Approx(4.0));
  CHECK(unbounded_stock(1e6, 2) ==
        doctest::Approx(std::pow(1e6, 0.4) * std::pow(2.0, 0.2)));
}

TEST_CASE("memory-limited tuner") {
  TuningParams t1 = tune_memory_limited(1e6, 1, 10);
  CHECK(t1.bound == doctest::Approx(316.2277660168).epsilon(1e-9));
  CHECK(t1.delta == doctest::Approx(2.0 / 7));
  CHECK(t1.memory_cap == 10);
  // predicted stock equals the cap
  CHECK(std::pow(1e6 / t1.bound, t1.delta) == doctest::Approx(10.0));

  TuningParams t2 = tune_memory_limited(1e6, 2, 100);
  CHECK(t2.bound == doctest::Approx(std::pow(1e4, 1.0 / 3)));
  CHECK(t2.bound == doctest::Approx(21.5443469003).epsilon(1e-9));
  CHECK(t2.delta == doctest::Approx(3.0 / 7));

  CHECK_THROWS_AS(tune_memory_limited(1e6, 1, 1), MemoryCapExceeded);
  // unbounded_stock(1e6, 1) = 100: a cap at/above it is not binding
  CHECK_THROWS_AS(tune_memory_limited(1e6, 1, 100), CapNotBinding);
  CHECK_THROWS_AS(tune_memory_limited(64, 1, 5), CapNotBinding);
}

TEST_CASE("prime scan leaves a maximal lattice alone") {
  SyntheticOracle oracle(HiddenLattice{zn(1)});
  RunStats st;
  LatticeBasis out = prime_scan(zn(1), oracle, 3, st);
  CHECK(out.determinant().rat() == 1);
  CHECK(st.index_found == 1);
  CHECK(st.enlargements.empty());
  CHECK(st.membership_tests > 0);
}

TEST_CASE("prime scan walks 6Z down to Z") {
  SyntheticOracle oracle(HiddenLattice{zn(1)});
  RunStats st;
  LatticeBasis out = prime_scan(LatticeBasis({vec({6})}), oracle, 3, st);
  CHECK(out.determinant().rat() == 1);
  CHECK(st.index_found == 6);
  REQUIRE(st.enlargements.size() == 2);
  CHECK(st.enlargements[0].source == HitSource::prime_probe);
  CHECK(st.enlargements[0].prime == 2);  // 6Z + 3 -> 3Z
  CHECK(st.enlargements[0].ratio == 2);
  CHECK(st.enlargements[1].prime == 3);  // 3Z + 1 -> Z
  CHECK(st.enlargements[1].ratio == 3);
  CHECK(st.restarts == 2);
}

TEST_CASE("sweep finds nothing when the lattice is already maximal") {
  SyntheticOracle oracle(HiddenLattice{zn(2)});
  RunStats st;
  TuningParams tp;
  tp.bound = 2;
  tp.grid = {2, 2};
  CHECK(!bsgs_search(zn(2), oracle, tp, st).has_value());
  CHECK(st.sweeps == 1);
}

TEST_CASE("sweep of [0, 3/2) discovers the point 1") {
  SyntheticOracle oracle(HiddenLattice{zn(1)});
  RunStats st;
  TuningParams tp;
  tp.bound = 2;
  tp.grid = {2};
  auto hit = bsgs_search(LatticeBasis({vec({3})}), oracle, tp, st);
  REQUIRE(hit.has_value());
  CHECK((*hit)[0].rat() == 1);
}

TEST_CASE("sweep crosses a short direction the scan cannot see") {
  SyntheticOracle oracle(HiddenLattice{zn(2)});
  RunStats st;
  TuningParams tp;
  tp.bound = 2;
  tp.grid = {2, 2};
  LatticeBasis sub({vec({1, 0}), vec({0, 5})});
  auto hit = bsgs_search(sub, oracle, tp, st);
  REQUIRE(hit.has_value());
  CHECK((*hit)[1].rat() == 1);              // some (a, 1)
  CHECK((*hit)[0].rat().get_den() == 1);
}

TEST_CASE("sweep respects the memory cap under the cost model") {
  SyntheticOracle oracle(HiddenLattice{zn(1)});
  RunStats st;
  TuningParams tp;
  tp.bound = 2;
  tp.grid = {10};
  tp.memory_cap = 3;  // stock model: (1000/2)/10 = 50 entries
  CHECK_THROWS_AS(bsgs_search(LatticeBasis({vec({1000})}), oracle, tp, st),
                  MemoryCapExceeded);
}

TEST_CASE("maximize is a no-op on the full lattice") {
  SyntheticOracle oracle(HiddenLattice{zn(3)});
  MaximizeResult r = maximize(zn(3), oracle);
  CHECK(r.basis.determinant().rat() == 1);
  CHECK(r.stats.restarts == 0);
  CHECK(r.stats.index_found == 1);
  CHECK(spans_same_lattice(r.basis, zn(3)));
}

TEST_CASE("maximize recovers Z^2 from an index-6 sublattice") {
  SyntheticOracle oracle(HiddenLattice{zn(2)});
  MaximizeResult r = maximize(LatticeBasis({vec({2, 0}), vec({0, 3})}), oracle);
  CHECK(r.basis.determinant().rat() == 1);
  CHECK(r.stats.index_found == 6);
  CHECK(r.stats.final_det.rat() == 1);
  CHECK(spans_same_lattice(r.basis, zn(2)));
}

TEST_CASE("maximize closes the gap the prime scan may miss") {
  SyntheticOracle oracle(HiddenLattice{zn(2)});
  TuningParams tp;
  tp.bound = 2;
  MaximizeResult r =
      maximize(LatticeBasis({vec({2, 0}), vec({0, 1})}), oracle, tp);
  CHECK(r.basis.determinant().rat() == 1);
  CHECK(r.stats.index_found == 2);
  CHECK(spans_same_lattice(r.basis, zn(2)));
}

TEST_CASE("maximize recovers a random unimodular lattice from index 8") {
  InstanceSpec spec;
  spec.n = 3;
  spec.index_factors = {2, 2, 2};
  spec.seed = 20240817;
  Instance inst = gen_instance(spec);
  CHECK(inst.planted_index == 8);

  SyntheticOracle oracle(inst.hidden);
  MaximizeResult r = maximize(inst.sublattice, oracle);
  CHECK(spans_same_lattice(r.basis, inst.hidden.secret_basis));
  CHECK(r.stats.index_found == 8);
  // every hidden basis vector has integral coordinates in the output
  for (const auto& row : inst.hidden.secret_basis.rows())
    for (const auto& c : r.basis.coords_in(row))
      CHECK(c.rat().get_den() == 1);
}

TEST_CASE("descent is monotone and restart-bounded") {
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
    InstanceSpec spec;
    spec.n = 2;
    spec.index_factors = {2, 3, 5};
    spec.seed = seed;
    Instance inst = gen_instance(spec);
    SyntheticOracle oracle(inst.hidden);
    MaximizeResult r = maximize(inst.sublattice, oracle);
    CHECK(spans_same_lattice(r.basis, inst.hidden.secret_basis));
    mpz_class prod(1);
    for (const auto& e : r.stats.enlargements) {
      CHECK(e.ratio >= 2);
      prod *= e.ratio;
    }
    CHECK(prod == 30);
    // restarts <= log2(initial index)
    CHECK(r.stats.restarts <= std::log2(30.0) + 1e-9);
  }
}

TEST_CASE("sweep completeness against brute force on small boxes") {
  // no run returns none while a brute-force pass over V_B finds a point
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    InstanceSpec spec;
    spec.n = 1 + rng() % 2;
    spec.index_factors = {static_cast<unsigned long>(rng() % 2 ? 2 : 3)};
    spec.seed = static_cast<unsigned long>(rng());
    Instance inst = gen_instance(spec);
    SyntheticOracle oracle(inst.hidden);

    LatticeBasis red = reduce_basis(inst.sublattice);
    TuningParams tp;
    tp.bound = 2;
    tp.grid.assign(red.rank(), 2);
    RunStats st;
    auto hit = bsgs_search(red, oracle, tp, st);

    // brute force: scan V_B via the oracle search on the full box
    Parallelepiped box;
    box.origin = LogVector(red.rank(), Scalar::integer(0));
    box.generators = red.rows();
    box.extents.assign(red.rank(), AxisRange{});
    box.extents.back().hi = mpq_class(1, 2);
    bool brute_nonempty = false;
    for (const LogVector& w : oracle.search(box))
      if (!w.empty()) brute_nonempty = true;
    if (brute_nonempty) CHECK(hit.has_value());
    if (hit) {
      CHECK(oracle.contains(*hit));
      bool integral = true;
      for (const auto& c : red.coords_in(*hit))
        if (c.rat().get_den() != 1) integral = false;
      CHECK(!integral);  // a genuine enlargement direction
    }
  }
}
