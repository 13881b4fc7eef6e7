#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gmpxx.h>

#include <random>
#include <vector>

#include "latmax/errors.hpp"
#include "latmax/lattice.hpp"

using namespace latmax;

namespace {

LogVector vec(std::initializer_list<long> xs) {
  LogVector v;
  for (long x : xs) v.push_back(Scalar::integer(x));
  return v;
}

LogVector qvec(std::initializer_list<mpq_class> xs) {
  LogVector v;
  for (const auto& x : xs) v.push_back(Scalar::rational(x));
  return v;
}

LatticeBasis basis2(std::initializer_list<long> r0,
                    std::initializer_list<long> r1) {
  return LatticeBasis({vec(r0), vec(r1)});
}

bool integral(const std::vector<Scalar>& cs) {
  for (const auto& c : cs)
    if (c.rat().get_den() != 1) return false;
  return true;
}

}  // namespace

TEST_CASE("determinant basics") {
  LatticeBasis id3({vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})});
  CHECK(id3.determinant().rat() == 1);
  CHECK(basis2({2, 0}, {0, 3}).determinant().rat() == 6);
  CHECK(basis2({1, 2}, {3, 4}).determinant().rat() == 2);  // |1*4 - 2*3|
  CHECK_THROWS_AS(basis2({1, 2}, {2, 4}).determinant(),
                  DegenerateBasis);
  CHECK_THROWS_AS(LatticeBasis({vec({1, 0})}).determinant(),
                  DimensionMismatch);
}

TEST_CASE("coordinates in a basis") {
  LatticeBasis id2 = basis2({1, 0}, {0, 1});
  auto c = id2.coords_in(vec({3, 5}));
  CHECK(c[0].rat() == 3);
  CHECK(c[1].rat() == 5);

  auto c2 = basis2({2, 0}, {0, 3}).coords_in(vec({1, 1}));
  CHECK(c2[0].rat() == mpq_class(1, 2));
  CHECK(c2[1].rat() == mpq_class(1, 3));

  auto c3 = basis2({1, 1}, {0, 2}).coords_in(vec({2, 4}));
  CHECK(c3[0].rat() == 2);
  CHECK(c3[1].rat() == 1);
}

TEST_CASE("reduction fixes skew bases and keeps the lattice") {
  LatticeBasis id2 = basis2({1, 0}, {0, 1});
  LatticeBasis r = reduce_basis(id2);
  CHECK(r.determinant().rat() == 1);
  CHECK(spans_same_lattice(r, id2));

  LatticeBasis skew = basis2({1, 0}, {4, 1});
  LatticeBasis rs = reduce_basis(skew);
  CHECK(rs.determinant().rat() == 1);
  CHECK(spans_same_lattice(rs, id2));
  // up to sign/permutation the rows are unit vectors
  for (const auto& row : rs.rows()) CHECK(norm_sq(row).rat() == 1);

  LatticeBasis one({vec({6})});
  LatticeBasis r1 = reduce_basis(one);
  CHECK(r1.determinant().rat() == 6);
  CHECK(r1[0][0].rat().get_num() * r1[0][0].rat().get_num() == 36);
}

TEST_CASE("reduction meets the defect bound on random bases") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng() % 4;
    std::vector<LogVector> rows(n, LogVector(n, Scalar::integer(0)));
    for (;;) {
      for (auto& row : rows)
        for (auto& x : row)
          x = Scalar::integer(static_cast<long>(rng() % 2001) - 1000);
      try {
        LatticeBasis(rows).determinant();
        break;
      } catch (const DegenerateBasis&) {
      }
    }
    LatticeBasis b(rows);
    LatticeBasis r = reduce_basis(b);
    CHECK(r.determinant().rat() == b.determinant().rat());
    CHECK(spans_same_lattice(r, b));
    // defect^2 <= 2^(n(n-1))
    mpq_class bound = mpz_class(1) << (n * (n - 1));
    CHECK(r.defect_sq().rat() <= bound);
  }
}

TEST_CASE("extension adjoins a rational point") {
  // index forced to 2
  Extension e = extend_basis(basis2({1, 0}, {0, 1}),
                             qvec({mpq_class(1, 2), mpq_class(1, 2)}), 2);
  CHECK(e.index == 2);
  CHECK(e.basis.determinant().rat() == mpq_class(1, 2));
  CHECK(integral(e.basis.coords_in(vec({1, 0}))));
  CHECK(integral(e.basis.coords_in(vec({0, 1}))));
  CHECK(integral(e.basis.coords_in(qvec({mpq_class(1, 2), mpq_class(1, 2)}))));

  // rank 1: [6] + 3 -> [3]
  Extension e1 = extend_basis(LatticeBasis({vec({6})}), vec({3}), 2);
  CHECK(e1.index == 2);
  CHECK(e1.basis.determinant().rat() == 3);

  // [[3,0],[0,1]] + (1,0) -> Z^2
  Extension e2 = extend_basis(basis2({3, 0}, {0, 1}), vec({1, 0}), 3);
  CHECK(e2.index == 3);
  CHECK(e2.basis.determinant().rat() == 1);
  CHECK(spans_same_lattice(e2.basis, basis2({1, 0}, {0, 1})));
}

TEST_CASE("extension rejects members and non-quotient points") {
  LatticeBasis id2 = basis2({1, 0}, {0, 1});
  CHECK_THROWS_AS(extend_basis(id2, vec({2, 5}), 3), AlreadyMember);
  LatticeBasis b({vec({6})});
  CHECK_THROWS_AS(
      extend_basis(b, LogVector{Scalar::integer(3).to_approx(128)}, 0),
      NotInQuotient);
}

TEST_CASE("extension index law on random inputs") {
  std::mt19937_64 rng(99);
  const long primes[] = {2, 3, 5, 7};
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 1 + rng() % 3;
    std::vector<LogVector> rows(n, LogVector(n, Scalar::integer(0)));
    for (;;) {
      for (auto& row : rows)
        for (auto& x : row)
          x = Scalar::integer(static_cast<long>(rng() % 21) - 10);
      try {
        LatticeBasis(rows).determinant();
        break;
      } catch (const DegenerateBasis&) {
      }
    }
    LatticeBasis b(rows);
    const long t = primes[rng() % 4];
    // w = (1/t) * random integer combination
    LogVector w(n, Scalar::integer(0));
    for (std::size_t i = 0; i < n; ++i) {
      mpq_class c(static_cast<long>(rng() % (2 * t + 1)) - t, t);
      c.canonicalize();
      Scalar s = Scalar::rational(c);
      for (std::size_t l = 0; l < n; ++l) w[l] += s * b[i][l];
    }
    try {
      Extension e = extend_basis(b, w, t);
      CHECK(e.index > 1);
      CHECK(t % e.index.get_si() == 0);  // divides t
      mpq_class ratio = b.determinant().rat() / e.basis.determinant().rat();
      CHECK(ratio.get_den() == 1);
      CHECK(ratio.get_num() == e.index);
      CHECK(integral(e.basis.coords_in(w)));
      for (const auto& row : b.rows()) CHECK(integral(e.basis.coords_in(row)));
    } catch (const AlreadyMember&) {
      // random combination landed inside the lattice; fine
    }
  }
}

TEST_CASE("approximate extension rounds coordinates under a denominator bound") {
  LatticeBasis b({vec({6})});
  LogVector w{Scalar::rational(mpq_class(3)).to_approx(128)};
  Extension e = extend_basis(b, w, 10);
  CHECK(e.index == 2);
  // the reduced result is approx mode; its enclosure brackets 3
  CHECK(e.basis[0][0].abs().lower() <= 3);
  CHECK(e.basis[0][0].abs().upper() >= 3);
}

TEST_CASE("row HNF of a stacked generator matrix") {
  auto H = row_hnf({{2, 1}, {0, 2}, {2, 3}});
  CHECK(H.size() == 2);
  CHECK(H[0][0] == 2);
  CHECK(H[1][1] == 2);
  CHECK(H[0][1] >= 0);
  CHECK(H[0][1] < 2);
  // determinant (index info) preserved: lattice of the three rows is
  // {(2,1),(0,2)} with det 4
  CHECK(H[0][0] * H[1][1] == 4);
}

TEST_CASE("parallelepiped volume") {
  Parallelepiped box;
  box.origin = vec({0, 0});
  box.generators = {vec({2, 0}), vec({0, 3})};
  box.extents = {AxisRange{0, 1}, AxisRange{0, mpq_class(1, 2)}};
  CHECK(volume(box).rat() == 3);  // 6 * 1 * 1/2
}
