#include "latmax/synthetic.hpp"

#include <random>
#include <utility>

#include "latmax/errors.hpp"

namespace latmax {
namespace {

constexpr double kEnumBudget = 1e7;  // max candidate points per box search

// rng() % m is the same on every platform; std::uniform_int_distribution
// is not.
unsigned long draw(std::mt19937_64& rng, unsigned long m) {
  return static_cast<unsigned long>(rng() % m);
}

long nonzero_shear(std::mt19937_64& rng) {
  long c = static_cast<long>(draw(rng, 10)) - 5;  // [-5,4]
  return c >= 0 ? c + 1 : c;                      // [-5,-1] u [1,5]
}

using ZMatrix = std::vector<std::vector<mpz_class>>;

void row_remix(ZMatrix& m, std::mt19937_64& rng) {
  const std::size_t n = m.size();
  if (n < 2) return;
  for (std::size_t s = 0; s < 2 * n * n; ++s) {
    std::size_t i = draw(rng, n);
    std::size_t j = draw(rng, n - 1);
    if (j >= i) ++j;
    long c = nonzero_shear(rng);
    for (std::size_t l = 0; l < n; ++l) m[i][l] += c * m[j][l];
  }
}

void column_remix(ZMatrix& m, std::mt19937_64& rng) {
  const std::size_t n = m.size();
  if (n < 2) return;
  for (std::size_t s = 0; s < 2 * n * n; ++s) {
    std::size_t i = draw(rng, n);
    std::size_t j = draw(rng, n - 1);
    if (j >= i) ++j;
    long c = nonzero_shear(rng);
    for (std::size_t l = 0; l < n; ++l) m[l][i] += c * m[l][j];
  }
}

LatticeBasis to_basis(const ZMatrix& m) {
  std::vector<LogVector> rows(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (const mpz_class& e : m[i]) rows[i].push_back(Scalar::integer(e));
  return LatticeBasis(std::move(rows));
}

mpz_class floor_q(const mpq_class& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return r;
}

mpz_class ceil_q(const mpq_class& q) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return r;
}

mpq_class exact_rat(const Scalar& s) {
  if (!s.is_exact()) throw Error("synthetic oracle needs exact inputs");
  return s.rat();
}

bool in_axis(const mpq_class& t, const AxisRange& ax) {
  if (ax.closed_lo ? t < ax.lo : t <= ax.lo) return false;
  if (ax.closed_hi ? t > ax.hi : t >= ax.hi) return false;
  return true;
}

}  // namespace

SyntheticOracle::SyntheticOracle(HiddenLattice hidden)
    : hidden_{reduce_basis(hidden.secret_basis)} {}

bool SyntheticOracle::contains(const LogVector& v) {
  for (const Scalar& c : hidden_.secret_basis.coords_in(v))
    if (exact_rat(c).get_den() != 1) return false;
  return true;
}

std::vector<LogVector> SyntheticOracle::search(const Parallelepiped& box) {
  const LatticeBasis& H = hidden_.secret_basis;
  const std::size_t n = rank();
  if (box.origin.size() != n || box.generators.size() != n ||
      box.extents.size() != n)
    throw DimensionMismatch("region rank mismatch");

  // Hidden-coordinate bounding box of the region's corners.
  std::vector<mpq_class> lo(n), hi(n);
  for (std::size_t corner = 0; corner < (1u << n); ++corner) {
    LogVector pt = box.origin;
    for (std::size_t i = 0; i < n; ++i) {
      const mpq_class& ext =
          (corner & (1u << i)) ? box.extents[i].hi : box.extents[i].lo;
      if (ext != 0) pt = pt + scaled(ext, box.generators[i]);
    }
    auto coords = H.coords_in(pt);
    for (std::size_t i = 0; i < n; ++i) {
      mpq_class c = exact_rat(coords[i]);
      if (corner == 0) {
        lo[i] = hi[i] = c;
      } else {
        if (c < lo[i]) lo[i] = c;
        if (c > hi[i]) hi[i] = c;
      }
    }
  }

  std::vector<mpz_class> from(n), count(n);
  double budget = 1;
  for (std::size_t i = 0; i < n; ++i) {
    from[i] = ceil_q(lo[i]);
    mpz_class last = floor_q(hi[i]);
    count[i] = last >= from[i] ? mpz_class(last - from[i] + 1) : mpz_class(0);
    budget *= count[i].get_d();
    if (budget > kEnumBudget)
      throw RegionTooLarge("box enumeration exceeds oracle budget");
  }

  // Map hidden coordinates to region coordinates once: a point with hidden
  // coordinates c sits at region position c*M + b.
  LatticeBasis gen_basis(box.generators);
  std::vector<std::vector<mpq_class>> M(n, std::vector<mpq_class>(n));
  for (std::size_t i = 0; i < n; ++i) {
    auto row = gen_basis.coords_in(H[i]);
    for (std::size_t j = 0; j < n; ++j) M[i][j] = exact_rat(row[j]);
  }
  std::vector<mpq_class> b(n);
  auto borigin = gen_basis.coords_in(box.origin);
  for (std::size_t j = 0; j < n; ++j) b[j] = -exact_rat(borigin[j]);

  std::vector<LogVector> out;
  std::vector<mpz_class> c(from);
  if (budget == 0) return out;
  for (;;) {
    bool inside = true;
    bool zero = true;
    for (const mpz_class& ci : c)
      if (ci != 0) zero = false;
    if (zero) inside = false;  // search reports nonzero points only
    for (std::size_t j = 0; j < n && inside; ++j) {
      mpq_class t = b[j];
      for (std::size_t i = 0; i < n; ++i)
        if (c[i] != 0) t += mpq_class(c[i]) * M[i][j];
      inside = in_axis(t, box.extents[j]);
    }
    if (inside) {
      LogVector pt(n, Scalar::integer(0));
      for (std::size_t i = 0; i < n; ++i)
        if (c[i] != 0) pt = pt + scaled(mpq_class(c[i]), H[i]);
      out.push_back(std::move(pt));
    }
    std::size_t i = 0;
    while (i < n && ++c[i] == from[i] + count[i]) c[i++] = from[i];
    if (i == n) break;
  }
  return out;
}

Instance gen_instance(const InstanceSpec& spec) {
  const std::size_t n = spec.n;
  if (n == 0 || n > 16) throw Error("instance rank out of range");
  if (spec.basis_entry_bound == 0) throw Error("entry bound must be positive");
  std::mt19937_64 rng(spec.seed);

  ZMatrix hidden(n, std::vector<mpz_class>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    hidden[i][i] = 1 + draw(rng, spec.basis_entry_bound);
  column_remix(hidden, rng);

  ZMatrix coeff(n, std::vector<mpz_class>(n, 0));
  for (std::size_t i = 0; i < n; ++i) coeff[i][i] = 1;
  mpz_class planted = 1;
  for (unsigned long f : spec.index_factors) {
    if (f < 2) throw Error("index factors must be >= 2");
    row_remix(coeff, rng);
    std::size_t r = draw(rng, n);
    for (std::size_t l = 0; l < n; ++l) coeff[r][l] *= f;
    planted *= f;
  }
  row_remix(coeff, rng);

  ZMatrix sub(n, std::vector<mpz_class>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l)
        sub[i][j] += coeff[i][l] * hidden[l][j];

  return {HiddenLattice{to_basis(hidden)}, to_basis(sub), planted};
}

}  // namespace latmax
