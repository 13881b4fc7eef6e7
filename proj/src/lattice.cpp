#include "latmax/lattice.hpp"

#include <algorithm>
#include <utility>

#include "latmax/errors.hpp"

namespace latmax {
namespace {

void check_same_dim(const LogVector& a, const LogVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector sizes differ");
}

mpz_class round_mpq(const mpq_class& q) {
  return round_div(q.get_num(), q.get_den());
}

// Exact LLL (Lovasz 0.99) over the rational midpoint matrix; returns the
// unimodular transform U with reduced = U * input.
std::vector<std::vector<mpz_class>> lll_transform(
    std::vector<std::vector<mpq_class>> b) {
  const std::size_t n = b.size();
  std::vector<std::vector<mpz_class>> U(n, std::vector<mpz_class>(n, 0));
  for (std::size_t i = 0; i < n; ++i) U[i][i] = 1;
  if (n < 2) return U;

  const mpq_class delta(99, 100);
  std::vector<std::vector<mpq_class>> mu(n, std::vector<mpq_class>(n, 0));
  std::vector<mpq_class> B(n, 0);

  auto gso = [&] {
    std::vector<std::vector<mpq_class>> star = b;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        mpq_class num = 0;
        for (std::size_t l = 0; l < n; ++l) num += b[i][l] * star[j][l];
        if (sgn(B[j]) == 0) throw DegenerateBasis("dependent rows");
        mu[i][j] = num / B[j];
        for (std::size_t l = 0; l < n; ++l)
          star[i][l] -= mu[i][j] * star[j][l];
      }
      B[i] = 0;
      for (std::size_t l = 0; l < n; ++l) B[i] += star[i][l] * star[i][l];
      if (i == 0 && sgn(B[0]) == 0) throw DegenerateBasis("dependent rows");
    }
  };

  gso();
  std::size_t k = 1;
  while (k < n) {
    for (std::size_t jj = k; jj-- > 0;) {
      mpz_class q = round_mpq(mu[k][jj]);
      if (q != 0) {
        for (std::size_t l = 0; l < n; ++l) {
          b[k][l] -= mpq_class(q) * b[jj][l];
          U[k][l] -= q * U[jj][l];
        }
        for (std::size_t l = 0; l < jj; ++l) mu[k][l] -= mpq_class(q) * mu[jj][l];
        mu[k][jj] -= q;
      }
    }
    if (B[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * B[k - 1]) {
      ++k;
    } else {
      std::swap(b[k], b[k - 1]);
      std::swap(U[k], U[k - 1]);
      gso();
      k = std::max<std::size_t>(1, k - 1);
    }
  }
  return U;
}

}  // namespace

std::vector<std::vector<mpz_class>> row_hnf(
    std::vector<std::vector<mpz_class>> M) {
  const std::size_t m = M.size();
  const std::size_t n = m ? M[0].size() : 0;
  if (m < n) throw DimensionMismatch("HNF needs at least n rows");
  for (std::size_t col = 0; col < n; ++col) {
    for (;;) {
      std::size_t piv = m;
      for (std::size_t r = col; r < m; ++r)
        if (M[r][col] != 0 &&
            (piv == m || ::abs(M[r][col]) < ::abs(M[piv][col])))
          piv = r;
      if (piv == m) throw DegenerateBasis("rank-deficient extension matrix");
      std::swap(M[col], M[piv]);
      bool clean = true;
      for (std::size_t r = col + 1; r < m; ++r) {
        if (M[r][col] == 0) continue;
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), M[r][col].get_mpz_t(),
                   M[col][col].get_mpz_t());
        for (std::size_t l = 0; l < n; ++l) M[r][l] -= q * M[col][l];
        if (M[r][col] != 0) clean = false;
      }
      if (clean) break;
    }
    if (M[col][col] < 0)
      for (std::size_t l = 0; l < n; ++l) M[col][l] = -M[col][l];
  }
  for (std::size_t col = 0; col < n; ++col)
    for (std::size_t r = 0; r < col; ++r) {
      mpz_class q;
      mpz_fdiv_q(q.get_mpz_t(), M[r][col].get_mpz_t(), M[col][col].get_mpz_t());
      if (q != 0)
        for (std::size_t l = 0; l < n; ++l) M[r][l] -= q * M[col][l];
    }
  M.resize(n);
  return M;
}

LogVector operator+(const LogVector& a, const LogVector& b) {
  check_same_dim(a, b);
  LogVector r(a.size(), Scalar::integer(0));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

LogVector operator-(const LogVector& a, const LogVector& b) {
  check_same_dim(a, b);
  LogVector r(a.size(), Scalar::integer(0));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

LogVector scaled(const mpq_class& c, const LogVector& v) {
  LogVector r(v.size(), Scalar::integer(0));
  Scalar s = Scalar::rational(c);
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = s * v[i];
  return r;
}

Scalar dot(const LogVector& a, const LogVector& b) {
  check_same_dim(a, b);
  Scalar r = Scalar::integer(0);
  for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
  return r;
}

Scalar norm_sq(const LogVector& v) { return dot(v, v); }

Scalar volume(const Parallelepiped& box) {
  if (box.generators.size() != box.extents.size())
    throw DimensionMismatch("generators/extents size mismatch");
  Scalar v = LatticeBasis(box.generators).determinant();
  for (const AxisRange& ax : box.extents)
    v *= Scalar::rational(ax.hi - ax.lo);
  return v.abs();
}

LatticeBasis::LatticeBasis(std::vector<LogVector> rows)
    : rows_(std::move(rows)) {
  for (const auto& r : rows_)
    if (r.size() != rows_.size())
      throw DimensionMismatch("basis must be square");
}

Scalar LatticeBasis::determinant() const {
  if (det_cached_) return det_;
  const std::size_t n = rank();
  if (n == 0) throw DegenerateBasis("empty basis");
  std::vector<LogVector> a = rows_;
  Scalar det = Scalar::integer(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = n;
    for (std::size_t r = col; r < n; ++r) {
      if (!a[r][col].certainly_nonzero()) continue;
      if (piv == n ||
          ::abs(a[r][col].midpoint()) > ::abs(a[piv][col].midpoint()))
        piv = r;
    }
    if (piv == n) {
      bool all_exact_zero = true;
      for (std::size_t r = col; r < n; ++r)
        if (!(a[r][col].is_exact() && sgn(a[r][col].rat()) == 0))
          all_exact_zero = false;
      if (all_exact_zero) throw DegenerateBasis("singular basis");
      throw PrecisionExhausted("pivot enclosure straddles zero");
    }
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a[r][col].is_exact() && sgn(a[r][col].rat()) == 0) continue;
      Scalar f = a[r][col] / a[col][col];
      for (std::size_t l = col; l < n; ++l) a[r][l] -= f * a[col][l];
    }
  }
  det_ = det.abs();
  det_cached_ = true;
  return det_;
}

std::vector<Scalar> LatticeBasis::coords_in(const LogVector& v) const {
  const std::size_t n = rank();
  if (v.size() != n) throw DimensionMismatch("vector/basis size mismatch");
  // Solve x * rows = v, i.e. rows^T * x^T = v^T.
  std::vector<LogVector> a(n, LogVector(n + 1, Scalar::integer(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = rows_[j][i];
    a[i][n] = v[i];
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = n;
    for (std::size_t r = col; r < n; ++r) {
      if (!a[r][col].certainly_nonzero()) continue;
      if (piv == n ||
          ::abs(a[r][col].midpoint()) > ::abs(a[piv][col].midpoint()))
        piv = r;
    }
    if (piv == n) throw PrecisionExhausted("solve pivot straddles zero");
    std::swap(a[piv], a[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a[r][col].is_exact() && sgn(a[r][col].rat()) == 0) continue;
      Scalar f = a[r][col] / a[col][col];
      for (std::size_t l = col; l <= n; ++l) a[r][l] -= f * a[col][l];
    }
  }
  std::vector<Scalar> x(n, Scalar::integer(0));
  for (std::size_t i = n; i-- > 0;) {
    Scalar s = a[i][n];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

Scalar LatticeBasis::defect_sq() const {
  Scalar num = Scalar::integer(1);
  for (const auto& r : rows_) num *= norm_sq(r);
  Scalar d = determinant();
  return num / (d * d);
}

LatticeBasis reduce_basis(const LatticeBasis& basis) {
  const std::size_t n = basis.rank();
  std::vector<std::vector<mpq_class>> mid(n, std::vector<mpq_class>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) mid[i][j] = basis[i][j].midpoint();
  auto U = lll_transform(std::move(mid));
  std::vector<LogVector> out(n, LogVector(n, Scalar::integer(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (U[i][j] == 0) continue;
      Scalar c = Scalar::integer(U[i][j]);
      for (std::size_t l = 0; l < n; ++l) out[i][l] += c * basis[j][l];
    }
  return LatticeBasis(std::move(out));
}

Extension extend_basis(const LatticeBasis& basis, const LogVector& w,
                       const mpz_class& denom_bound) {
  const std::size_t n = basis.rank();
  std::vector<Scalar> raw = basis.coords_in(w);
  std::vector<mpq_class> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i].is_exact()) {
      c[i] = raw[i].rat();
      continue;
    }
    if (denom_bound <= 0)
      throw NotInQuotient("approximate coordinates need a denominator bound");
    mpq_class lo = raw[i].lower(), hi = raw[i].upper();
    if ((hi - lo) * denom_bound * denom_bound >= 1)
      throw PrecisionExhausted("coordinate enclosure too wide to round");
    c[i] = simplest_rational_in(lo, hi);
    if (c[i].get_den() > denom_bound)
      throw NotInQuotient("no coordinate with admissible denominator");
  }
  mpz_class L = 1;
  for (const auto& q : c) mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), q.get_den().get_mpz_t());
  if (L == 1) throw AlreadyMember("vector already in lattice");

  std::vector<std::vector<mpz_class>> M(n + 1, std::vector<mpz_class>(n, 0));
  for (std::size_t i = 0; i < n; ++i) M[i][i] = L;
  for (std::size_t j = 0; j < n; ++j)
    M[n][j] = c[j].get_num() * (L / c[j].get_den());
  auto H = row_hnf(std::move(M));

  mpz_class det_h = 1;
  for (std::size_t i = 0; i < n; ++i) det_h *= H[i][i];
  mpz_class Ln;
  mpz_pow_ui(Ln.get_mpz_t(), L.get_mpz_t(), static_cast<unsigned long>(n));
  if (Ln % det_h != 0) throw Error("extension index not integral");
  mpz_class index = Ln / det_h;
  if (index == 1) throw AlreadyMember("vector already in lattice");

  std::vector<LogVector> out(n, LogVector(n, Scalar::integer(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (H[i][j] == 0) continue;
      mpq_class coef(H[i][j], L);
      coef.canonicalize();
      Scalar s = Scalar::rational(coef);
      for (std::size_t l = 0; l < n; ++l) out[i][l] += s * basis[j][l];
    }
  return {reduce_basis(LatticeBasis(std::move(out))), index};
}

bool spans_same_lattice(const LatticeBasis& a, const LatticeBasis& b) {
  if (a.rank() != b.rank()) return false;
  if (::abs(a.determinant().rat()) != ::abs(b.determinant().rat())) return false;
  for (const auto& row : a.rows()) {
    for (const auto& coord : b.coords_in(row))
      if (coord.rat().get_den() != 1) return false;
  }
  return true;
}

}  // namespace latmax
