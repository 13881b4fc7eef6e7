#include "latmax/quad.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "latmax/errors.hpp"
#include "latmax/lattice.hpp"

namespace latmax {
namespace {

// Walk iterations before declaring a stall; continuant growth makes every
// legitimate walk here shorter by orders of magnitude.
constexpr std::size_t kWalkBudget = 1u << 20;

void bump_baby(OracleWork* w) {
  if (w) ++w->baby_steps;
}

void bump_giant(OracleWork* w) {
  if (w) ++w->giant_steps;
}

double window_d(const QuadField& F) {
  return mpq_get_d(F.window.get_mpq_t());
}

Scalar window_scalar(const QuadField& F) {
  return Scalar::rational(F.window);
}

mpq_class membership_eps(long prec) {
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, static_cast<unsigned long>(prec / 2));
  return mpq_class(mpz_class(1), den);
}

// Exact sign of A + B*sqrt(delta) (delta > 0, not a perfect square).
int surd_sign(const mpz_class& A, const mpz_class& B, const mpz_class& delta) {
  if (sgn(B) == 0) return sgn(A);
  if (sgn(A) == 0 || sgn(A) == sgn(B)) return sgn(B);
  mpz_class a2 = A * A, b2d = B * B * delta;
  int c = cmp(a2, b2d);
  if (c == 0) throw Error("discriminant is a perfect square");
  return c > 0 ? sgn(A) : sgn(B);
}

// Certified enclosure of log(|A + B*sqrt(delta)| / C) as a Scalar with
// `prec` fractional bits (C > 0).
Scalar log_surd_ratio(const mpz_class& A_in, const mpz_class& B_in,
                      const mpz_class& C, const mpz_class& delta, long prec) {
  if (sgn(C) <= 0) throw Error("log ratio needs a positive denominator");
  mpz_class A = A_in, B = B_in;
  const int sign = surd_sign(A, B, delta);
  if (sign == 0) throw Error("log of zero");
  if (sign < 0) {
    A = -A;
    B = -B;
  }

  for (int attempt = 0; attempt < 5; ++attempt) {
    const auto p =
        static_cast<mpfr_prec_t>(prec + 48 + 64 * attempt);
    mpfr_t t, xlo, xhi;
    mpfr_inits2(p, t, xlo, xhi, static_cast<mpfr_ptr>(nullptr));

    if (sgn(B) == 0) {
      mpfr_set_z(xlo, A.get_mpz_t(), MPFR_RNDD);
      mpfr_set_z(xhi, A.get_mpz_t(), MPFR_RNDU);
    } else {
      // lower bound of B*sqrt(delta): pair the rounding direction of the
      // square root with the sign of B
      mpfr_set_z(t, delta.get_mpz_t(), sgn(B) > 0 ? MPFR_RNDD : MPFR_RNDU);
      mpfr_sqrt(t, t, sgn(B) > 0 ? MPFR_RNDD : MPFR_RNDU);
      mpfr_mul_z(xlo, t, B.get_mpz_t(), MPFR_RNDD);
      mpfr_add_z(xlo, xlo, A.get_mpz_t(), MPFR_RNDD);

      mpfr_set_z(t, delta.get_mpz_t(), sgn(B) > 0 ? MPFR_RNDU : MPFR_RNDD);
      mpfr_sqrt(t, t, sgn(B) > 0 ? MPFR_RNDU : MPFR_RNDD);
      mpfr_mul_z(xhi, t, B.get_mpz_t(), MPFR_RNDU);
      mpfr_add_z(xhi, xhi, A.get_mpz_t(), MPFR_RNDU);
    }
    mpfr_div_z(xlo, xlo, C.get_mpz_t(), MPFR_RNDD);
    mpfr_div_z(xhi, xhi, C.get_mpz_t(), MPFR_RNDU);

    if (mpfr_sgn(xlo) <= 0) {  // cancellation ate the sign; retry wider
      mpfr_clears(t, xlo, xhi, static_cast<mpfr_ptr>(nullptr));
      continue;
    }
    mpfr_log(xlo, xlo, MPFR_RNDD);
    mpfr_log(xhi, xhi, MPFR_RNDU);
    mpfr_mul_2si(xlo, xlo, prec, MPFR_RNDD);
    mpfr_mul_2si(xhi, xhi, prec, MPFR_RNDU);
    mpz_class zl, zh;
    mpfr_get_z(zl.get_mpz_t(), xlo, MPFR_RNDD);
    mpfr_get_z(zh.get_mpz_t(), xhi, MPFR_RNDU);
    mpfr_clears(t, xlo, xhi, static_cast<mpfr_ptr>(nullptr));

    mpz_class num = zl + zh + 1, mant, spread = zh - zl, err;
    mpz_fdiv_q_2exp(mant.get_mpz_t(), num.get_mpz_t(), 1);
    mpz_cdiv_q_2exp(err.get_mpz_t(), spread.get_mpz_t(), 1);
    err += 1;
    return Scalar::fixed_point(mant, err, prec);
  }
  throw PrecisionExhausted("log argument indistinguishable from zero");
}

// Representative of x modulo m (m > 0) in the window (hi - m, hi].
mpz_class mod_into(const mpz_class& x, const mpz_class& m,
                   const mpz_class& hi) {
  mpz_class diff = hi - x, r;
  mpz_fdiv_r(r.get_mpz_t(), diff.get_mpz_t(), m.get_mpz_t());
  return hi - r;
}

// Walk I into distance band [x - w, x + w].
void adjust_to(const QuadField& F, ReducedIdeal& I, const Scalar& x,
               OracleWork* work) {
  const Scalar w = window_scalar(F);
  const Scalar lo = x - w, hi = x + w;
  std::size_t budget = kWalkBudget;
  while (I.distance.certainly_greater(hi)) {
    if (budget-- == 0) throw Error("distance walk stalled");
    I = rho_inverse(F, I, work);
  }
  while (I.distance.certainly_less(lo)) {
    if (budget-- == 0) throw Error("distance walk stalled");
    I = rho_step(F, I, work);
  }
}

// Multiples of the regulator: stock distances v with the anchor's key give
// lambda = distance(J) - v; keep those meeting [a - fuzz, b + fuzz], zero
// excluded.
std::vector<Scalar> collisions(const BabyStock& st, const ReducedIdeal& J,
                               const Scalar& a, const Scalar& b,
                               const Scalar& fuzz) {
  std::vector<Scalar> out;
  auto it = st.table.find({J.Q, J.P});
  if (it == st.table.end()) return out;
  const Scalar alo = a - fuzz, bhi = b + fuzz;
  for (const Scalar& v : it->second) {
    Scalar lam = J.distance - v;
    if (!lam.certainly_nonzero()) continue;
    if (lam.certainly_less(alo) || lam.certainly_greater(bhi)) continue;
    out.push_back(std::move(lam));
  }
  return out;
}

std::vector<Scalar> search_cells(const QuadField& F, const Scalar& limit,
                                 double limit_d, double len,
                                 unsigned long long cap, OracleWork* work) {
  const double wd = window_d(F);
  const auto ncells = static_cast<unsigned long>(
      std::max(1.0, std::ceil(limit_d / len)));
  BabyStock st = build_baby_stock(F, -(limit_d / ncells + wd + 1), wd + 1,
                                  cap, work);
  const Scalar eps = Scalar::rational(membership_eps(F.prec));

  const mpz_class cells(ncells);
  std::optional<ReducedIdeal> jump;
  if (ncells > 1)
    jump = target_distance(
        F, limit * Scalar::rational(mpq_class(mpz_class(1), cells)), work);

  std::vector<Scalar> found;
  std::optional<ReducedIdeal> anchor;
  for (unsigned long i = 0; i < ncells; ++i) {
    mpq_class qlo(mpz_class(i), cells), qhi(mpz_class(i + 1), cells);
    qlo.canonicalize();
    qhi.canonicalize();
    const Scalar a = limit * Scalar::rational(qlo);
    const Scalar b = limit * Scalar::rational(qhi);
    if (!anchor)
      anchor = target_distance(F, a, work);
    else
      anchor = giant_step(F, *anchor, *jump, work);
    adjust_to(F, *anchor, a, work);
    for (Scalar& lam : collisions(st, *anchor, a, b, eps))
      if (lam.certainly_positive()) found.push_back(std::move(lam));
  }

  std::sort(found.begin(), found.end(), [](const Scalar& x, const Scalar& y) {
    return x.midpoint() < y.midpoint();
  });
  std::vector<Scalar> out;
  const mpq_class cluster(24, 100);  // half the least possible regulator
  for (Scalar& lam : found) {
    if (!out.empty() && lam.midpoint() - out.back().midpoint() < cluster)
      continue;
    out.push_back(std::move(lam));
  }
  return out;
}

}  // namespace

QuadField make_field(const mpz_class& D, long prec) {
  if (D < 2) throw Error("radicand must be at least 2");
  if (prec < 16 || prec > (1 << 20)) throw Error("precision out of range");
  for (mpz_class f = 2; f <= 65536 && f * f <= D; ++f)
    if (D % (f * f) == 0) throw Error("radicand must be squarefree");

  QuadField F;
  F.D = D;
  F.delta = (D % 4 == 1) ? D : mpz_class(4 * D);
  mpz_sqrt(F.sqrt_floor.get_mpz_t(), F.delta.get_mpz_t());
  if (F.sqrt_floor * F.sqrt_floor == F.delta)
    throw Error("discriminant is a perfect square");
  F.prec = prec;

  const double ln_delta = std::log(mpz_get_d(F.delta.get_mpz_t()));
  const double w = std::max(0.25 * ln_delta * (1 + 1e-9) + 1e-9, 1.0);
  F.window = mpq_class(mpz_class(std::ceil(w * 4096.0)), mpz_class(4096));
  F.window.canonicalize();
  return F;
}

bool is_reduced(const QuadField& F, const mpz_class& Q, const mpz_class& P) {
  // (P + sqrt(delta)) / (2Q) > 1 and its conjugate lies in (-1, 0):
  // both sides of |sqrt(delta) - 2Q| < P < sqrt(delta), in integer form.
  return Q > 0 && P > 0 && P <= F.sqrt_floor &&
         P + 2 * Q >= F.sqrt_floor + 1 && 2 * Q - P <= F.sqrt_floor;
}

ReducedIdeal unit_ideal(const QuadField& F) {
  mpz_class P = F.sqrt_floor;
  if (mpz_odd_p(P.get_mpz_t()) != mpz_odd_p(F.delta.get_mpz_t())) --P;
  return {1, P, Scalar::zero_approx(F.prec)};
}

Scalar log_generator(const QuadField& F, const mpz_class& P,
                     const mpz_class& Q) {
  return log_surd_ratio(P, 1, mpz_class(2 * Q), F.delta, F.prec);
}

ReducedIdeal rho_step(const QuadField& F, const ReducedIdeal& I,
                      OracleWork* work) {
  if (!is_reduced(F, I.Q, I.P)) throw Error("rho needs a reduced ideal");
  bump_baby(work);
  mpz_class num = I.P + F.sqrt_floor, den = 2 * I.Q, q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  mpz_class P2 = 2 * q * I.Q - I.P;
  mpz_class rem = F.delta - P2 * P2, den4 = 4 * I.Q;
  if (rem % den4 != 0) throw Error("walk step broke the ideal invariant");
  mpz_class Q2 = rem / den4;
  if (Q2 <= 0) throw Error("walk step left the reduced cycle");
  return {Q2, P2, I.distance + log_generator(F, P2, I.Q)};
}

ReducedIdeal rho_inverse(const QuadField& F, const ReducedIdeal& I,
                         OracleWork* work) {
  if (!is_reduced(F, I.Q, I.P)) throw Error("rho needs a reduced ideal");
  bump_baby(work);
  mpz_class rem = F.delta - I.P * I.P, den4 = 4 * I.Q;
  if (rem % den4 != 0) throw Error("walk step broke the ideal invariant");
  mpz_class Qp = rem / den4;
  if (Qp <= 0) throw Error("walk step left the reduced cycle");
  mpz_class Pp = mod_into(-I.P, mpz_class(2 * Qp), F.sqrt_floor);
  return {Qp, Pp, I.distance - log_generator(F, I.P, Qp)};
}

ReducedIdeal giant_step(const QuadField& F, const ReducedIdeal& I,
                        const ReducedIdeal& J, OracleWork* work) {
  bump_giant(work);
  const mpz_class& delta = F.delta;
  // Z-basis of the product module, written (coefficient of sqrt(delta),
  // integer part) so the HNF comes out [(d, d*P), (0, 2*d*Q)].
  std::vector<std::vector<mpz_class>> M{
      {mpz_class(0), mpz_class(2 * I.Q * J.Q)},
      {I.Q, mpz_class(I.Q * J.P)},
      {J.Q, mpz_class(J.Q * I.P)},
      {mpz_class((I.P + J.P) / 2), mpz_class((I.P * J.P + delta) / 2)},
  };
  auto H = row_hnf(std::move(M));
  const mpz_class d = H[0][0], m = H[0][1], L = H[1][1];
  if (d <= 0 || L % (2 * d) != 0 || m % d != 0)
    throw Error("ideal composition failed");
  mpz_class Q = L / (2 * d);
  mpz_class P = m / d;
  {
    mpz_class rem = P * P - delta, den4 = 4 * Q;
    if (rem % den4 != 0) throw Error("ideal composition failed");
  }

  Scalar dist = I.distance + J.distance;
  if (d != 1) dist -= log_surd_ratio(d, 0, 1, delta, F.prec);

  // Normalize P (free), then walk to a reduced ideal.
  auto norm_hi = [&](const mpz_class& q) {
    return q <= F.sqrt_floor ? F.sqrt_floor : q;
  };
  P = mod_into(P, mpz_class(2 * Q), norm_hi(Q));
  std::size_t budget = 64 + 4 * mpz_sizeinbase(Q.get_mpz_t(), 2);
  while (!is_reduced(F, Q, P)) {
    if (budget-- == 0) throw Error("ideal reduction stalled");
    bump_baby(work);
    mpz_class P2 = mod_into(mpz_class(-P), mpz_class(2 * Q), norm_hi(Q));
    mpz_class rem = delta - P2 * P2, den4 = 4 * Q;
    if (rem % den4 != 0) throw Error("ideal reduction broke the invariant");
    mpz_class Q2 = abs(mpz_class(rem / den4));
    if (Q2 == 0) throw Error("discriminant is a perfect square");
    dist += log_surd_ratio(P2, 1, mpz_class(2 * Q), delta, F.prec);
    P = P2;
    Q = Q2;
  }
  return {Q, P, dist};
}

ReducedIdeal target_distance(const QuadField& F, const Scalar& x,
                             OracleWork* work) {
  const double xd = x.to_double();
  if (std::abs(xd) <= 8 * window_d(F)) {
    ReducedIdeal I = unit_ideal(F);
    adjust_to(F, I, x, work);
    return I;
  }
  ReducedIdeal H =
      target_distance(F, x * Scalar::rational(mpq_class(1, 2)), work);
  ReducedIdeal I = giant_step(F, H, H, work);
  adjust_to(F, I, x, work);
  return I;
}

bool contains(const QuadField& F, const Scalar& t_in, OracleWork* work) {
  const Scalar t = t_in.abs();
  const Scalar eps = Scalar::rational(membership_eps(F.prec));
  {
    auto cmp = t.compare(eps);
    if (cmp && *cmp <= 0) return true;  // |t| <= eps: the zero multiple
    if (!cmp) throw PrecisionExhausted("membership margin ambiguous");
  }

  ReducedIdeal I = target_distance(F, t, work);
  const Scalar w = window_scalar(F);
  const Scalar lo = t - w, hi = t + w;
  const ReducedIdeal unit = unit_ideal(F);

  std::size_t budget = kWalkBudget;
  while (!I.distance.certainly_less(lo)) {
    if (budget-- == 0) throw Error("distance walk stalled");
    I = rho_inverse(F, I, work);
  }
  while (!I.distance.certainly_greater(hi)) {
    if (budget-- == 0) throw Error("distance walk stalled");
    if (I.Q == unit.Q && I.P == unit.P) {
      Scalar gap = (I.distance - t).abs();
      auto cmp = gap.compare(eps);
      if (!cmp) throw PrecisionExhausted("membership margin ambiguous");
      if (*cmp <= 0) return true;
    }
    I = rho_step(F, I, work);
  }
  return false;
}

BabyStock build_baby_stock(const QuadField& F, double lo, double hi,
                           unsigned long long cap, OracleWork* work) {
  if (!(lo <= 0 && hi >= 0)) throw Error("stock range must contain 0");
  BabyStock st;
  auto insert = [&](const ReducedIdeal& I) {
    st.table[{I.Q, I.P}].push_back(I.distance);
    ++st.entries;
    if (cap && st.entries > cap)
      throw MemoryCapExceeded("baby stock exceeds the memory cap");
  };
  st.front = st.back = unit_ideal(F);
  insert(st.back);
  const Scalar slo = Scalar::rational(mpq_class(lo));
  const Scalar shi = Scalar::rational(mpq_class(hi));
  std::size_t budget = kWalkBudget;
  while (!st.back.distance.certainly_greater(shi)) {
    if (budget-- == 0) throw Error("distance walk stalled");
    st.back = rho_step(F, st.back, work);
    insert(st.back);
  }
  while (!st.front.distance.certainly_less(slo)) {
    if (budget-- == 0) throw Error("distance walk stalled");
    st.front = rho_inverse(F, st.front, work);
    insert(st.front);
  }
  st.lo = lo;
  st.hi = hi;
  if (work) work->max_stock = std::max<unsigned long long>(
      work->max_stock, st.entries);
  return st;
}

std::vector<Scalar> search(const QuadField& F, const Scalar& limit,
                           unsigned long long memory_cap, OracleWork* work) {
  if (!limit.certainly_positive()) throw Error("search limit must be positive");
  const double wd = window_d(F);
  const double limit_d = std::max(limit.to_double(), 1e-12);
  double len = std::min(
      limit_d, std::max(2 * wd, std::sqrt(limit_d * std::max(wd, 1.0))));
  for (;;) {
    try {
      return search_cells(F, limit, limit_d, len, memory_cap, work);
    } catch (const MemoryCapExceeded&) {
      if (len <= 2 * wd + 1e-9) throw;
      len = std::max(2 * wd, len / 2);
    }
  }
}

Scalar regulator_cf(const QuadField& F) {
  if (F.delta >= mpz_class("10000000000"))
    throw OracleTooLarge("brute-force regulator limited to small fields");
  const mpz_class& delta = F.delta;
  const mpz_class& s = F.sqrt_floor;

  auto advance = [&](mpz_class& P, mpz_class& Q) {
    mpz_class num = P + s, a;
    mpz_fdiv_q(a.get_mpz_t(), num.get_mpz_t(), Q.get_mpz_t());
    mpz_class Pn = a * Q - P;
    mpz_class rem = delta - Pn * Pn;
    if (rem % Q != 0) throw Error("continued fraction broke the invariant");
    P = Pn;
    Q = rem / Q;
  };

  // alpha_0 = (P0 + sqrt(delta))/2; alpha_1 onward is purely periodic.
  mpz_class P = delta % 2, Q = 2;
  advance(P, Q);
  const mpz_class P1 = P, Q1 = Q;

  // fundamental unit = prod alpha_i over one period, kept exact as
  // (A + B sqrt(delta)) / C
  mpz_class A = 1, B = 0, C = 1;
  unsigned long period = 0;
  do {
    mpz_class A2 = A * P + B * delta;
    mpz_class B2 = A + B * P;
    mpz_class C2 = C * Q;
    mpz_class g, g2;
    mpz_gcd(g.get_mpz_t(), A2.get_mpz_t(), B2.get_mpz_t());
    mpz_gcd(g2.get_mpz_t(), g.get_mpz_t(), C2.get_mpz_t());
    if (g2 > 1) {
      A2 /= g2;
      B2 /= g2;
      C2 /= g2;
    }
    A = A2;
    B = B2;
    C = C2;
    advance(P, Q);
    if (++period > 100000000ul)
      throw OracleTooLarge("continued-fraction period too long");
  } while (!(P == P1 && Q == Q1));

  if (abs(A * A - B * B * delta) != C * C)
    throw Error("unit accumulation lost exactness");
  return log_surd_ratio(A, B, C, delta, F.prec);
}

QuadOracle::QuadOracle(QuadField F, unsigned long long memory_cap)
    : field_(std::move(F)), cap_(memory_cap) {}

bool QuadOracle::contains(const LogVector& v) {
  if (v.size() != 1)
    throw DimensionMismatch("quad oracle answers rank-1 queries");
  return latmax::contains(field_, v[0], &work_);
}

void QuadOracle::ensure_stock(double cell_len) {
  const double wd = window_d(field_);
  double lo = -(cell_len + wd + 1), hi = wd + 1;
  if (stock_ready_ && stock_.lo <= lo && stock_.hi >= hi) return;
  if (stock_ready_) {
    lo = std::min(lo, stock_.lo);
    hi = std::max(hi, stock_.hi);
  }
  stock_ = build_baby_stock(field_, lo, hi, cap_, &work_);
  stock_ready_ = true;
}

void QuadOracle::ensure_anchor(const Scalar& a) {
  const double wd = window_d(field_);
  if (anchor_) {
    const double gap = a.to_double() - anchor_->distance.to_double();
    if (std::abs(gap) > 24 * (wd + 1)) {
      if (gap > 0 && gap < 1e15) {
        if (!jumper_ || std::abs(jumper_len_ - gap) > wd) {
          jumper_ =
              target_distance(field_, Scalar::rational(mpq_class(gap)),
                              &work_);
          jumper_len_ = gap;
        }
        anchor_ = giant_step(field_, *anchor_, *jumper_, &work_);
      } else {
        anchor_.reset();
      }
    }
  }
  if (!anchor_) anchor_ = target_distance(field_, a, &work_);
  adjust_to(field_, *anchor_, a, &work_);
}

std::vector<LogVector> QuadOracle::search(const Parallelepiped& box) {
  if (box.origin.size() != 1 || box.generators.size() != 1 ||
      box.generators[0].size() != 1 || box.extents.size() != 1)
    throw DimensionMismatch("quad oracle searches rank-1 regions");
  const Scalar& g = box.generators[0][0];
  Scalar a = box.origin[0] + Scalar::rational(box.extents[0].lo) * g;
  Scalar b = box.origin[0] + Scalar::rational(box.extents[0].hi) * g;
  if (b.certainly_less(a)) std::swap(a, b);

  ensure_stock(std::max((b - a).to_double(), 0.0));
  ensure_anchor(a);

  const Scalar eps = Scalar::rational(membership_eps(field_.prec));
  std::vector<LogVector> out;
  for (Scalar& lam : collisions(stock_, *anchor_, a, b, eps))
    out.push_back({std::move(lam)});
  return out;
}

CertifyResult certify_run(const QuadField& F, const Scalar& S,
                          std::optional<TuningParams> params) {
  QuadField field = F;
  Scalar s = S;
  for (int attempt = 0;; ++attempt) {
    try {
      QuadOracle oracle(field, params ? params->memory_cap : 0);
      if (!latmax::contains(field, s))
        throw NotAMultiple("input is not a multiple of the regulator");
      LatticeBasis basis({LogVector{s}});
      MaximizeResult run = maximize(basis, oracle, params);
      CertifyResult out;
      out.regulator = run.basis[0][0].abs();
      out.index = run.stats.index_found;
      out.stats = std::move(run.stats);
      out.params = std::move(run.params);
      out.precision_used = field.prec;
      return out;
    } catch (const PrecisionExhausted&) {
      if (attempt >= 3) throw;
      field = make_field(field.D, field.prec * 2);
      if (!s.is_exact()) s = s.to_approx(field.prec);
    }
  }
}

Scalar certify(const QuadField& F, const Scalar& S,
               std::optional<TuningParams> params) {
  return certify_run(F, S, std::move(params)).regulator;
}

}  // namespace latmax
