#include "latmax/scalar.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <utility>

#include "latmax/errors.hpp"

namespace latmax {
namespace {

mpz_class pow2(long k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, static_cast<unsigned long>(k));
  return r;
}

mpz_class floor_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

mpz_class ceil_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

// Promote both operands to approx mode at a common precision.
std::pair<Scalar, Scalar> align(const Scalar& a, const Scalar& b) {
  long ka = a.is_exact() ? 0 : a.precision();
  long kb = b.is_exact() ? 0 : b.precision();
  long k = std::max(ka, kb);
  return {a.to_approx(k), b.to_approx(k)};
}

}  // namespace

mpz_class round_div(const mpz_class& num, const mpz_class& den) {
  return floor_div(2 * num + den, 2 * den);
}

Scalar Scalar::rational(const mpq_class& q) {
  Scalar s;
  s.mode_ = Mode::exact;
  s.rat_ = q;
  s.rat_.canonicalize();
  return s;
}

Scalar Scalar::fixed_point(mpz_class mant, mpz_class err, long prec) {
  if (prec <= 0 || err < 0) throw Error("invalid fixed-point parameters");
  Scalar s;
  s.mode_ = Mode::approx;
  s.mant_ = std::move(mant);
  s.err_ = std::move(err);
  s.prec_ = prec;
  return s;
}

const mpq_class& Scalar::rat() const {
  if (mode_ != Mode::exact) throw Error("rat() on approx scalar");
  return rat_;
}

const mpz_class& Scalar::mantissa() const {
  if (mode_ != Mode::approx) throw Error("mantissa() on exact scalar");
  return mant_;
}

const mpz_class& Scalar::error_bound() const {
  if (mode_ != Mode::approx) throw Error("error_bound() on exact scalar");
  return err_;
}

mpq_class Scalar::lower() const {
  if (mode_ == Mode::exact) return rat_;
  mpq_class r(mant_ - err_, pow2(prec_));
  r.canonicalize();
  return r;
}

mpq_class Scalar::upper() const {
  if (mode_ == Mode::exact) return rat_;
  mpq_class r(mant_ + err_, pow2(prec_));
  r.canonicalize();
  return r;
}

mpq_class Scalar::midpoint() const {
  if (mode_ == Mode::exact) return rat_;
  mpq_class r(mant_, pow2(prec_));
  r.canonicalize();
  return r;
}

double Scalar::to_double() const { return midpoint().get_d(); }

Scalar Scalar::to_approx(long prec) const {
  if (prec <= 0) prec = kDefaultPrecision;
  if (mode_ == Mode::exact) {
    mpz_class scaled = rat_.get_num() * pow2(prec);
    mpz_class m = round_div(scaled, rat_.get_den());
    mpz_class e = (m * rat_.get_den() == scaled) ? 0 : 1;
    return fixed_point(m, e, prec);
  }
  if (prec == prec_) return *this;
  if (prec > prec_) {
    mpz_class f = pow2(prec - prec_);
    return fixed_point(mant_ * f, err_ * f, prec);
  }
  mpz_class f = pow2(prec_ - prec);
  return fixed_point(round_div(mant_, f), ceil_div(err_, f) + 1, prec);
}

Scalar Scalar::operator-() const {
  if (mode_ == Mode::exact) return rational(-rat_);
  return fixed_point(-mant_, err_, prec_);
}

Scalar Scalar::abs() const {
  if (mode_ == Mode::exact) return rational(::abs(rat_));
  mpz_class lo = mant_ - err_, hi = mant_ + err_;
  if (lo >= 0) return *this;
  if (hi <= 0) return -*this;
  mpz_class top = std::max(mpz_class(-lo), hi);
  mpz_class m = floor_div(top, 2);
  return fixed_point(m, top - m, prec_);
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  if (a.is_exact() && b.is_exact()) return Scalar::rational(a.rat_ + b.rat_);
  auto [x, y] = align(a, b);
  return Scalar::fixed_point(x.mant_ + y.mant_, x.err_ + y.err_, x.prec_);
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Scalar& b) {
  if (a.is_exact() && b.is_exact()) return Scalar::rational(a.rat_ * b.rat_);
  // An exact factor scales the enclosure without inflating it.
  if (a.is_exact() || b.is_exact()) {
    const Scalar& ex = a.is_exact() ? a : b;
    const Scalar& ap = a.is_exact() ? b : a;
    const mpz_class& p = ex.rat_.get_num();
    const mpz_class& q = ex.rat_.get_den();
    mpz_class m = round_div(ap.mant_ * p, q);
    mpz_class e = ceil_div(ap.err_ * ::abs(p), q) + 1;
    if (ap.err_ == 0 && m * q == ap.mant_ * p) e = 0;
    return Scalar::fixed_point(m, e, ap.prec_);
  }
  auto [x, y] = align(a, b);
  mpz_class scale = pow2(x.prec_);
  mpz_class m = round_div(x.mant_ * y.mant_, scale);
  mpz_class spread =
      ::abs(x.mant_) * y.err_ + ::abs(y.mant_) * x.err_ + x.err_ * y.err_;
  return Scalar::fixed_point(m, ceil_div(spread, scale) + 1, x.prec_);
}

Scalar operator/(const Scalar& a, const Scalar& b) {
  if (b.is_exact()) {
    if (sgn(b.rat_) == 0) throw DegenerateBasis("division by zero");
    mpq_class inv(b.rat_.get_den(), b.rat_.get_num());
    inv.canonicalize();
    return a * Scalar::rational(inv);
  }
  auto [x, y] = align(a, b);
  mpz_class dlo = y.mant_ - y.err_, dhi = y.mant_ + y.err_;
  if (dlo <= 0 && dhi >= 0) {
    if (dlo == 0 && dhi == 0) throw DegenerateBasis("division by zero");
    throw PrecisionExhausted("divisor enclosure straddles zero");
  }
  mpz_class nlo = (x.mant_ - x.err_) * pow2(x.prec_);
  mpz_class nhi = (x.mant_ + x.err_) * pow2(x.prec_);
  mpz_class lo, hi;
  bool first = true;
  for (const mpz_class* n : {&nlo, &nhi}) {
    for (const mpz_class* d : {&dlo, &dhi}) {
      mpz_class fl = floor_div(*n, *d), cl = ceil_div(*n, *d);
      if (first || fl < lo) lo = fl;
      if (first || cl > hi) hi = cl;
      first = false;
    }
  }
  mpz_class m = floor_div(lo + hi + 1, 2);
  return Scalar::fixed_point(m, ceil_div(hi - lo, 2) + 1, x.prec_);
}

std::optional<int> Scalar::compare(const Scalar& o) const {
  mpq_class alo = lower(), ahi = upper(), blo = o.lower(), bhi = o.upper();
  if (ahi < blo) return -1;
  if (alo > bhi) return 1;
  if (alo == ahi && blo == bhi && alo == blo) return 0;
  return std::nullopt;
}

std::string decimal_string(const mpq_class& v, int digits) {
  if (digits < 0) digits = 0;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  mpz_class n = round_div(v.get_num() * scale, v.get_den());
  bool neg = n < 0;
  if (neg) n = -n;
  std::string s = n.get_str();
  if (digits == 0) return (neg ? "-" : "") + s;
  if (s.size() <= static_cast<size_t>(digits))
    s.insert(0, static_cast<size_t>(digits) + 1 - s.size(), '0');
  s.insert(s.size() - static_cast<size_t>(digits), ".");
  return (neg ? "-" : "") + s;
}

std::string Scalar::decimal(int digits) const {
  return decimal_string(midpoint(), digits);
}

std::string Scalar::str() const {
  if (mode_ == Mode::exact) {
    if (rat_.get_den() == 1) return rat_.get_num().get_str();
    return rat_.get_num().get_str() + "/" + rat_.get_den().get_str();
  }
  long err_bits =
      err_ == 0 ? 0
                : static_cast<long>(mpz_sizeinbase(err_.get_mpz_t(), 2));
  long good_bits = prec_ - err_bits;
  int digits = static_cast<int>(
      std::max(1.0, std::min(48.0, static_cast<double>(good_bits) * 0.30103)));
  std::string out = decimal(digits);
  mpq_class emag(err_ == 0 ? mpz_class(1) : err_, pow2(prec_));
  emag.canonicalize();
  char buf[32];
  double e = emag.get_d();
  std::snprintf(buf, sizeof buf, "%.2e", e > 0 ? e : 1e-300);
  out += "(±";
  out += buf;
  out += ")";
  return out;
}

Scalar Scalar::parse(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw ParseError("empty scalar literal");
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      mpz_class num(s.substr(0, slash), 10), den(s.substr(slash + 1), 10);
      if (den == 0) throw ParseError("zero denominator: " + text);
      mpq_class q(num, den);
      q.canonicalize();
      return rational(q);
    }
    size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') neg = (s[i++] == '-');
    std::string digits;
    long frac_len = 0, exp10 = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
      digits.push_back(s[i++]);
    if (i < s.size() && s[i] == '.') {
      ++i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        digits.push_back(s[i++]);
        ++frac_len;
      }
    }
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
      ++i;
      bool eneg = false;
      if (i < s.size() && (s[i] == '+' || s[i] == '-'))
        eneg = (s[i++] == '-');
      std::string ed;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
        ed.push_back(s[i++]);
      if (ed.empty() || ed.size() > 6) throw ParseError("bad exponent: " + text);
      exp10 = std::stol(ed) * (eneg ? -1 : 1);
    }
    if (i != s.size() || digits.empty())
      throw ParseError("bad scalar literal: " + text);
    mpz_class num(digits, 10);
    if (neg) num = -num;
    long den_pow = frac_len - exp10;
    mpz_class ten_pow;
    mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10,
                  static_cast<unsigned long>(std::abs(den_pow)));
    mpq_class q = den_pow >= 0 ? mpq_class(num, ten_pow)
                               : mpq_class(num * ten_pow, 1);
    q.canonicalize();
    return rational(q);
  } catch (const std::invalid_argument&) {
    throw ParseError("bad scalar literal: " + text);
  }
}

mpq_class simplest_rational_in(const mpq_class& lo, const mpq_class& hi) {
  if (lo > hi) throw Error("simplest_rational_in: empty interval");
  if (sgn(lo) <= 0 && sgn(hi) >= 0) return mpq_class(0);
  if (sgn(hi) < 0) return -simplest_rational_in(-hi, -lo);
  mpz_class c = ceil_div(lo.get_num(), lo.get_den());
  if (mpq_class(c) <= hi) return mpq_class(c);
  mpz_class n = floor_div(lo.get_num(), lo.get_den());
  mpq_class lo2 = mpq_class(1) / (hi - mpq_class(n));
  mpq_class hi2 = mpq_class(1) / (lo - mpq_class(n));
  mpq_class f = simplest_rational_in(lo2, hi2);
  return mpq_class(n) + mpq_class(1) / f;
}

std::optional<mpz_class> integer_within(const Scalar& x, const mpq_class& tol) {
  if (tol < 0) throw Error("negative tolerance");
  if (x.is_exact()) {
    mpz_class z = round_div(x.rat().get_num(), x.rat().get_den());
    mpq_class diff = ::abs(x.rat() - mpq_class(z));
    if (diff <= tol) return z;
    return std::nullopt;
  }
  mpq_class lo = x.lower(), hi = x.upper();
  if (hi - lo > 1 || tol >= mpq_class(1, 2))
    throw PrecisionExhausted("enclosure too wide for integer test");
  const mpq_class wlo = lo - tol, whi = hi + tol;
  mpz_class z0 = floor_div(wlo.get_num(), wlo.get_den());
  mpz_class z1 = ceil_div(whi.get_num(), whi.get_den());
  for (mpz_class z = z0; z <= z1; ++z) {
    mpq_class wl = mpq_class(z) - tol, wh = mpq_class(z) + tol;
    if (wl <= lo && hi <= wh) return z;          // certainly within
    if (wh < lo || hi < wl) continue;            // certainly outside
    throw PrecisionExhausted("integer test undecidable at this precision");
  }
  return std::nullopt;
}

}  // namespace latmax
