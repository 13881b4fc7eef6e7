#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>

namespace latmax {

// Default fractional precision (bits) for fixed-point values.
inline constexpr long kDefaultPrecision = 128;

// Dual-mode scalar.
//
// Exact mode holds an arbitrary-precision rational p/q (q > 0, gcd(p,q) = 1;
// mpq_class keeps it canonical). Approx mode holds a fixed-point value
// m * 2^-k together with an absolute error bound e * 2^-k; every operation
// rounds the bound outward, so the true value always lies in
// [(m-e) * 2^-k, (m+e) * 2^-k].
class Scalar {
 public:
  enum class Mode { exact, approx };

  Scalar() : mode_(Mode::exact), rat_(0) {}

  static Scalar rational(const mpq_class& q);
  static Scalar integer(long v) { return rational(mpq_class(v)); }
  static Scalar integer(const mpz_class& v) { return rational(mpq_class(v)); }
  static Scalar fixed_point(mpz_class mant, mpz_class err,
                            long prec = kDefaultPrecision);
  static Scalar zero_approx(long prec) { return fixed_point(0, 0, prec); }
  // Accepts "p/q", integers, and decimal literals (optional e/E exponent).
  static Scalar parse(const std::string& text);

  Mode mode() const { return mode_; }
  bool is_exact() const { return mode_ == Mode::exact; }
  long precision() const { return prec_; }

  const mpq_class& rat() const;       // exact mode only
  const mpz_class& mantissa() const;  // approx mode only
  const mpz_class& error_bound() const;

  // Certified rational enclosure (exact mode: a point).
  mpq_class lower() const;
  mpq_class upper() const;
  mpq_class midpoint() const;
  double to_double() const;

  Scalar to_approx(long prec) const;

  Scalar operator-() const;
  Scalar abs() const;

  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  // Throws PrecisionExhausted if the divisor interval straddles zero,
  // DegenerateBasis if it is exactly zero.
  friend Scalar operator/(const Scalar& a, const Scalar& b);
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  Scalar& operator/=(const Scalar& o) { return *this = *this / o; }

  // -1/0/+1 when the order is certain, nullopt when the enclosures overlap
  // without being the same point.
  std::optional<int> compare(const Scalar& o) const;
  bool certainly_less(const Scalar& o) const { return compare(o) == -1; }
  bool certainly_greater(const Scalar& o) const { return compare(o) == 1; }
  bool certainly_zero() const { return sgn(lower()) == 0 && sgn(upper()) == 0; }
  bool certainly_nonzero() const {
    return sgn(lower()) > 0 || sgn(upper()) < 0;
  }
  bool certainly_positive() const { return sgn(lower()) > 0; }
  bool certainly_negative() const { return sgn(upper()) < 0; }

  // "p/q" / integer text in exact mode, "decimal(±err)" in approx mode.
  std::string str() const;
  // Decimal rendering of the midpoint with the given fraction digits.
  std::string decimal(int digits) const;

 private:
  Mode mode_;
  mpq_class rat_;              // exact payload
  mpz_class mant_, err_;       // approx payload, scale 2^-prec_
  long prec_ = kDefaultPrecision;
};

// Nearest integer to num/den (den > 0), ties toward +infinity.
mpz_class round_div(const mpz_class& num, const mpz_class& den);

// The rational with the smallest denominator inside [lo, hi] (ties: smallest
// magnitude). Requires lo <= hi.
mpq_class simplest_rational_in(const mpq_class& lo, const mpq_class& hi);

// The unique integer z with |x - z| <= tol, if one certainly exists; nullopt
// if x is certainly farther than tol from every integer. Throws
// PrecisionExhausted when the enclosure straddles the tolerance boundary.
std::optional<mpz_class> integer_within(const Scalar& x, const mpq_class& tol);

// Plain decimal rendering of a rational (round-half-away at the last digit).
std::string decimal_string(const mpq_class& v, int digits);

}  // namespace latmax
