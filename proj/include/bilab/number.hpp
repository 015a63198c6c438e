#pragma once

// Exact-where-possible scalars for exponent arithmetic.
//
// Regime boundaries are rational functions of (N, b, q). When b and q are
// entered as decimals or fractions the comparisons below are exact; once a
// value has gone through a floating operation it compares with an absolute
// tolerance of kComparisonTolerance.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bilab {

inline constexpr double kComparisonTolerance = 1e-12;

class Rational {
public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // nullopt on int64 overflow
  static std::optional<Rational> add(const Rational& a, const Rational& b);
  static std::optional<Rational> mul(const Rational& a, const Rational& b);
  static std::optional<Rational> div(const Rational& a, const Rational& b);
  static int compare(const Rational& a, const Rational& b);

private:
  friend std::optional<Rational> normalized(__int128 num, __int128 den);
  struct Raw {};
  constexpr Rational(std::int64_t num, std::int64_t den, Raw) : num_(num), den_(den) {}

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Reduced form of num/den; nullopt if den = 0 or the result leaves int64.
std::optional<Rational> normalized(__int128 num, __int128 den);

/// A real number that stays rational as long as every operation on it could
/// be carried out exactly in 64-bit numerators and denominators.
class Scalar {
public:
  Scalar() : Scalar(std::int64_t{0}) {}
  Scalar(int v) : Scalar(static_cast<std::int64_t>(v)) {}
  Scalar(std::int64_t v) : exact_(Rational(v, 1)), value_(static_cast<double>(v)) {}
  Scalar(double v) : value_(v) {}
  Scalar(const Rational& r) : exact_(r), value_(r.to_double()) {}

  static Scalar ratio(std::int64_t num, std::int64_t den) { return Scalar(Rational(num, den)); }

  /// Accepts "p/q", plain integers and decimals ("0.1", "-2.5e-3"). Decimal
  /// literals become exact rationals when they fit; anything else parses as
  /// a double. Throws std::invalid_argument on malformed text.
  static Scalar parse(std::string_view text);

  /// Recovers the shortest decimal that round-trips to `v` and parses it,
  /// so a JSON 0.1 becomes exactly 1/10.
  static Scalar from_decimal_double(double v);

  bool exact() const { return exact_.has_value(); }
  const std::optional<Rational>& rational() const { return exact_; }
  double value() const { return value_; }

  std::string str() const;

  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend Scalar operator/(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a);

  /// -1, 0, +1. Exact when both sides are rational, otherwise equal within
  /// kComparisonTolerance.
  friend int compare(const Scalar& a, const Scalar& b);

  friend bool operator==(const Scalar& a, const Scalar& b) { return compare(a, b) == 0; }
  friend bool operator<(const Scalar& a, const Scalar& b) { return compare(a, b) < 0; }
  friend bool operator<=(const Scalar& a, const Scalar& b) { return compare(a, b) <= 0; }
  friend bool operator>(const Scalar& a, const Scalar& b) { return compare(a, b) > 0; }
  friend bool operator>=(const Scalar& a, const Scalar& b) { return compare(a, b) >= 0; }

private:
  std::optional<Rational> exact_;
  double value_ = 0.0;
};

/// Real number or +infinity. Upper bounds of the form c/(N-k) with N <= k
/// are represented as +infinity.
class Extended {
public:
  Extended() = default;
  Extended(const Scalar& v) : value_(v) {}
  Extended(int v) : value_(v) {}
  Extended(double v);

  static Extended infinity() {
    Extended e;
    e.infinite_ = true;
    return e;
  }

  bool is_infinite() const { return infinite_; }
  /// Throws std::logic_error when infinite.
  const Scalar& finite() const;
  double to_double() const;
  std::string str() const;

  friend int compare(const Extended& a, const Extended& b);
  friend bool operator==(const Extended& a, const Extended& b) { return compare(a, b) == 0; }
  friend bool operator<(const Extended& a, const Extended& b) { return compare(a, b) < 0; }
  friend bool operator<=(const Extended& a, const Extended& b) { return compare(a, b) <= 0; }
  friend bool operator>(const Extended& a, const Extended& b) { return compare(a, b) > 0; }
  friend bool operator>=(const Extended& a, const Extended& b) { return compare(a, b) >= 0; }

private:
  Scalar value_;
  bool infinite_ = false;
};

/// c / d with the convention that a non-positive denominator yields +infinity.
Extended bound_over(const Scalar& c, const Scalar& d);

} // namespace bilab
