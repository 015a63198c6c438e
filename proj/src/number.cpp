#include "bilab/number.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bilab {

namespace {

using i128 = __int128;

constexpr i128 kMax = std::numeric_limits<std::int64_t>::max();

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// [sign] digits [. digits] [e|E [sign] digits], exact when it fits in int64
std::optional<Rational> parse_decimal(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  std::string_view mantissa = s;
  long exponent = 0;
  if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = s.substr(0, e);
    const auto exp_text = s.substr(e + 1);
    const auto parsed = parse_int(exp_text);
    if (!parsed || std::abs(*parsed) > 18) return std::nullopt;
    exponent = static_cast<long>(*parsed);
  }
  std::string digits;
  if (const auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    const auto int_part = mantissa.substr(0, dot);
    const auto frac_part = mantissa.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) return std::nullopt;
    if (!int_part.empty() && !all_digits(int_part)) return std::nullopt;
    if (!frac_part.empty() && !all_digits(frac_part)) return std::nullopt;
    digits = std::string(int_part) + std::string(frac_part);
    exponent -= static_cast<long>(frac_part.size());
  } else {
    if (!all_digits(mantissa)) return std::nullopt;
    digits = std::string(mantissa);
  }
  const auto first_nonzero = digits.find_first_not_of('0');
  digits = first_nonzero == std::string::npos ? "0" : digits.substr(first_nonzero);
  if (digits.size() > 18) return std::nullopt;
  i128 num = std::stoll(digits);
  i128 den = 1;
  for (long i = 0; i < exponent; ++i) num *= 10;
  for (long i = 0; i < -exponent; ++i) den *= 10;
  if (negative) num = -num;
  return normalized(num, den);
}

} // namespace

std::optional<Rational> normalized(i128 num, i128 den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num > kMax || num < -kMax || den > kMax) return std::nullopt;
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den), Rational::Raw{});
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  const auto r = normalized(num, den);
  if (!r) throw std::overflow_error("Rational: value out of range");
  num_ = r->num_;
  den_ = r->den_;
}

std::optional<Rational> Rational::add(const Rational& a, const Rational& b) {
  return normalized(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
}

std::optional<Rational> Rational::mul(const Rational& a, const Rational& b) {
  return normalized(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
}

std::optional<Rational> Rational::div(const Rational& a, const Rational& b) {
  if (b.num_ == 0) return std::nullopt;
  return normalized(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
}

int Rational::compare(const Rational& a, const Rational& b) {
  const i128 lhs = i128(a.num_) * b.den_;
  const i128 rhs = i128(b.num_) * a.den_;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

Scalar Scalar::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty number");

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto n = parse_int(text.substr(0, slash));
    const auto d = parse_int(text.substr(slash + 1));
    if (!n || !d) throw std::invalid_argument("malformed fraction '" + std::string(text) + "'");
    if (*d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return Scalar(Rational(*n, *d));
  }
  if (const auto r = parse_decimal(text)) return Scalar(*r);

  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw std::invalid_argument("malformed number '" + std::string(text) + "'");
  return Scalar(v);
}

Scalar Scalar::from_decimal_double(double v) {
  if (!std::isfinite(v)) return Scalar(v);
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return Scalar(v);
  const std::string_view text(buf.data(), static_cast<std::size_t>(ptr - buf.data()));
  if (const auto r = parse_decimal(text)) return Scalar(*r);
  return Scalar(v);
}

std::string Scalar::str() const {
  if (exact_) {
    if (exact_->den() == 1) return std::to_string(exact_->num());
    return std::to_string(exact_->num()) + "/" + std::to_string(exact_->den());
  }
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value_);
  return std::string(buf.data(), ptr);
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_)
    if (auto r = Rational::add(*a.exact_, *b.exact_)) return Scalar(*r);
  return Scalar(a.value_ + b.value_);
}

Scalar operator-(const Scalar& a) {
  if (a.exact_) return Scalar(Rational(-a.exact_->num(), a.exact_->den()));
  return Scalar(-a.value_);
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_)
    if (auto r = Rational::mul(*a.exact_, *b.exact_)) return Scalar(*r);
  return Scalar(a.value_ * b.value_);
}

Scalar operator/(const Scalar& a, const Scalar& b) {
  if (b.exact_ && b.exact_->num() == 0) throw std::domain_error("division by exact zero");
  if (a.exact_ && b.exact_)
    if (auto r = Rational::div(*a.exact_, *b.exact_)) return Scalar(*r);
  return Scalar(a.value_ / b.value_);
}

int compare(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_) return Rational::compare(*a.exact_, *b.exact_);
  const double diff = a.value_ - b.value_;
  if (std::abs(diff) <= kComparisonTolerance) return 0;
  return diff < 0 ? -1 : 1;
}

Extended::Extended(double v) {
  if (std::isinf(v) && v > 0) {
    infinite_ = true;
  } else {
    value_ = Scalar(v);
  }
}

const Scalar& Extended::finite() const {
  if (infinite_) throw std::logic_error("Extended: value is +infinity");
  return value_;
}

double Extended::to_double() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_.value();
}

std::string Extended::str() const { return infinite_ ? "inf" : value_.str(); }

int compare(const Extended& a, const Extended& b) {
  if (a.infinite_ || b.infinite_) return static_cast<int>(a.infinite_) - static_cast<int>(b.infinite_);
  return compare(a.value_, b.value_);
}

Extended bound_over(const Scalar& c, const Scalar& d) {
  if (d <= Scalar(0)) return Extended::infinity();
  return Extended(c / d);
}

} // namespace bilab
