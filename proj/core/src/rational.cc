/*
 * Copyright 2026 The spirekit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spirekit/rational.h"

#include <cmath>
#include <string>

#include "spirekit/error.h"

namespace spirekit {

namespace mp = boost::multiprecision;

std::string ToString(const Rational& value) {
  const BigInt num = mp::numerator(value);
  const BigInt den = mp::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace {

bool IsDigits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

BigInt ParseInteger(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!IsDigits(s)) {
    throw Error(ErrorCode::kParseError,
                "not a rational number: '" + std::string(whole) + "'");
  }
  BigInt v{std::string(s)};
  return negative ? BigInt(-v) : v;
}

}  // namespace

Rational ParseRational(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const BigInt num = ParseInteger(text.substr(0, slash), text);
    const BigInt den = ParseInteger(text.substr(slash + 1), text);
    if (den == 0) {
      throw Error(ErrorCode::kParseError,
                  "zero denominator in '" + std::string(text) + "'");
    }
    return Rational(num, den);
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    const std::string_view frac_part = text.substr(dot + 1);
    bool negative = false;
    if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+')) {
      negative = int_part.front() == '-';
      int_part.remove_prefix(1);
    }
    if ((!int_part.empty() && !IsDigits(int_part)) ||
        (!frac_part.empty() && !IsDigits(frac_part)) ||
        (int_part.empty() && frac_part.empty())) {
      throw Error(ErrorCode::kParseError,
                  "not a rational number: '" + std::string(text) + "'");
    }
    const BigInt whole = int_part.empty() ? BigInt(0) : BigInt(std::string(int_part));
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
    const BigInt frac = frac_part.empty() ? BigInt(0) : BigInt(std::string(frac_part));
    Rational r(whole * scale + frac, scale);
    return negative ? Rational(-r) : r;
  }
  return Rational(ParseInteger(text, text));
}

double ToDouble(const Rational& value) { return value.convert_to<double>(); }

long double ToLongDouble(const Rational& value) {
  return value.convert_to<long double>();
}

Rational FromDouble(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite value");
  }
  int exponent = 0;
  const double mantissa = std::frexp(value, &exponent);
  // 53-bit mantissa as an integer.
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r(scaled);
  if (exponent >= 0) {
    r *= Rational(BigInt(1) << exponent);
  } else {
    r /= Rational(BigInt(1) << -exponent);
  }
  return r;
}

Rational ApproximateRational(long double value, std::int64_t max_denominator) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite value");
  }
  const bool negative = value < 0;
  long double x = std::fabs(value);
  // Convergents h/k, seeded with h_{-2}/k_{-2} = 0/1 and h_{-1}/k_{-1} = 1/0.
  BigInt h_prev = 0, h = 1, k_prev = 1, k = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const long double a_floor = std::floor(x);
    const BigInt a(static_cast<std::int64_t>(a_floor));
    const BigInt h_next = a * h + h_prev;
    const BigInt k_next = a * k + k_prev;
    if (k_next > max_denominator) break;
    h_prev = h; h = h_next;
    k_prev = k; k = k_next;
    const long double frac = x - a_floor;
    if (frac < 1e-18L) break;
    x = 1.0L / frac;
    if (x > 9.0e18L) break;
  }
  if (k == 0) return Rational(0);
  Rational r(h, k);
  return negative ? Rational(-r) : r;
}

std::optional<Rational> ExactSqrt(const Rational& value) {
  if (value < 0) return std::nullopt;
  const BigInt num = mp::numerator(value);
  const BigInt den = mp::denominator(value);
  const BigInt rn = mp::sqrt(num);
  const BigInt rd = mp::sqrt(den);
  if (rn * rn != num || rd * rd != den) return std::nullopt;
  return Rational(rn, rd);
}

Rational Floor(const Rational& value) {
  const BigInt num = mp::numerator(value);
  const BigInt den = mp::denominator(value);
  BigInt q = num / den;  // truncates toward zero
  if (num < 0 && q * den != num) q -= 1;
  return Rational(q);
}

}  // namespace spirekit
