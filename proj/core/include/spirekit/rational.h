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

#ifndef SPIREKIT_RATIONAL_H_
#define SPIREKIT_RATIONAL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace spirekit {

// Exact arbitrary-precision rational used for split counts and plan masses.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// "80", "130/23", "-1/2". Always in lowest terms.
std::string ToString(const Rational& value);

// Accepts integers ("80"), fractions ("520/92") and plain decimals ("0.3",
// "-1.25"). Decimals are converted exactly (0.3 == 3/10).
Rational ParseRational(std::string_view text);

double ToDouble(const Rational& value);
long double ToLongDouble(const Rational& value);

// Exact conversion of a finite double (every double is a dyadic rational).
Rational FromDouble(double value);

// Best rational approximation of `value` with denominator at most
// `max_denominator`, by continued fractions.
Rational ApproximateRational(long double value,
                             std::int64_t max_denominator = 1'000'000'000'000);

// Returns sqrt(value) if it is itself rational (numerator and denominator
// are perfect squares), otherwise nullopt. Requires value >= 0.
std::optional<Rational> ExactSqrt(const Rational& value);

Rational Floor(const Rational& value);

}  // namespace spirekit

#endif  // SPIREKIT_RATIONAL_H_
