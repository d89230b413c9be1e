#pragma once

#include <iosfwd>

#include "ichem/errors.hpp"

namespace ichem {

// Closed real interval [lower, upper]. Endpoint arithmetic is exact
// floating point; there is no outward rounding.
class Interval {
public:
    constexpr Interval() = default;

    // Throws DomainError unless lower <= upper (NaN endpoints are rejected).
    Interval(double lower, double upper);

    // The degenerate interval [value, value].
    static Interval point(double value) { return Interval(value, value); }

    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    double width() const noexcept { return upper_ - lower_; }
    bool is_degenerate() const noexcept { return lower_ == upper_; }
    bool contains(double v) const noexcept { return lower_ <= v && v <= upper_; }

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    double lower_ = 0.0;
    double upper_ = 0.0;
};

Interval add(Interval a, Interval b);

// Endpoint-wise difference [a.lower - b.lower, a.upper - b.upper], with the
// endpoints sorted afterwards when that candidate is inverted. This is not
// the inclusion-isotone difference [a.lower - b.upper, a.upper - b.lower].
Interval subtract(Interval a, Interval b);

// alpha * [l, u] for alpha > 0; throws DomainError otherwise.
Interval scalar_mul(double alpha, Interval a);

// Hull of the four endpoint products.
Interval multiply(Interval a, Interval b);

// Hull of the four endpoint quotients a_i / b_j, i.e. a * [1/b.upper,
// 1/b.lower] without rounding the reciprocals first. Throws DomainError
// when b contains zero.
Interval divide(Interval a, Interval b);

// Geometric interpolation lower^(1-p) * upper^p between the endpoints of a
// positive interval. Continuous and nondecreasing in p; h(0) = lower and
// h(1) = upper exactly.
double interval_value(Interval a, double p);

inline Interval operator+(Interval a, Interval b) { return add(a, b); }
inline Interval operator-(Interval a, Interval b) { return subtract(a, b); }
inline Interval operator*(Interval a, Interval b) { return multiply(a, b); }
inline Interval operator*(double alpha, Interval a) { return scalar_mul(alpha, a); }
inline Interval operator/(Interval a, Interval b) { return divide(a, b); }

std::ostream& operator<<(std::ostream& os, const Interval& a);

} // namespace ichem
