#include "ichem/interval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace ichem {

Interval::Interval(double lower, double upper) : lower_(lower), upper_(upper)
{
    if (!(lower <= upper)) {
        std::ostringstream msg;
        msg << "invalid interval [" << lower << ", " << upper << "]: lower must not exceed upper";
        throw DomainError(msg.str());
    }
}

Interval add(Interval a, Interval b)
{
    return Interval(a.lower() + b.lower(), a.upper() + b.upper());
}

Interval subtract(Interval a, Interval b)
{
    const double lo = a.lower() - b.lower();
    const double hi = a.upper() - b.upper();
    return Interval(std::min(lo, hi), std::max(lo, hi));
}

Interval scalar_mul(double alpha, Interval a)
{
    if (!(alpha > 0.0)) {
        throw DomainError("scalar multiplication requires a positive scalar");
    }
    return Interval(alpha * a.lower(), alpha * a.upper());
}

Interval multiply(Interval a, Interval b)
{
    const double ll = a.lower() * b.lower();
    const double ul = a.upper() * b.lower();
    const double lu = a.lower() * b.upper();
    const double uu = a.upper() * b.upper();
    return Interval(std::min({ll, ul, lu, uu}), std::max({ll, ul, lu, uu}));
}

Interval divide(Interval a, Interval b)
{
    if (b.contains(0.0)) {
        throw DomainError("interval division by an interval containing zero");
    }
    // Hull of the four quotients, i.e. a times the (possibly reversed)
    // reciprocal endpoints. Dividing directly instead of multiplying by
    // 1/b keeps [a, a] / [b, b] == [a / b, a / b] bit for bit.
    const double ll = a.lower() / b.lower();
    const double ul = a.upper() / b.lower();
    const double lu = a.lower() / b.upper();
    const double uu = a.upper() / b.upper();
    return Interval(std::min({ll, ul, lu, uu}), std::max({ll, ul, lu, uu}));
}

double interval_value(Interval a, double p)
{
    if (!(a.lower() > 0.0)) {
        throw DomainError("interval_value requires positive endpoints");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("interval_value requires p in [0, 1]");
    }
    if (p == 0.0) {
        return a.lower();
    }
    if (p == 1.0) {
        return a.upper();
    }
    // exp/log form keeps monotonicity in p; pow(l, 1-p) * pow(u, p) can
    // wobble by an ulp on degenerate intervals.
    const double ll = std::log(a.lower());
    const double lu = std::log(a.upper());
    const double v = std::exp(ll + p * (lu - ll));
    return std::clamp(v, a.lower(), a.upper());
}

std::ostream& operator<<(std::ostream& os, const Interval& a)
{
    return os << '[' << a.lower() << ", " << a.upper() << ']';
}

} // namespace ichem
