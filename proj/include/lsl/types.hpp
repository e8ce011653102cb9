#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lsl
{
inline constexpr int kMaxDim = 3;
inline constexpr double kPi = 3.14159265358979323846;

//! Point of R^k. Components at index >= k are kept at zero.
using Point = std::array<double, kMaxDim>;

//---------------------------------------------------------------------------//
/*!
 * Element of the translation group Z^k.
 *
 * Acts on points by y -> y + g. Components at index >= k are zero, so the
 * same value type serves k = 1, 2, 3.
 */
struct GroupElement
{
    std::array<std::int64_t, kMaxDim> c{};

    friend auto operator<=>(GroupElement const&, GroupElement const&) = default;

    GroupElement operator-() const { return {{-c[0], -c[1], -c[2]}}; }
    friend GroupElement operator+(GroupElement const& a, GroupElement const& b)
    {
        return {{a.c[0] + b.c[0], a.c[1] + b.c[1], a.c[2] + b.c[2]}};
    }
    friend GroupElement operator-(GroupElement const& a, GroupElement const& b)
    {
        return a + (-b);
    }
};

inline Point to_point(GroupElement const& g)
{
    return {static_cast<double>(g.c[0]),
            static_cast<double>(g.c[1]),
            static_cast<double>(g.c[2])};
}

inline double norm(Point const& p)
{
    return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

//! Euclidean length |g| = d(g x0, x0).
inline double norm(GroupElement const& g)
{
    return norm(to_point(g));
}

inline std::int64_t norm_inf(GroupElement const& g)
{
    std::int64_t m = 0;
    for (auto v : g.c)
        m = std::max(m, v < 0 ? -v : v);
    return m;
}

inline Point operator+(Point const& a, Point const& b)
{
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Point operator-(Point const& a, Point const& b)
{
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Point operator*(double s, Point const& a)
{
    return {s * a[0], s * a[1], s * a[2]};
}
inline double dot(Point const& a, Point const& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

std::string to_string(GroupElement const& g, int k);
std::string to_string(Point const& p, int k);

//---------------------------------------------------------------------------//
// Error types
//---------------------------------------------------------------------------//

//! Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

//! Argument outside a tabulated range.
class RangeError : public std::out_of_range
{
  public:
    using std::out_of_range::out_of_range;
};

//! Monte Carlo run whose quality contract failed (e.g. too much censoring).
class QualityError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Truncated sum whose tail bound is too large relative to its value.
class TruncationError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Two closed-form routes disagree; signals a bug rather than bad input.
class ConsistencyError : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

}  // namespace lsl
