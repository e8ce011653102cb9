#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "types.hpp"

namespace lsl
{
//! Exponent vector of a monomial x^a = x_0^a_0 x_1^a_1 x_2^a_2
using MultiIndex = std::array<int, kMaxDim>;

inline int total_degree(MultiIndex const& a)
{
    return a[0] + a[1] + a[2];
}

//! All multi-indices in k variables with total degree <= d, graded order.
std::vector<MultiIndex> monomials(int k, int d);

//! binomial(n, r) as a double; 0 outside 0 <= r <= n.
double binomial(int n, int r);

//---------------------------------------------------------------------------//
/*!
 * Real polynomial in k variables stored as a sparse coefficient table.
 *
 * Evaluated on Z^k (GroupElement) or R^k (Point). Zero coefficients are never
 * stored, so the empty table is the zero polynomial.
 */
class LatticePolynomial
{
  public:
    using Table = std::map<MultiIndex, double>;

    explicit LatticePolynomial(int k = 1);
    LatticePolynomial(int k, Table coefficients);

    static LatticePolynomial constant(int k, double c);
    static LatticePolynomial monomial(int k, MultiIndex a, double c = 1);

    int k() const { return k_; }
    Table const& coefficients() const { return coef_; }
    double coefficient(MultiIndex const& a) const;
    //! Highest total degree with a nonzero coefficient; -1 for zero
    int degree() const;
    bool is_zero() const { return coef_.empty(); }
    //! Sum of |coefficients|
    double l1() const;

    double operator()(Point const& x) const;
    double operator()(GroupElement const& g) const;

    //! x -> p(x + g), expanded exactly
    LatticePolynomial shifted(GroupElement const& g) const;
    //! Symbolic Laplacian sum_i d^2/dx_i^2
    LatticePolynomial laplacian() const;
    //! Drop coefficients with |c| <= tol * max|c|
    LatticePolynomial cleaned(double tol) const;

    LatticePolynomial& operator+=(LatticePolynomial const& o);
    LatticePolynomial& operator-=(LatticePolynomial const& o);
    LatticePolynomial& operator*=(double s);

    std::string describe() const;

  private:
    int k_;
    Table coef_;

    void add(MultiIndex const& a, double c);
};

LatticePolynomial operator+(LatticePolynomial a, LatticePolynomial const& b);
LatticePolynomial operator-(LatticePolynomial a, LatticePolynomial const& b);
LatticePolynomial operator*(double s, LatticePolynomial p);

/*!
 * Parse "x^2 - y^2", "x*y", "3*x*y*z - 0.5", ... with variables x, y, z.
 *
 * Terms are products of a numeric factor and powers of variables joined by
 * '*'; '+' and '-' separate terms. Throws DomainError on anything else.
 */
LatticePolynomial parse_polynomial(int k, std::string const& text);

}  // namespace lsl
