#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "types.hpp"

namespace lsl
{
//---------------------------------------------------------------------------//
/*!
 * One Fourier mode a cos(2 pi f.x) + b sin(2 pi f.x).
 */
struct TrigTerm
{
    std::array<int, kMaxDim> freq{};
    double cos_coef = 0;
    double sin_coef = 0;
};

//---------------------------------------------------------------------------//
/*!
 * Z^k-periodic trigonometric polynomial with closed-form derivatives.
 */
class TrigPolynomial
{
  public:
    TrigPolynomial() = default;
    TrigPolynomial(double constant, std::vector<TrigTerm> terms);

    double value(Point const& x) const;
    Point gradient(Point const& x) const;
    double laplacian(Point const& x) const;

    double constant() const { return constant_; }
    std::vector<TrigTerm> const& terms() const { return terms_; }

  private:
    double constant_ = 0;
    std::vector<TrigTerm> terms_;
};

//---------------------------------------------------------------------------//
/*!
 * Schrodinger potential obtained by conjugating L with multiplication by phi,
 * plus the residual of the closed-form identity phi L f = S(phi f).
 */
struct PotentialReport
{
    //! V(x) = -laplacian(phi)/phi
    std::function<double(Point const&)> potential;
    std::vector<Point> check_points;
    double max_residual = 0;
};

//---------------------------------------------------------------------------//
/*!
 * R^k covering the torus R^k/Z^k, with Z^k acting by translations.
 *
 * The orbit X = origin + Z^k is identified with Z^k. When phi is present the
 * diffusion generator is L = Delta + Y with drift Y = 2 grad ln(phi), which
 * is symmetric with respect to phi^2 dv.
 *
 * quotient_mask marks axes taken modulo 1 (the cylinder R/Z x R uses bit 0);
 * lattice indices along those axes are always zero and positions are
 * reduced to [-1/2, 1/2).
 */
class LatticeModel
{
  public:
    LatticeModel(int k,
                 std::optional<TrigPolynomial> phi = std::nullopt,
                 Point origin = {},
                 unsigned quotient_mask = 0);

    int k() const { return k_; }
    Point const& origin() const { return origin_; }
    std::optional<TrigPolynomial> const& phi() const { return phi_; }
    //! True unless phi is absent or constant
    bool has_drift() const;
    unsigned quotient_mask() const { return quotient_mask_; }
    bool is_quotient_axis(int i) const { return (quotient_mask_ >> i) & 1u; }

    //! Same geometry with the given axes reduced mod 1.
    LatticeModel quotient(unsigned mask) const;

    Point lattice_point(GroupElement const& g) const;
    GroupElement nearest_lattice_point(Point const& y) const;
    //! y - (origin + g), reduced along quotient axes
    Point displacement(Point const& y, GroupElement const& g) const;
    //! Reduce quotient axes into [-1/2, 1/2) around the origin.
    Point reduce(Point y) const;
    bool dirichlet_contains(GroupElement const& x, Point const& y) const;
    //! Y(y) = 2 grad(phi)/phi, zero without phi
    Point drift(Point const& y) const;
    PotentialReport renormalize() const;

  private:
    int k_;
    std::optional<TrigPolynomial> phi_;
    Point origin_;
    unsigned quotient_mask_;
};

}  // namespace lsl
