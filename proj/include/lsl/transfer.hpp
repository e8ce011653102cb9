#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diffusion.hpp"
#include "growth.hpp"
#include "lattice_model.hpp"
#include "lattice_polynomial.hpp"
#include "ls_core.hpp"

namespace lsl
{
//---------------------------------------------------------------------------//
/*!
 * Function on R^k used to probe harmonicity, with a growth bound.
 *
 * Polynomials carry a symbolic Laplacian check; harmonic() is false for
 * deliberately non-harmonic controls such as x^2.
 */
class HarmonicTestFunction
{
  public:
    static HarmonicTestFunction polynomial(LatticePolynomial p,
                                           std::optional<GrowthFunction> growth
                                           = std::nullopt);
    static HarmonicTestFunction custom(std::string name,
                                       std::function<double(Point const&)> f,
                                       GrowthFunction growth,
                                       bool harmonic);

    double operator()(Point const& x) const { return f_(x); }
    std::string const& name() const { return name_; }
    GrowthFunction const& growth() const { return growth_; }
    bool harmonic() const { return harmonic_; }
    //! Coefficient table, if this is a polynomial
    std::optional<LatticePolynomial> const& polynomial() const { return poly_; }

  private:
    HarmonicTestFunction(std::string name,
                         std::function<double(Point const&)> f,
                         GrowthFunction growth,
                         bool harmonic,
                         std::optional<LatticePolynomial> poly);

    std::string name_;
    std::function<double(Point const&)> f_;
    GrowthFunction growth_;
    bool harmonic_;
    std::optional<LatticePolynomial> poly_;
};

struct Residual
{
    double residual = 0;
    double sigma = 0;
    //! |residual| <= multiplier * sigma (exact zero counts as a pass)
    bool within(double multiplier) const
    {
        return residual == 0 || std::abs(residual) <= multiplier * sigma;
    }
};

/*!
 * sum_x mu_y(x) (f(x) - f(y)) from an estimate of mu_y at a lattice point,
 * with the Monte Carlo standard error.
 */
Residual restriction_residual(LatticeModel const& model,
                              HarmonicTestFunction const& f,
                              LSMeasureEstimate const& est);

struct Extension
{
    double value = 0;
    double sigma = 0;
    double tail = 0;
};

/*!
 * mu_y(h) = sum_x mu_y(x) h(x) over atoms with |g|_inf <= truncation.
 *
 * `growth` must be subexponential and bound h on the window up to a constant
 * (measured there). The tail bound covers observed atoms outside the window
 * plus unobserved mass (at most 3/n, decaying at the fitted exponential
 * rate) weighted by that constant times the growth function; it throws
 * TruncationError when the tail exceeds a tenth of max(|value|, sigma).
 * A negative truncation means the largest observed |g|_inf.
 */
Extension extend(LatticeModel const& model,
                 std::function<double(GroupElement const&)> const& h,
                 GrowthFunction const& growth,
                 LSMeasureEstimate const& est,
                 std::int64_t truncation = -1);

//! beta_y^F(f) - f(y) from n hits of F started at y.
Residual sweep_residual(LatticeModel const& model,
                        LSData const& data,
                        HarmonicTestFunction const& f,
                        Point const& y,
                        std::int64_t n_samples,
                        EngineConfig const& cfg);

//---------------------------------------------------------------------------//
struct FiberAtom
{
    std::int64_t u;
    double p_base;
    double p_cover;
    double z;
};

struct CoveringReport
{
    double tv = 0;
    double bound = 0;
    //! Total cylinder mass inside the fiber window
    double cover_mass = 0;
    std::vector<FiberAtom> atoms;
    std::int64_t n_samples = 0;
    std::int64_t window = 0;
    unsigned quotient_mask = 0;
    bool pass() const { return tv <= bound && cover_mass >= 0.95; }
};

/*!
 * Pushforward check between the plane and its quotient by the sub-lattice
 * spanned by the axes in `quotient_mask`.
 *
 * The plane estimate is projected to the fiber lattice by summing over the
 * quotient axes; the quotient model is simulated directly. Both runs use
 * independent seeds derived from cfg.seed.
 */
CoveringReport covering_check(LatticeModel const& plane,
                              LSData const& data,
                              Point const& y,
                              std::int64_t n_samples,
                              EngineConfig const& cfg,
                              std::int64_t window = 3,
                              unsigned quotient_mask = 1);

}  // namespace lsl
