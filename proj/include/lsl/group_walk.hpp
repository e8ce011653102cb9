#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "growth.hpp"
#include "lattice_polynomial.hpp"
#include "ls_core.hpp"
#include "types.hpp"

namespace lsl
{
//---------------------------------------------------------------------------//
/*!
 * Closed-form symmetric step laws on Z^k.
 *
 * LazySRW: mass `hold` at 0 and (1 - hold)/2k on each unit vector.
 * GeometricProduct: mu(g) = prod_i (1-q)/(1+q) q^|g_i|.
 */
class AnalyticMeasure
{
  public:
    struct LazySRW
    {
        double hold;
    };
    struct GeometricProduct
    {
        double q;
    };
    using Kind = std::variant<LazySRW, GeometricProduct>;

    static AnalyticMeasure lazy_srw(int k, double hold);
    static AnalyticMeasure geometric(int k, double q);

    int k() const { return k_; }
    Kind const& kind() const { return kind_; }
    double weight(GroupElement const& g) const;
    //! E[g^a], exact
    double moment(MultiIndex const& a) const;
    //! P(|g|_inf > m)
    double tail_mass(std::int64_t m) const;
    //! Largest |g|_inf in the support, or -1 when unbounded
    std::int64_t support_radius() const;
    GroupElement sample(Rng& rng) const;
    std::string describe() const;

  private:
    AnalyticMeasure(int k, Kind kind);
    int k_;
    Kind kind_;
};

//! E[n^s] for the two-sided geometric law (1-q)/(1+q) q^|n| on Z.
double geometric_coordinate_moment(double q, int s);

//---------------------------------------------------------------------------//
/*!
 * Step law mu on Gamma = Z^k: either the empirical LS-measure at the base
 * point (mu(g) = mu_{x0}(g x0)) or an analytic stand-in.
 */
class InducedMeasure
{
  public:
    explicit InducedMeasure(AnalyticMeasure analytic);
    explicit InducedMeasure(std::shared_ptr<LSMeasureEstimate const> empirical);

    int k() const;
    bool is_empirical() const { return empirical_ != nullptr; }
    LSMeasureEstimate const& empirical() const;
    AnalyticMeasure const& analytic() const;

    double weight(GroupElement const& g) const;
    //! Standard error of weight(g); 0 for analytic measures
    double std_error(GroupElement const& g) const;
    //! Largest |g|_inf with positive weight; -1 when unbounded
    std::int64_t support_radius() const;

    //! Draws steps and looks up weights in O(1)
    class Sampler
    {
      public:
        explicit Sampler(InducedMeasure const& mu);
        GroupElement sample(Rng& rng) const;
        double weight(GroupElement const& g) const;

      private:
        InducedMeasure const* mu_;
        std::vector<GroupElement> atoms_;
        mutable std::discrete_distribution<std::size_t> pick_;
        std::int64_t radius_ = 0;
        std::vector<double> dense_;
    };

  private:
    std::shared_ptr<LSMeasureEstimate const> empirical_;
    std::optional<AnalyticMeasure> analytic_;
};

//---------------------------------------------------------------------------//
struct DeltaMuValue
{
    double value = 0;
    //! Bound on the contribution of steps with |g|_inf > truncation
    double tail_bound = 0;
    //! Monte Carlo standard error (empirical measures only)
    double sigma = 0;
};

/*!
 * (Delta_mu f)(y) = sum_g mu(g) (f(y + g) - f(y)) over |g|_inf <= truncation.
 *
 * Analytic measures report a closed-form tail bound for polynomial f.
 */
DeltaMuValue delta_mu(InducedMeasure const& mu,
                      LatticePolynomial const& f,
                      GroupElement const& y,
                      std::int64_t truncation);

/*!
 * Generic f. With an analytic measure of unbounded support the tail bound
 * needs `bound`, a growth function with |f(x)| <= bound(|x|); without it the
 * tail bound is infinite.
 */
DeltaMuValue delta_mu(InducedMeasure const& mu,
                      std::function<double(GroupElement const&)> const& f,
                      GroupElement const& y,
                      std::int64_t truncation,
                      GrowthFunction const* bound = nullptr);

//! (d_g f)(h) = f(h + g) - f(h), exact on coefficient tables
LatticePolynomial partial_derivative(LatticePolynomial const& f,
                                     GroupElement const& g);
std::function<double(GroupElement const&)>
partial_derivative(std::function<double(GroupElement const&)> f,
                   GroupElement const& g);

//! binomial(k + d, k) for d >= 0, else 0
std::int64_t poly_space_dim(int k, int d);

//! Delta_mu applied to a polynomial, computed from exact moments
LatticePolynomial apply_delta_mu(AnalyticMeasure const& mu,
                                 LatticePolynomial const& p);

struct HarmonicSpace
{
    int dim = 0;
    std::vector<LatticePolynomial> basis;
    //! Descending singular values of Delta_mu on P^d
    std::vector<double> singular_values;
    //! Smallest retained over largest discarded singular value (inf if none)
    double gap = 0;
};

//! Null space of Delta_mu on P^d with relative rank threshold `rel_tol`.
HarmonicSpace harmonic_dim(AnalyticMeasure const& mu,
                           int k,
                           int d,
                           double rel_tol = 1e-8);

//---------------------------------------------------------------------------//
struct WalkGreenOptions
{
    std::int64_t n_walks = 10'000;
    std::int64_t horizon = 2'000;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct GreenEstimate
{
    double g = 0;
    double std_error = 0;
    //! Extrapolated contribution of steps beyond the horizon (included in g)
    double tail = 0;
};

/*!
 * Expected visits to `target` of the walk with kernel p(u, v) = mu(v - u).
 *
 * With `first_step` the walk starts off-lattice: X_1 is drawn from that
 * estimate (mu_y) and time 0 is not counted. Otherwise it starts at `start`
 * and time 0 counts. Per-step visit indicators are replaced by their
 * conditional expectation mu(target - X_n). The contribution beyond the
 * horizon is extrapolated from the local-limit decay n^(-k/2) fitted on the
 * second half of the horizon. Throws DomainError for k < 3 (recurrent).
 */
GreenEstimate walk_green(InducedMeasure const& mu,
                         GroupElement const& start,
                         LSMeasureEstimate const* first_step,
                         GroupElement const& target,
                         WalkGreenOptions const& opts);

//! Several targets from one set of walks.
std::vector<GreenEstimate> walk_green(InducedMeasure const& mu,
                                      GroupElement const& start,
                                      LSMeasureEstimate const* first_step,
                                      std::vector<GroupElement> const& targets,
                                      WalkGreenOptions const& opts);

//---------------------------------------------------------------------------//
struct PropertyVerdict
{
    std::string name;
    bool pass = false;
    //! false when reported but not part of the overall verdict
    bool asserted = true;
    std::string detail;
};

struct PropertyReport
{
    PropertyVerdict support;   // P1
    PropertyVerdict symmetry;  // P2
    PropertyVerdict moments;   // P3
    double max_symmetry_z = 0;
    double tail_rate = 0;
    bool pass() const;
};

/*!
 * Support on |g|_inf <= 3, symmetry mu(g) = mu(-g) (asserted only when
 * `transient`), and a positive exponential tail rate.
 */
PropertyReport check_properties(InducedMeasure const& mu, bool transient);

}  // namespace lsl
