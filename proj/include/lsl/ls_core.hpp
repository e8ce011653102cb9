#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diffusion.hpp"
#include "growth.hpp"
#include "lattice_model.hpp"
#include "types.hpp"

namespace lsl
{
//---------------------------------------------------------------------------//
/*!
 * LSData violating one of its clauses. clause() is one of "D1", "D2",
 * "cell", "D4", "balance", "radius".
 */
class InvalidLsData : public DomainError
{
  public:
    InvalidLsData(std::string clause, std::string const& message)
        : DomainError("(" + clause + ") " + message), clause_(std::move(clause))
    {
    }
    std::string const& clause() const { return clause_; }

  private:
    std::string clause_;
};

/*!
 * Sup over y in the closed ball F_0 and z on the sphere dV_0 of
 * max(K(y,z)/K(x0,z), K(x0,z)/K(y,z)).
 *
 * With t = r_F / r_V the extremes sit at |z - y| = r_V -/+ r_F, giving
 * max((1+t)/(1-t)^(k-1), (1+t)^(k-1)/(1-t)).
 */
double harnack_constant(int k, double r_F, double r_V);

//! Radius s with ball_green(k, r_V, s) = B, by bisection.
double balanced_radius(int k, double r_V, double B);

//---------------------------------------------------------------------------//
/*!
 * Ball LS-data: F_x = closed ball (x, r_F), V_x = open ball (x, r_V),
 * Harnack constant C, and optionally the balance level B.
 */
class LSData
{
  public:
    //! Data with C = harnack_constant(k, r_F, r_V).
    static LSData make(int k, double r_F, double r_V);
    //! Balanced data: r_F solves ball_green(k, r_V, r_F) = B.
    static LSData balanced(int k, double r_V, double B);
    //! Fully specified data; every clause is checked.
    LSData(int k,
           double r_F,
           double r_V,
           double C,
           std::optional<double> B = std::nullopt);

    int k() const { return k_; }
    double r_F() const { return r_F_; }
    double r_V() const { return r_V_; }
    double C() const { return C_; }
    std::optional<double> B() const { return B_; }
    //! 1 - 1/C^2
    double theta() const { return 1 - 1 / (C_ * C_); }

  private:
    int k_;
    double r_F_;
    double r_V_;
    double C_;
    std::optional<double> B_;
};

//! One clause verdict, as printed by validate-data.
struct ClauseVerdict
{
    std::string clause;
    bool pass;
    std::string detail;
};

//! All clause verdicts for raw radii (does not throw).
std::vector<ClauseVerdict> check_ls_data(int k,
                                         double r_F,
                                         double r_V,
                                         std::optional<double> C,
                                         std::optional<double> B);

struct LsSample
{
    GroupElement x;
    int stages = 0;
    bool censored = false;
};

/*!
 * Draw one index from the LS-measure mu_y.
 *
 * Stage n runs to F (hit y_n in F_{x_n}), samples the exit z from V_{x_n}
 * started at y_n, and stops at x_n with probability
 * K(x_n, z) / (C K(y_n, z)); otherwise continues from z.
 */
LsSample sample_ls_point(LatticeModel const& model,
                         LSData const& data,
                         Point const& y,
                         EngineConfig const& cfg,
                         Rng& rng);

//---------------------------------------------------------------------------//
struct AtomEstimate
{
    double p = 0;
    double std_error = 0;
    std::int64_t count = 0;
};

/*!
 * Multinomial estimate of mu_y on Z^k.
 *
 * p is normalized over uncensored samples; std_error is the normal-approximation
 * standard error sqrt(p (1 - p) / n).
 */
struct LSMeasureEstimate
{
    int k = 1;
    Point y{};
    //! Position of the identity element; atom g sits at origin + g
    Point origin{};
    std::map<GroupElement, AtomEstimate> atoms;
    std::int64_t n_samples = 0;
    std::int64_t censored = 0;
    std::map<int, std::int64_t> stage_histogram;
    std::uint64_t seed = 0;

    std::int64_t effective() const { return n_samples - censored; }
    //! Estimate at g, zero for unobserved atoms
    AtomEstimate at(GroupElement const& g) const;
    //! Empirical P(stages > n)
    double stage_tail(int n) const;
};

//! Largest censoring fraction accepted by estimate_measure
inline constexpr double kMaxCensoredFraction = 1e-3;

//! Raw tallies, before normalization.
struct LsTally
{
    std::map<GroupElement, std::int64_t> counts;
    std::map<int, std::int64_t> stages;
    std::int64_t censored = 0;
};

LSMeasureEstimate finalize_estimate(LsTally const& tally,
                                    LatticeModel const& model,
                                    Point const& y,
                                    std::int64_t n_samples,
                                    std::uint64_t seed);

LSMeasureEstimate estimate_measure(LatticeModel const& model,
                                   LSData const& data,
                                   Point const& y,
                                   std::int64_t n_samples,
                                   EngineConfig const& cfg);

/*!
 * Estimate of mu_x obtained as the mixture of mu_z over z drawn from the
 * exit law of V_x started at x (independent of sample_ls_point's own start
 * rule).
 */
LSMeasureEstimate estimate_exit_mixture(LatticeModel const& model,
                                        LSData const& data,
                                        GroupElement const& x,
                                        std::int64_t n_samples,
                                        EngineConfig const& cfg);

struct MomentEstimate
{
    double value;
    double std_error;
};

//! sum_x p(x) a(|x - y|) with its standard error
MomentEstimate moment(LSMeasureEstimate const& est, GrowthFunction const& a);

//---------------------------------------------------------------------------//
/*!
 * Weighted least-squares fit ln p(g) = intercept + slope |g - y| over atoms
 * with at least min_count observations (weights = counts).
 */
struct TailFit
{
    double slope = 0;
    double slope_stderr = 0;
    double intercept = 0;
    int n_points = 0;
    //! -slope, the exponential decay rate
    double rate() const { return -slope; }
    double z() const { return slope_stderr > 0 ? slope / slope_stderr : 0; }
};

TailFit fit_exponential_tail(LSMeasureEstimate const& est,
                             std::int64_t min_count = 50);

//---------------------------------------------------------------------------//
struct AtomComparison
{
    GroupElement g;
    double p_a;
    double p_b;
    double z;
};

struct MeasureComparison
{
    //! half the L1 distance over the window
    double tv = 0;
    //! half the sum over the window of multiplier * sqrt(se_a^2 + se_b^2)
    double bound = 0;
    std::vector<AtomComparison> atoms;
    bool pass() const { return tv <= bound; }
};

/*!
 * Compare two estimates over the window |g|_inf <= window (within the
 * dimensions of the estimates).
 */
MeasureComparison compare_measures(LSMeasureEstimate const& a,
                                   LSMeasureEstimate const& b,
                                   std::int64_t window,
                                   double multiplier);

//! All g in Z^k with |g|_inf <= radius, in lexicographic order.
std::vector<GroupElement> lattice_window(int k, std::int64_t radius);

}  // namespace lsl
