#pragma once

#include <cstdint>

#include "lattice_model.hpp"
#include "parallel.hpp"
#include "types.hpp"

namespace lsl
{
enum class Engine
{
    WoS,  //!< walk on spheres, exact for zero drift
    EM,   //!< Euler-Maruyama reference engine
};

//---------------------------------------------------------------------------//
/*!
 * Sampling engine settings shared by every Monte Carlo operation.
 */
struct EngineConfig
{
    Engine engine = Engine::WoS;
    double dt = 1e-4;
    //! delta-shell thickness relative to r_F
    double wos_delta = 1e-4;
    std::int64_t max_steps = 10'000'000;
    std::uint64_t seed = 1;
    int workers = 1;

    //! Throws DomainError for non-positive knobs or WoS with drift.
    void validate(LatticeModel const& model) const;
};

struct Ball
{
    Point center;
    double radius;
};

struct HitResult
{
    //! Point on the boundary of F_x
    Point point{};
    GroupElement lattice_index;
    std::int64_t steps = 0;
    bool escaped = false;
};

//! Surface measure of the unit (k-1)-sphere; 2 for k = 1.
double unit_sphere_area(int k);

/*!
 * Poisson kernel of the ball for Delta: density of the exit position at z
 * for the diffusion started at y, with respect to surface measure.
 *
 * For k = 1 the boundary is two points and the value is the exit
 * probability at z.
 */
double poisson_density(Ball const& ball, Point const& y, Point const& z, int k);

//! K(y, z) / K(center, z) in closed form
double poisson_ratio(Ball const& ball, Point const& y, Point const& z, int k);

//! Uniform point on the unit sphere of R^k (k = 1: +1 or -1).
Point sample_unit_sphere(int k, Rng& rng);

//! Exact sample of the exit position from `ball` started at interior y.
Point sample_ball_exit(Ball const& ball, Point const& y, int k, Rng& rng);

/*!
 * Run the diffusion from y (outside F) until it hits F = union of closed
 * balls of radius r_F about the orbit points.
 */
HitResult hit_periodic_F(LatticeModel const& model,
                         double r_F,
                         Point const& y,
                         EngineConfig const& cfg,
                         Rng& rng);

/*!
 * Radial Green function of the ball of radius R for Delta with a unit sink
 * at the center, evaluated at distance s.
 */
double ball_green(int k, double R, double s);

//! Outcome of a run stopped on F or on the boundary of a centered cube.
struct ShellExit
{
    bool hit_F;
    std::int64_t steps;
};

/*!
 * Run from y until hitting F or leaving the open cube |y - center|_inf <
 * half_width (zero drift only). Used for exhaustion-decay diagnostics.
 */
ShellExit exit_cube_or_hit(LatticeModel const& model,
                           double r_F,
                           Point const& y,
                           Point const& center,
                           double half_width,
                           EngineConfig const& cfg,
                           Rng& rng);

}  // namespace lsl
