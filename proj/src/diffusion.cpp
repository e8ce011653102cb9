#include "lsl/diffusion.hpp"

#include <cmath>
#include <string>

namespace lsl
{
void EngineConfig::validate(LatticeModel const& model) const
{
    if (!(dt > 0))
        throw DomainError("engine dt must be positive");
    if (!(wos_delta > 0))
        throw DomainError("engine wos_delta must be positive");
    if (max_steps < 1)
        throw DomainError("engine max_steps must be at least 1");
    if (workers < 1)
        throw DomainError("engine workers must be at least 1");
    if (engine == Engine::WoS && model.has_drift())
    {
        throw DomainError(
            "walk-on-spheres requires zero drift; use engine = \"em\"");
    }
}

double unit_sphere_area(int k)
{
    switch (k)
    {
        case 1:
            return 2;
        case 2:
            return 2 * kPi;
        case 3:
            return 4 * kPi;
    }
    throw DomainError("dimension must be 1, 2 or 3");
}

namespace
{
void check_interior(Ball const& ball, Point const& y)
{
    if (!(ball.radius > 0))
        throw DomainError("ball radius must be positive");
    if (!(norm(y - ball.center) < ball.radius))
        throw DomainError("start point is not inside the open ball");
}

void check_boundary(Ball const& ball, Point const& z)
{
    if (std::abs(norm(z - ball.center) - ball.radius) > 1e-9 * ball.radius)
        throw DomainError("exit point is not on the ball boundary");
}
}  // namespace

double poisson_density(Ball const& ball, Point const& y, Point const& z, int k)
{
    check_interior(ball, y);
    check_boundary(ball, z);
    double r = ball.radius;
    if (k == 1)
    {
        double t = y[0] - ball.center[0];
        return z[0] > ball.center[0] ? (r + t) / (2 * r) : (r - t) / (2 * r);
    }
    double rho2 = dot(y - ball.center, y - ball.center);
    double dist = norm(z - y);
    return (r * r - rho2)
           / (unit_sphere_area(k) * r * std::pow(dist, static_cast<double>(k)));
}

double poisson_ratio(Ball const& ball, Point const& y, Point const& z, int k)
{
    double r = ball.radius;
    if (k == 1)
    {
        double t = y[0] - ball.center[0];
        return z[0] > ball.center[0] ? (r + t) / r : (r - t) / r;
    }
    double rho2 = dot(y - ball.center, y - ball.center);
    double dist = norm(z - y);
    return (r * r - rho2) * std::pow(r, k - 2.0)
           / std::pow(dist, static_cast<double>(k));
}

Point sample_unit_sphere(int k, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (k)
    {
        case 1:
            return {unit(rng) < 0.5 ? -1.0 : 1.0, 0, 0};
        case 2: {
            double phi = 2 * kPi * unit(rng);
            return {std::cos(phi), std::sin(phi), 0};
        }
        case 3: {
            double costheta = 2 * unit(rng) - 1;
            double phi = 2 * kPi * unit(rng);
            double sintheta = std::sqrt(std::max(0.0, 1 - costheta * costheta));
            return {sintheta * std::cos(phi), sintheta * std::sin(phi), costheta};
        }
    }
    throw DomainError("dimension must be 1, 2 or 3");
}

Point sample_ball_exit(Ball const& ball, Point const& y, int k, Rng& rng)
{
    check_interior(ball, y);
    double r = ball.radius;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (k == 1)
    {
        double t = y[0] - ball.center[0];
        double p_plus = (r + t) / (2 * r);
        Point z = ball.center;
        z[0] += unit(rng) < p_plus ? r : -r;
        return z;
    }
    double rho = norm(y - ball.center);
    // Rejection against the uniform law; sup of the density ratio is
    // attained at the boundary point closest to y.
    double bound = (r + rho) * std::pow(r, k - 2.0) / std::pow(r - rho, k - 1.0);
    for (;;)
    {
        Point z = ball.center + r * sample_unit_sphere(k, rng);
        if (rho == 0 || unit(rng) * bound < poisson_ratio(ball, y, z, k))
            return z;
    }
}

namespace
{
HitResult snap_to_F(LatticeModel const& model,
                    double r_F,
                    Point const& pos,
                    GroupElement const& g,
                    Point const& d,
                    double dist,
                    std::int64_t steps)
{
    HitResult hit;
    hit.lattice_index = g;
    hit.steps = steps;
    hit.point = dist > r_F ? model.reduce(pos + (r_F / dist - 1) * d) : pos;
    return hit;
}

HitResult hit_wos_1d(LatticeModel const& model,
                     double r_F,
                     Point const& y,
                     EngineConfig const& cfg,
                     Rng& rng)
{
    Point pos = model.reduce(y);
    GroupElement g = model.nearest_lattice_point(pos);
    Point d = model.displacement(pos, g);
    double dist = std::abs(d[0]);
    if (dist - r_F <= cfg.wos_delta * r_F)
        return snap_to_F(model, r_F, pos, g, d, dist, 0);

    // Exact two-point exit law from the gap between consecutive F-intervals.
    double left = pos[0] - d[0] - (d[0] < 0 ? 1.0 : 0.0);
    double a = left + r_F;
    double b = left + 1 - r_F;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Point out = pos;
    out[0] = unit(rng) < (pos[0] - a) / (b - a) ? b : a;
    out = model.reduce(out);
    HitResult hit;
    hit.point = out;
    hit.lattice_index = model.nearest_lattice_point(out);
    hit.steps = 1;
    return hit;
}

HitResult hit_wos(LatticeModel const& model,
                  double r_F,
                  Point const& y,
                  EngineConfig const& cfg,
                  Rng& rng)
{
    int k = model.k();
    if (k == 1)
        return hit_wos_1d(model, r_F, y, cfg, rng);

    double shell = cfg.wos_delta * r_F;
    Point pos = model.reduce(y);
    for (std::int64_t steps = 0;; ++steps)
    {
        GroupElement g = model.nearest_lattice_point(pos);
        Point d = model.displacement(pos, g);
        double dist = norm(d);
        double gap = dist - r_F;
        if (gap <= shell)
            return snap_to_F(model, r_F, pos, g, d, dist, steps);
        if (steps >= cfg.max_steps)
        {
            HitResult hit;
            hit.point = pos;
            hit.lattice_index = g;
            hit.steps = steps;
            hit.escaped = true;
            return hit;
        }
        double radius = std::min(gap, 1.0);
        pos = model.reduce(pos + radius * sample_unit_sphere(k, rng));
    }
}

HitResult hit_em(LatticeModel const& model,
                 double r_F,
                 Point const& y,
                 EngineConfig const& cfg,
                 Rng& rng)
{
    int k = model.k();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double scale = std::sqrt(2 * cfg.dt);
    bool drift = model.has_drift();
    Point pos = model.reduce(y);
    for (std::int64_t steps = 0;; ++steps)
    {
        GroupElement g = model.nearest_lattice_point(pos);
        Point d = model.displacement(pos, g);
        double dist = norm(d);
        if (dist <= r_F)
        {
            // Project the first interior sample onto the sphere, where the
            // continuous path crossed.
            HitResult hit;
            hit.lattice_index = g;
            hit.steps = steps;
            hit.point = dist > 0 ? model.reduce(pos + (r_F / dist - 1) * d)
                                 : pos;
            return hit;
        }
        if (steps >= cfg.max_steps)
        {
            HitResult hit;
            hit.point = pos;
            hit.lattice_index = g;
            hit.steps = steps;
            hit.escaped = true;
            return hit;
        }
        Point step{};
        if (drift)
            step = cfg.dt * model.drift(pos);
        for (int i = 0; i < k; ++i)
            step[i] += scale * normal(rng);

        // Brownian-bridge test against the nearest ball: a path ending
        // outside F still touched it with probability exp(-a b / dt).
        Point after = d + step;
        double a = dist - r_F;
        double b = norm(after) - r_F;
        if (b > 0 && unit(rng) < std::exp(-a * b / cfg.dt))
        {
            Point mid = d + (a / (a + b)) * step;
            double m = norm(mid);
            HitResult hit;
            hit.lattice_index = g;
            hit.steps = steps + 1;
            hit.point = m > 0 ? model.reduce(pos + (r_F / m) * mid - d) : pos;
            return hit;
        }
        pos = model.reduce(pos + step);
    }
}
}  // namespace

HitResult hit_periodic_F(LatticeModel const& model,
                         double r_F,
                         Point const& y,
                         EngineConfig const& cfg,
                         Rng& rng)
{
    if (!(r_F > 0 && r_F < 0.5))
        throw DomainError("r_F must lie in (0, 1/2)");
    if (cfg.engine == Engine::WoS)
    {
        if (model.has_drift())
            throw DomainError("walk-on-spheres requires zero drift");
        return hit_wos(model, r_F, y, cfg, rng);
    }
    return hit_em(model, r_F, y, cfg, rng);
}

double ball_green(int k, double R, double s)
{
    if (!(R > 0) || !(s > 0) || !(s <= R))
        throw DomainError("ball_green needs 0 < s <= R");
    switch (k)
    {
        case 1:
            return (R - s) / 2;
        case 2:
            return std::log(R / s) / (2 * kPi);
        case 3:
            return (1 / s - 1 / R) / (4 * kPi);
    }
    throw DomainError("dimension must be 1, 2 or 3");
}

ShellExit exit_cube_or_hit(LatticeModel const& model,
                           double r_F,
                           Point const& y,
                           Point const& center,
                           double half_width,
                           EngineConfig const& cfg,
                           Rng& rng)
{
    if (model.has_drift())
        throw DomainError("cube exit diagnostics require zero drift");
    int k = model.k();
    double shell = cfg.wos_delta * r_F;
    Point pos = y;
    for (std::int64_t steps = 0;; ++steps)
    {
        GroupElement g = model.nearest_lattice_point(pos);
        double gap_F = norm(model.displacement(pos, g)) - r_F;
        if (gap_F <= shell)
            return {true, steps};
        double gap_cube = half_width;
        for (int i = 0; i < k; ++i)
        {
            gap_cube = std::min(
                gap_cube, half_width - std::abs(pos[i] - center[i]));
        }
        if (gap_cube <= shell || steps >= cfg.max_steps)
            return {false, steps};
        double radius = std::min({gap_F, gap_cube, 1.0});
        pos = pos + radius * sample_unit_sphere(k, rng);
    }
}

}  // namespace lsl
