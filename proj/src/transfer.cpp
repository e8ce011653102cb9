#include "lsl/transfer.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace lsl
{
HarmonicTestFunction::HarmonicTestFunction(std::string name,
                                           std::function<double(Point const&)> f,
                                           GrowthFunction growth,
                                           bool harmonic,
                                           std::optional<LatticePolynomial> poly)
    : name_(std::move(name))
    , f_(std::move(f))
    , growth_(std::move(growth))
    , harmonic_(harmonic)
    , poly_(std::move(poly))
{
}

HarmonicTestFunction
HarmonicTestFunction::polynomial(LatticePolynomial p,
                                 std::optional<GrowthFunction> growth)
{
    bool harmonic = p.laplacian().is_zero();
    std::string name = p.describe();
    GrowthFunction a = growth              ? *growth
                       : p.degree() > 0 ? GrowthFunction::polynomial(p.degree())
                                        : GrowthFunction::constant();
    return HarmonicTestFunction(
        name, [p](Point const& x) { return p(x); }, a, harmonic, p);
}

HarmonicTestFunction
HarmonicTestFunction::custom(std::string name,
                             std::function<double(Point const&)> f,
                             GrowthFunction growth,
                             bool harmonic)
{
    return HarmonicTestFunction(
        std::move(name), std::move(f), std::move(growth), harmonic, std::nullopt);
}

//---------------------------------------------------------------------------//
Residual restriction_residual(LatticeModel const& model,
                              HarmonicTestFunction const& f,
                              LSMeasureEstimate const& est)
{
    double fy = f(est.y);
    double m1 = 0, m2 = 0;
    for (auto const& [g, atom] : est.atoms)
    {
        double d = f(model.lattice_point(g)) - fy;
        m1 += atom.p * d;
        m2 += atom.p * d * d;
    }
    double var = std::max(0.0, m2 - m1 * m1);
    return {m1, std::sqrt(var / static_cast<double>(est.effective()))};
}

Extension extend(LatticeModel const& model,
                 std::function<double(GroupElement const&)> const& h,
                 GrowthFunction const& growth,
                 LSMeasureEstimate const& est,
                 std::int64_t truncation)
{
    if (!is_subexponential(growth).value)
        throw DomainError("extension needs a subexponential growth bound, got "
                          + growth.describe());
    if (truncation < 0)
    {
        truncation = 0;
        for (auto const& [g, atom] : est.atoms)
            truncation = std::max(truncation, norm_inf(g));
    }

    Extension out;
    double m2 = 0;
    double c_h = 0;
    double observed_tail = 0;
    for (auto const& [g, atom] : est.atoms)
    {
        double v = h(g);
        if (norm_inf(g) > truncation)
        {
            observed_tail += atom.p * std::abs(v);
            continue;
        }
        out.value += atom.p * v;
        m2 += atom.p * v * v;
        c_h = std::max(c_h, std::abs(v) / growth(norm(model.lattice_point(g))));
    }
    for (auto const& g : lattice_window(est.k, std::min<std::int64_t>(truncation, 5)))
        c_h = std::max(c_h, std::abs(h(g)) / growth(norm(model.lattice_point(g))));
    double var = std::max(0.0, m2 - out.value * out.value);
    out.sigma = std::sqrt(var / static_cast<double>(est.effective()));

    // Mass never observed lies beyond the largest observed shell; with zero
    // counts its total is at most 3/n (95% upper bound), spread over the
    // shells with the fitted exponential decay rate.
    // Without a usable fit (all atoms at one distance), the rate is the drop
    // from the outermost observed shell to the unobserved bound.
    TailFit fit = fit_exponential_tail(est);
    std::int64_t observed = 0;
    for (auto const& [g, atom] : est.atoms)
        observed = std::max(observed, norm_inf(g));
    double unseen = 3 / static_cast<double>(est.effective());
    double rate = fit.rate();
    if (fit.n_points < 2 || fit.slope_stderr == 0)
    {
        double outer = 0;
        for (auto const& [g, atom] : est.atoms)
        {
            if (norm_inf(g) == observed)
                outer += atom.p;
        }
        rate = std::log(outer / unseen);
    }
    double fitted_tail = 0;
    if (c_h > 0)
    {
        if (!(rate > 0))
        {
            fitted_tail = std::numeric_limits<double>::infinity();
        }
        else
        {
            std::int64_t first = std::max(truncation, observed) + 1;
            double ratio = std::exp(-rate);
            double base = norm(model.origin());
            double rk = std::sqrt(static_cast<double>(est.k));
            for (std::int64_t s = first; s <= first + 100'000; ++s)
            {
                double ds = static_cast<double>(s);
                double shell = unseen * (1 - ratio)
                               * std::pow(ratio, static_cast<double>(s - first));
                double term = shell * c_h * growth(base + rk * ds);
                if (!std::isfinite(term))
                {
                    fitted_tail = term;
                    break;
                }
                fitted_tail += term;
                if (term < 1e-16 * (fitted_tail + std::abs(out.value) + 1e-300))
                    break;
            }
        }
    }
    out.tail = observed_tail + fitted_tail;
    double scale = std::max(std::abs(out.value), out.sigma);
    if (!(out.tail <= 0.1 * scale) && out.tail > 0)
    {
        throw TruncationError("extension tail bound " + std::to_string(out.tail)
                              + " exceeds 10% of max(|value|, sigma) = "
                              + std::to_string(scale) + " at truncation "
                              + std::to_string(truncation));
    }
    return out;
}

Residual sweep_residual(LatticeModel const& model,
                        LSData const& data,
                        HarmonicTestFunction const& f,
                        Point const& y,
                        std::int64_t n_samples,
                        EngineConfig const& cfg)
{
    if (n_samples < 2)
        throw DomainError("sweep_residual needs at least 2 samples");
    cfg.validate(model);
    GroupElement g = model.nearest_lattice_point(y);
    if (norm(model.displacement(y, g)) <= data.r_F())
        throw DomainError("sweep start point lies in F");
    double fy = f(y);

    struct Acc
    {
        double sum = 0, sum_sq = 0;
        std::int64_t n = 0, censored = 0;
    };
    auto parts = run_chunks<Acc>(
        n_samples,
        cfg.seed,
        cfg.workers,
        [&](std::int64_t, std::int64_t begin, std::int64_t end, Rng& rng) {
            Acc a;
            for (auto i = begin; i < end; ++i)
            {
                HitResult hit = hit_periodic_F(model, data.r_F(), y, cfg, rng);
                if (hit.escaped)
                {
                    ++a.censored;
                    continue;
                }
                double d = f(hit.point) - fy;
                a.sum += d;
                a.sum_sq += d * d;
                ++a.n;
            }
            return a;
        });
    Acc total;
    for (auto const& p : parts)
    {
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
        total.n += p.n;
        total.censored += p.censored;
    }
    if (total.censored > kMaxCensoredFraction * n_samples || total.n < 2)
        throw QualityError("too many censored hits in sweep_residual");
    auto n = static_cast<double>(total.n);
    double mean = total.sum / n;
    double var = std::max(0.0, (total.sum_sq / n - mean * mean) * n / (n - 1));
    return {mean, std::sqrt(var / n)};
}

//---------------------------------------------------------------------------//
namespace
{
std::map<std::int64_t, double> project(LSMeasureEstimate const& est,
                                       unsigned mask)
{
    std::map<std::int64_t, double> out;
    for (auto const& [g, atom] : est.atoms)
    {
        std::int64_t u = 0;
        for (int i = 0; i < est.k; ++i)
        {
            if (!(mask & (1u << i)))
            {
                u = g.c[i];
                break;
            }
        }
        out[u] += atom.p;
    }
    return out;
}
}  // namespace

CoveringReport covering_check(LatticeModel const& plane,
                              LSData const& data,
                              Point const& y,
                              std::int64_t n_samples,
                              EngineConfig const& cfg,
                              std::int64_t window,
                              unsigned quotient_mask)
{
    if (plane.k() != 2 || plane.quotient_mask() != 0)
        throw DomainError("covering check needs the full plane lattice Z^2");
    if (quotient_mask == 0 || quotient_mask > 3)
        throw DomainError("quotient mask must select axis 0, axis 1 or both");

    LatticeModel cover = plane.quotient(quotient_mask);
    EngineConfig cfg_cover = cfg;
    cfg_cover.seed = splitmix64(cfg.seed ^ 0x636f766572ULL);

    auto base_est = estimate_measure(plane, data, y, n_samples, cfg);
    auto cover_est = estimate_measure(cover, data, y, n_samples, cfg_cover);
    auto pb = project(base_est, quotient_mask);
    auto pc = project(cover_est, quotient_mask);

    CoveringReport r;
    r.n_samples = n_samples;
    r.window = window;
    r.quotient_mask = quotient_mask;
    bool single_fiber = quotient_mask == 3;
    auto nb = static_cast<double>(base_est.effective());
    auto nc = static_cast<double>(cover_est.effective());
    std::int64_t w = single_fiber ? 0 : window;
    for (std::int64_t u = -w; u <= w; ++u)
    {
        double a = pb.count(u) ? pb[u] : 0.0;
        double b = pc.count(u) ? pc[u] : 0.0;
        double sa = a > 0 ? std::sqrt(a * (1 - a) / nb) : 1 / nb;
        double sb = b > 0 ? std::sqrt(b * (1 - b) / nc) : 1 / nc;
        double s = std::sqrt(sa * sa + sb * sb);
        r.tv += 0.5 * std::abs(a - b);
        r.bound += 0.5 * 4 * s;
        r.cover_mass += b;
        r.atoms.push_back({u, a, b, s > 0 ? (a - b) / s : 0.0});
    }
    return r;
}

}  // namespace lsl
