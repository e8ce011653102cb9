#include "lsl/ls_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lsl
{
double harnack_constant(int k, double r_F, double r_V)
{
    if (k < 1 || k > kMaxDim)
        throw DomainError("dimension must be 1, 2 or 3");
    if (!(r_F > 0 && r_F < r_V))
        throw DomainError("harnack_constant needs 0 < r_F < r_V");
    double t = r_F / r_V;
    double near = (1 + t) / std::pow(1 - t, k - 1.0);
    double far = std::pow(1 + t, k - 1.0) / (1 - t);
    return std::max(near, far);
}

double balanced_radius(int k, double r_V, double B)
{
    if (!(r_V > 0))
        throw DomainError("balanced_radius needs r_V > 0");
    double sup = k == 1 ? r_V / 2 : std::numeric_limits<double>::infinity();
    if (!(B > 0 && B < sup))
        throw DomainError("balance level B outside (0, sup G_0)");

    // ball_green is strictly decreasing in s on (0, r_V].
    double hi = r_V;
    double lo = r_V * 1e-3;
    while (ball_green(k, r_V, lo) <= B)
    {
        lo *= 1e-3;
        if (lo < 1e-300)
            throw DomainError("balance level B too large to resolve");
    }
    if (k == 1)
        lo = std::min(lo, 0.0);
    for (int i = 0; i < 400 && hi - lo > 1e-15; ++i)
    {
        double mid = 0.5 * (lo + hi);
        double g = mid > 0 ? ball_green(k, r_V, mid) : sup;
        (g > B ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

//---------------------------------------------------------------------------//
std::vector<ClauseVerdict> check_ls_data(int k,
                                         double r_F,
                                         double r_V,
                                         std::optional<double> C,
                                         std::optional<double> B)
{
    std::vector<ClauseVerdict> out;
    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(12);
        os << v;
        return os.str();
    };

    bool radii_ok = k >= 1 && k <= kMaxDim && r_F > 0 && r_V > 0;
    out.push_back({"radius",
                   radii_ok,
                   "k in {1,2,3}, r_F > 0, r_V > 0 (k=" + std::to_string(k)
                       + ", r_F=" + fmt(r_F) + ", r_V=" + fmt(r_V) + ")"});
    out.push_back({"D1",
                   r_F < r_V,
                   "F_x inside V_x: r_F < r_V (" + fmt(r_F) + " vs "
                       + fmt(r_V) + ")"});
    out.push_back({"D2",
                   r_F + r_V < 1,
                   "F_x disjoint from V_y: r_F + r_V < 1 (sum "
                       + fmt(r_F + r_V) + ")"});
    out.push_back({"cell",
                   r_V < 0.5,
                   "V_x inside the Dirichlet cell: r_V < 1/2 (r_V "
                       + fmt(r_V) + ")"});

    bool geometry_ok = radii_ok && r_F < r_V;
    if (geometry_ok)
    {
        double exact = harnack_constant(k, r_F, r_V);
        double used = C.value_or(exact);
        bool ok = used > 1 && std::abs(used - exact) <= 1e-9;
        out.push_back({"D4",
                       ok,
                       "Harnack constant C = " + fmt(used)
                           + " (closed form " + fmt(exact) + ")"});
    }
    else
    {
        out.push_back({"D4", false, "Harnack constant undefined for these radii"});
    }

    if (B)
    {
        bool ok = false;
        std::string detail;
        try
        {
            double s = balanced_radius(k, r_V, *B);
            ok = std::abs(s - r_F) <= 1e-9;
            detail = "F_0 = {G_0 >= B} has radius " + fmt(s) + ", r_F = "
                     + fmt(r_F);
        }
        catch (DomainError const& e)
        {
            detail = e.what();
        }
        out.push_back({"balance", ok, detail});
    }
    return out;
}

LSData::LSData(int k, double r_F, double r_V, double C, std::optional<double> B)
    : k_(k), r_F_(r_F), r_V_(r_V), C_(C), B_(B)
{
    for (auto const& v : check_ls_data(k, r_F, r_V, C, B))
    {
        if (!v.pass)
            throw InvalidLsData(v.clause, v.detail);
    }
}

LSData LSData::make(int k, double r_F, double r_V)
{
    for (auto const& v : check_ls_data(k, r_F, r_V, std::nullopt, std::nullopt))
    {
        if (!v.pass)
            throw InvalidLsData(v.clause, v.detail);
    }
    return LSData(k, r_F, r_V, harnack_constant(k, r_F, r_V));
}

LSData LSData::balanced(int k, double r_V, double B)
{
    double r_F = 0;
    try
    {
        r_F = balanced_radius(k, r_V, B);
    }
    catch (DomainError const& e)
    {
        throw InvalidLsData("balance", e.what());
    }
    LSData base = make(k, r_F, r_V);
    return LSData(k, r_F, r_V, base.C(), B);
}

//---------------------------------------------------------------------------//
LsSample sample_ls_point(LatticeModel const& model,
                         LSData const& data,
                         Point const& y,
                         EngineConfig const& cfg,
                         Rng& rng)
{
    int const k = model.k();
    double const r_F = data.r_F();
    double const r_V = data.r_V();
    double const inv_C = 1 / data.C();
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Point pos = model.reduce(y);
    GroupElement g = model.nearest_lattice_point(pos);
    Point d = model.displacement(pos, g);
    double dist = norm(d);

    HitResult hit;
    bool have_hit = false;
    if (dist == r_V)
    {
        // Exactly on dV_g: nudge toward the center.
        pos = pos - (1e-9 / dist) * d;
        d = model.displacement(pos, g);
        dist = norm(d);
    }
    if (dist == 0)
    {
        // Start rule for orbit points: begin with the exit law of V_y.
        pos = model.reduce(sample_ball_exit(Ball{pos, r_V}, pos, k, rng));
    }
    else if (dist <= r_F)
    {
        hit.point = pos;
        hit.lattice_index = g;
        have_hit = true;
    }

    constexpr int max_stages = 1'000'000;
    for (int stage = 1; stage <= max_stages; ++stage)
    {
        if (!have_hit)
        {
            hit = hit_periodic_F(model, r_F, pos, cfg, rng);
            if (hit.escaped)
                return {hit.lattice_index, stage, true};
        }
        have_hit = false;

        Point center = hit.point - model.displacement(hit.point, hit.lattice_index);
        Ball V{center, r_V};
        Point z = sample_ball_exit(V, hit.point, k, rng);
        double accept = inv_C / poisson_ratio(V, hit.point, z, k);
        if (unit(rng) < accept)
            return {hit.lattice_index, stage, false};
        pos = model.reduce(z);
    }
    return {hit.lattice_index, max_stages, true};
}

//---------------------------------------------------------------------------//
AtomEstimate LSMeasureEstimate::at(GroupElement const& g) const
{
    auto it = atoms.find(g);
    return it == atoms.end() ? AtomEstimate{} : it->second;
}

double LSMeasureEstimate::stage_tail(int n) const
{
    std::int64_t above = 0, total = 0;
    for (auto const& [stages, count] : stage_histogram)
    {
        total += count;
        if (stages > n)
            above += count;
    }
    return total > 0 ? static_cast<double>(above) / total : 0.0;
}

LSMeasureEstimate finalize_estimate(LsTally const& tally,
                                    LatticeModel const& model,
                                    Point const& y,
                                    std::int64_t n_samples,
                                    std::uint64_t seed)
{
    LSMeasureEstimate est;
    est.k = model.k();
    est.y = y;
    est.origin = model.origin();
    est.n_samples = n_samples;
    est.censored = tally.censored;
    est.stage_histogram = tally.stages;
    est.seed = seed;
    auto eff = static_cast<double>(est.effective());
    for (auto const& [g, count] : tally.counts)
    {
        AtomEstimate a;
        a.count = count;
        a.p = count / eff;
        a.std_error = std::sqrt(a.p * (1 - a.p) / eff);
        est.atoms.emplace(g, a);
    }
    return est;
}

namespace
{
void merge_into(LsTally& total, LsTally const& part)
{
    for (auto const& [g, c] : part.counts)
        total.counts[g] += c;
    for (auto const& [s, c] : part.stages)
        total.stages[s] += c;
    total.censored += part.censored;
}

template<class Draw>
LSMeasureEstimate run_estimate(LatticeModel const& model,
                               Point const& y,
                               std::int64_t n_samples,
                               EngineConfig const& cfg,
                               Draw&& draw)
{
    if (n_samples < 1)
        throw DomainError("n_samples must be at least 1");
    cfg.validate(model);
    auto parts = run_chunks<LsTally>(
        n_samples,
        cfg.seed,
        cfg.workers,
        [&](std::int64_t, std::int64_t begin, std::int64_t end, Rng& rng) {
            LsTally t;
            for (auto i = begin; i < end; ++i)
            {
                LsSample s = draw(rng);
                if (s.censored)
                {
                    ++t.censored;
                    continue;
                }
                ++t.counts[s.x];
                ++t.stages[s.stages];
            }
            return t;
        });
    LsTally total;
    for (auto const& p : parts)
        merge_into(total, p);
    if (total.censored > kMaxCensoredFraction * n_samples
        || total.censored == n_samples)
    {
        throw QualityError("censored fraction "
                           + std::to_string(double(total.censored) / n_samples)
                           + " exceeds 1e-3");
    }
    return finalize_estimate(total, model, y, n_samples, cfg.seed);
}
}  // namespace

LSMeasureEstimate estimate_measure(LatticeModel const& model,
                                   LSData const& data,
                                   Point const& y,
                                   std::int64_t n_samples,
                                   EngineConfig const& cfg)
{
    return run_estimate(model, y, n_samples, cfg, [&](Rng& rng) {
        return sample_ls_point(model, data, y, cfg, rng);
    });
}

LSMeasureEstimate estimate_exit_mixture(LatticeModel const& model,
                                        LSData const& data,
                                        GroupElement const& x,
                                        std::int64_t n_samples,
                                        EngineConfig const& cfg)
{
    Point center = model.lattice_point(x);
    Ball V{center, data.r_V()};
    return run_estimate(model, center, n_samples, cfg, [&](Rng& rng) {
        Point z = sample_ball_exit(V, center, model.k(), rng);
        return sample_ls_point(model, data, z, cfg, rng);
    });
}

MomentEstimate moment(LSMeasureEstimate const& est, GrowthFunction const& a)
{
    double m1 = 0, m2 = 0;
    for (auto const& [g, atom] : est.atoms)
    {
        double v = a(norm(est.origin + to_point(g) - est.y));
        m1 += atom.p * v;
        m2 += atom.p * v * v;
    }
    double var = std::max(0.0, m2 - m1 * m1);
    return {m1, std::sqrt(var / static_cast<double>(est.effective()))};
}

TailFit fit_exponential_tail(LSMeasureEstimate const& est,
                             std::int64_t min_count)
{
    struct Obs
    {
        double x, y, w;
    };
    std::vector<Obs> obs;
    for (auto const& [g, atom] : est.atoms)
    {
        if (atom.count < min_count)
            continue;
        obs.push_back({norm(est.origin + to_point(g) - est.y),
                       std::log(atom.p),
                       static_cast<double>(atom.count)});
    }
    TailFit fit;
    fit.n_points = static_cast<int>(obs.size());
    if (obs.size() < 2)
        return fit;
    double sw = 0, sx = 0, sy = 0;
    for (auto const& o : obs)
    {
        sw += o.w;
        sx += o.w * o.x;
        sy += o.w * o.y;
    }
    double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (auto const& o : obs)
    {
        sxx += o.w * (o.x - mx) * (o.x - mx);
        sxy += o.w * (o.x - mx) * (o.y - my);
    }
    if (sxx <= 0)
        return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;

    // Var(ln p_hat) ~ 1/count; inflate by the reduced chi-square when the
    // exponential model leaves extra scatter (lattice anisotropy).
    double chi2 = 0;
    for (auto const& o : obs)
    {
        double r = o.y - fit.intercept - fit.slope * o.x;
        chi2 += o.w * r * r;
    }
    double scale = obs.size() > 2 ? std::max(1.0, chi2 / (obs.size() - 2)) : 1.0;
    fit.slope_stderr = std::sqrt(scale / sxx);
    return fit;
}

//---------------------------------------------------------------------------//
std::vector<GroupElement> lattice_window(int k, std::int64_t radius)
{
    std::vector<GroupElement> out;
    std::array<std::int64_t, kMaxDim> lo{0, 0, 0}, hi{0, 0, 0};
    for (int i = 0; i < k; ++i)
    {
        lo[i] = -radius;
        hi[i] = radius;
    }
    for (auto a = lo[0]; a <= hi[0]; ++a)
        for (auto b = lo[1]; b <= hi[1]; ++b)
            for (auto c = lo[2]; c <= hi[2]; ++c)
                out.push_back({{a, b, c}});
    return out;
}

MeasureComparison compare_measures(LSMeasureEstimate const& a,
                                   LSMeasureEstimate const& b,
                                   std::int64_t window,
                                   double multiplier)
{
    MeasureComparison cmp;
    for (auto const& g : lattice_window(std::max(a.k, b.k), window))
    {
        AtomEstimate ea = a.at(g);
        AtomEstimate eb = b.at(g);
        if (ea.count == 0 && eb.count == 0)
            continue;
        // Unobserved atoms get the one-count standard error of their run.
        double sa = ea.count ? ea.std_error : 1.0 / a.effective();
        double sb = eb.count ? eb.std_error : 1.0 / b.effective();
        double s = std::sqrt(sa * sa + sb * sb);
        cmp.tv += 0.5 * std::abs(ea.p - eb.p);
        cmp.bound += 0.5 * multiplier * s;
        cmp.atoms.push_back({g, ea.p, eb.p, (ea.p - eb.p) / s});
    }
    return cmp;
}

}  // namespace lsl
