// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lsl/diffusion.hpp"
#include "lsl/group_walk.hpp"
#include "lsl/ls_core.hpp"
#include "lsl/parallel.hpp"
#include "lsl/transfer.hpp"

using namespace lsl;

namespace
{
struct Verdict
{
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, std::string const& what)
    {
        if (!ok)
        {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double binomial_sigma(double p, double n)
{
    return std::sqrt(p * (1 - p) / n);
}

std::int64_t binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n)
        return 0;
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

LSMeasureEstimate sample(int k, Point y, std::int64_t n, std::uint64_t seed)
{
    EngineConfig cfg;
    cfg.seed = seed;
    return estimate_measure(LatticeModel(k), LSData::make(k, 0.1, 0.4), y, n, cfg);
}

double first_coordinate(GroupElement const& g)
{
    return static_cast<double>(g.c[0]);
}

//---------------------------------------------------------------------------//
void a1(Verdict& v)
{
    int checked = 0;
    for (int k = 1; k <= 3; ++k)
    {
        for (auto const& mu : {AnalyticMeasure::lazy_srw(k, 0.1), AnalyticMeasure::geometric(k, 0.5)})
        {
            for (int d = 0; d <= 4; ++d)
            {
                auto h = harmonic_dim(mu, k, d, 1e-8);
                auto formula = binomial(k + d, k) - binomial(k + d - 2, k);
                v.require(h.dim == formula, mu.describe() + " k=" + std::to_string(k) + " d="
                                                + std::to_string(d) + " dim "
                                                + std::to_string(h.dim) + " vs "
                                                + std::to_string(formula));
                ++checked;
            }
        }
    }
    v.detail << checked << " (k, d, measure) cases";
}

void a2(Verdict& v, LSMeasureEstimate const& est)
{
    double total = 0;
    for (auto const& [g, a] : est.atoms)
        total += a.p;
    v.require(std::abs(total - 1) <= 1e-12, "atoms sum to 1");

    double worst = 0;
    for (std::int64_t n = 1; n <= 3; ++n)
    {
        auto p = est.at(GroupElement{{n, 0, 0}});
        auto m = est.at(GroupElement{{-n, 0, 0}});
        double sigma = std::hypot(p.std_error, m.std_error);
        double z = sigma > 0 ? std::abs(p.p - m.p) / sigma : 0;
        worst = std::max(worst, z);
        v.require(std::abs(p.p - m.p) <= 4 * sigma, "reflection at n=" + std::to_string(n));
    }
    double censored = double(est.censored) / double(est.n_samples);
    v.require(censored <= 1e-3, "censoring");
    v.detail << "sum-1=" << total - 1 << " max reflection z=" << worst
             << " censored=" << censored;
}

void a3(Verdict& v, LSMeasureEstimate const& est, LSData const& data)
{
    double C = harnack_constant(data.k(), data.r_F(), data.r_V());
    double theta = 1 - 1 / (C * C);
    auto n = static_cast<double>(est.effective());
    double worst = -1;
    for (int s = 1; s <= 10; ++s)
    {
        double bound = std::pow(theta, s);
        double allowed = bound + 4 * binomial_sigma(bound, n);
        worst = std::max(worst, est.stage_tail(s) / allowed);
        v.require(est.stage_tail(s) <= allowed, "P(stages > " + std::to_string(s) + ")");
    }
    v.detail << "k=" << data.k() << " C=" << C << " worst tail/allowed=" << worst;
}

void a4(Verdict& v)
{
    auto big = sample(2, {0, 0, 0}, 100000, 401);
    auto small = sample(2, {0, 0, 0}, 25000, 402);
    TailFit fit = fit_exponential_tail(big);
    v.require(fit.slope < 0 && std::abs(fit.z()) >= 3, "tail slope negative with |z| >= 3");

    auto a = GrowthFunction::exponential(fit.rate() / 2);
    auto m1 = moment(big, a);
    auto m2 = moment(small, a);
    bool finite = std::isfinite(m1.value) && std::isfinite(m2.value)
                  && std::isfinite(m1.std_error) && std::isfinite(m2.std_error);
    v.require(finite, "finite exponential moment");
    double sigma = std::hypot(m1.std_error, m2.std_error);
    v.require(std::abs(m1.value - m2.value) <= 4 * sigma, "moment stable across sizes");
    v.detail << "rate=" << fit.rate() << " z=" << fit.z() << " E[exp(rate/2 |g|)] = "
             << m2.value << " (2.5e4) vs " << m1.value << " (1e5)";
}

void a5(Verdict& v)
{
    LatticeModel m(1);
    std::uint64_t seed = 501;
    for (double y : {0.25, 0.5})
    {
        auto est = sample(1, {y, 0, 0}, 100000, seed++);
        auto ext = extend(m, first_coordinate, GrowthFunction::polynomial(1), est);
        v.require(std::abs(ext.value - y) <= 4 * ext.sigma, "barycenter at y=" + std::to_string(y));
        v.detail << "y=" << y << ": " << ext.value << " +- " << ext.sigma << "  ";
    }
}

void a6(Verdict& v)
{
    LatticeModel m(2);
    auto est = sample(2, {0, 0, 0}, 100000, 601);
    auto f = [](char const* text) {
        return HarmonicTestFunction::polynomial(parse_polynomial(2, text));
    };
    auto saddle = restriction_residual(m, f("x^2 - y^2"), est);
    auto cross = restriction_residual(m, f("x*y"), est);
    auto control = restriction_residual(m, f("x^2"), est);
    v.require(saddle.within(4), "x^2 - y^2");
    v.require(cross.within(4), "x*y");
    v.require(control.residual > 4 * control.sigma, "x^2 control");
    v.detail << "x^2-y^2: " << saddle.residual << " +- " << saddle.sigma << "  xy: "
             << cross.residual << " +- " << cross.sigma << "  x^2: " << control.residual
             << " +- " << control.sigma;
}

void a7(Verdict& v)
{
    LatticeModel m(2);
    auto data = LSData::make(2, 0.1, 0.4);
    EngineConfig a, b;
    a.seed = 701;
    b.seed = 702;
    auto direct = estimate_measure(m, data, {0, 0, 0}, 100000, a);
    auto mixture = estimate_exit_mixture(m, data, GroupElement{}, 100000, b);
    auto cmp = compare_measures(direct, mixture, 2, 4);
    v.require(cmp.pass(), "TV within 4 sigma");
    v.detail << "TV=" << cmp.tv << " bound=" << cmp.bound;
}

void a8(Verdict& v)
{
    LatticeModel model(3);
    auto data = LSData::balanced(3, 0.4, 0.5968310365946075);
    Point y{0.5, 0.5, 0.5};
    std::vector<GroupElement> targets{{{2, 0, 0}}, {{0, 3, 0}}, {{2, 2, 1}}};
    EngineConfig e0, ey;
    e0.seed = 801;
    ey.seed = 802;
    auto est0 = std::make_shared<LSMeasureEstimate const>(
        estimate_measure(model, data, {0, 0, 0}, 200000, e0));
    auto esty = estimate_measure(model, data, y, 200000, ey);
    InducedMeasure mu{est0};
    auto props = check_properties(mu, true);
    v.require(props.symmetry.pass, "P2 symmetry");

    WalkGreenOptions opts;
    opts.n_walks = 20000;
    opts.horizon = 2000;
    opts.seed = 803;
    auto greens = walk_green(mu, GroupElement{}, &esty, targets, opts);
    double bc = *data.B() * data.C();
    v.detail << "B*C=" << bc;
    for (std::size_t i = 0; i < targets.size(); ++i)
    {
        Point x = model.lattice_point(targets[i]);
        double G = 1 / (4 * kPi * norm(x - y));
        double ratio = G / greens[i].g;
        v.require(std::abs(ratio / bc - 1) <= 0.15, "ratio at " + to_string(targets[i], 3));
        v.detail << "  |x|=" << norm(x) << ": " << ratio;
    }
    v.detail << "  max symmetry z=" << props.max_symmetry_z;
}

void a9(Verdict& v)
{
    EngineConfig cfg;
    cfg.seed = 901;
    auto rep = covering_check(LatticeModel(2), LSData::make(2, 0.1, 0.4), {0.5, 0.5, 0},
                              100000, cfg, 3, 1);
    v.require(rep.pass(), "plane vs cylinder");
    v.detail << "TV=" << rep.tv << " bound=" << rep.bound << " cover mass=" << rep.cover_mass;
}

//---------------------------------------------------------------------------//
double grid_harnack(int k, double r_F, double r_V)
{
    Ball ball{{0, 0, 0}, r_V};
    double best = 1;
    int n = 100;
    for (int i = 0; i < n; ++i)
    {
        double rho = k == 1 ? -r_F + 2 * r_F * i / (n - 1) : r_F * i / (n - 1);
        for (int j = 0; j < n; ++j)
        {
            Point z;
            if (k == 1)
            {
                if (j > 1)
                    break;
                z = {j == 0 ? -r_V : r_V, 0, 0};
            }
            else
            {
                double th = kPi * j / (n - 1);
                z = {r_V * std::cos(th), r_V * std::sin(th), 0};
            }
            double ratio = poisson_density(ball, {rho, 0, 0}, z, k)
                           / poisson_density(ball, {}, z, k);
            best = std::max({best, ratio, 1 / ratio});
        }
    }
    return best;
}

// Bin a hit by lattice index and quadrant around it.
std::map<std::pair<GroupElement, int>, double> hit_law(LatticeModel const& model,
                                                       Point const& y,
                                                       EngineConfig const& cfg,
                                                       int n)
{
    std::map<std::pair<GroupElement, int>, double> law;
    Rng rng = make_stream(cfg.seed, 0);
    for (int i = 0; i < n; ++i)
    {
        auto hit = hit_periodic_F(model, 0.1, y, cfg, rng);
        Point d = hit.point - model.lattice_point(hit.lattice_index);
        int quadrant = (d[0] >= 0 ? 0 : 1) + (d[1] >= 0 ? 0 : 2);
        law[{hit.lattice_index, quadrant}] += 1.0 / n;
    }
    return law;
}

void a10(Verdict& v)
{
    double worst = 0;
    for (int k = 1; k <= 3; ++k)
    {
        for (auto [rf, rv] : {std::pair{0.1, 0.4}, std::pair{0.2, 0.5}, std::pair{0.05, 0.45}})
        {
            double diff = std::abs(harnack_constant(k, rf, rv) - grid_harnack(k, rf, rv));
            worst = std::max(worst, diff);
        }
    }
    v.require(worst <= 1e-6, "harnack_constant vs grid");
    v.detail << "harnack grid diff=" << worst;

    // Gambler's ruin: from 0.5 in (-1, 1), exit at +1 with probability 3/4.
    Ball unit{{0, 0, 0}, 1.0};
    Rng rng = make_stream(1001, 0);
    int n = 100000;
    int plus = 0;
    for (int i = 0; i < n; ++i)
        plus += sample_ball_exit(unit, {0.5, 0, 0}, 1, rng)[0] > 0;
    v.require(std::abs(plus / double(n) - 0.75) <= 4 * binomial_sigma(0.75, n), "k=1 ruin");

    // Planar Poisson kernel: mass of the arc |theta| < 0.1 from (0.9, 0).
    double rho = 0.9;
    int m = 20000;
    double arc = 0;
    for (int i = 0; i <= m; ++i)
    {
        double th = -0.1 + 0.2 * i / m;
        double w = (i == 0 || i == m) ? 0.5 : 1.0;
        arc += w * (1 - rho * rho) / (2 * kPi * (1 - 2 * rho * std::cos(th) + rho * rho));
    }
    arc *= 0.2 / m;
    int in_arc = 0;
    for (int i = 0; i < n; ++i)
    {
        Point z = sample_ball_exit(unit, {rho, 0, 0}, 2, rng);
        in_arc += std::abs(std::atan2(z[1], z[0])) < 0.1;
    }
    v.require(std::abs(in_arc / double(n) - arc) <= 4 * binomial_sigma(arc, n), "k=2 arc");

    // Spatial kernel: hemisphere {z_x > 0} from (0.5, 0, 0).
    double r3 = 0.5;
    double hemi = (1 - r3 * r3) / (2 * r3) * (1 / (1 - r3) - 1 / std::sqrt(1 + r3 * r3));
    int upper = 0;
    for (int i = 0; i < n; ++i)
        upper += sample_ball_exit(unit, {r3, 0, 0}, 3, rng)[0] > 0;
    v.require(std::abs(upper / double(n) - hemi) <= 4 * binomial_sigma(hemi, n), "k=3 hemisphere");
    v.detail << "  ruin " << plus / double(n) << "/0.75 arc " << in_arc / double(n) << "/"
             << arc << " hemisphere " << upper / double(n) << "/" << hemi;

    LatticeModel plane(2);
    EngineConfig wos, em;
    wos.seed = 1002;
    em.engine = Engine::EM;
    em.seed = 1003;
    Point y{0.3, 0.15, 0};
    auto lw = hit_law(plane, y, wos, 100000);
    auto le = hit_law(plane, y, em, 100000);
    for (auto const& [key, p] : le)
        lw.try_emplace(key, 0.0);
    double tv = 0;
    for (auto const& [key, p] : lw)
        tv += std::abs(p - (le.count(key) ? le.at(key) : 0.0)) / 2;
    v.require(tv <= 0.02, "WoS vs EM hitting TV");
    v.detail << "  WoS/EM TV=" << tv;

    TrigTerm s;
    s.freq = {1, 0, 0};
    s.sin_coef = 1;
    TrigTerm a, b;
    a.freq = {1, 0, 0};
    a.cos_coef = 1;
    b.freq = {1, 1, 0};
    b.sin_coef = 0.5;
    double r1 = LatticeModel(1, TrigPolynomial(2.0, {s})).renormalize().max_residual;
    double r2 = LatticeModel(2, TrigPolynomial(3.0, {a, b})).renormalize().max_residual;
    v.require(std::max(r1, r2) <= 1e-6, "renormalize residual");
    v.detail << "  renormalize residual=" << std::max(r1, r2);
}

bool report(char const* id, std::function<void(Verdict&)> const& body)
{
    Verdict v;
    auto start = std::chrono::steady_clock::now();
    try
    {
        body(v);
    }
    catch (std::exception const& e)
    {
        v.pass = false;
        v.detail << " [exception: " << e.what() << "]";
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s  %s  (%.1fs)\n", id, v.pass ? "PASS" : "FAIL", v.detail.str().c_str(), secs);
    std::fflush(stdout);
    return v.pass;
}
}  // namespace

int main()
{
    bool ok = true;
    std::optional<LSMeasureEstimate> k1;

    ok &= report("A1", a1);
    ok &= report("A2", [&](Verdict& v) {
        k1 = sample(1, {0, 0, 0}, 100000, 201);
        a2(v, *k1);
    });
    ok &= report("A3", [&](Verdict& v) {
        if (!k1)
            k1 = sample(1, {0, 0, 0}, 100000, 201);
        a3(v, *k1, LSData::make(1, 0.1, 0.4));
        v.detail << "; ";
        a3(v, sample(2, {0, 0, 0}, 100000, 301), LSData::make(2, 0.1, 0.4));
    });
    ok &= report("A4", a4);
    ok &= report("A5", a5);
    ok &= report("A6", a6);
    ok &= report("A7", a7);
    ok &= report("A8", a8);
    ok &= report("A9", a9);
    ok &= report("A10", a10);
    std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
    return ok ? 0 : 1;
}
