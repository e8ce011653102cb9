#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "lsl/group_walk.hpp"

using namespace lsl;

namespace
{
std::int64_t formula(int k, int d)
{
    return poly_space_dim(k, d) - poly_space_dim(k, d - 2);
}

LatticePolynomial random_polynomial(int k, int d, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    LatticePolynomial p(k);
    for (auto const& a : monomials(k, d))
        p += LatticePolynomial::monomial(k, a, u(rng));
    return p;
}
}  // namespace

TEST_CASE("poly_space_dim examples")
{
    CHECK(poly_space_dim(2, 2) == 6);
    CHECK(poly_space_dim(3, 1) == 4);
    for (int k : {1, 2, 3})
    {
        CHECK(poly_space_dim(k, -1) == 0);
        CHECK(poly_space_dim(k, -2) == 0);
        CHECK(poly_space_dim(k, 0) == 1);
        for (int d = 0; d <= 6; ++d)
            CHECK(poly_space_dim(k, d) == static_cast<std::int64_t>(monomials(k, d).size()));
    }
}

TEST_CASE("partial_derivative examples")
{
    auto zero = partial_derivative(LatticePolynomial::constant(2, 3.5), {{1, -2, 0}});
    CHECK(zero.is_zero());

    auto d1 = partial_derivative(parse_polynomial(1, "x^2"), {{1, 0, 0}});
    CHECK(d1.coefficient({1, 0, 0}) == 2);
    CHECK(d1.coefficient({0, 0, 0}) == 1);
    CHECK(d1.degree() == 1);

    auto d2 = partial_derivative(parse_polynomial(2, "x*y"), {{1, 0, 0}});
    CHECK(d2.coefficients().size() == 1);
    CHECK(d2.coefficient({0, 1, 0}) == 1);

    auto f = [](GroupElement const& g) { return double(g.c[0] * g.c[0]); };
    auto df = partial_derivative(std::function<double(GroupElement const&)>(f), {{1, 0, 0}});
    for (std::int64_t n = -5; n <= 5; ++n)
        CHECK(df({{n, 0, 0}}) == 2 * n + 1);
}

TEST_CASE("partial derivatives drop the degree")
{
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> step(-3, 3);
    for (int k : {1, 2, 3})
    {
        for (int d = 1; d <= 5; ++d)
        {
            auto p = random_polynomial(k, d, rng);
            GroupElement g{};
            for (int i = 0; i < k; ++i)
                g.c[i] = step(rng);
            if (g == GroupElement{})
                g.c[0] = 1;
            auto dp = partial_derivative(p, g).cleaned(1e-12);
            CHECK(dp.degree() <= d - 1);
            // Exact against pointwise differences.
            for (int t = 0; t < 20; ++t)
            {
                GroupElement h{};
                for (int i = 0; i < k; ++i)
                    h.c[i] = step(rng);
                CHECK(dp(h) == doctest::Approx(p(h + g) - p(h)).epsilon(1e-12).scale(1));
            }
        }
    }
}

TEST_CASE("delta_mu examples")
{
    InducedMeasure geo(AnalyticMeasure::geometric(1, 0.5));
    InducedMeasure lazy(AnalyticMeasure::lazy_srw(1, 0.1));

    auto c = LatticePolynomial::constant(1, 2.0);
    CHECK(delta_mu(geo, c, {{3, 0, 0}}, 10).value == 0);
    CHECK(delta_mu(lazy, c, {{3, 0, 0}}, 10).value == 0);
    for (std::int64_t y = -4; y <= 4; ++y)
    {
        auto v = delta_mu(lazy, parse_polynomial(1, "x"), {{y, 0, 0}}, 1);
        CHECK(v.value == 0);
        CHECK(v.tail_bound == 0);
    }

    // Brute-force second moment of the geometric law.
    double q = 0.5;
    double brute = 0;
    for (int n = -60; n <= 60; ++n)
        brute += double(n) * n * (1 - q) / (1 + q) * std::pow(q, std::abs(n));
    CHECK(std::abs(brute - 2 * q / ((1 - q) * (1 - q))) <= 1e-10);
    CHECK(std::abs(geometric_coordinate_moment(q, 2) - brute) <= 1e-10);
    auto m2 = delta_mu(geo, parse_polynomial(1, "x^2"), {}, 60);
    CHECK(std::abs(m2.value - brute) <= 1e-10);
    // The tail bound dominates the true remainder.
    double rest = 0;
    for (int n = 61; n <= 400; ++n)
        rest += 2 * double(n) * n * (1 - q) / (1 + q) * std::pow(q, n);
    CHECK(m2.tail_bound >= rest);
    CHECK(m2.tail_bound < 1e-10);

    auto generic = delta_mu(geo, [](GroupElement const& g) { return double(g.c[0] * g.c[0]); }, {}, 60);
    CHECK(std::isinf(generic.tail_bound));
}

TEST_CASE("closed-form moments match brute-force sums")
{
    for (double q : {0.2, 0.5, 0.7})
    {
        for (int s = 0; s <= 8; ++s)
        {
            double brute = 0, absolute = 0;
            for (int n = -400; n <= 400; ++n)
            {
                double t = std::pow(double(n), s) * (1 - q) / (1 + q) * std::pow(q, std::abs(n));
                brute += t;
                absolute += std::abs(t);
            }
            CAPTURE(q);
            CAPTURE(s);
            CHECK(std::abs(geometric_coordinate_moment(q, s) - brute) <= 1e-12 * absolute);
        }
    }
    for (int k : {1, 2, 3})
    {
        for (auto const& mu : {AnalyticMeasure::lazy_srw(k, 0.3), AnalyticMeasure::geometric(k, 0.4)})
        {
            std::int64_t r = mu.support_radius() > 0 ? mu.support_radius() : (k == 3 ? 40 : 60);
            for (auto const& a : monomials(k, 4))
            {
                double brute = 0;
                for (auto const& g : lattice_window(k, r))
                {
                    double v = mu.weight(g);
                    for (int i = 0; i < k; ++i)
                        v *= std::pow(double(g.c[i]), a[i]);
                    brute += v;
                }
                CHECK(mu.moment(a) == doctest::Approx(brute).epsilon(1e-9).scale(1));
            }
        }
    }
}

TEST_CASE("harmonic_dim examples")
{
    auto h1 = harmonic_dim(AnalyticMeasure::geometric(1, 0.5), 1, 2);
    CHECK(h1.dim == 2);
    for (auto const& p : h1.basis)
        CHECK(std::abs(p.coefficient({2, 0, 0})) < 1e-10);

    auto h2 = harmonic_dim(AnalyticMeasure::lazy_srw(2, 0.1), 2, 2);
    CHECK(h2.dim == 5);
    auto lazy = AnalyticMeasure::lazy_srw(2, 0.1);
    CHECK(apply_delta_mu(lazy, parse_polynomial(2, "x^2 - y^2")).cleaned(1e-14).is_zero());
    CHECK(apply_delta_mu(lazy, parse_polynomial(2, "x*y")).cleaned(1e-14).is_zero());
    CHECK_FALSE(apply_delta_mu(lazy, parse_polynomial(2, "x^2")).cleaned(1e-14).is_zero());
}

TEST_CASE("harmonic_dim matches the dimension formula")
{
    for (int k : {1, 2, 3})
    {
        for (int d = 0; d <= 4; ++d)
        {
            for (auto const& mu : {AnalyticMeasure::lazy_srw(k, 0.1),
                                   AnalyticMeasure::lazy_srw(k, 0.0),
                                   AnalyticMeasure::geometric(k, 0.5),
                                   AnalyticMeasure::geometric(k, 0.2)})
            {
                auto h = harmonic_dim(mu, k, d);
                CAPTURE(k);
                CAPTURE(d);
                CAPTURE(mu.describe());
                CHECK(h.dim == formula(k, d));
                CHECK(h.basis.size() == static_cast<std::size_t>(h.dim));
            }
        }
    }
    CHECK(formula(2, 2) == 5);
    CHECK(formula(3, 2) == 9);
    CHECK(formula(1, 3) == 2);
}

TEST_CASE("harmonic basis polynomials are mu-harmonic pointwise")
{
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<int> coord(-6, 6);
    for (int k : {1, 2, 3})
    {
        std::vector<AnalyticMeasure> mus{AnalyticMeasure::lazy_srw(k, 0.2)};
        if (k < 3)
            mus.push_back(AnalyticMeasure::geometric(k, 0.3));
        for (auto const& am : mus)
        {
            InducedMeasure mu(am);
            auto h = harmonic_dim(am, k, 4);
            for (auto const& p : h.basis)
            {
                for (int t = 0; t < 50; ++t)
                {
                    GroupElement y{};
                    for (int i = 0; i < k; ++i)
                        y.c[i] = coord(rng);
                    auto v = delta_mu(mu, p, y, am.support_radius() > 0 ? 1 : 40);
                    CHECK(std::abs(v.value) <= 1e-8 * (1 + p.l1()) * std::pow(7.0, 4));
                }
            }
        }
    }
}

TEST_CASE("harmonic spaces are nested in d")
{
    for (int k : {1, 2, 3})
    {
        auto mu = AnalyticMeasure::geometric(k, 0.5);
        for (int d = 0; d < 4; ++d)
        {
            auto small = harmonic_dim(mu, k, d);
            auto big = harmonic_dim(mu, k, d + 1);
            auto idx = monomials(k, d + 1);
            Eigen::MatrixXd B(idx.size(), big.dim);
            for (int j = 0; j < big.dim; ++j)
                for (std::size_t i = 0; i < idx.size(); ++i)
                    B(i, j) = big.basis[j].coefficient(idx[i]);
            for (auto const& p : small.basis)
            {
                Eigen::VectorXd v(idx.size());
                for (std::size_t i = 0; i < idx.size(); ++i)
                    v(i) = p.coefficient(idx[i]);
                Eigen::VectorXd c = B.colPivHouseholderQr().solve(v);
                CHECK((B * c - v).norm() <= 1e-9 * (1 + v.norm()));
            }
        }
    }
}

TEST_CASE("walk_green reproduces the simple random walk return value on Z^3")
{
    // Expected visits to the origin of SRW on Z^3, counting time 0.
    constexpr double watson = 1.5163860591519780;
    InducedMeasure srw(AnalyticMeasure::lazy_srw(3, 0.0));
    WalkGreenOptions opts;
    opts.n_walks = 20000;
    opts.horizon = 2000;
    opts.seed = 3;
    auto g = walk_green(srw, {}, nullptr, GroupElement{}, opts);
    CAPTURE(g.g);
    CAPTURE(g.std_error);
    CAPTURE(g.tail);
    CHECK(g.g >= 1);
    CHECK(std::abs(g.g - watson) <= 3 * g.std_error + 0.25 * g.tail);
    CHECK(g.tail > 0);
    CHECK(g.tail < 0.05 * g.g);
}

TEST_CASE("walk_green decays with distance and rejects recurrent walks")
{
    InducedMeasure geo(AnalyticMeasure::geometric(3, 0.3));
    WalkGreenOptions opts;
    opts.n_walks = 10000;
    opts.horizon = 1000;
    opts.seed = 4;
    auto gs = walk_green(geo, {}, nullptr,
                         {GroupElement{{0, 0, 0}}, GroupElement{{2, 0, 0}},
                          GroupElement{{3, 0, 0}}, GroupElement{{4, 0, 0}}},
                         opts);
    CHECK(gs[0].g >= 1);
    for (std::size_t i = 1; i + 1 < gs.size(); ++i)
    {
        CHECK(gs[i].g - gs[i + 1].g > 3 * std::hypot(gs[i].std_error, gs[i + 1].std_error));
    }

    InducedMeasure plane(AnalyticMeasure::geometric(2, 0.3));
    CHECK_THROWS_AS(walk_green(plane, {}, nullptr, GroupElement{}, opts), DomainError);
}

TEST_CASE("walk_green is deterministic across worker counts")
{
    InducedMeasure geo(AnalyticMeasure::geometric(3, 0.3));
    WalkGreenOptions opts;
    opts.n_walks = 3000;
    opts.horizon = 200;
    opts.seed = 8;
    auto a = walk_green(geo, {}, nullptr, GroupElement{{2, 0, 0}}, opts);
    opts.workers = 3;
    auto b = walk_green(geo, {}, nullptr, GroupElement{{2, 0, 0}}, opts);
    CHECK(a.g == b.g);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("check_properties")
{
    auto geo = check_properties(InducedMeasure(AnalyticMeasure::geometric(2, 0.5)), true);
    CHECK(geo.support.pass);
    CHECK(geo.symmetry.pass);
    CHECK(geo.moments.pass);
    CHECK(geo.pass());
    CHECK(geo.tail_rate == doctest::Approx(std::log(2.0)));

    auto lazy = check_properties(InducedMeasure(AnalyticMeasure::lazy_srw(2, 0.1)), false);
    CHECK_FALSE(lazy.support.pass);
    CHECK_FALSE(lazy.pass());

    // k=1 empirical: symmetric by reflection although recurrent.
    LatticeModel m(1);
    EngineConfig cfg;
    cfg.seed = 23;
    auto est = std::make_shared<LSMeasureEstimate const>(
        estimate_measure(m, LSData::make(1, 0.1, 0.4), {0, 0, 0}, 50000, cfg));
    InducedMeasure emp(est);
    CHECK(emp.weight({}) == est->at({}).p);
    auto r = check_properties(emp, false);
    CHECK(r.symmetry.pass);
    CHECK_FALSE(r.symmetry.asserted);
    CHECK(r.max_symmetry_z <= 4);
}

TEST_CASE("empirical sampler follows the estimate")
{
    LatticeModel m(2);
    EngineConfig cfg;
    cfg.seed = 29;
    auto est = std::make_shared<LSMeasureEstimate const>(
        estimate_measure(m, LSData::make(2, 0.1, 0.4), {0, 0, 0}, 20000, cfg));
    InducedMeasure mu(est);
    InducedMeasure::Sampler s(mu);
    Rng rng = make_stream(1, 2);
    int n = 100000, at_zero = 0;
    for (int i = 0; i < n; ++i)
        at_zero += s.sample(rng) == GroupElement{};
    double p = est->at({}).p;
    CHECK(std::abs(at_zero / double(n) - p) <= 4 * std::sqrt(p * (1 - p) / n));
    for (auto const& [g, a] : est->atoms)
        CHECK(s.weight(g) == a.p);
    CHECK(s.weight({{1000, 0, 0}}) == 0);
}
