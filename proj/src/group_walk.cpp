#include "lsl/group_walk.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

namespace lsl
{
namespace
{
template<class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template<class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dim(int k)
{
    if (k < 1 || k > kMaxDim)
        throw DomainError("dimension must be 1, 2 or 3");
}

//! Eulerian numbers A(s, m), m = 0..s-1, so sum_{n>=1} n^s q^n =
//! q A_s(q) / (1-q)^(s+1).
std::vector<double> eulerian_row(int s)
{
    std::vector<double> row{1.0};
    for (int n = 1; n <= s; ++n)
    {
        std::vector<double> next(static_cast<std::size_t>(n), 0.0);
        for (int m = 0; m < n; ++m)
        {
            double a = m >= 1 ? row[m - 1] : 0.0;
            double b = m < static_cast<int>(row.size()) ? row[m] : 0.0;
            next[m] = (n - m) * a + (m + 1) * b;
        }
        row = std::move(next);
    }
    return row;
}

double window_distance_bound(GroupElement const& y, std::int64_t s, int k)
{
    return norm(y) + std::sqrt(static_cast<double>(k)) * static_cast<double>(s);
}
}  // namespace

//---------------------------------------------------------------------------//
double geometric_coordinate_moment(double q, int s)
{
    if (s < 0)
        throw DomainError("moment order must be nonnegative");
    if (s == 0)
        return 1;
    if (s % 2 == 1)
        return 0;
    double poly = 0;
    auto row = eulerian_row(s);
    for (std::size_t m = row.size(); m-- > 0;)
        poly = poly * q + row[m];
    return 2 * (1 - q) / (1 + q) * q * poly / std::pow(1 - q, s + 1.0);
}

AnalyticMeasure::AnalyticMeasure(int k, Kind kind) : k_(k), kind_(kind)
{
    check_dim(k);
}

AnalyticMeasure AnalyticMeasure::lazy_srw(int k, double hold)
{
    if (!(hold >= 0 && hold < 1))
        throw DomainError("lazy walk holding probability must lie in [0, 1)");
    return AnalyticMeasure(k, LazySRW{hold});
}

AnalyticMeasure AnalyticMeasure::geometric(int k, double q)
{
    if (!(q > 0 && q < 1))
        throw DomainError("geometric parameter q must lie in (0, 1)");
    return AnalyticMeasure(k, GeometricProduct{q});
}

double AnalyticMeasure::weight(GroupElement const& g) const
{
    for (int i = k_; i < kMaxDim; ++i)
    {
        if (g.c[i] != 0)
            return 0;
    }
    return std::visit(
        Overloaded{
            [&](LazySRW const& m) {
                std::int64_t l1 = 0;
                for (int i = 0; i < k_; ++i)
                    l1 += std::abs(g.c[i]);
                if (l1 == 0)
                    return m.hold;
                return l1 == 1 ? (1 - m.hold) / (2 * k_) : 0.0;
            },
            [&](GeometricProduct const& m) {
                double w = 1;
                for (int i = 0; i < k_; ++i)
                {
                    w *= (1 - m.q) / (1 + m.q)
                         * std::pow(m.q, static_cast<double>(std::abs(g.c[i])));
                }
                return w;
            }},
        kind_);
}

double AnalyticMeasure::moment(MultiIndex const& a) const
{
    for (int i = k_; i < kMaxDim; ++i)
    {
        if (a[i] != 0)
            return 0;
    }
    return std::visit(
        Overloaded{[&](LazySRW const& m) {
                       int nonzero = 0;
                       bool even = true;
                       for (int i = 0; i < k_; ++i)
                       {
                           if (a[i] > 0)
                           {
                               ++nonzero;
                               even = even && a[i] % 2 == 0;
                           }
                       }
                       if (nonzero == 0)
                           return 1.0;
                       return nonzero == 1 && even ? (1 - m.hold) / k_ : 0.0;
                   },
                   [&](GeometricProduct const& m) {
                       double v = 1;
                       for (int i = 0; i < k_; ++i)
                           v *= geometric_coordinate_moment(m.q, a[i]);
                       return v;
                   }},
        kind_);
}

double AnalyticMeasure::tail_mass(std::int64_t m) const
{
    if (m < 0)
        return 1;
    return std::visit(
        Overloaded{[&](LazySRW const& w) { return m == 0 ? 1 - w.hold : 0.0; },
                   [&](GeometricProduct const& w) {
                       // P(|g_i| > m) per coordinate; 1 - (1 - e)^k without
                       // cancellation for tiny e.
                       double e = 2 * std::pow(w.q, m + 1.0) / (1 + w.q);
                       return -std::expm1(k_ * std::log1p(-e));
                   }},
        kind_);
}

std::int64_t AnalyticMeasure::support_radius() const
{
    return std::holds_alternative<LazySRW>(kind_) ? 1 : -1;
}

GroupElement AnalyticMeasure::sample(Rng& rng) const
{
    GroupElement g;
    std::visit(Overloaded{[&](LazySRW const& m) {
                              std::uniform_real_distribution<double> u(0, 1);
                              if (u(rng) < m.hold)
                                  return;
                              std::uniform_int_distribution<int> pick(0, 2 * k_ - 1);
                              int j = pick(rng);
                              g.c[j / 2] = j % 2 == 0 ? 1 : -1;
                          },
                          [&](GeometricProduct const& m) {
                              // Difference of two geometric variables is
                              // two-sided geometric with the same q.
                              std::geometric_distribution<std::int64_t> geo(1 - m.q);
                              for (int i = 0; i < k_; ++i)
                                  g.c[i] = geo(rng) - geo(rng);
                          }},
               kind_);
    return g;
}

std::string AnalyticMeasure::describe() const
{
    std::ostringstream os;
    std::visit(Overloaded{[&](LazySRW const& m) { os << "lazy(hold=" << m.hold << ")"; },
                          [&](GeometricProduct const& m) {
                              os << "geometric(q=" << m.q << ")";
                          }},
               kind_);
    os << " on Z^" << k_;
    return os.str();
}

//---------------------------------------------------------------------------//
InducedMeasure::InducedMeasure(AnalyticMeasure analytic)
    : analytic_(std::move(analytic))
{
}

InducedMeasure::InducedMeasure(std::shared_ptr<LSMeasureEstimate const> empirical)
    : empirical_(std::move(empirical))
{
    if (!empirical_)
        throw DomainError("empirical measure is null");
}

int InducedMeasure::k() const
{
    return empirical_ ? empirical_->k : analytic_->k();
}

LSMeasureEstimate const& InducedMeasure::empirical() const
{
    if (!empirical_)
        throw DomainError("measure is analytic");
    return *empirical_;
}

AnalyticMeasure const& InducedMeasure::analytic() const
{
    if (!analytic_)
        throw DomainError("measure is empirical");
    return *analytic_;
}

double InducedMeasure::weight(GroupElement const& g) const
{
    return empirical_ ? empirical_->at(g).p : analytic_->weight(g);
}

double InducedMeasure::std_error(GroupElement const& g) const
{
    return empirical_ ? empirical_->at(g).std_error : 0.0;
}

std::int64_t InducedMeasure::support_radius() const
{
    if (!empirical_)
        return analytic_->support_radius();
    std::int64_t r = 0;
    for (auto const& [g, a] : empirical_->atoms)
        r = std::max(r, norm_inf(g));
    return r;
}

InducedMeasure::Sampler::Sampler(InducedMeasure const& mu) : mu_(&mu)
{
    if (!mu.is_empirical())
        return;
    auto const& est = mu.empirical();
    std::vector<double> w;
    for (auto const& [g, a] : est.atoms)
    {
        atoms_.push_back(g);
        w.push_back(static_cast<double>(a.count));
    }
    if (atoms_.empty())
        throw DomainError("empirical measure has no atoms");
    pick_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    radius_ = mu.support_radius();
    std::size_t side = static_cast<std::size_t>(2 * radius_ + 1);
    std::size_t size = 1;
    for (int i = 0; i < est.k; ++i)
        size *= side;
    dense_.assign(size, 0.0);
    for (auto const& [g, a] : est.atoms)
    {
        std::size_t idx = 0;
        for (int i = est.k - 1; i >= 0; --i)
            idx = idx * side + static_cast<std::size_t>(g.c[i] + radius_);
        dense_[idx] = a.p;
    }
}

GroupElement InducedMeasure::Sampler::sample(Rng& rng) const
{
    if (atoms_.empty())
        return mu_->analytic().sample(rng);
    return atoms_[pick_(rng)];
}

double InducedMeasure::Sampler::weight(GroupElement const& g) const
{
    if (atoms_.empty())
        return mu_->analytic().weight(g);
    int k = mu_->k();
    std::size_t side = static_cast<std::size_t>(2 * radius_ + 1);
    std::size_t idx = 0;
    for (int i = kMaxDim - 1; i >= 0; --i)
    {
        if (i >= k)
        {
            if (g.c[i] != 0)
                return 0;
            continue;
        }
        if (g.c[i] < -radius_ || g.c[i] > radius_)
            return 0;
        idx = idx * side + static_cast<std::size_t>(g.c[i] + radius_);
    }
    return dense_[idx];
}

//---------------------------------------------------------------------------//
namespace
{
DeltaMuValue delta_mu_impl(InducedMeasure const& mu,
                           std::function<double(GroupElement const&)> const& f,
                           GroupElement const& y,
                           std::int64_t truncation,
                           std::function<double(std::int64_t)> const& shell_diff_bound)
{
    if (truncation < 1)
        throw DomainError("truncation radius must be at least 1");
    DeltaMuValue out;
    double fy = f(y);
    if (mu.is_empirical())
    {
        auto const& est = mu.empirical();
        double m2 = 0;
        for (auto const& [g, a] : est.atoms)
        {
            double d = f(y + g) - fy;
            if (norm_inf(g) > truncation)
            {
                out.tail_bound += a.p * std::abs(d);
                continue;
            }
            out.value += a.p * d;
            m2 += a.p * d * d;
        }
        double var = std::max(0.0, m2 - out.value * out.value);
        out.sigma = std::sqrt(var / static_cast<double>(est.effective()));
        return out;
    }

    auto const& am = mu.analytic();
    int k = am.k();
    for (auto const& g : lattice_window(k, truncation))
    {
        double w = am.weight(g);
        if (w > 0)
            out.value += w * (f(y + g) - fy);
    }
    std::int64_t support = am.support_radius();
    if (support >= 0 && support <= truncation)
        return out;
    for (std::int64_t s = truncation + 1; s <= truncation + 100'000; ++s)
    {
        double shell = am.tail_mass(s - 1) - am.tail_mass(s);
        double term = shell * shell_diff_bound(s);
        if (!std::isfinite(term))
        {
            out.tail_bound = std::numeric_limits<double>::infinity();
            break;
        }
        out.tail_bound += term;
        if (am.tail_mass(s) * shell_diff_bound(s) < 1e-18 * (1 + std::abs(out.value)))
        {
            out.tail_bound += am.tail_mass(s) * shell_diff_bound(s);
            break;
        }
    }
    return out;
}
}  // namespace

DeltaMuValue delta_mu(InducedMeasure const& mu,
                      LatticePolynomial const& f,
                      GroupElement const& y,
                      std::int64_t truncation)
{
    double l1 = f.l1();
    int d = std::max(0, f.degree());
    double yinf = static_cast<double>(norm_inf(y));
    // |f(y+g) - f(y)| <= 2 |f|_1 max(1, |y|_inf + s)^d on the shell |g|_inf = s
    auto bound = [&](std::int64_t s) {
        return 2 * l1 * std::pow(std::max(1.0, yinf + static_cast<double>(s)), d);
    };
    return delta_mu_impl(
        mu, [&](GroupElement const& g) { return f(g); }, y, truncation, bound);
}

DeltaMuValue delta_mu(InducedMeasure const& mu,
                      std::function<double(GroupElement const&)> const& f,
                      GroupElement const& y,
                      std::int64_t truncation,
                      GrowthFunction const* growth)
{
    double fy = std::abs(f(y));
    int k = mu.k();
    auto bound = [&](std::int64_t s) {
        if (!growth)
            return std::numeric_limits<double>::infinity();
        return (*growth)(window_distance_bound(y, s, k)) + fy;
    };
    return delta_mu_impl(mu, f, y, truncation, bound);
}

LatticePolynomial partial_derivative(LatticePolynomial const& f,
                                     GroupElement const& g)
{
    return f.shifted(g) - f;
}

std::function<double(GroupElement const&)>
partial_derivative(std::function<double(GroupElement const&)> f,
                   GroupElement const& g)
{
    return [f = std::move(f), g](GroupElement const& h) { return f(h + g) - f(h); };
}

std::int64_t poly_space_dim(int k, int d)
{
    check_dim(k);
    if (d < 0)
        return 0;
    return static_cast<std::int64_t>(binomial(k + d, k));
}

LatticePolynomial apply_delta_mu(AnalyticMeasure const& mu,
                                 LatticePolynomial const& p)
{
    int k = p.k();
    if (k != mu.k())
        throw DomainError("measure and polynomial dimensions differ");
    // E[(x+g)^a] - x^a = sum_{b < a} prod_i binom(a_i, b_i) E[g^(a-b)] x^b
    LatticePolynomial out(k);
    for (auto const& [a, c] : p.coefficients())
    {
        for (int b0 = 0; b0 <= a[0]; ++b0)
            for (int b1 = 0; b1 <= a[1]; ++b1)
                for (int b2 = 0; b2 <= a[2]; ++b2)
                {
                    MultiIndex b{b0, b1, b2};
                    if (b == a)
                        continue;
                    MultiIndex rest{a[0] - b0, a[1] - b1, a[2] - b2};
                    double m = mu.moment(rest);
                    if (m == 0)
                        continue;
                    double coef = c * m * binomial(a[0], b0) * binomial(a[1], b1)
                                  * binomial(a[2], b2);
                    out += LatticePolynomial::monomial(k, b, coef);
                }
    }
    return out;
}

HarmonicSpace harmonic_dim(AnalyticMeasure const& mu, int k, int d, double rel_tol)
{
    check_dim(k);
    if (k != mu.k())
        throw DomainError("measure and dimension differ");
    if (d < 0)
        throw DomainError("degree must be nonnegative");
    auto basis = monomials(k, d);
    auto n = static_cast<Eigen::Index>(basis.size());
    std::map<MultiIndex, Eigen::Index> row_of;
    for (Eigen::Index i = 0; i < n; ++i)
        row_of[basis[static_cast<std::size_t>(i)]] = i;

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
    {
        auto image = apply_delta_mu(
            mu, LatticePolynomial::monomial(k, basis[static_cast<std::size_t>(j)]));
        for (auto const& [a, c] : image.coefficients())
            M(row_of.at(a), j) = c;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    auto const& sv = svd.singularValues();
    HarmonicSpace out;
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    double top = sv.size() ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    if (top > 0)
    {
        while (rank < sv.size() && sv(rank) > rel_tol * top)
            ++rank;
    }
    out.dim = static_cast<int>(n - rank);
    if (rank == 0)
        out.gap = std::numeric_limits<double>::infinity();
    else if (rank == sv.size())
        out.gap = std::numeric_limits<double>::infinity();
    else
        out.gap = sv(rank) > 0 ? sv(rank - 1) / sv(rank)
                               : std::numeric_limits<double>::infinity();

    Eigen::MatrixXd const& V = svd.matrixV();
    for (Eigen::Index col = rank; col < n; ++col)
    {
        LatticePolynomial::Table t;
        for (Eigen::Index i = 0; i < n; ++i)
            t[basis[static_cast<std::size_t>(i)]] = V(i, col);
        out.basis.push_back(LatticePolynomial(k, t).cleaned(1e-12));
    }
    return out;
}

//---------------------------------------------------------------------------//
namespace
{
struct GreenAccum
{
    std::vector<double> sum;
    std::vector<double> sum_sq;
    std::vector<double> late;
};
}  // namespace

std::vector<GreenEstimate> walk_green(InducedMeasure const& mu,
                                      GroupElement const& start,
                                      LSMeasureEstimate const* first_step,
                                      std::vector<GroupElement> const& targets,
                                      WalkGreenOptions const& opts)
{
    int k = mu.k();
    if (k < 3)
    {
        throw DomainError("walk Green function diverges: symmetric walks on Z^"
                          + std::to_string(k) + " are recurrent");
    }
    if (opts.n_walks < 2 || opts.horizon < 4)
        throw DomainError("walk_green needs n_walks >= 2 and horizon >= 4");

    std::size_t nt = targets.size();
    std::shared_ptr<LSMeasureEstimate const> first_ptr;
    std::optional<InducedMeasure> first_mu;
    std::vector<double> first_term(nt, 0.0);
    if (first_step)
    {
        first_ptr.reset(first_step, [](LSMeasureEstimate const*) {});
        first_mu.emplace(first_ptr);
        for (std::size_t t = 0; t < nt; ++t)
            first_term[t] = first_step->at(targets[t]).p;
    }
    else
    {
        for (std::size_t t = 0; t < nt; ++t)
            first_term[t] = start == targets[t] ? 1.0 : 0.0;
    }

    // Visit predictions for times 2..H (off-lattice) or 1..H (lattice start).
    std::int64_t first_time = first_step ? 2 : 1;
    std::int64_t half = opts.horizon / 2;

    auto parts = run_chunks<GreenAccum>(
        opts.n_walks,
        opts.seed,
        opts.workers,
        [&](std::int64_t, std::int64_t begin, std::int64_t end, Rng& rng) {
            InducedMeasure::Sampler step(mu);
            std::optional<InducedMeasure::Sampler> first;
            if (first_mu)
                first.emplace(*first_mu);
            GreenAccum acc{std::vector<double>(nt, 0.0),
                           std::vector<double>(nt, 0.0),
                           std::vector<double>(nt, 0.0)};
            std::vector<double> walk(nt), late(nt);
            for (auto w = begin; w < end; ++w)
            {
                std::fill(walk.begin(), walk.end(), 0.0);
                std::fill(late.begin(), late.end(), 0.0);
                GroupElement x = first ? first->sample(rng) : start;
                for (std::int64_t time = first_time; time <= opts.horizon; ++time)
                {
                    for (std::size_t t = 0; t < nt; ++t)
                    {
                        double p = step.weight(targets[t] - x);
                        walk[t] += p;
                        if (time > half)
                            late[t] += p;
                    }
                    x = x + step.sample(rng);
                }
                for (std::size_t t = 0; t < nt; ++t)
                {
                    acc.sum[t] += walk[t];
                    acc.sum_sq[t] += walk[t] * walk[t];
                    acc.late[t] += late[t];
                }
            }
            return acc;
        });

    std::vector<double> sum(nt, 0.0), sum_sq(nt, 0.0), late(nt, 0.0);
    for (auto const& p : parts)
    {
        for (std::size_t t = 0; t < nt; ++t)
        {
            sum[t] += p.sum[t];
            sum_sq[t] += p.sum_sq[t];
            late[t] += p.late[t];
        }
    }
    auto n = static_cast<double>(opts.n_walks);
    // Local limit: P(X_m = t) ~ A m^(-k/2), so the mass beyond H is the mass
    // on (H/2, H] times 1 / (2^(k/2 - 1) - 1).
    double tail_factor = 1 / (std::pow(2.0, k / 2.0 - 1) - 1);
    std::vector<GreenEstimate> out(nt);
    for (std::size_t t = 0; t < nt; ++t)
    {
        double mean = sum[t] / n;
        double var = std::max(0.0, (sum_sq[t] / n - mean * mean) * n / (n - 1));
        out[t].tail = tail_factor * late[t] / n;
        out[t].g = first_term[t] + mean + out[t].tail;
        out[t].std_error = std::sqrt(var / n);
    }
    return out;
}

GreenEstimate walk_green(InducedMeasure const& mu,
                         GroupElement const& start,
                         LSMeasureEstimate const* first_step,
                         GroupElement const& target,
                         WalkGreenOptions const& opts)
{
    return walk_green(mu, start, first_step, std::vector{target}, opts).front();
}

//---------------------------------------------------------------------------//
bool PropertyReport::pass() const
{
    for (auto const* v : {&support, &symmetry, &moments})
    {
        if (v->asserted && !v->pass)
            return false;
    }
    return true;
}

PropertyReport check_properties(InducedMeasure const& mu, bool transient)
{
    PropertyReport r;
    int k = mu.k();
    auto window = lattice_window(k, 3);

    r.support.name = "P1";
    std::int64_t missing = 0;
    for (auto const& g : window)
    {
        if (!(mu.weight(g) > 0))
            ++missing;
    }
    r.support.pass = missing == 0;
    r.support.detail = std::to_string(missing) + " of "
                       + std::to_string(window.size())
                       + " atoms with |g|_inf <= 3 have zero weight";

    r.symmetry.name = "P2";
    r.symmetry.asserted = transient;
    if (mu.is_empirical())
    {
        auto const& est = mu.empirical();
        for (auto const& g : window)
        {
            AtomEstimate a = est.at(g), b = est.at(-g);
            if (a.count == 0 && b.count == 0)
                continue;
            double sa = a.count ? a.std_error : 1.0 / est.effective();
            double sb = b.count ? b.std_error : 1.0 / est.effective();
            r.max_symmetry_z = std::max(
                r.max_symmetry_z, std::abs(a.p - b.p) / std::sqrt(sa * sa + sb * sb));
        }
    }
    r.symmetry.pass = r.max_symmetry_z <= 4;
    {
        std::ostringstream os;
        os << "max |mu(g) - mu(-g)| / se = " << r.max_symmetry_z
           << (transient ? "" : " (reported only)");
        r.symmetry.detail = os.str();
    }

    r.moments.name = "P3";
    if (mu.is_empirical())
    {
        TailFit fit = fit_exponential_tail(mu.empirical());
        r.tail_rate = fit.rate();
        r.moments.pass = fit.n_points >= 2 && fit.rate() > 0;
    }
    else
    {
        r.tail_rate = std::visit(
            Overloaded{[](AnalyticMeasure::LazySRW const&) {
                           return std::numeric_limits<double>::infinity();
                       },
                       [](AnalyticMeasure::GeometricProduct const& m) {
                           return -std::log(m.q);
                       }},
            mu.analytic().kind());
        r.moments.pass = true;
    }
    {
        std::ostringstream os;
        os << "exponential tail rate " << r.tail_rate;
        r.moments.detail = os.str();
    }
    return r;
}

}  // namespace lsl
