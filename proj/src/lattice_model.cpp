#include "lsl/lattice_model.hpp"

#include <cmath>
#include <sstream>

namespace lsl
{
std::string to_string(GroupElement const& g, int k)
{
    std::ostringstream os;
    for (int i = 0; i < k; ++i)
        os << (i ? " " : "") << g.c[i];
    return os.str();
}

std::string to_string(Point const& p, int k)
{
    std::ostringstream os;
    os.precision(10);
    for (int i = 0; i < k; ++i)
        os << (i ? " " : "") << p[i];
    return os.str();
}

//---------------------------------------------------------------------------//
TrigPolynomial::TrigPolynomial(double constant, std::vector<TrigTerm> terms)
    : constant_(constant), terms_(std::move(terms))
{
}

double TrigPolynomial::value(Point const& x) const
{
    double v = constant_;
    for (auto const& t : terms_)
    {
        double arg = 2 * kPi
                     * (t.freq[0] * x[0] + t.freq[1] * x[1] + t.freq[2] * x[2]);
        v += t.cos_coef * std::cos(arg) + t.sin_coef * std::sin(arg);
    }
    return v;
}

Point TrigPolynomial::gradient(Point const& x) const
{
    Point g{};
    for (auto const& t : terms_)
    {
        double arg = 2 * kPi
                     * (t.freq[0] * x[0] + t.freq[1] * x[1] + t.freq[2] * x[2]);
        double d = 2 * kPi
                   * (-t.cos_coef * std::sin(arg) + t.sin_coef * std::cos(arg));
        for (int i = 0; i < kMaxDim; ++i)
            g[i] += d * t.freq[i];
    }
    return g;
}

double TrigPolynomial::laplacian(Point const& x) const
{
    double v = 0;
    for (auto const& t : terms_)
    {
        double arg = 2 * kPi
                     * (t.freq[0] * x[0] + t.freq[1] * x[1] + t.freq[2] * x[2]);
        double f2 = t.freq[0] * t.freq[0] + t.freq[1] * t.freq[1]
                    + t.freq[2] * t.freq[2];
        v -= 4 * kPi * kPi * f2
             * (t.cos_coef * std::cos(arg) + t.sin_coef * std::sin(arg));
    }
    return v;
}

//---------------------------------------------------------------------------//
namespace
{
double radical_inverse(unsigned n, unsigned base)
{
    double inv = 1.0 / base, f = inv, r = 0;
    while (n > 0)
    {
        r += f * (n % base);
        n /= base;
        f *= inv;
    }
    return r;
}

void check_positive_on_cell(TrigPolynomial const& phi, int k)
{
    int per_axis = static_cast<int>(std::ceil(std::pow(1e4, 1.0 / k)));
    std::array<int, kMaxDim> n{1, 1, 1};
    for (int i = 0; i < k; ++i)
        n[i] = per_axis;
    for (int a = 0; a < n[0]; ++a)
        for (int b = 0; b < n[1]; ++b)
            for (int c = 0; c < n[2]; ++c)
            {
                Point x{double(a) / n[0], double(b) / n[1], double(c) / n[2]};
                double v = phi.value(x);
                if (!(v > 0))
                {
                    throw DomainError("phi is not strictly positive at ("
                                      + to_string(x, k) + ")");
                }
            }
}
}  // namespace

LatticeModel::LatticeModel(int k,
                           std::optional<TrigPolynomial> phi,
                           Point origin,
                           unsigned quotient_mask)
    : k_(k)
    , phi_(std::move(phi))
    , origin_(origin)
    , quotient_mask_(quotient_mask)
{
    if (k_ < 1 || k_ > kMaxDim)
        throw DomainError("lattice dimension k must be 1, 2 or 3");
    for (int i = k_; i < kMaxDim; ++i)
    {
        origin_[i] = 0;
        if (is_quotient_axis(i))
            throw DomainError("quotient axis beyond dimension k");
    }
    if (phi_)
    {
        for (auto const& t : phi_->terms())
            for (int i = k_; i < kMaxDim; ++i)
                if (t.freq[i] != 0)
                    throw DomainError("phi frequency has more than k entries");
        check_positive_on_cell(*phi_, k_);
    }
}

LatticeModel LatticeModel::quotient(unsigned mask) const
{
    return LatticeModel(k_, phi_, origin_, mask);
}

Point LatticeModel::lattice_point(GroupElement const& g) const
{
    return origin_ + to_point(g);
}

GroupElement LatticeModel::nearest_lattice_point(Point const& y) const
{
    GroupElement g;
    for (int i = 0; i < k_; ++i)
    {
        if (is_quotient_axis(i))
            continue;
        // Round half toward the smaller coordinate.
        g.c[i] = static_cast<std::int64_t>(std::ceil(y[i] - origin_[i] - 0.5));
    }
    return g;
}

Point LatticeModel::displacement(Point const& y, GroupElement const& g) const
{
    Point d = y - lattice_point(g);
    for (int i = 0; i < k_; ++i)
    {
        if (is_quotient_axis(i))
            d[i] -= std::floor(d[i] + 0.5);
    }
    return d;
}

Point LatticeModel::reduce(Point y) const
{
    for (int i = 0; i < k_; ++i)
    {
        if (is_quotient_axis(i))
        {
            double d = y[i] - origin_[i];
            y[i] = origin_[i] + d - std::floor(d + 0.5);
        }
    }
    return y;
}

bool LatticeModel::dirichlet_contains(GroupElement const& x,
                                      Point const& y) const
{
    Point d = displacement(y, x);
    for (int i = 0; i < k_; ++i)
    {
        if (std::abs(d[i]) > 0.5)
            return false;
    }
    return true;
}

bool LatticeModel::has_drift() const
{
    if (!phi_)
        return false;
    for (auto const& t : phi_->terms())
    {
        if (t.cos_coef != 0 || t.sin_coef != 0)
            return true;
    }
    return false;
}

Point LatticeModel::drift(Point const& y) const
{
    if (!phi_)
        return {};
    double v = phi_->value(y);
    return (2.0 / v) * phi_->gradient(y);
}

PotentialReport LatticeModel::renormalize() const
{
    TrigPolynomial phi = phi_ ? *phi_ : TrigPolynomial(1.0, {});

    PotentialReport report;
    report.potential = [phi](Point const& x) {
        return -phi.laplacian(x) / phi.value(x);
    };

    // Fixed family of test functions, all closed-form trig polynomials.
    std::vector<TrigPolynomial> family;
    {
        TrigTerm a;
        a.freq[0] = 1;
        a.cos_coef = 1;
        family.emplace_back(0.0, std::vector<TrigTerm>{a});

        TrigTerm b;
        b.freq[k_ - 1] = 2;
        b.sin_coef = 0.7;
        TrigTerm c;
        for (int i = 0; i < k_; ++i)
            c.freq[i] = 1;
        c.cos_coef = -0.4;
        c.sin_coef = 0.25;
        family.emplace_back(0.3, std::vector<TrigTerm>{b, c});
    }

    for (unsigned n = 1; n <= 100; ++n)
    {
        Point x{};
        constexpr unsigned bases[] = {2, 3, 5};
        for (int i = 0; i < k_; ++i)
            x[i] = origin_[i] + radical_inverse(n, bases[i]);
        report.check_points.push_back(x);

        double p = phi.value(x);
        Point gp = phi.gradient(x);
        double lp = phi.laplacian(x);
        Point y = drift(x);
        double v = report.potential(x);
        for (auto const& f : family)
        {
            double fv = f.value(x);
            Point gf = f.gradient(x);
            double lf = f.laplacian(x);
            double lhs = p * (lf + dot(y, gf));
            double lap_pf = fv * lp + 2 * dot(gp, gf) + p * lf;
            double rhs = lap_pf + v * p * fv;
            report.max_residual
                = std::max(report.max_residual, std::abs(lhs - rhs));
        }
    }
    if (report.max_residual > 1e-6)
    {
        throw ConsistencyError(
            "renormalization identity residual "
            + std::to_string(report.max_residual) + " exceeds 1e-6");
    }
    return report;
}

}  // namespace lsl
