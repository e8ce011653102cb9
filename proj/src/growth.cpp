#include "lsl/growth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lsl/types.hpp"

namespace lsl
{
namespace
{
template<class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};

void require_positive(double v, char const* what)
{
    if (!(v > 0) || !std::isfinite(v))
        throw DomainError(std::string(what) + " must be positive and finite");
}

void validate_table(std::vector<std::int64_t> const& t)
{
    if (t.empty())
        throw DomainError("word growth table is empty");
    if (t[0] != 1)
        throw DomainError("word growth table must start with N(0) = 1");
    for (std::size_t i = 1; i < t.size(); ++i)
    {
        if (t[i] < t[i - 1])
            throw DomainError("word growth table is not monotone at m = "
                              + std::to_string(i));
    }
    for (std::size_t m = 0; m < t.size(); ++m)
    {
        for (std::size_t n = 0; m + n < t.size(); ++n)
        {
            // Tables are small; exact integer products are safe up to 3e9.
            if (static_cast<double>(t[m + n])
                > static_cast<double>(t[m]) * static_cast<double>(t[n]))
            {
                throw DomainError("word growth table violates N(m+n) <= "
                                  "N(m)N(n) at m = "
                                  + std::to_string(m)
                                  + ", n = " + std::to_string(n));
            }
        }
    }
}
}  // namespace

GrowthFunction::GrowthFunction(Kind kind, double c_a)
    : kind_(std::move(kind)), c_a_(c_a)
{
    require_positive(c_a_, "c_a");
}

GrowthFunction GrowthFunction::constant()
{
    return GrowthFunction(Constant{}, 1.0);
}

GrowthFunction GrowthFunction::polynomial(double alpha)
{
    require_positive(alpha, "polynomial alpha");
    return GrowthFunction(Polynomial{alpha}, std::pow(2.0, alpha));
}

GrowthFunction GrowthFunction::exponential(double alpha)
{
    require_positive(alpha, "exponential alpha");
    return GrowthFunction(Exponential{alpha}, 1.0);
}

GrowthFunction GrowthFunction::stretched(double c, double alpha)
{
    require_positive(c, "stretched c");
    if (!(alpha > 0 && alpha < 1))
        throw DomainError("stretched alpha must lie in (0, 1)");
    return GrowthFunction(Stretched{c, alpha}, 1.0);
}

GrowthFunction GrowthFunction::word_growth(std::vector<std::int64_t> table)
{
    validate_table(table);
    double c_a = table.size() > 1 ? static_cast<double>(table[1]) : 1.0;
    return GrowthFunction(WordGrowth{std::move(table)}, c_a);
}

GrowthFunction
GrowthFunction::word_growth_from_file(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw DomainError("cannot open word growth table " + path.string());
    std::vector<std::int64_t> table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ss(line);
        std::int64_t v;
        if (!(ss >> v))
        {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
            {
                throw DomainError(path.string() + ":" + std::to_string(lineno)
                                  + ": expected one integer per line");
            }
            continue;
        }
        table.push_back(v);
    }
    return word_growth(std::move(table));
}

GrowthFunction GrowthFunction::scaled(double beta, double gamma) const
{
    require_positive(beta, "scale beta");
    require_positive(gamma, "scale gamma");
    auto inner = std::make_shared<GrowthFunction const>(*this);
    if (beta * inner->evaluate(0) < 1)
        throw DomainError("scaled growth function must satisfy a(0) >= 1");
    return GrowthFunction(Scaled{std::move(inner), beta, gamma}, c_a_ / beta);
}

GrowthFunction GrowthFunction::with_c_a(double c_a) const
{
    return GrowthFunction(kind_, c_a);
}

double GrowthFunction::evaluate(double r) const
{
    if (!(r >= 0))
        throw DomainError("growth functions are defined for r >= 0");
    return std::visit(
        Overloaded{
            [](Constant const&) { return 1.0; },
            [r](Polynomial const& p) { return std::pow(r + 1, p.alpha); },
            [r](Exponential const& e) { return std::exp(e.alpha * r); },
            [r](Stretched const& s) {
                return std::exp(s.c * std::pow(r, s.alpha));
            },
            [r](WordGrowth const& w) {
                auto m = static_cast<std::size_t>(std::floor(r));
                if (m >= w.table.size())
                {
                    throw RangeError("word growth argument "
                                     + std::to_string(r)
                                     + " beyond table of length "
                                     + std::to_string(w.table.size()));
                }
                return static_cast<double>(w.table[m]);
            },
            [r](Scaled const& s) {
                return s.beta * s.inner->evaluate(s.gamma * r);
            },
        },
        kind_);
}

std::string GrowthFunction::describe() const
{
    std::ostringstream os;
    std::visit(Overloaded{
                   [&](Constant const&) { os << "constant"; },
                   [&](Polynomial const& p) {
                       os << "polynomial(alpha=" << p.alpha << ")";
                   },
                   [&](Exponential const& e) {
                       os << "exponential(alpha=" << e.alpha << ")";
                   },
                   [&](Stretched const& s) {
                       os << "stretched(c=" << s.c << ",alpha=" << s.alpha
                          << ")";
                   },
                   [&](WordGrowth const& w) {
                       os << "word_growth(n=" << w.table.size() << ")";
                   },
                   [&](Scaled const& s) {
                       os << s.beta << "*" << s.inner->describe() << "("
                          << s.gamma << "r)";
                   },
               },
               kind_);
    return os.str();
}

SubexponentialVerdict
is_subexponential(GrowthFunction const& a, double slope_threshold)
{
    using G = GrowthFunction;
    return std::visit(
        Overloaded{
            [](G::Constant const&) {
                return SubexponentialVerdict{true, false, 0.0};
            },
            [](G::Polynomial const&) {
                return SubexponentialVerdict{true, false, 0.0};
            },
            [](G::Stretched const&) {
                return SubexponentialVerdict{true, false, 0.0};
            },
            [](G::Exponential const& e) {
                return SubexponentialVerdict{false, false, e.alpha};
            },
            [slope_threshold](G::WordGrowth const& w) {
                // Least-squares slope of ln N(m) against m over the last
                // third of the table.
                auto n = w.table.size();
                auto count = std::max<std::size_t>(2, n / 3);
                if (n < 2)
                    return SubexponentialVerdict{true, true, 0.0};
                count = std::min(count, n);
                auto first = n - count;
                double mx = 0, my = 0;
                for (auto m = first; m < n; ++m)
                {
                    mx += static_cast<double>(m);
                    my += std::log(static_cast<double>(w.table[m]));
                }
                mx /= static_cast<double>(count);
                my /= static_cast<double>(count);
                double sxy = 0, sxx = 0;
                for (auto m = first; m < n; ++m)
                {
                    double dx = static_cast<double>(m) - mx;
                    sxy += dx
                           * (std::log(static_cast<double>(w.table[m])) - my);
                    sxx += dx * dx;
                }
                double slope = sxy / sxx;
                return SubexponentialVerdict{
                    slope < slope_threshold, true, slope};
            },
            [slope_threshold](G::Scaled const& s) {
                auto inner = is_subexponential(*s.inner, slope_threshold);
                inner.tail_slope *= s.gamma;
                return inner;
            },
        },
        a.kind());
}

bool same_growth_type(GrowthFunction const& a,
                      GrowthFunction const& b,
                      double c,
                      std::span<double const> grid)
{
    if (!(c >= 1))
        throw DomainError("growth type witness c must be >= 1");
    for (double r : grid)
    {
        double br = b(r);
        if (a(r / c) / c > br || br > c * a(c * r))
            return false;
    }
    return true;
}

double a_bound_constant(GrowthFunction const& a,
                        std::span<std::pair<double, double> const> samples)
{
    double best = 1.0;
    for (auto const& [radius, value] : samples)
        best = std::max(best, std::abs(value) / a(radius));
    return best;
}

}  // namespace lsl
