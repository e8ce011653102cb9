#include "lsl/lattice_polynomial.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace lsl
{
std::vector<MultiIndex> monomials(int k, int d)
{
    std::vector<MultiIndex> out;
    if (k < 1 || k > kMaxDim)
        throw DomainError("dimension must be 1, 2 or 3");
    for (int deg = 0; deg <= d; ++deg)
    {
        for (int a = deg; a >= 0; --a)
        {
            if (k == 1)
            {
                if (a == deg)
                    out.push_back({a, 0, 0});
                continue;
            }
            for (int b = deg - a; b >= 0; --b)
            {
                int c = deg - a - b;
                if (k == 2 && c != 0)
                    continue;
                out.push_back({a, b, c});
            }
        }
    }
    return out;
}

double binomial(int n, int r)
{
    if (r < 0 || n < 0 || r > n)
        return 0;
    double result = 1;
    for (int i = 1; i <= r; ++i)
        result = result * (n - r + i) / i;
    return std::round(result);
}

//---------------------------------------------------------------------------//
LatticePolynomial::LatticePolynomial(int k) : k_(k)
{
    if (k < 1 || k > kMaxDim)
        throw DomainError("dimension must be 1, 2 or 3");
}

LatticePolynomial::LatticePolynomial(int k, Table coefficients)
    : LatticePolynomial(k)
{
    for (auto const& [a, c] : coefficients)
    {
        for (int i = k; i < kMaxDim; ++i)
        {
            if (a[i] != 0)
                throw DomainError("monomial uses a variable beyond dimension k");
        }
        if (a[0] < 0 || a[1] < 0 || a[2] < 0)
            throw DomainError("negative exponent");
        add(a, c);
    }
}

LatticePolynomial LatticePolynomial::constant(int k, double c)
{
    return LatticePolynomial(k, {{MultiIndex{0, 0, 0}, c}});
}

LatticePolynomial LatticePolynomial::monomial(int k, MultiIndex a, double c)
{
    return LatticePolynomial(k, {{a, c}});
}

void LatticePolynomial::add(MultiIndex const& a, double c)
{
    if (c == 0)
        return;
    auto [it, inserted] = coef_.emplace(a, c);
    if (!inserted)
    {
        it->second += c;
        if (it->second == 0)
            coef_.erase(it);
    }
}

double LatticePolynomial::coefficient(MultiIndex const& a) const
{
    auto it = coef_.find(a);
    return it == coef_.end() ? 0.0 : it->second;
}

int LatticePolynomial::degree() const
{
    int d = -1;
    for (auto const& [a, c] : coef_)
        d = std::max(d, total_degree(a));
    return d;
}

double LatticePolynomial::l1() const
{
    double s = 0;
    for (auto const& [a, c] : coef_)
        s += std::abs(c);
    return s;
}

double LatticePolynomial::operator()(Point const& x) const
{
    double sum = 0;
    for (auto const& [a, c] : coef_)
    {
        double term = c;
        for (int i = 0; i < k_; ++i)
        {
            for (int e = 0; e < a[i]; ++e)
                term *= x[i];
        }
        sum += term;
    }
    return sum;
}

double LatticePolynomial::operator()(GroupElement const& g) const
{
    return (*this)(to_point(g));
}

LatticePolynomial LatticePolynomial::shifted(GroupElement const& g) const
{
    // (x_i + g_i)^a_i = sum_j binom(a_i, j) x_i^j g_i^(a_i - j)
    LatticePolynomial out(k_);
    for (auto const& [a, c] : coef_)
    {
        std::array<std::vector<double>, kMaxDim> factor;
        for (int i = 0; i < kMaxDim; ++i)
        {
            factor[i].assign(a[i] + 1, 0.0);
            for (int j = 0; j <= a[i]; ++j)
            {
                factor[i][j] = binomial(a[i], j)
                               * std::pow(static_cast<double>(g.c[i]), a[i] - j);
            }
        }
        for (int j0 = 0; j0 <= a[0]; ++j0)
            for (int j1 = 0; j1 <= a[1]; ++j1)
                for (int j2 = 0; j2 <= a[2]; ++j2)
                {
                    out.add({j0, j1, j2},
                            c * factor[0][j0] * factor[1][j1] * factor[2][j2]);
                }
    }
    return out;
}

LatticePolynomial LatticePolynomial::laplacian() const
{
    LatticePolynomial out(k_);
    for (auto const& [a, c] : coef_)
    {
        for (int i = 0; i < k_; ++i)
        {
            if (a[i] < 2)
                continue;
            MultiIndex b = a;
            b[i] -= 2;
            out.add(b, c * a[i] * (a[i] - 1));
        }
    }
    return out;
}

LatticePolynomial LatticePolynomial::cleaned(double tol) const
{
    double big = 0;
    for (auto const& [a, c] : coef_)
        big = std::max(big, std::abs(c));
    LatticePolynomial out(k_);
    for (auto const& [a, c] : coef_)
    {
        if (std::abs(c) > tol * big)
            out.add(a, c);
    }
    return out;
}

LatticePolynomial& LatticePolynomial::operator+=(LatticePolynomial const& o)
{
    if (o.k_ != k_)
        throw DomainError("polynomial dimension mismatch");
    for (auto const& [a, c] : o.coef_)
        add(a, c);
    return *this;
}

LatticePolynomial& LatticePolynomial::operator-=(LatticePolynomial const& o)
{
    if (o.k_ != k_)
        throw DomainError("polynomial dimension mismatch");
    for (auto const& [a, c] : o.coef_)
        add(a, -c);
    return *this;
}

LatticePolynomial& LatticePolynomial::operator*=(double s)
{
    if (s == 0)
    {
        coef_.clear();
        return *this;
    }
    for (auto& [a, c] : coef_)
        c *= s;
    return *this;
}

std::string LatticePolynomial::describe() const
{
    if (coef_.empty())
        return "0";
    static char const vars[] = {'x', 'y', 'z'};
    std::ostringstream os;
    os.precision(10);
    bool first = true;
    for (auto it = coef_.rbegin(); it != coef_.rend(); ++it)
    {
        auto const& [a, c] = *it;
        double mag = std::abs(c);
        if (first)
            os << (c < 0 ? "-" : "");
        else
            os << (c < 0 ? " - " : " + ");
        first = false;
        bool unit = total_degree(a) > 0 && mag == 1;
        if (!unit)
            os << mag;
        bool need_star = !unit;
        for (int i = 0; i < k_; ++i)
        {
            if (a[i] == 0)
                continue;
            if (need_star)
                os << '*';
            os << vars[i];
            if (a[i] > 1)
                os << '^' << a[i];
            need_star = true;
        }
    }
    return os.str();
}

LatticePolynomial operator+(LatticePolynomial a, LatticePolynomial const& b)
{
    return a += b;
}

LatticePolynomial operator-(LatticePolynomial a, LatticePolynomial const& b)
{
    return a -= b;
}

LatticePolynomial operator*(double s, LatticePolynomial p)
{
    return p *= s;
}

//---------------------------------------------------------------------------//
LatticePolynomial parse_polynomial(int k, std::string const& text)
{
    LatticePolynomial out(k);
    std::size_t pos = 0;
    auto fail = [&](std::string const& why) {
        throw DomainError("polynomial \"" + text + "\" at column "
                          + std::to_string(pos + 1) + ": " + why);
    };
    auto skip = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    };
    auto read_int = [&] {
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (start == pos)
            fail("expected an integer exponent");
        return std::stoi(text.substr(start, pos - start));
    };

    skip();
    if (pos == text.size())
        fail("empty expression");
    bool first = true;
    while (true)
    {
        skip();
        if (pos == text.size())
            break;
        double sign = 1;
        if (text[pos] == '+' || text[pos] == '-')
        {
            sign = text[pos] == '-' ? -1 : 1;
            ++pos;
            skip();
        }
        else if (!first)
        {
            fail("expected '+' or '-'");
        }
        first = false;

        double coef = sign;
        MultiIndex a{0, 0, 0};
        bool have_factor = false;
        while (true)
        {
            skip();
            if (pos == text.size())
                break;
            char ch = text[pos];
            if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.')
            {
                std::size_t used = 0;
                double v = std::stod(text.substr(pos), &used);
                pos += used;
                coef *= v;
            }
            else if (ch == 'x' || ch == 'y' || ch == 'z')
            {
                int i = ch - 'x';
                if (i >= k)
                    fail(std::string("variable ") + ch + " exceeds dimension");
                ++pos;
                skip();
                int e = 1;
                if (pos < text.size() && text[pos] == '^')
                {
                    ++pos;
                    skip();
                    e = read_int();
                }
                a[i] += e;
            }
            else
            {
                fail(std::string("unexpected character '") + ch + "'");
            }
            have_factor = true;
            skip();
            if (pos < text.size() && text[pos] == '*')
            {
                ++pos;
                continue;
            }
            break;
        }
        if (!have_factor)
            fail("empty term");
        out += LatticePolynomial::monomial(k, a, coef);
    }
    return out;
}

}  // namespace lsl
