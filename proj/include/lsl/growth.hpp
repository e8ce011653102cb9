#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace lsl
{
//---------------------------------------------------------------------------//
/*!
 * Monotone submultiplicative growth function a: [0, inf) -> [1, inf).
 *
 * Built-in kinds:
 *  - Constant: a(r) = 1
 *  - Polynomial(alpha): a(r) = (r + 1)^alpha, c_a = 2^alpha
 *  - Exponential(alpha): a(r) = exp(alpha r), c_a = 1
 *  - Stretched(c, alpha): a(r) = exp(c r^alpha), 0 < alpha < 1, c_a = 1
 *  - WordGrowth(table): a(r) = N(floor r), c_a = N(1)
 *
 * Any growth function can be wrapped as r -> beta * a(gamma r); the wrapper
 * has c_a' = c_a / beta. Values are immutable.
 */
class GrowthFunction
{
  public:
    struct Constant
    {
    };
    struct Polynomial
    {
        double alpha;
    };
    struct Exponential
    {
        double alpha;
    };
    struct Stretched
    {
        double c;
        double alpha;
    };
    struct WordGrowth
    {
        std::vector<std::int64_t> table;
    };
    struct Scaled
    {
        std::shared_ptr<GrowthFunction const> inner;
        double beta;
        double gamma;
    };
    using Kind = std::variant<Constant,
                              Polynomial,
                              Exponential,
                              Stretched,
                              WordGrowth,
                              Scaled>;

    static GrowthFunction constant();
    static GrowthFunction polynomial(double alpha);
    static GrowthFunction exponential(double alpha);
    static GrowthFunction stretched(double c, double alpha);
    static GrowthFunction word_growth(std::vector<std::int64_t> table);
    //! One integer per line; blank lines and '#' comments are ignored.
    static GrowthFunction word_growth_from_file(std::filesystem::path const&);

    //! r -> beta * a(gamma r)
    GrowthFunction scaled(double beta, double gamma) const;
    //! Same function with an explicit submultiplicativity constant.
    GrowthFunction with_c_a(double c_a) const;

    double operator()(double r) const { return evaluate(r); }
    double evaluate(double r) const;
    double c_a() const { return c_a_; }
    Kind const& kind() const { return kind_; }
    std::string describe() const;

  private:
    GrowthFunction(Kind kind, double c_a);

    Kind kind_;
    double c_a_;
};

struct SubexponentialVerdict
{
    bool value;
    //! True when decided from finite data (WordGrowth) rather than analytically
    bool heuristic;
    //! Fitted slope of ln a(m) over the table tail (WordGrowth only)
    double tail_slope;
};

//! Threshold on the tail slope of ln N(m) for word-growth tables
inline constexpr double kDefaultWordGrowthSlopeThreshold = 0.01;

SubexponentialVerdict
is_subexponential(GrowthFunction const& a,
                  double slope_threshold = kDefaultWordGrowthSlopeThreshold);

// True iff a(r/c)/c <= b(r) <= c a(c r) at every grid point
bool same_growth_type(GrowthFunction const& a,
                      GrowthFunction const& b,
                      double c,
                      std::span<double const> grid);

// Smallest C_f >= 1 with |value| <= C_f a(radius) over the samples
double a_bound_constant(GrowthFunction const& a,
                        std::span<std::pair<double, double> const> samples);

}  // namespace lsl
