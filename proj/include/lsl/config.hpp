#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffusion.hpp"
#include "group_walk.hpp"
#include "growth.hpp"
#include "lattice_model.hpp"
#include "ls_core.hpp"

namespace lsl
{
//! Invalid configuration; what() reads "<source>:<line>: <message>".
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(std::string const& source, int line, std::string const& message);
    int line() const { return line_; }

  private:
    int line_;
};

struct MeasureSpec
{
    //! "geometric", "lazy" or "empirical"
    std::string kind = "geometric";
    double q = 0.5;
    double hold = 0.1;

    //! Analytic measure on Z^k; throws for "empirical"
    AnalyticMeasure analytic(int k) const;
};

struct TaskSection
{
    std::int64_t n_samples = 100'000;
    std::optional<Point> y;
    std::vector<Point> points;
    int d_min = 0;
    int d_max = 4;
    MeasureSpec mu;
    std::optional<GrowthFunction> growth;
    std::vector<GroupElement> targets;
    std::int64_t n_walks = 20'000;
    std::int64_t horizon = 2'000;
    std::vector<std::string> functions;
    std::vector<std::string> probes{"restriction", "sweep"};
    std::string h = "x";
    std::int64_t truncation = -1;
    std::int64_t window = 3;
    unsigned quotient_mask = 1;
    std::optional<bool> transient;
    double multiplier = 4;
};

/*!
 * Parsed experiment file. Radii are kept raw so validate-data can report
 * every clause; ls_data() performs the checked construction.
 */
struct ExperimentConfig
{
    std::string source;
    std::string text;

    int k = 1;
    std::optional<TrigPolynomial> phi;
    Point origin{};

    std::optional<double> r_f;
    double r_v = 0.4;
    std::optional<double> balanced_b;

    EngineConfig engine;
    TaskSection task;

    //! Line of each dotted key ("ls.r_v"), for error anchoring
    std::map<std::string, int> lines;

    int line_of(std::string const& key) const;
    LatticeModel model() const;
    //! r_F actually used: explicit, or solved from balanced_b
    double effective_r_f() const;
    //! Checked LS-data; violations raise ConfigError naming the clause
    LSData ls_data() const;
    //! Verdicts for every clause, without throwing
    std::vector<ClauseVerdict> verdicts() const;
    //! Key of the line to blame for a failed clause
    std::string blame_key(std::string const& clause) const;
    //! FNV-1a of the file bytes mixed with the seed, as 16 hex digits
    std::string hash() const;
};

ExperimentConfig parse_config(std::string const& text,
                              std::string const& source = "<config>",
                              std::filesystem::path const& base_dir = {});
ExperimentConfig load_config(std::filesystem::path const& path);

}  // namespace lsl
