#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lsl
{
inline constexpr int kExitPass = 0;
inline constexpr int kExitContract = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions
{
    std::string subcommand;
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
    //! --workers flag
    std::optional<int> workers;
    //! Fallback used when neither the flag nor the config sets workers
    std::optional<int> env_workers;
};

//! Names accepted by run()
std::vector<std::string> const& subcommands();

/*!
 * Execute one subcommand. Writes only inside out_dir; human-readable
 * progress goes to `out`, failures to `err`.
 *
 * Returns 0 when every contract of the run holds, 1 on a contract failure
 * (the clause is named on `err`), 2 on an invalid configuration.
 */
int run(RunOptions const& opts, std::ostream& out, std::ostream& err);

}  // namespace lsl
