#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lsl/runner.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Lattice discretization of periodic diffusions"};
    app.require_subcommand(1);

    lsl::RunOptions opts;
    std::uint64_t seed = 0;
    int workers = 0;

    for (auto const& name : lsl::subcommands())
    {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opts.config, "experiment file (TOML)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "override engine.seed");
        sub->add_option("--workers", workers, "worker threads")
            ->check(CLI::PositiveNumber);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int code = app.exit(e);
        return code == 0 ? 0 : lsl::kExitConfig;
    }

    auto* sub = app.get_subcommands().front();
    opts.subcommand = sub->get_name();
    if (sub->count("--seed"))
        opts.seed = seed;
    if (sub->count("--workers"))
        opts.workers = workers;
    if (char const* env = std::getenv("LS_LATTICE_THREADS"))
    {
        try
        {
            int n = std::stoi(env);
            if (n >= 1)
                opts.env_workers = n;
        }
        catch (std::exception const&)
        {
            std::cerr << "ignoring LS_LATTICE_THREADS=" << env << "\n";
        }
    }
    return lsl::run(opts, std::cout, std::cerr);
}
