#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lsl/config.hpp"

using namespace lsl;

namespace
{
int error_line(std::string const& text)
{
    try
    {
        parse_config(text, "t.toml");
    }
    catch (ConfigError const& e)
    {
        return e.line();
    }
    return 0;
}

std::string error_text(std::string const& text)
{
    try
    {
        parse_config(text, "t.toml");
    }
    catch (ConfigError const& e)
    {
        return e.what();
    }
    return "";
}
}  // namespace

TEST_CASE("a full experiment file")
{
    auto cfg = parse_config(R"([model]
k = 2
origin = [0.0, 0.0]

[ls]
r_f = 0.1
r_v = 0.4

[engine]
engine = "wos"
seed = 42
workers = 2

[task]
n_samples = 5000
y = [0.5, 0.3]
functions = ["x^2 - y^2", "x*y"]
probes = ["restriction"]
mu = { kind = "lazy", hold = 0.2 }
growth = { kind = "polynomial", alpha = 2 }
targets = [[2, 0], [0, 3]]
quotient_axes = [0]
)");
    CHECK(cfg.k == 2);
    CHECK(cfg.r_f.value() == 0.1);
    CHECK(cfg.engine.engine == Engine::WoS);
    CHECK(cfg.engine.seed == 42);
    CHECK(cfg.engine.workers == 2);
    CHECK(cfg.task.n_samples == 5000);
    CHECK(cfg.task.y.value()[1] == 0.3);
    CHECK(cfg.task.functions.size() == 2);
    CHECK(cfg.task.probes == std::vector<std::string>{"restriction"});
    CHECK(cfg.task.mu.kind == "lazy");
    CHECK(cfg.task.mu.hold == 0.2);
    CHECK(cfg.task.growth->describe() == GrowthFunction::polynomial(2).describe());
    CHECK(cfg.task.targets.at(1) == GroupElement{{0, 3, 0}});
    CHECK(cfg.task.quotient_mask == 1u);
    CHECK(cfg.line_of("ls.r_v") == 7);
    CHECK(cfg.line_of("engine.seed") == 11);
    CHECK(cfg.ls_data().C() == doctest::Approx(5.0 / 3));
}

TEST_CASE("defaults")
{
    auto cfg = parse_config("[model]\nk = 3\n");
    CHECK(cfg.effective_r_f() == 0.1);
    CHECK(cfg.r_v == 0.4);
    CHECK(cfg.engine.engine == Engine::WoS);
    CHECK(cfg.engine.dt == 1e-4);
    CHECK(cfg.engine.wos_delta == 1e-4);
    CHECK(cfg.engine.max_steps == 10'000'000);
    CHECK(cfg.task.n_samples == 100'000);
    CHECK_FALSE(cfg.phi.has_value());
}

TEST_CASE("phi and the engine default with drift")
{
    auto cfg = parse_config(R"([model]
k = 1
phi = { constant = 2.0, terms = [ { freq = [1], sin = 1.0 } ] }
)");
    REQUIRE(cfg.phi.has_value());
    CHECK(cfg.model().has_drift());
    CHECK(cfg.engine.engine == Engine::EM);
    CHECK(cfg.model().drift({0, 0, 0})[0] == doctest::Approx(2 * kPi));

    auto with_table = parse_config(R"([model]
k = 1
phi = { constant = 2.0, terms = [ { freq = [1], sin = 1.0 } ] }
[engine]
seed = 4
)");
    CHECK(with_table.engine.engine == Engine::EM);

    CHECK(error_line(R"([model]
k = 1
phi = { constant = 0.5, terms = [ { freq = [1], cos = 1.0 } ] }
)") == 3);
    CHECK(error_line(R"([model]
k = 1
phi = { constant = 2.0, terms = [ { freq = [1], sin = 1.0 } ] }
[engine]
engine = "wos"
)") == 5);
}

TEST_CASE("errors are anchored to lines")
{
    CHECK(error_line("[model]\nk = 4\n") == 2);
    CHECK(error_line("[model]\nk = 2\n[task]\nn_samples = 0\n") == 4);
    CHECK(error_line("[model]\nk = 2\n[task]\nfunctions = [\"x^^2\"]\n") == 4);
    CHECK(error_line("[model]\nk = 2\n[engine]\nengine = \"rk4\"\n") == 4);
    CHECK(error_line("[model]\nk = 2\n[task]\nmu = { kind = \"geometric\", q = 1.5 }\n") == 4);
    CHECK(error_line("[model]\nk = 2\n\n[task]\nquotient_axes = [2]\n") == 5);
    CHECK(error_line("[model]\nk = 2\n[ls]\nr_v = \"wide\"\n") == 4);
    CHECK(error_line("[model]\nk = = 2\n") == 2);
    CHECK(error_text("[model]\nk = 4\n").rfind("t.toml:2: ", 0) == 0);
    CHECK(error_line("[ls]\nr_v = 0.4\n") > 0);
}

TEST_CASE("unknown keys are rejected")
{
    CHECK(error_line("[model]\nk = 2\n[ls]\nr_v = 0.4\nrv = 0.3\n") == 5);
    CHECK(error_text("[model]\nk = 2\n[ls]\nr_v = 0.4\nrv = 0.3\n").find("ls.rv") != std::string::npos);
    CHECK(error_line("[model]\nk = 2\n[extra]\nx = 1\n") == 3);
}

TEST_CASE("LS data failures name the clause and the blamed key")
{
    auto cfg = parse_config("[model]\nk = 1\n[ls]\nr_f = 0.3\nr_v = 0.8\n", "bad.toml");
    try
    {
        (void)cfg.ls_data();
        FAIL("expected a config error");
    }
    catch (ConfigError const& e)
    {
        std::string what = e.what();
        CHECK(what.find("bad.toml:5:") == 0);
        CHECK(what.find("(D2)") != std::string::npos);
    }
    CHECK(cfg.blame_key("D2") == "ls.r_v");

    auto bal = parse_config("[model]\nk = 3\n[ls]\nr_v = 0.4\nbalanced_b = 0.5968310365946075\n");
    CHECK(bal.ls_data().r_F() == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(bal.blame_key("balance") == "ls.balanced_b");
}

TEST_CASE("word growth file is resolved relative to the config")
{
    auto dir = std::filesystem::temp_directory_path() / "lsl_config_test";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "balls.txt") << "1\n5\n13\n25\n";
    std::ofstream(dir / "exp.toml") << "[model]\nk = 2\n[task]\ngrowth = { kind = \"word\", file = \"balls.txt\" }\n";
    auto cfg = load_config(dir / "exp.toml");
    REQUIRE(cfg.task.growth.has_value());
    CHECK((*cfg.task.growth)(2) == 13);
    CHECK(cfg.source.find("exp.toml") != std::string::npos);

    std::ofstream(dir / "missing.toml") << "[model]\nk = 2\n[task]\ngrowth = { kind = \"word\", file = \"nope.txt\" }\n";
    CHECK_THROWS_AS(load_config(dir / "missing.toml"), ConfigError);
}

TEST_CASE("config hash depends on text and seed")
{
    auto a = parse_config("[model]\nk = 2\n");
    auto b = parse_config("[model]\nk = 2\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    b.engine.seed = 99;
    CHECK(a.hash() != b.hash());
    CHECK(parse_config("[model]\nk = 2\n\n").hash() != a.hash());
}
