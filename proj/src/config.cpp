#include "lsl/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tomlplusplus/toml.hpp"

namespace lsl
{
ConfigError::ConfigError(std::string const& source,
                         int line,
                         std::string const& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message)
    , line_(line)
{
}

AnalyticMeasure MeasureSpec::analytic(int k) const
{
    if (kind == "geometric")
        return AnalyticMeasure::geometric(k, q);
    if (kind == "lazy")
        return AnalyticMeasure::lazy_srw(k, hold);
    throw DomainError("measure kind \"" + kind + "\" is not analytic");
}

//---------------------------------------------------------------------------//
namespace
{
class Reader
{
  public:
    Reader(std::string source, std::map<std::string, int>& lines)
        : source_(std::move(source)), lines_(lines)
    {
    }

    [[noreturn]] void fail(toml::node const& node, std::string const& msg) const
    {
        throw ConfigError(source_, static_cast<int>(node.source().begin.line), msg);
    }
    [[noreturn]] void fail(int line, std::string const& msg) const
    {
        throw ConfigError(source_, line, msg);
    }

    void record(std::string const& key, toml::node const& node)
    {
        lines_[key] = static_cast<int>(node.source().begin.line);
    }

    void only(toml::table const& t,
              std::string const& prefix,
              std::set<std::string> const& allowed)
    {
        for (auto const& [key, node] : t)
        {
            std::string name{key.str()};
            if (!allowed.count(name))
            {
                fail(static_cast<int>(key.source().begin.line),
                     "unknown key \"" + prefix + name + "\"");
            }
            record(prefix + name, node);
        }
    }

    double number(toml::node const& node, std::string const& key) const
    {
        if (auto v = node.value<double>())
        {
            if (node.is_number())
                return *v;
        }
        fail(node, key + " must be a number");
    }

    std::int64_t integer(toml::node const& node, std::string const& key) const
    {
        if (auto v = node.as_integer())
            return v->get();
        fail(node, key + " must be an integer");
    }

    std::string string(toml::node const& node, std::string const& key) const
    {
        if (auto v = node.as_string())
            return v->get();
        fail(node, key + " must be a string");
    }

    bool boolean(toml::node const& node, std::string const& key) const
    {
        if (auto v = node.as_boolean())
            return v->get();
        fail(node, key + " must be true or false");
    }

    toml::table const& table(toml::node const& node, std::string const& key) const
    {
        if (auto t = node.as_table())
            return *t;
        fail(node, key + " must be a table");
    }

    toml::array const& array(toml::node const& node, std::string const& key) const
    {
        if (auto a = node.as_array())
            return *a;
        fail(node, key + " must be an array");
    }

    Point point(toml::node const& node, std::string const& key, int k) const
    {
        auto const& a = array(node, key);
        if (static_cast<int>(a.size()) != k)
            fail(node, key + " must have " + std::to_string(k) + " coordinates");
        Point p{};
        for (std::size_t i = 0; i < a.size(); ++i)
            p[i] = number(a[i], key);
        return p;
    }

    GroupElement element(toml::node const& node, std::string const& key, int k) const
    {
        auto const& a = array(node, key);
        if (static_cast<int>(a.size()) != k)
            fail(node, key + " must have " + std::to_string(k) + " entries");
        GroupElement g;
        for (std::size_t i = 0; i < a.size(); ++i)
            g.c[i] = integer(a[i], key);
        return g;
    }

  private:
    std::string source_;
    std::map<std::string, int>& lines_;
};

TrigPolynomial read_phi(Reader& r, toml::table const& t, int k)
{
    r.only(t, "model.phi.", {"constant", "terms"});
    double constant = 1;
    if (auto n = t.get("constant"))
        constant = r.number(*n, "model.phi.constant");
    std::vector<TrigTerm> terms;
    if (auto n = t.get("terms"))
    {
        for (auto const& item : r.array(*n, "model.phi.terms"))
        {
            auto const& tt = r.table(item, "model.phi.terms[]");
            r.only(tt, "model.phi.terms.", {"freq", "cos", "sin"});
            TrigTerm term;
            if (auto f = tt.get("freq"))
            {
                auto const& a = r.array(*f, "freq");
                if (static_cast<int>(a.size()) != k)
                    r.fail(*f, "freq must have " + std::to_string(k) + " entries");
                for (std::size_t i = 0; i < a.size(); ++i)
                    term.freq[i] = static_cast<int>(r.integer(a[i], "freq"));
            }
            else
            {
                r.fail(item, "phi term needs freq");
            }
            if (auto c = tt.get("cos"))
                term.cos_coef = r.number(*c, "cos");
            if (auto s = tt.get("sin"))
                term.sin_coef = r.number(*s, "sin");
            terms.push_back(term);
        }
    }
    return TrigPolynomial(constant, std::move(terms));
}

GrowthFunction read_growth(Reader& r,
                           toml::node const& node,
                           std::filesystem::path const& base_dir)
{
    auto const& t = r.table(node, "task.growth");
    r.only(t, "task.growth.", {"kind", "alpha", "c", "file", "c_a"});
    auto kind_node = t.get("kind");
    if (!kind_node)
        r.fail(node, "task.growth needs kind");
    std::string kind = r.string(*kind_node, "task.growth.kind");
    auto num = [&](char const* key) {
        auto n = t.get(key);
        if (!n)
            r.fail(node, "growth kind " + kind + " needs " + key);
        return r.number(*n, key);
    };
    try
    {
        std::optional<GrowthFunction> g;
        if (kind == "constant")
            g = GrowthFunction::constant();
        else if (kind == "polynomial")
            g = GrowthFunction::polynomial(num("alpha"));
        else if (kind == "exponential")
            g = GrowthFunction::exponential(num("alpha"));
        else if (kind == "stretched")
            g = GrowthFunction::stretched(num("c"), num("alpha"));
        else if (kind == "word")
        {
            auto n = t.get("file");
            if (!n)
                r.fail(node, "growth kind word needs file");
            std::filesystem::path p = r.string(*n, "file");
            if (p.is_relative())
                p = base_dir / p;
            g = GrowthFunction::word_growth_from_file(p);
        }
        else
            r.fail(*kind_node, "unknown growth kind \"" + kind + "\"");
        if (auto c = t.get("c_a"))
            g = g->with_c_a(r.number(*c, "c_a"));
        return *g;
    }
    catch (DomainError const& e)
    {
        r.fail(node, e.what());
    }
    catch (RangeError const& e)
    {
        r.fail(node, e.what());
    }
}

MeasureSpec read_measure(Reader& r, toml::node const& node)
{
    auto const& t = r.table(node, "task.mu");
    r.only(t, "task.mu.", {"kind", "q", "hold"});
    MeasureSpec m;
    if (auto n = t.get("kind"))
        m.kind = r.string(*n, "task.mu.kind");
    if (m.kind != "geometric" && m.kind != "lazy" && m.kind != "empirical")
        r.fail(node, "task.mu.kind must be \"geometric\", \"lazy\" or \"empirical\"");
    if (auto n = t.get("q"))
        m.q = r.number(*n, "task.mu.q");
    if (auto n = t.get("hold"))
        m.hold = r.number(*n, "task.mu.hold");
    if (m.kind == "geometric" && !(m.q > 0 && m.q < 1))
        r.fail(node, "task.mu.q must lie in (0, 1)");
    if (m.kind == "lazy" && !(m.hold >= 0 && m.hold < 1))
        r.fail(node, "task.mu.hold must lie in [0, 1)");
    return m;
}
}  // namespace

//---------------------------------------------------------------------------//
ExperimentConfig parse_config(std::string const& text,
                              std::string const& source,
                              std::filesystem::path const& base_dir)
{
    ExperimentConfig cfg;
    cfg.source = source;
    cfg.text = text;

    toml::table root;
    try
    {
        root = toml::parse(text, source);
    }
    catch (toml::parse_error const& e)
    {
        throw ConfigError(source,
                          static_cast<int>(e.source().begin.line),
                          std::string(e.description()));
    }
    Reader r(source, cfg.lines);
    r.only(root, "", {"model", "ls", "engine", "task"});

    // [model]
    auto model_node = root.get("model");
    if (!model_node)
        throw ConfigError(source, 1, "missing [model] section");
    auto const& model = r.table(*model_node, "model");
    r.only(model, "model.", {"k", "phi", "origin"});
    auto k_node = model.get("k");
    if (!k_node)
        r.fail(*model_node, "model.k is required");
    auto k = r.integer(*k_node, "model.k");
    if (k < 1 || k > kMaxDim)
        r.fail(*k_node, "model.k must be 1, 2 or 3");
    cfg.k = static_cast<int>(k);
    if (auto n = model.get("phi"))
        cfg.phi = read_phi(r, r.table(*n, "model.phi"), cfg.k);
    if (auto n = model.get("origin"))
        cfg.origin = r.point(*n, "model.origin", cfg.k);
    try
    {
        (void)cfg.model();
    }
    catch (DomainError const& e)
    {
        r.fail(model.get("phi") ? *model.get("phi") : *model_node, e.what());
    }

    // [ls]
    if (auto n = root.get("ls"))
    {
        auto const& ls = r.table(*n, "ls");
        r.only(ls, "ls.", {"r_f", "r_v", "balanced_b"});
        if (auto v = ls.get("r_f"))
            cfg.r_f = r.number(*v, "ls.r_f");
        if (auto v = ls.get("r_v"))
            cfg.r_v = r.number(*v, "ls.r_v");
        if (auto v = ls.get("balanced_b"))
            cfg.balanced_b = r.number(*v, "ls.balanced_b");
    }

    // [engine]
    if (auto n = root.get("engine"))
    {
        auto const& e = r.table(*n, "engine");
        r.only(e, "engine.", {"engine", "dt", "wos_delta", "max_steps", "seed", "workers"});
        if (auto v = e.get("engine"))
        {
            std::string name = r.string(*v, "engine.engine");
            if (name == "wos")
                cfg.engine.engine = Engine::WoS;
            else if (name == "em")
                cfg.engine.engine = Engine::EM;
            else
                r.fail(*v, "engine must be \"wos\" or \"em\"");
        }
        else if (cfg.model().has_drift())
            cfg.engine.engine = Engine::EM;
        if (auto v = e.get("dt"))
            cfg.engine.dt = r.number(*v, "engine.dt");
        if (auto v = e.get("wos_delta"))
            cfg.engine.wos_delta = r.number(*v, "engine.wos_delta");
        if (auto v = e.get("max_steps"))
            cfg.engine.max_steps = r.integer(*v, "engine.max_steps");
        if (auto v = e.get("seed"))
        {
            auto s = r.integer(*v, "engine.seed");
            if (s < 0)
                r.fail(*v, "engine.seed must be nonnegative");
            cfg.engine.seed = static_cast<std::uint64_t>(s);
        }
        if (auto v = e.get("workers"))
            cfg.engine.workers = static_cast<int>(r.integer(*v, "engine.workers"));
        try
        {
            cfg.engine.validate(cfg.model());
        }
        catch (DomainError const& err)
        {
            auto const* engine_key = e.get("engine");
            bool drift_clash = cfg.engine.engine == Engine::WoS && engine_key
                               && cfg.model().has_drift();
            r.fail(drift_clash ? *engine_key : *n, err.what());
        }
    }
    else if (cfg.model().has_drift())
    {
        cfg.engine.engine = Engine::EM;
    }

    // [task]
    if (auto n = root.get("task"))
    {
        auto const& t = r.table(*n, "task");
        r.only(t,
               "task.",
               {"n_samples", "y", "points", "d_min", "d_max", "mu", "growth",
                "targets", "n_walks", "horizon", "functions", "probes", "h",
                "truncation", "window", "quotient_axes", "transient", "multiplier"});
        TaskSection& task = cfg.task;
        auto positive = [&](char const* key, std::int64_t& out) {
            if (auto v = t.get(key))
            {
                out = r.integer(*v, std::string("task.") + key);
                if (out < 1)
                    r.fail(*v, std::string("task.") + key + " must be positive");
            }
        };
        positive("n_samples", task.n_samples);
        positive("n_walks", task.n_walks);
        positive("horizon", task.horizon);
        positive("window", task.window);
        if (auto v = t.get("y"))
            task.y = r.point(*v, "task.y", cfg.k);
        if (auto v = t.get("points"))
        {
            for (auto const& p : r.array(*v, "task.points"))
                task.points.push_back(r.point(p, "task.points[]", cfg.k));
        }
        if (auto v = t.get("d_min"))
            task.d_min = static_cast<int>(r.integer(*v, "task.d_min"));
        if (auto v = t.get("d_max"))
            task.d_max = static_cast<int>(r.integer(*v, "task.d_max"));
        if (task.d_min < 0 || task.d_max < task.d_min)
            r.fail(*n, "task needs 0 <= d_min <= d_max");
        if (auto v = t.get("mu"))
            task.mu = read_measure(r, *v);
        if (auto v = t.get("growth"))
            task.growth = read_growth(r, *v, base_dir);
        if (auto v = t.get("targets"))
        {
            for (auto const& g : r.array(*v, "task.targets"))
                task.targets.push_back(r.element(g, "task.targets[]", cfg.k));
        }
        if (auto v = t.get("functions"))
        {
            for (auto const& f : r.array(*v, "task.functions"))
            {
                std::string s = r.string(f, "task.functions[]");
                try
                {
                    (void)parse_polynomial(cfg.k, s);
                }
                catch (DomainError const& e)
                {
                    r.fail(f, e.what());
                }
                task.functions.push_back(s);
            }
        }
        if (auto v = t.get("probes"))
        {
            task.probes.clear();
            for (auto const& p : r.array(*v, "task.probes"))
            {
                std::string s = r.string(p, "task.probes[]");
                if (s != "restriction" && s != "sweep")
                    r.fail(p, "probe must be \"restriction\" or \"sweep\"");
                task.probes.push_back(s);
            }
        }
        if (auto v = t.get("h"))
        {
            task.h = r.string(*v, "task.h");
            try
            {
                (void)parse_polynomial(cfg.k, task.h);
            }
            catch (DomainError const& e)
            {
                r.fail(*v, e.what());
            }
        }
        if (auto v = t.get("truncation"))
            task.truncation = r.integer(*v, "task.truncation");
        if (auto v = t.get("quotient_axes"))
        {
            task.quotient_mask = 0;
            for (auto const& a : r.array(*v, "task.quotient_axes"))
            {
                auto axis = r.integer(a, "task.quotient_axes[]");
                if (axis < 0 || axis >= cfg.k)
                    r.fail(a, "quotient axis out of range");
                task.quotient_mask |= 1u << axis;
            }
        }
        if (auto v = t.get("transient"))
            task.transient = r.boolean(*v, "task.transient");
        if (auto v = t.get("multiplier"))
            task.multiplier = r.number(*v, "task.multiplier");
    }
    return cfg;
}

ExperimentConfig load_config(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(path.string(), 0, "cannot open config file");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str(), path.string(), path.parent_path());
}

//---------------------------------------------------------------------------//
int ExperimentConfig::line_of(std::string const& key) const
{
    auto it = lines.find(key);
    if (it != lines.end())
        return it->second;
    auto dot = key.find('.');
    if (dot != std::string::npos)
        return line_of(key.substr(0, dot));
    return 0;
}

LatticeModel ExperimentConfig::model() const
{
    return LatticeModel(k, phi, origin);
}

double ExperimentConfig::effective_r_f() const
{
    if (r_f)
        return *r_f;
    if (balanced_b)
        return balanced_radius(k, r_v, *balanced_b);
    return 0.1;
}

std::vector<ClauseVerdict> ExperimentConfig::verdicts() const
{
    double rf = 0;
    try
    {
        rf = effective_r_f();
    }
    catch (DomainError const& e)
    {
        return {{"balance", false, e.what()}};
    }
    return check_ls_data(k, rf, r_v, std::nullopt, balanced_b);
}

std::string ExperimentConfig::blame_key(std::string const& clause) const
{
    if (clause == "balance")
        return "ls.balanced_b";
    if (clause == "D1" || clause == "D2" || clause == "cell")
        return "ls.r_v";
    return "ls";
}

LSData ExperimentConfig::ls_data() const
{
    for (auto const& v : verdicts())
    {
        if (!v.pass)
        {
            throw ConfigError(source, line_of(blame_key(v.clause)),
                              "(" + v.clause + ") " + v.detail);
        }
    }
    double rf = effective_r_f();
    return LSData(k, rf, r_v, harnack_constant(k, rf, r_v), balanced_b);
}

std::string ExperimentConfig::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    for (int i = 0; i < 8; ++i)
    {
        h ^= (engine.seed >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace lsl
