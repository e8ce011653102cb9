#include "lsl/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "lsl/config.hpp"
#include "lsl/group_walk.hpp"
#include "lsl/ls_core.hpp"
#include "lsl/transfer.hpp"

namespace lsl
{
namespace
{
using Json = nlohmann::ordered_json;

//! Failure of a run-level contract, reported with exit status 1.
class ContractFailure : public std::runtime_error
{
  public:
    ContractFailure(std::string clause, std::string const& msg)
        : std::runtime_error("(" + clause + ") " + msg), clause_(std::move(clause))
    {
    }
    std::string const& clause() const { return clause_; }

  private:
    std::string clause_;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string tuple_text(Point const& p, int k)
{
    std::string s = "(";
    for (int i = 0; i < k; ++i)
        s += (i ? "," : "") + fmt(p[i]);
    return s + ")";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag)
{
    return splitmix64(seed ^ splitmix64(tag));
}

struct Context
{
    ExperimentConfig cfg;
    std::filesystem::path out_dir;
    std::ostream& out;
    std::string subcommand;

    Json sidecar() const
    {
        Json j;
        j["subcommand"] = subcommand;
        j["seed"] = cfg.engine.seed;
        j["config_hash"] = cfg.hash();
        j["k"] = cfg.k;
        return j;
    }

    void write_text(std::string const& name, std::string const& text) const
    {
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write " + (out_dir / name).string());
        f << text;
    }

    void write_json(std::string const& name, Json const& j) const
    {
        write_text(name, j.dump(2) + "\n");
    }

    Point start_point(Point fallback) const { return cfg.task.y.value_or(fallback); }
};

Point centered(ExperimentConfig const& cfg, double v)
{
    Point p{};
    for (int i = 0; i < cfg.k; ++i)
        p[i] = cfg.origin[i] + v;
    return p;
}

//---------------------------------------------------------------------------//
int cmd_validate(Context& ctx)
{
    auto const& cfg = ctx.cfg;
    auto verdicts = cfg.verdicts();
    Json j = ctx.sidecar();
    bool ok = true;
    for (auto const& v : verdicts)
    {
        ctx.out << v.clause << ": " << (v.pass ? "pass" : "FAIL") << "  " << v.detail
                << "\n";
        j["clause_" + v.clause] = v.pass;
        ok = ok && v.pass;
    }
    if (ok)
    {
        LSData data = cfg.ls_data();
        ctx.out << "C = " << fmt(data.C()) << "  theta = " << fmt(data.theta())
                << "  r_F = " << fmt(data.r_F()) << "\n";
        j["r_f"] = data.r_F();
        j["r_v"] = data.r_V();
        j["C"] = data.C();
        j["theta"] = data.theta();
        if (data.B())
            j["balanced_b"] = *data.B();
    }
    j["valid"] = ok;
    ctx.write_json("validate.json", j);
    if (!ok)
        (void)cfg.ls_data();  // throws ConfigError naming the first clause
    return kExitPass;
}

//---------------------------------------------------------------------------//
struct StageCheck
{
    bool pass = true;
    int worst_n = 0;
    double worst_excess = 0;
};

StageCheck stage_decay(LSMeasureEstimate const& est, double theta, int n_max = 10)
{
    StageCheck c;
    auto n = static_cast<double>(est.effective());
    for (int s = 1; s <= n_max; ++s)
    {
        double bound = std::pow(theta, s);
        double sigma = std::sqrt(bound * (1 - bound) / n);
        double excess = est.stage_tail(s) - (bound + 4 * sigma);
        if (excess > c.worst_excess || s == 1)
        {
            c.worst_excess = std::max(c.worst_excess, excess);
            c.worst_n = s;
        }
        if (excess > 0)
            c.pass = false;
    }
    return c;
}

std::string measure_csv(LSMeasureEstimate const& est)
{
    std::ostringstream os;
    os << "gx,gy,gz,p,stderr,count\n";
    for (auto const& [g, a] : est.atoms)
    {
        os << g.c[0] << ',' << g.c[1] << ',' << g.c[2] << ',' << fmt(a.p) << ','
           << fmt(a.std_error) << ',' << a.count << "\n";
    }
    return os.str();
}

int cmd_simulate(Context& ctx)
{
    auto const& cfg = ctx.cfg;
    LatticeModel model = cfg.model();
    LSData data = cfg.ls_data();
    Point y = ctx.start_point(cfg.origin);
    auto est = estimate_measure(model, data, y, cfg.task.n_samples, cfg.engine);
    TailFit fit = fit_exponential_tail(est);
    StageCheck stages = stage_decay(est, data.theta());

    ctx.write_text("mu.csv", measure_csv(est));
    Json j = ctx.sidecar();
    j["y"] = std::vector<double>(y.begin(), y.begin() + cfg.k);
    j["n_samples"] = est.n_samples;
    j["censored"] = est.censored;
    Json hist = Json::object();
    for (auto const& [s, c] : est.stage_histogram)
        hist[std::to_string(s)] = c;
    j["stage_histogram"] = hist;
    j["theta"] = data.theta();
    j["C"] = data.C();
    j["r_f"] = data.r_F();
    j["r_v"] = data.r_V();
    j["tail_rate"] = fit.rate();
    j["tail_rate_stderr"] = fit.slope_stderr;
    j["tail_intercept"] = fit.intercept;
    j["tail_points"] = fit.n_points;
    j["stage_decay_pass"] = stages.pass;
    ctx.write_json("mu.json", j);

    ctx.out << "atoms " << est.atoms.size() << ", censored " << est.censored
            << ", tail rate " << fmt(fit.rate()) << "\n";
    if (!stages.pass)
    {
        throw ContractFailure("stage-decay",
                              "P(stages > " + std::to_string(stages.worst_n)
                                  + ") exceeds theta^n plus 4 sigma");
    }
    return kExitPass;
}

//---------------------------------------------------------------------------//
int cmd_properties(Context& ctx)
{
    auto const& cfg = ctx.cfg;
    std::optional<InducedMeasure> mu;
    if (cfg.task.mu.kind == "empirical")
    {
        LatticeModel model = cfg.model();
        LSData data = cfg.ls_data();
        auto est = std::make_shared<LSMeasureEstimate>(estimate_measure(
            model, data, cfg.origin, cfg.task.n_samples, cfg.engine));
        mu.emplace(std::shared_ptr<LSMeasureEstimate const>(est));
    }
    else
    {
        mu.emplace(cfg.task.mu.analytic(cfg.k));
    }
    bool transient = cfg.task.transient.value_or(cfg.k == 3 && cfg.balanced_b);
    PropertyReport rep = check_properties(*mu, transient);

    Json j = ctx.sidecar();
    j["measure"] = cfg.task.mu.kind;
    j["transient"] = transient;
    for (auto const* v : {&rep.support, &rep.symmetry, &rep.moments})
    {
        j[v->name + "_pass"] = v->pass;
        j[v->name + "_asserted"] = v->asserted;
        j[v->name + "_detail"] = v->detail;
        ctx.out << v->name << ": " << (v->pass ? "pass" : "FAIL")
                << (v->asserted ? "" : " (not asserted)") << "  " << v->detail << "\n";
    }
    j["max_symmetry_z"] = rep.max_symmetry_z;
    j["tail_rate"] = std::isfinite(rep.tail_rate) ? Json(rep.tail_rate) : Json("inf");
    j["pass"] = rep.pass();
    ctx.write_json("properties.json", j);
    for (auto const* v : {&rep.support, &rep.symmetry, &rep.moments})
    {
        if (v->asserted && !v->pass)
            throw ContractFailure(v->name, v->detail);
    }
    return kExitPass;
}

//---------------------------------------------------------------------------//
int cmd_dims(Context& ctx)
{
    auto const& cfg = ctx.cfg;
    AnalyticMeasure mu = cfg.task.mu.analytic(cfg.k);
    std::ostringstream csv;
    csv << "k,d,dim_computed,dim_formula\n";
    Json j = ctx.sidecar();
    j["measure"] = mu.describe();
    Json gaps = Json::object();
    std::string mismatch;
    for (int d = cfg.task.d_min; d <= cfg.task.d_max; ++d)
    {
        HarmonicSpace h = harmonic_dim(mu, cfg.k, d);
        auto formula = poly_space_dim(cfg.k, d) - poly_space_dim(cfg.k, d - 2);
        csv << cfg.k << ',' << d << ',' << h.dim << ',' << formula << "\n";
        gaps[std::to_string(d)] = std::isfinite(h.gap) ? Json(h.gap) : Json("inf");
        ctx.out << "k=" << cfg.k << " d=" << d << " dim=" << h.dim
                << " formula=" << formula << "\n";
        if (h.dim != formula && mismatch.empty())
        {
            mismatch = "d=" + std::to_string(d) + ": computed "
                       + std::to_string(h.dim) + ", formula "
                       + std::to_string(formula);
        }
    }
    j["singular_gap"] = gaps;
    ctx.write_text("dims.csv", csv.str());
    ctx.write_json("dims.json", j);
    if (!mismatch.empty())
        throw ContractFailure("dimension-formula", mismatch);
    return kExitPass;
}

//---------------------------------------------------------------------------//
int cmd_green(Context& ctx)
{
    auto const& cfg = ctx.cfg;
    if (cfg.k != 3)
        throw ConfigError(cfg.source, cfg.line_of("model.k"), "green needs k = 3");
    if (!cfg.balanced_b)
        throw ConfigError(cfg.source, cfg.line_of("ls"), "green needs ls.balanced_b");
    LatticeModel model = cfg.model();
    if (model.has_drift())
    {
        throw ConfigError(cfg.source, cfg.line_of("model.phi"),
                          "green compares against the free-space Green function "
                          "and needs zero drift");
    }
    LSData data = cfg.ls_data();
    Point y = ctx.start_point(centered(cfg, 0.5));
    auto targets = cfg.task.targets;
    if (targets.empty())
        targets = {GroupElement{{2, 0, 0}}, GroupElement{{3, 0, 0}}, GroupElement{{2, 2, 1}}};
    for (auto const& x : targets)
    {
        if (norm(y - model.lattice_point(x)) < data.r_V())
        {
            throw ConfigError(cfg.source, cfg.line_of("task.targets"),
                              "start point lies in V_x for a target");
        }
    }

    EngineConfig e0 = cfg.engine;
    EngineConfig ey = cfg.engine;
    ey.seed = derive_seed(cfg.engine.seed, 1);
    auto est0 = std::make_shared<LSMeasureEstimate>(
        estimate_measure(model, data, cfg.origin, cfg.task.n_samples, e0));
    auto esty = estimate_measure(model, data, y, cfg.task.n_samples, ey);
    InducedMeasure mu{std::shared_ptr<LSMeasureEstimate const>(est0)};
    PropertyReport props = check_properties(mu, true);

    WalkGreenOptions wopts;
    wopts.n_walks = cfg.task.n_walks;
    wopts.horizon = cfg.task.horizon;
    wopts.seed = derive_seed(cfg.engine.seed, 2);
    wopts.workers = cfg.engine.workers;
    auto greens = walk_green(mu, GroupElement{}, &esty, targets, wopts);

    double bc = *data.B() * data.C();
    std::ostringstream csv;
    csv << "x,G_hat,g_hat,ratio,target\n";
    Json j = ctx.sidecar();
    j["B"] = *data.B();
    j["C"] = data.C();
    j["target"] = bc;
    j["y"] = std::vector<double>(y.begin(), y.begin() + 3);
    j["n_samples"] = cfg.task.n_samples;
    j["n_walks"] = wopts.n_walks;
    j["horizon"] = wopts.horizon;
    j["P2_pass"] = props.symmetry.pass;
    j["max_symmetry_z"] = props.max_symmetry_z;
    std::string failure;
    for (std::size_t i = 0; i < targets.size(); ++i)
    {
        Point xp = model.lattice_point(targets[i]);
        double G = 1 / (4 * kPi * norm(xp - y));
        double ratio = G / greens[i].g;
        std::string label = "\"" + to_string(targets[i], 3) + "\"";
        csv << label << ',' << fmt(G) << ',' << fmt(greens[i].g) << ','
            << fmt(ratio) << ',' << fmt(bc) << "\n";
        std::string key = "x" + std::to_string(i);
        j[key + "_g_stderr"] = greens[i].std_error;
        j[key + "_g_tail"] = greens[i].tail;
        ctx.out << to_string(targets[i], 3) << ": G=" << fmt(G)
                << " g=" << fmt(greens[i].g) << " +- " << fmt(greens[i].std_error)
                << " ratio=" << fmt(ratio) << " (B*C=" << fmt(bc) << ")\n";
        if (std::abs(ratio / bc - 1) > 0.15 && failure.empty())
        {
            failure = "G/g = " + fmt(ratio) + " at " + to_string(targets[i], 3)
                      + " is not within 15% of B*C = " + fmt(bc);
        }
    }
    j["pass"] = failure.empty() && props.symmetry.pass;
    ctx.write_text("green.csv", csv.str());
    ctx.write_json("green.json", j);
    if (!failure.empty())
        throw ContractFailure("green-relation", failure);
    if (!props.symmetry.pass)
        throw ContractFailure("P2", props.symmetry.detail);
    return kExitPass;
}

//---------------------------------------------------------------------------//
std::vector<std::string> default_functions(int k)
{
    switch (k)
    {
        case 1:
            return {"x", "x^2"};
        case 2:
            return {"x^2 - y^2", "x*y", "x^2"};
        default:
            return {"x^2 - y^2", "x*y", "x*y*z", "x^2"};
    }
}

Point default_sweep_point(ExperimentConfig const& cfg)
{
    Point p = cfg.origin;
    double offsets[] = {0.5, 0.3, 0.2};
    for (int i = 0; i < cfg.k; ++i)
        p[i] += offsets[i];
    return p;
}

std::string verdict_for(bool harmonic, Residual const& r, double m)
{
    bool within = r.within(m);
    if (harmonic)
        return within ? "pass" : "fail";
    return within ? "control-missed" : "control-detected";
}

int cmd_probe(Context& ctx)
{
    auto const& cfg = ctx.cfg;
    LatticeModel model = cfg.model();
    LSData data = cfg.ls_data();
    auto names = cfg.task.functions.empty() ? default_functions(cfg.k)
                                            : cfg.task.functions;
    double m = cfg.task.multiplier;

    Point lattice_y = ctx.start_point(cfg.origin);
    GroupElement gy = model.nearest_lattice_point(lattice_y);
    if (norm(model.displacement(lattice_y, gy)) > 0)
    {
        throw ConfigError(cfg.source, cfg.line_of("task.y"),
                          "restriction probes need task.y on the lattice");
    }
    auto sweep_points = cfg.task.points;
    if (sweep_points.empty())
        sweep_points.push_back(default_sweep_point(cfg));

    bool want_restriction = false, want_sweep = false;
    for (auto const& p : cfg.task.probes)
    {
        want_restriction = want_restriction || p == "restriction";
        want_sweep = want_sweep || p == "sweep";
    }
    std::optional<LSMeasureEstimate> est;
    if (want_restriction)
        est = estimate_measure(model, data, lattice_y, cfg.task.n_samples, cfg.engine);

    std::ostringstream csv;
    csv << "probe,function,y,residual,sigma,verdict\n";
    std::string failure;
    auto row = [&](char const* probe, HarmonicTestFunction const& f, Point const& y,
                   Residual const& r) {
        std::string v = verdict_for(f.harmonic(), r, m);
        csv << probe << ",\"" << f.name() << "\",\"" << tuple_text(y, cfg.k) << "\","
            << fmt(r.residual) << ',' << fmt(r.sigma) << ',' << v << "\n";
        ctx.out << probe << " " << f.name() << " at " << tuple_text(y, cfg.k)
                << ": residual " << fmt(r.residual) << " sigma " << fmt(r.sigma)
                << " -> " << v << "\n";
        if ((v == "fail" || v == "control-missed") && failure.empty())
        {
            failure = std::string(probe) + " " + f.name() + " at "
                      + tuple_text(y, cfg.k) + ": " + v;
        }
    };
    for (std::size_t i = 0; i < names.size(); ++i)
    {
        auto f = HarmonicTestFunction::polynomial(parse_polynomial(cfg.k, names[i]));
        if (want_restriction)
            row("restriction", f, lattice_y, restriction_residual(model, f, *est));
        if (want_sweep)
        {
            for (std::size_t p = 0; p < sweep_points.size(); ++p)
            {
                EngineConfig e = cfg.engine;
                e.seed = derive_seed(cfg.engine.seed, 100 + 16 * i + p);
                row("sweep", f, sweep_points[p],
                    sweep_residual(model, data, f, sweep_points[p],
                                   cfg.task.n_samples, e));
            }
        }
    }
    Json j = ctx.sidecar();
    j["n_samples"] = cfg.task.n_samples;
    j["multiplier"] = m;
    j["pass"] = failure.empty();
    ctx.write_text("probe.csv", csv.str());
    ctx.write_json("probe.json", j);
    if (!failure.empty())
        throw ContractFailure("harmonicity", failure);
    return kExitPass;
}

//---------------------------------------------------------------------------//
int cmd_extend(Context& ctx)
{
    auto const& cfg = ctx.cfg;
    LatticeModel model = cfg.model();
    LSData data = cfg.ls_data();
    LatticePolynomial h = parse_polynomial(cfg.k, cfg.task.h);
    GrowthFunction growth = cfg.task.growth.value_or(
        GrowthFunction::polynomial(std::max(0, h.degree())));
    bool harmonic = h.laplacian().is_zero();
    auto points = cfg.task.points;
    if (points.empty())
        points.push_back(ctx.start_point(cfg.origin));
    auto hz = [&](GroupElement const& g) { return h(model.lattice_point(g)); };

    std::ostringstream csv;
    csv << "y,value,sigma,tail,expected,verdict\n";
    std::string failure;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        EngineConfig e = cfg.engine;
        e.seed = derive_seed(cfg.engine.seed, 200 + i);
        auto est = estimate_measure(model, data, points[i], cfg.task.n_samples, e);
        Extension ext;
        try
        {
            ext = extend(model, hz, growth, est, cfg.task.truncation);
        }
        catch (TruncationError const& err)
        {
            throw ContractFailure("truncation", err.what());
        }
        double expected = h(points[i]);
        std::string verdict = "reported";
        if (harmonic)
        {
            bool ok = std::abs(ext.value - expected)
                      <= cfg.task.multiplier * ext.sigma + ext.tail;
            verdict = ok ? "pass" : "fail";
            if (!ok && failure.empty())
            {
                failure = "extension of " + h.describe() + " at "
                          + tuple_text(points[i], cfg.k) + " is " + fmt(ext.value)
                          + ", expected " + fmt(expected);
            }
        }
        csv << "\"" << tuple_text(points[i], cfg.k) << "\"," << fmt(ext.value) << ','
            << fmt(ext.sigma) << ',' << fmt(ext.tail) << ',' << fmt(expected) << ','
            << verdict << "\n";
        ctx.out << "extend " << h.describe() << " at " << tuple_text(points[i], cfg.k)
                << ": " << fmt(ext.value) << " +- " << fmt(ext.sigma) << " (tail "
                << fmt(ext.tail) << ", expected " << fmt(expected) << ") -> "
                << verdict << "\n";
    }
    Json j = ctx.sidecar();
    j["h"] = h.describe();
    j["growth"] = growth.describe();
    j["n_samples"] = cfg.task.n_samples;
    j["pass"] = failure.empty();
    ctx.write_text("extend.csv", csv.str());
    ctx.write_json("extend.json", j);
    if (!failure.empty())
        throw ContractFailure("barycenter", failure);
    return kExitPass;
}

//---------------------------------------------------------------------------//
int cmd_cover(Context& ctx)
{
    auto const& cfg = ctx.cfg;
    if (cfg.k != 2)
        throw ConfigError(cfg.source, cfg.line_of("model.k"), "cover-check needs k = 2");
    LatticeModel model = cfg.model();
    LSData data = cfg.ls_data();
    Point y = ctx.start_point(centered(cfg, 0.5));
    CoveringReport rep = covering_check(model, data, y, cfg.task.n_samples, cfg.engine,
                                        cfg.task.window, cfg.task.quotient_mask);
    Json j = ctx.sidecar();
    j["y"] = std::vector<double>(y.begin(), y.begin() + 2);
    j["n_samples"] = rep.n_samples;
    j["window"] = rep.window;
    j["quotient_mask"] = rep.quotient_mask;
    j["tv"] = rep.tv;
    j["bound"] = rep.bound;
    j["cover_mass"] = rep.cover_mass;
    j["pass"] = rep.pass();
    Json atoms = Json::array();
    for (auto const& a : rep.atoms)
        atoms.push_back({{"u", a.u}, {"p_base", a.p_base}, {"p_cover", a.p_cover}, {"z", a.z}});
    j["atoms"] = atoms;
    ctx.write_json("cover.json", j);
    ctx.out << "TV " << fmt(rep.tv) << " bound " << fmt(rep.bound) << " cover mass "
            << fmt(rep.cover_mass) << "\n";
    if (!rep.pass())
    {
        throw ContractFailure("covering",
                              rep.cover_mass < 0.95
                                  ? "cover mass in window " + fmt(rep.cover_mass)
                                        + " < 0.95"
                                  : "TV " + fmt(rep.tv) + " exceeds bound "
                                        + fmt(rep.bound));
    }
    return kExitPass;
}

using Command = int (*)(Context&);

std::map<std::string, Command> const& commands()
{
    static std::map<std::string, Command> const table{
        {"validate-data", cmd_validate},
        {"simulate-mu", cmd_simulate},
        {"properties", cmd_properties},
        {"dims", cmd_dims},
        {"green", cmd_green},
        {"probe-harmonic", cmd_probe},
        {"extend", cmd_extend},
        {"cover-check", cmd_cover},
    };
    return table;
}
}  // namespace

std::vector<std::string> const& subcommands()
{
    static std::vector<std::string> const names = [] {
        std::vector<std::string> v;
        for (auto const& [name, cmd] : commands())
            v.push_back(name);
        return v;
    }();
    return names;
}

int run(RunOptions const& opts, std::ostream& out, std::ostream& err)
{
    auto it = commands().find(opts.subcommand);
    if (it == commands().end())
    {
        err << "unknown subcommand \"" << opts.subcommand << "\"\n";
        return kExitConfig;
    }
    try
    {
        ExperimentConfig cfg = load_config(opts.config);
        if (opts.seed)
            cfg.engine.seed = *opts.seed;
        if (opts.workers)
            cfg.engine.workers = *opts.workers;
        else if (!cfg.lines.count("engine.workers") && opts.env_workers)
            cfg.engine.workers = *opts.env_workers;
        if (cfg.engine.workers < 1)
            throw ConfigError(cfg.source, cfg.line_of("engine.workers"),
                              "workers must be at least 1");

        std::filesystem::create_directories(opts.out_dir);
        Context ctx{std::move(cfg), opts.out_dir, out, opts.subcommand};
        return it->second(ctx);
    }
    catch (ConfigError const& e)
    {
        err << "invalid config: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (InvalidLsData const& e)
    {
        err << "invalid config: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (ContractFailure const& e)
    {
        err << "contract failed " << e.what() << "\n";
        return kExitContract;
    }
    catch (QualityError const& e)
    {
        err << "contract failed (censoring) " << e.what() << "\n";
        return kExitContract;
    }
    catch (TruncationError const& e)
    {
        err << "contract failed (truncation) " << e.what() << "\n";
        return kExitContract;
    }
    catch (DomainError const& e)
    {
        err << "invalid config: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (std::exception const& e)
    {
        err << "error: " << e.what() << "\n";
        return kExitContract;
    }
}

}  // namespace lsl
