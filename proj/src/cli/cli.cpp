#include "reins/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "reins/closed_form.hpp"
#include "reins/market_model.hpp"
#include "reins/oracles.hpp"
#include "reins/sensitivity.hpp"
#include "reins/stochastic_sim.hpp"

namespace reins::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Tolerances of the verification suites.
constexpr double kHjbValueTolerance = 1e-3;
constexpr double kHjbPolicySpacings = 2.0;
constexpr double kLatticeValueTolerance = 5e-3;
constexpr double kDetStopTolerance = 1e-6;
constexpr double kAssertZ = 5.0;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config;
    std::string manifest;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned threads = 0;
    std::map<std::string, double> overrides;
};

struct Context {
    ModelParams params;
    std::uint64_t seed;
    std::ostream& out;
    std::ostream& err;
};

std::string sig6(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

ModelParams resolve_params(const CommonOptions& o, std::optional<std::uint64_t>& manifest_seed) {
    ModelParams m = baseline_params();
    if (!o.manifest.empty()) {
        std::ifstream in(o.manifest);
        if (!in) throw ConfigError("cannot open manifest `" + o.manifest + "`");
        json j;
        try {
            in >> j;
            KeyValues kv;
            for (const auto& [key, value] : j.at("params").items()) kv[key] = value.get<double>();
            m = params_from_key_values(kv);
            manifest_seed = j.at("seed").get<std::uint64_t>();
        } catch (const json::exception& e) {
            throw ConfigError("malformed manifest `" + o.manifest + "`: " + e.what());
        }
    } else if (!o.config.empty()) {
        m = load_config(o.config);
    }
    for (const auto& [key, value] : o.overrides) {
        if (key == "p") m.p = value;
        else if (key == "q") m.q = value;
        else if (key == "sigma0") m.sigma0 = value;
        else if (key == "eta") m.eta = value;
        else if (key == "big_r") m.big_r = value;
        else if (key == "big_t") m.big_t = value;
        else if (key == "k") m.k = value;
        else if (key == "r0") m.r0 = value;
    }
    return validate(m);
}

json params_json(const ModelParams& m) {
    return {{"p", m.p},         {"q", m.q},         {"sigma0", m.sigma0}, {"eta", m.eta},
            {"big_r", m.big_r}, {"big_t", m.big_t}, {"k", m.k},           {"r0", m.r0}};
}

fs::path output_dir(const CommonOptions& o) {
    fs::path dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write `" + path.string() + "`");
    return f;
}

// ---------------------------------------------------------------------------
// solve

struct Range {
    double lo;
    double hi;
    std::size_t n;
};

Range parse_range(const std::string& text) {
    std::istringstream in(text);
    std::string a, b, c;
    if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, c))
        throw UsageError("bad range `" + text + "`, expected lo:hi:n");
    try {
        Range r{std::stod(a), std::stod(b), static_cast<std::size_t>(std::stoul(c))};
        if (r.n < 1 || (r.n > 1 && !(r.lo <= r.hi))) throw UsageError("bad range `" + text + "`");
        return r;
    } catch (const std::logic_error&) {
        throw UsageError("bad range `" + text + "`, expected lo:hi:n");
    }
}

Eigen::VectorXd grid_of(const Range& r) {
    if (r.n == 1) return Eigen::VectorXd::Constant(1, r.lo);
    return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(r.n), r.lo, r.hi);
}

std::string describe_strategy(const Strategy& s, const ModelParams& m, bool optimal = true) {
    if (s.is_null(m.big_t)) return "never subscribe (null strategy, retention 1)";
    std::ostringstream os;
    os << "subscribe at t = " << sig6(s.stop_time);
    if (optimal) {
        os << ", retention u*(s) = " << sig6(m.q / (m.eta * m.sigma0 * m.sigma0)) << " * exp(-"
           << sig6(m.big_r) << " * (" << sig6(m.big_t) << " - s))";
    } else {
        const auto [lo, hi] = s.retention.range(s.stop_time, m.big_t);
        os << ", scheduled retention in [" << sig6(lo) << ", " << sig6(hi) << "] ("
           << s.retention.pieces().size() << " pieces)";
    }
    return os.str();
}

int cmd_solve(const Context& ctx, const CommonOptions& o, const std::string& table) {
    const auto& m = ctx.params;
    const auto d = classify(m);
    static const char* ta_names[] = {"whole", "interior", "empty"};
    ctx.out << "K*       " << sig6(d.k_star) << '\n';
    ctx.out << "K        " << sig6(m.k) << '\n';
    ctx.out << "regime   " << to_string(d.regime) << '\n';
    ctx.out << "t_A      " << sig6(d.t_a.value) << " (" << ta_names[static_cast<int>(d.t_a.which)]
            << ")\n";
    ctx.out << "t*       " << (d.t_star ? sig6(*d.t_star) : std::string("none")) << '\n';
    ctx.out << "q*       " << (d.q_star ? sig6(*d.q_star) : std::string("none (negative discriminant)"))
            << '\n';
    ctx.out << "V(0,R0)  " << sig6(value(0.0, m.r0, m, d)) << '\n';
    ctx.out << "decision " << describe_strategy(decide(0.0, m.r0, m, d), m) << '\n';

    if (!table.empty()) {
        const auto comma = table.find(',');
        if (comma == std::string::npos) throw UsageError("--table expects t0:t1:n,x0:x1:m");
        const Range tr = parse_range(table.substr(0, comma));
        const Range xr = parse_range(table.substr(comma + 1));
        if (tr.lo < 0.0 || tr.hi > m.big_t) throw UsageError("--table times must lie in [0, T]");
        const Eigen::VectorXd tg = grid_of(tr);
        const Eigen::VectorXd xg = grid_of(xr);
        ValueSurface s{tg, xg, value_table(tg, xg, m), std::nullopt};
        const auto path = output_dir(o) / "value_table.csv";
        auto f = open_output(path);
        write_csv(f, s);
        ctx.out << "table    " << path.string() << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// simulate

Strategy load_schedule(const std::string& path, const ModelParams& m) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schedule file `" + path + "`");
    std::optional<double> stop;
    std::vector<std::pair<double, double>> knots;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), '=', ' ');
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "stop_time") {
            double v;
            if (!(ls >> v)) throw ConfigError("schedule: stop_time needs a value");
            stop = v;
            continue;
        }
        double u;
        try {
            const double s = std::stod(first);
            if (!(ls >> u)) throw ConfigError("schedule: expected `start retention`");
            knots.emplace_back(s, u);
        } catch (const std::logic_error&) {
            throw ConfigError("schedule: unrecognised line `" + line + "`");
        }
    }
    if (!stop) throw ConfigError("schedule: missing stop_time");
    if (knots.empty()) knots.emplace_back(0.0, 1.0);
    if (knots.front().first > 0.0) knots.insert(knots.begin(), {0.0, knots.front().second});
    try {
        return {*stop, RetentionSchedule::piecewise_constant(std::move(knots), m.big_t)};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("schedule: ") + e.what());
    }
}

struct SimulateOptions {
    std::string strategy = "optimal";
    std::string schedule;
    std::size_t paths = 100000;
    std::string scheme = "exact";
    std::size_t steps = 1000;
    bool antithetic = false;
    bool assert_mode = false;
    std::string dump;
};

int cmd_simulate(const Context& ctx, const CommonOptions& o, const SimulateOptions& s) {
    const auto& m = ctx.params;
    const auto d = classify(m);

    Strategy strategy = Strategy::null_strategy(m.big_t);
    double exact = 0.0;
    std::string reference;
    if (s.strategy == "optimal") {
        strategy = decide(0.0, m.r0, m, d);
        exact = value(0.0, m.r0, m, d);
        reference = "value(0, R0)";
    } else if (s.strategy == "null") {
        exact = g_value(0.0, m.r0, m);
        reference = "g(0, R0)";
    } else if (s.strategy == "file") {
        if (s.schedule.empty()) throw UsageError("--strategy file needs --schedule PATH");
        strategy = load_schedule(s.schedule, m);
        exact = utility_of_schedule(0.0, m.r0, strategy, m);
        reference = "utility_of_schedule";
    } else {
        throw UsageError("--strategy must be optimal, null or file");
    }

    PathConfig config;
    config.n_paths = s.paths;
    config.n_steps = s.steps;
    config.seed = ctx.seed;
    config.antithetic = s.antithetic;
    config.threads = o.threads;
    if (s.scheme == "exact") config.scheme = Scheme::ExactGaussian;
    else if (s.scheme == "euler") config.scheme = Scheme::EulerMaruyama;
    else throw UsageError("--scheme must be exact or euler");

    const Eigen::VectorXd samples = simulate_strategy(0.0, m.r0, strategy, m, config);
    const auto est = mc_exp_utility(samples, m.eta, ctx.seed, s.antithetic);
    const double diff = est.mean - exact;
    double z = 0.0;
    if (est.std_error > 0.0) z = diff / est.std_error;
    else if (std::abs(diff) > 1e-12 * std::abs(exact)) z = std::copysign(std::numeric_limits<double>::infinity(), diff);

    if (!s.dump.empty()) {
        auto f = open_output(s.dump);
        write_samples(f, samples);
    }

    ctx.out << "strategy   " << describe_strategy(strategy, m, s.strategy != "file") << '\n';
    ctx.out << "paths      " << est.n_paths << " (seed " << est.seed << ", "
            << (config.scheme == Scheme::ExactGaussian ? "exact Gaussian" : "Euler-Maruyama")
            << (s.antithetic ? ", antithetic" : "") << ")\n";
    ctx.out << "estimate   " << sig6(est.mean) << '\n';
    ctx.out << "std_error  " << sig6(est.std_error) << (est.std_error == 0.0 ? " (zero variance)" : "")
            << '\n';
    ctx.out << "ci95       [" << sig6(est.ci95_low) << ", " << sig6(est.ci95_high) << "]\n";
    ctx.out << "exact      " << sig6(exact) << " (" << reference << ")\n";
    ctx.out << "z          " << sig6(z) << '\n';

    if (s.assert_mode && !(std::abs(z) <= kAssertZ)) {
        ctx.err << "error: |z| = " << sig6(std::abs(z)) << " exceeds " << kAssertZ << '\n';
        return kSimulationAssertion;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// verify

struct CheckLine {
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<CheckLine> verify_hjb(const ModelParams& m, const GridSpec& grid, const HjbOptions& opts) {
    const auto surface = hjb_pure_reinsurance(m, grid, opts);
    const auto interior = interior_columns(surface.x_grid);
    double value_err = 0.0;
    double policy_err = 0.0;
    for (Eigen::Index i = 0; i < surface.t_grid.size(); ++i) {
        const double t = surface.t_grid(i);
        const double u = u_star(t, m);
        for (Eigen::Index j = 0; j < surface.x_grid.size(); ++j) {
            if (!interior[static_cast<std::size_t>(j)]) continue;
            const double exact = v_bar(t, surface.x_grid(j), m);
            value_err = std::max(value_err, std::abs(surface.values(i, j) / exact - 1.0));
            policy_err = std::max(policy_err, std::abs((*surface.policy)(i, j) - u));
        }
    }
    const double spacing = 1.0 / static_cast<double>(opts.n_controls - 1);
    return {{"hjb.value", value_err <= kHjbValueTolerance,
             "max rel. error " + sig6(value_err) + " (tol " + sig6(kHjbValueTolerance) + ")"},
            {"hjb.policy", policy_err <= kHjbPolicySpacings * spacing,
             "max |u - u*| " + sig6(policy_err) + " (tol " + sig6(kHjbPolicySpacings * spacing) + ")"}};
}

std::vector<CheckLine> verify_lattice(const ModelParams& m, const GridSpec& grid) {
    const auto d = classify(m);
    const auto result = stopping_lattice(m, grid);
    const auto& s = result.surface;
    const auto interior = interior_columns(s.x_grid);
    double err = 0.0;
    for (Eigen::Index i = 0; i < s.t_grid.size(); ++i)
        for (Eigen::Index j = 0; j < s.x_grid.size(); ++j)
            if (interior[static_cast<std::size_t>(j)])
                err = std::max(err, std::abs(s.values(i, j) / value(s.t_grid(i), s.x_grid(j), m, d) - 1.0));

    std::vector<CheckLine> lines{{"lattice.value", err <= kLatticeValueTolerance,
                                  "max rel. error " + sig6(err) + " (tol " + sig6(kLatticeValueTolerance) + ")"}};
    const double step = m.big_t / static_cast<double>(grid.n_t);
    if (d.t_star) {
        const bool found = result.last_stop_time.has_value();
        const double boundary = found ? *result.last_stop_time : -1.0;
        const double gap = std::abs(boundary - *d.t_star);
        // a slice mixing stop and continue is tolerated only next to t*
        const bool band_ok =
            result.purely_temporal || (std::abs(*result.mixed_from - *d.t_star) <= step &&
                                       std::abs(*result.mixed_to - *d.t_star) <= step);
        std::string band = "";
        if (!result.purely_temporal)
            band = ", x-dependent slices in [" + sig6(*result.mixed_from) + ", " + sig6(*result.mixed_to) + "]";
        lines.push_back({"lattice.boundary", found && band_ok && gap <= step,
                         "last stop " + (found ? sig6(boundary) : std::string("none")) + ", t* " +
                             sig6(*d.t_star) + ", |gap| " + sig6(gap) + " (tol " + sig6(step) + ")" + band});
    } else {
        const bool never = !result.last_stop_time.has_value();
        lines.push_back({"lattice.no_stop", never,
                         never ? "never stops before T"
                               : "stops at t = " + sig6(*result.last_stop_time) + " although K >= K*"});
    }
    return lines;
}

std::vector<CheckLine> verify_detstop(const ModelParams& m) {
    const auto d = classify(m);
    const auto best = best_deterministic_stop(0.0, m.r0, m, 400);
    const double exact = value(0.0, m.r0, m, d);
    const double rel = std::abs(best.best_value / exact - 1.0);
    if (d.t_star) {
        return {{"detstop.argmin", best.best_index == 0,
                 "argmin s = " + sig6(best.best_time) + " (expected 0)"},
                {"detstop.value", rel <= kDetStopTolerance,
                 "rel. error vs value(0, R0) " + sig6(rel) + " (tol " + sig6(kDetStopTolerance) + ")"}};
    }
    return {{"detstop.argmin", best.best_time == m.big_t,
             "argmin s = " + sig6(best.best_time) + " (expected T = " + sig6(m.big_t) + ")"},
            {"detstop.value", rel <= kDetStopTolerance,
             "rel. error vs g(0, R0) " + sig6(rel) + " (tol " + sig6(kDetStopTolerance) + ")"}};
}

int cmd_verify(const Context& ctx, const std::string& suite, const GridSpec& grid,
               const std::string& time_scheme) {
    if (suite != "hjb" && suite != "lattice" && suite != "detstop" && suite != "all")
        throw UsageError("--suite must be hjb, lattice, detstop or all");
    HjbOptions opts;
    if (time_scheme == "be") opts.scheme = TimeScheme::BackwardEuler;
    else if (time_scheme != "cn") throw UsageError("--time-scheme must be cn or be");
    std::vector<CheckLine> lines;
    auto append = [&](std::vector<CheckLine> more) {
        lines.insert(lines.end(), more.begin(), more.end());
    };
    if (suite == "hjb" || suite == "all") append(verify_hjb(ctx.params, grid, opts));
    if (suite == "lattice" || suite == "all") append(verify_lattice(ctx.params, grid));
    if (suite == "detstop" || suite == "all") append(verify_detstop(ctx.params));

    std::vector<std::string> failed;
    for (const auto& l : lines) {
        ctx.out << (l.pass ? "PASS " : "FAIL ") << l.name << ": " << l.detail << '\n';
        if (!l.pass) failed.push_back(l.name);
    }
    if (!failed.empty()) {
        ctx.err << "error: verification failed:";
        for (const auto& f : failed) ctx.err << ' ' << f;
        ctx.err << '\n';
        return kVerificationFailure;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const Context& ctx, const CommonOptions& o, const std::vector<std::string>& positional,
              bool all_panels, bool log_spacing) {
    std::vector<PanelSpec> panels;
    std::size_t n = 50;
    if (all_panels) {
        if (positional.size() == 1) n = std::stoul(positional[0]);
        else if (!positional.empty()) throw UsageError("--all-panels takes at most a point count");
        panels = default_panels();
    } else {
        if (positional.size() != 4) throw UsageError("usage: sweep PARAM LO HI N (or --all-panels)");
        try {
            panels.push_back({parse_sweep_param(positional[0]), std::stod(positional[1]),
                              std::stod(positional[2])});
            n = std::stoul(positional[3]);
        } catch (const SweepError&) {
            throw;
        } catch (const std::logic_error&) {
            throw UsageError("usage: sweep PARAM LO HI N");
        }
    }

    const auto dir = output_dir(o);
    for (const auto& panel : panels) {
        const auto result = sweep(panel.param, panel.lo, panel.hi, n, ctx.params,
                                  {.log_spacing = log_spacing && panel.param == SweepParam::Eta});
        for (const auto& w : result.warnings) ctx.err << "warning: " << w << '\n';
        const auto stem = "sweep_" + to_string(panel.param);
        {
            auto f = open_output(dir / (stem + ".csv"));
            write_csv(f, result.records);
        }
        {
            auto f = open_output(dir / (stem + ".svg"));
            write_svg(f, result.records);
        }
        ctx.out << to_string(panel.param) << ": " << result.records.size() << " rows over ["
                << sig6(result.lo) << ", " << sig6(result.hi) << "], K* "
                << monotonicity_report(result.records).describe() << " -> "
                << (dir / (stem + ".csv")).string() << '\n';
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const auto started = std::chrono::steady_clock::now();

    CLI::App app{"Optimal proportional reinsurance with a fixed subscription cost", "reins"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOptions common;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "random seed");
    app.add_option("--config", common.config, "flat key = value parameter file");
    app.add_option("--manifest", common.manifest, "re-use parameters and seed of a run manifest");
    app.add_option("--out", common.out_dir, "output directory");
    app.add_option("--threads", common.threads, "worker thread cap (0: all cores)");
    std::map<std::string, double> raw_overrides;
    for (const char* key : {"p", "q", "sigma0", "eta", "big_r", "big_t", "k", "r0"})
        app.add_option(std::string("--") + key, raw_overrides[key], std::string("override ") + key);
    app.fallthrough();

    auto* solve = app.add_subcommand("solve", "thresholds, regime and optimal strategy");
    std::string table;
    solve->add_option("--table", table, "write value(t,x) CSV on t0:t1:n,x0:x1:m");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of E[exp(-eta X_T)]");
    SimulateOptions sim;
    simulate->add_option("--strategy", sim.strategy, "optimal | null | file");
    simulate->add_option("--schedule", sim.schedule, "schedule file for --strategy file");
    simulate->add_option("--paths", sim.paths, "number of paths");
    simulate->add_option("--scheme", sim.scheme, "exact | euler");
    simulate->add_option("--steps", sim.steps, "time steps for the Euler scheme");
    simulate->add_flag("--antithetic", sim.antithetic, "antithetic pairs");
    simulate->add_flag("--assert", sim.assert_mode, "exit 3 when |z| > 5");
    simulate->add_option("--dump", sim.dump, "write terminal wealth samples to a file");

    auto* verify = app.add_subcommand("verify", "compare closed forms against numerical oracles");
    std::string suite = "all";
    GridSpec grid;
    verify->add_option("--suite", suite, "hjb | lattice | detstop | all");
    verify->add_option("--nt", grid.n_t, "time steps");
    verify->add_option("--nx", grid.n_x, "space intervals");
    std::string time_scheme = "cn";
    verify->add_option("--time-scheme", time_scheme, "HJB time stepping: cn (Crank-Nicolson) | be (backward Euler)");

    auto* sweep_cmd = app.add_subcommand("sweep", "threshold sensitivity sweeps");
    std::vector<std::string> positional;
    bool all_panels = false;
    bool log_spacing = false;
    sweep_cmd->add_option("args", positional, "PARAM LO HI N");
    sweep_cmd->add_flag("--all-panels", all_panels, "q, eta, sigma0 and T panels");
    sweep_cmd->add_flag("--log", log_spacing, "log-spaced grid for eta");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    for (const auto& [key, value] : raw_overrides)
        if (app.count("--" + key) > 0) common.overrides[key] = value;
    if (*seed_opt) common.seed = seed_value;

    std::string subcommand = app.get_subcommands().front()->get_name();
    try {
        std::optional<std::uint64_t> manifest_seed;
        const ModelParams params = resolve_params(common, manifest_seed);
        const std::uint64_t seed = common.seed.value_or(manifest_seed.value_or(PathConfig{}.seed));
        Context ctx{params, seed, out, err};

        int code = kOk;
        if (subcommand == "solve") code = cmd_solve(ctx, common, table);
        else if (subcommand == "simulate") code = cmd_simulate(ctx, common, sim);
        else if (subcommand == "verify") code = cmd_verify(ctx, suite, grid, time_scheme);
        else code = cmd_sweep(ctx, common, positional, all_panels, log_spacing);

        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        const json manifest = {{"subcommand", subcommand},
                               {"args", args},
                               {"params", params_json(params)},
                               {"seed", seed},
                               {"version", kVersion},
                               {"duration_seconds", seconds}};
        if (!common.out_dir.empty()) {
            auto f = open_output(output_dir(common) / "manifest.json");
            f << manifest.dump(2) << '\n';
        } else {
            err << "manifest: " << manifest.dump() << '\n';
        }
        return code;
    } catch (const ValidationError& e) {
        err << "error: invalid model parameters\n";
        for (const auto& v : e.violations()) err << "  " << v << '\n';
        return kConfigError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const SweepError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const GridError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace reins::cli
