// kerrsqueeze: batch driver for sweeps, Monte Carlo robustness runs, baseline
// reports and plot data.
//
//   kerrsqueeze sweep --kind cubic --grid 0.2:3:15 --profile ci --out runs/
//   kerrsqueeze mc --kind cubic --params runs/params_cubic.csv --gamma 0.01,0.05
//   kerrsqueeze baselines
//   kerrsqueeze plotdata --input runs/mc_cubic_0.05.csv --style svg --out band.svg
//
// Every command resolves its configuration as: profile defaults, then the
// --config file (a flat JSON object or a previously written manifest), then
// explicit flags.  The resolved configuration is written into the manifest,
// so `--config manifest.json` replays a run.

#include "kerrsqueeze/io.hpp"
#include "kerrsqueeze/metrics.hpp"
#include "kerrsqueeze/optimizer.hpp"
#include "kerrsqueeze/robustness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace kerrsqueeze;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Profile {
    std::size_t dim;
    std::size_t n_starts;
    std::size_t n_runs;
};

Profile profile_named(const std::string& name) {
    if (name == "full") {
        return {kDefaultDim, kDefaultStarts, kDefaultRuns};
    }
    if (name == "ci") {
        return {120, 40, 1000};
    }
    throw ConfigError("unknown profile '" + name + "' (expected full or ci)");
}

std::vector<double> default_grid(SweepKind kind) {
    switch (kind) {
    case SweepKind::linear:
        return linspace(0.1, 3.0, 30);
    case SweepKind::cubic:
        return linspace(0.2, 3.0, 15);
    case SweepKind::quartic:
        return linspace(0.1, 1.2, 12);
    }
    return {};
}

// "lo:hi:n" or a comma-separated list.
std::vector<double> parse_grid(const std::string& spec) {
    if (spec.find(':') != std::string::npos) {
        const auto parts = [&] {
            std::vector<std::string> out;
            std::size_t start = 0;
            for (std::size_t colon = spec.find(':'); colon != std::string::npos; colon = spec.find(':', start)) {
                out.push_back(spec.substr(start, colon - start));
                start = colon + 1;
            }
            out.push_back(spec.substr(start));
            return out;
        }();
        if (parts.size() != 3) {
            throw ConfigError("grid spec must be lo:hi:n, got '" + spec + "'");
        }
        const double n = io::parse_number(parts[2]);
        if (!(n >= 1.0) || n != std::floor(n)) {
            throw ConfigError("grid point count must be a positive integer");
        }
        return linspace(io::parse_number(parts[0]), io::parse_number(parts[1]), static_cast<std::size_t>(n));
    }
    std::vector<double> out;
    for (const auto& f : io::split_fields(spec)) {
        out.push_back(io::parse_number(f));
    }
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& f : io::split_fields(s)) {
        out.push_back(io::parse_number(f));
    }
    return out;
}

// Flat config object from a file; manifests contribute their "config".
json load_config_file(const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError(path + ": configuration must be a JSON object");
    }
    if (j.contains("config") && j["config"].is_object()) {
        return j["config"];
    }
    return j;
}

template <typename T>
T get(const json& cfg, const char* key) {
    if (!cfg.contains(key)) {
        throw ConfigError(std::string("missing configuration key '") + key + "'");
    }
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

std::vector<double> grid_from(const json& v) {
    if (v.is_string()) {
        return parse_grid(v.get<std::string>());
    }
    if (v.is_array()) {
        return v.get<std::vector<double>>();
    }
    throw ConfigError("grid must be a string spec or an array of numbers");
}

json timings(std::chrono::steady_clock::time_point t0) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return json{{"total_seconds", s}};
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepFlags {
    std::string config;
    std::string profile;
    std::string kind;
    std::string grid;
    std::size_t dim = 0;
    std::string convention;
    std::size_t n_starts = 0;
    std::uint64_t seed = 0;
    std::string out;
};

io::Table sweep_table(const SweepResult& r) {
    io::Table t;
    switch (r.kind) {
    case SweepKind::linear:
        t.header = {"alpha", "min_eigenvalue", "chi"};
        for (const auto& p : r.points) {
            t.rows.push_back({p.primary_param, p.objective, p.best_params[0]});
        }
        break;
    case SweepKind::cubic:
        t.header = {"primary_param", "objective_variance", "xi", "chi", "phi", "beta", "g"};
        for (const auto& p : r.points) {
            const auto& q = p.best_params;
            t.rows.push_back({p.primary_param, p.objective, p.xi, q[0], q[1], q[2], q[3]});
        }
        break;
    case SweepKind::quartic:
        t.header = {"primary_param", "objective_variance", "xi", "chi", "phi1", "omega", "phi2"};
        for (const auto& p : r.points) {
            const auto& q = p.best_params;
            t.rows.push_back({p.primary_param, p.objective, p.xi, q[0], q[1], q[2], q[3]});
        }
        break;
    }
    return t;
}

io::Table params_table(const SweepResult& r) {
    io::Table t;
    if (r.kind == SweepKind::linear) {
        t.header = {"alpha", "chi"};
        for (const auto& p : r.points) {
            t.rows.push_back({p.primary_param, p.best_params[0]});
        }
        return t;
    }
    const auto names = circuit_names(r.kind);
    t.header.assign(names.begin(), names.end());
    for (const auto& p : r.points) {
        const CircuitParams c = r.kind == SweepKind::cubic ? cubic_circuit(p).as_array() : quartic_circuit(p).as_array();
        t.rows.emplace_back(c.begin(), c.end());
    }
    return t;
}

// The quartic chi plateau read in both Kerr conventions, and which of them
// lands on the reference value 0.2.
json chi_plateau(const SweepResult& r) {
    constexpr double kReference = 0.2;
    constexpr double kWindow = 0.05;
    const auto& last = r.points.back();
    const double strength = last.best_params[0] * kerr_strength_factor(r.convention);
    json j;
    j["primary_param"] = last.primary_param;
    std::string match = "none";
    for (auto c : {KerrConvention::n_plus_one_squared, KerrConvention::two_n_plus_one_squared}) {
        const double chi = strength / kerr_strength_factor(c);
        j[std::string(to_string(c))] = chi;
        if (std::abs(chi - kReference) <= kWindow && match == "none") {
            match = std::string(to_string(c));
        }
    }
    j["reference"] = kReference;
    j["matching_convention"] = match;
    return j;
}

int cmd_sweep(const SweepFlags& f, const CLI::App& app) {
    const auto t0 = std::chrono::steady_clock::now();
    json file_cfg = f.config.empty() ? json::object() : load_config_file(f.config);
    auto given = [&](const char* flag) { return app.count(flag) > 0; };

    const std::string profile_name =
        given("--profile") ? f.profile : file_cfg.value("profile", std::string("full"));
    const Profile prof = profile_named(profile_name);

    json cfg;
    cfg["command"] = "sweep";
    cfg["profile"] = profile_name;
    cfg["kind"] = given("--kind") ? f.kind : get<std::string>(file_cfg, "kind");
    const SweepKind kind = parse_kind(cfg["kind"].get<std::string>());
    std::vector<double> grid = given("--grid")          ? parse_grid(f.grid)
                               : file_cfg.contains("grid") ? grid_from(file_cfg["grid"])
                                                           : default_grid(kind);
    grid = validate_grid(kind, std::move(grid));
    cfg["grid"] = grid;
    cfg["dim"] = given("--dim") ? f.dim : file_cfg.value("dim", prof.dim);
    cfg["convention"] = given("--convention") ? f.convention : file_cfg.value("convention", std::string("nPlus1Sq"));
    cfg["n_starts"] = given("--starts") ? f.n_starts : file_cfg.value("n_starts", prof.n_starts);
    cfg["seed"] = given("--seed") ? f.seed : file_cfg.value("seed", std::uint64_t{1});
    cfg["out"] = given("--out") ? f.out : file_cfg.value("out", std::string("."));

    SweepConfig sc;
    sc.dim = get<std::size_t>(cfg, "dim");
    sc.convention = parse_convention(get<std::string>(cfg, "convention"));
    sc.n_starts = get<std::size_t>(cfg, "n_starts");
    sc.seed = get<std::uint64_t>(cfg, "seed");
    require_dim(sc.dim);

    const SweepResult result = sweep(kind, grid, sc);

    const fs::path out = get<std::string>(cfg, "out");
    const std::string k(to_string(kind));
    const std::string sweep_csv = io::to_csv(sweep_table(result));
    const std::string params_csv = io::to_csv(params_table(result));
    json outputs;
    if (!result.points.empty()) {
        io::write_atomic(out / ("sweep_" + k + ".csv"), sweep_csv);
        io::write_atomic(out / ("params_" + k + ".csv"), params_csv);
        outputs["sweep_" + k + ".csv"] = io::git_blob_hash(sweep_csv);
        outputs["params_" + k + ".csv"] = io::git_blob_hash(params_csv);
    }

    json diag;
    diag["points"] = json::array();
    for (const auto& p : result.points) {
        diag["points"].push_back({{"primary_param", p.primary_param},
                                  {"n_evals", p.n_evals},
                                  {"n_rejected", p.n_rejected}});
    }
    diag["failures"] = json::array();
    for (const auto& fl : result.failures) {
        diag["failures"].push_back({{"primary_param", fl.primary_param}, {"message", fl.message}});
    }
    if (kind == SweepKind::quartic && !result.points.empty()) {
        diag["chi_plateau"] = chi_plateau(result);
    }

    json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = cfg;
    manifest["convention"] = cfg["convention"];
    manifest["seed"] = cfg["seed"];
    manifest["dim"] = cfg["dim"];
    manifest["timings"] = timings(t0);
    manifest["diagnostics"] = diag;
    manifest["csv_schema"] = io::kCsvSchemaVersion;
    manifest["input_hash"] = io::git_blob_hash(cfg.dump());
    manifest["outputs"] = outputs;
    io::write_atomic(out / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "sweep " << k << ": " << result.points.size() << " points, " << result.failures.size()
              << " failures -> " << out.string() << "\n";
    if (!result.failures.empty()) {
        for (const auto& fl : result.failures) {
            std::cerr << "  failed at " << io::format_number(fl.primary_param) << ": " << fl.message << "\n";
        }
        return kExitNumerical;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// mc
// ---------------------------------------------------------------------------

struct McFlags {
    std::string config;
    std::string profile;
    std::string kind;
    std::string params;
    std::string mu;
    std::string gammas;
    std::size_t n_runs = 0;
    std::vector<std::string> fixed;
    std::uint64_t seed = 0;
    std::size_t dim = 0;
    std::string convention;
    std::string out;
};

std::vector<CircuitParams> read_mu_table(const fs::path& path, SweepKind kind) {
    if (!fs::exists(path)) {
        throw ConfigError("sweep parameters not found: " + path.string() + " (run `kerrsqueeze sweep` first)");
    }
    const io::Table t = io::parse_csv(io::read_file(path), path.string());
    const auto names = circuit_names(kind);
    std::array<std::size_t, 5> cols{};
    for (std::size_t j = 0; j < names.size(); ++j) {
        cols[j] = t.column(names[j]);
    }
    std::vector<CircuitParams> out;
    for (const auto& row : t.rows) {
        CircuitParams mu{};
        for (std::size_t j = 0; j < mu.size(); ++j) {
            mu[j] = row[cols[j]];
        }
        out.push_back(mu);
    }
    return out;
}

int cmd_mc(const McFlags& f, const CLI::App& app) {
    const auto t0 = std::chrono::steady_clock::now();
    json file_cfg = f.config.empty() ? json::object() : load_config_file(f.config);
    auto given = [&](const char* flag) { return app.count(flag) > 0; };

    const std::string profile_name =
        given("--profile") ? f.profile : file_cfg.value("profile", std::string("full"));
    const Profile prof = profile_named(profile_name);

    json cfg;
    cfg["command"] = "mc";
    cfg["profile"] = profile_name;
    cfg["kind"] = given("--kind") ? f.kind : get<std::string>(file_cfg, "kind");
    const SweepKind kind = parse_kind(cfg["kind"].get<std::string>());
    if (kind == SweepKind::linear) {
        throw ConfigError("mc supports the cubic and quartic kinds");
    }

    // mu source: inline tuple or a params CSV
    std::vector<CircuitParams> mus;
    json sweep_cfg = json::object();
    if (given("--mu") || (!given("--params") && file_cfg.contains("mu"))) {
        const auto v = given("--mu") ? parse_list(f.mu) : file_cfg["mu"].get<std::vector<double>>();
        if (v.size() != 5) {
            throw ConfigError("mu must have 5 entries");
        }
        cfg["mu"] = v;
        mus.push_back({v[0], v[1], v[2], v[3], v[4]});
    } else {
        const std::string params = given("--params") ? f.params
                                                     : file_cfg.value("params", std::string("params_") +
                                                                                    std::string(to_string(kind)) + ".csv");
        cfg["params"] = params;
        mus = read_mu_table(params, kind);
        // the sweep that produced the tuples supplies dim and convention defaults
        const fs::path sibling = fs::path(params).parent_path() / "manifest.json";
        if (fs::exists(sibling)) {
            sweep_cfg = load_config_file(sibling.string());
        }
    }

    const std::vector<double> gammas = given("--gamma")            ? parse_list(f.gammas)
                                       : file_cfg.contains("gammas") ? file_cfg["gammas"].get<std::vector<double>>()
                                                                     : std::vector<double>{0.01, 0.05};
    if (gammas.empty()) {
        throw ConfigError("at least one gamma is required");
    }
    cfg["gammas"] = gammas;
    cfg["n_runs"] = given("--runs") ? f.n_runs : file_cfg.value("n_runs", prof.n_runs);
    cfg["fixed"] = given("--fixed") ? f.fixed : file_cfg.value("fixed", std::vector<std::string>{});
    cfg["seed"] = given("--seed") ? f.seed : file_cfg.value("seed", std::uint64_t{1});
    cfg["dim"] = given("--dim") ? f.dim : file_cfg.value("dim", sweep_cfg.value("dim", prof.dim));
    cfg["convention"] = given("--convention")
                            ? f.convention
                            : file_cfg.value("convention", sweep_cfg.value("convention", std::string("nPlus1Sq")));
    cfg["out"] = given("--out") ? f.out : file_cfg.value("out", std::string("."));

    const std::size_t dim = get<std::size_t>(cfg, "dim");
    require_dim(dim);
    const KerrConvention convention = parse_convention(get<std::string>(cfg, "convention"));
    const ParamMask mask = mask_for(kind, get<std::vector<std::string>>(cfg, "fixed"));

    const fs::path out = get<std::string>(cfg, "out");
    const std::string k(to_string(kind));
    json outputs;
    json diag = json::array();
    bool failed = false;
    for (double gamma : gammas) {
        FluctuationSpec spec{gamma, get<std::size_t>(cfg, "n_runs"), mask, get<std::uint64_t>(cfg, "seed")};
        validate(spec);
        io::Table t{{"primary_param", "mean_xi", "sigma_plus", "sigma_minus", "n_plus", "n_minus", "failures"}, {}};
        json per_gamma{{"gamma", gamma}, {"points", json::array()}};
        for (const auto& mu : mus) {
            try {
                const MCStats s = monte_carlo(kind, mu, spec, dim, convention);
                t.rows.push_back({mu[0], s.mean_xi, s.sigma_plus, s.sigma_minus, static_cast<double>(s.n_plus),
                                  static_cast<double>(s.n_minus), static_cast<double>(s.failures)});
                per_gamma["points"].push_back({{"primary_param", mu[0]},
                                               {"failures", s.failures},
                                               {"clamped", s.clamped},
                                               {"frac_below_mean", s.frac_below_mean}});
            } catch (const AnalysisFailed& e) {
                failed = true;
                per_gamma["points"].push_back({{"primary_param", mu[0]}, {"error", e.what()}});
                std::cerr << "  gamma " << io::format_short(gamma) << " at " << io::format_number(mu[0]) << ": "
                          << e.what() << "\n";
            }
        }
        diag.push_back(per_gamma);
        if (!t.rows.empty()) {
            const std::string name = "mc_" + k + "_" + io::format_short(gamma) + ".csv";
            const std::string csv = io::to_csv(t);
            io::write_atomic(out / name, csv);
            outputs[name] = io::git_blob_hash(csv);
        }
    }

    json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = cfg;
    manifest["convention"] = cfg["convention"];
    manifest["seed"] = cfg["seed"];
    manifest["dim"] = cfg["dim"];
    manifest["timings"] = timings(t0);
    manifest["diagnostics"] = json{{"fixed_mask", cfg["fixed"]}, {"gammas", diag}};
    manifest["csv_schema"] = io::kCsvSchemaVersion;
    std::string inputs = cfg.dump();
    if (cfg.contains("params")) {
        inputs += io::read_file(cfg["params"].get<std::string>());
    }
    manifest["input_hash"] = io::git_blob_hash(inputs);
    manifest["outputs"] = outputs;
    io::write_atomic(out / ("mc_" + k + "_manifest.json"), manifest.dump(2) + "\n");

    std::cout << "mc " << k << ": " << mus.size() << " points x " << gammas.size() << " gammas -> " << out.string()
              << "\n";
    return failed ? kExitNumerical : 0;
}

// ---------------------------------------------------------------------------
// baselines, plotdata
// ---------------------------------------------------------------------------

int cmd_baselines() {
    const auto b3 = gaussian_baseline(3);
    const auto b4 = gaussian_baseline(4);
    std::cout << "order 3: variance " << io::format_number(b3.variance, 6) << "  g " << io::format_number(b3.g, 6)
              << "\n";
    std::cout << "order 4: variance " << io::format_number(b4.variance, 6) << "  g " << io::format_number(b4.g, 6)
              << "  phi " << io::format_number(b4.phi, 6) << "\n";
    return 0;
}

int cmd_plotdata(const std::string& input, const std::string& style, const std::string& out) {
    const io::Table t = io::parse_csv(io::read_file(input), input);
    std::string text;
    if (style == "svg") {
        text = io::svg(t);
    } else if (style == "tidy") {
        text = io::tidy_csv(t);
    } else {
        throw ConfigError("unknown style '" + style + "' (expected svg or tidy)");
    }
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        io::write_atomic(out, text);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kerr-gate nonlinear squeezing: sweeps, Monte Carlo robustness and plot data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    SweepFlags sf;
    auto* sweep_cmd = app.add_subcommand("sweep", "optimize the circuit over a grid of alpha or r");
    sweep_cmd->add_option("--config", sf.config, "JSON config or manifest to replay");
    sweep_cmd->add_option("--profile", sf.profile, "full (dim 300, 300 starts) or ci (dim 120, 40 starts)");
    sweep_cmd->add_option("--kind", sf.kind, "linear, cubic or quartic");
    sweep_cmd->add_option("--grid", sf.grid, "lo:hi:n or a comma-separated list");
    sweep_cmd->add_option("--dim", sf.dim, "Fock truncation");
    sweep_cmd->add_option("--convention", sf.convention, "nPlus1Sq or twoNplus1Sq");
    sweep_cmd->add_option("--starts", sf.n_starts, "local starts per grid point");
    sweep_cmd->add_option("--seed", sf.seed, "random seed");
    sweep_cmd->add_option("--out", sf.out, "output directory");

    McFlags mf;
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo parameter fluctuations around sweep optima");
    mc_cmd->add_option("--config", mf.config, "JSON config or manifest to replay");
    mc_cmd->add_option("--profile", mf.profile, "full (10000 runs) or ci (1000 runs)");
    mc_cmd->add_option("--kind", mf.kind, "cubic or quartic");
    mc_cmd->add_option("--params", mf.params, "params_<kind>.csv written by sweep");
    mc_cmd->add_option("--mu", mf.mu, "inline circuit tuple, comma-separated");
    mc_cmd->add_option("--gamma", mf.gammas, "relative fluctuation(s), comma-separated");
    mc_cmd->add_option("--runs", mf.n_runs, "runs per point");
    mc_cmd->add_option("--fixed", mf.fixed, "parameter names held at their optimal values");
    mc_cmd->add_option("--seed", mf.seed, "random seed");
    mc_cmd->add_option("--dim", mf.dim, "Fock truncation");
    mc_cmd->add_option("--convention", mf.convention, "nPlus1Sq or twoNplus1Sq");
    mc_cmd->add_option("--out", mf.out, "output directory");

    app.add_subcommand("baselines", "print the Gaussian baselines of the cubic and quartic variances");

    std::string pd_input;
    std::string pd_style = "svg";
    std::string pd_out;
    auto* pd_cmd = app.add_subcommand("plotdata", "turn a sweep or mc CSV into SVG or long-form CSV");
    pd_cmd->add_option("--input", pd_input, "sweep_*.csv or mc_*.csv")->required();
    pd_cmd->add_option("--style", pd_style, "svg or tidy");
    pd_cmd->add_option("--out", pd_out, "output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sweep_cmd) {
            return cmd_sweep(sf, *sweep_cmd);
        }
        if (*mc_cmd) {
            return cmd_mc(mf, *mc_cmd);
        }
        if (app.got_subcommand("baselines")) {
            return cmd_baselines();
        }
        return cmd_plotdata(pd_input, pd_style, pd_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const kerrsqueeze::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
