#include "ichem/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ichem/csv.hpp"
#include "ichem/errors.hpp"
#include "ichem/harness.hpp"
#include "ichem/model_io.hpp"
#include "ichem/thresholds.hpp"

namespace ichem::cli {

namespace fs = std::filesystem;

namespace {

// Option values of one subcommand.
struct Flags {
    std::string model_path;
    double p = 0.0;
    std::optional<double> theta;
    double t_end = 0.0;
    double dt = 0.01;
    std::uint64_t seed = 1;
    std::size_t paths = 0;
    std::string p_grid = "0,0.25,0.5,0.75,1";
    std::string out_dir = "out";
    std::string init = "1,1,1";
    std::size_t stride = 0;
    std::string scheme = "log-euler";
    unsigned workers = 0;
    double burn_in = 0.5;
    double tol_rate = 0.02;
    double tol_mean = 0.05;
    double min_horizon = 500.0;
    double boundary_tol = kDefaultBoundaryTol;
    bool json = false;
    bool jumps = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const char* flag)
{
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        std::string item = text.substr(start, end - start);
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
            throw UsageError(std::string(flag) + ": cannot parse '" + item + "' as a number");
        }
        values.push_back(v);
        start = end + 1;
    }
    return values;
}

State parse_init(const std::string& text)
{
    const auto v = parse_list(text, "--init");
    if (v.size() != 3) {
        throw UsageError("--init expects three comma-separated values S,x,y");
    }
    return {v[0], v[1], v[2]};
}

Scheme parse_scheme(const std::string& name)
{
    if (name == "log-euler") {
        return Scheme::LogEuler;
    }
    if (name == "direct-euler") {
        return Scheme::DirectEuler;
    }
    throw UsageError("--scheme must be log-euler or direct-euler");
}

SimConfig make_config(const Flags& f)
{
    SimConfig c;
    c.initial = parse_init(f.init);
    c.t_end = f.t_end;
    c.dt = f.dt;
    c.seed = f.seed;
    c.scheme = parse_scheme(f.scheme);
    if (f.stride > 0) {
        c.output_stride = f.stride;
    } else {
        // Keep roughly a thousand recorded rows.
        const double steps = std::ceil(f.t_end / f.dt);
        c.output_stride = static_cast<std::size_t>(std::max(1.0, std::floor(steps / 1000.0)));
    }
    return c;
}

EnsembleOptions make_options(const Flags& f)
{
    EnsembleOptions o;
    o.n_paths = f.paths;
    o.workers = f.workers;
    o.burn_in = f.burn_in;
    return o;
}

VerifyTolerances make_tolerances(const Flags& f)
{
    VerifyTolerances t;
    t.rate = f.tol_rate;
    t.mean = f.tol_mean;
    t.min_horizon = f.min_horizon;
    return t;
}

std::ofstream open_output(const Flags& f, const std::string& name, std::vector<std::string>& written)
{
    fs::create_directories(f.out_dir);
    const fs::path path = fs::path(f.out_dir) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw ConfigError(path.string() + ": cannot open for writing");
    }
    written.push_back(path.string());
    return os;
}

// Loads and validates the model; invalid models are usage errors.
ImpreciseModel load_checked(const Flags& f, std::ostream& err)
{
    ImpreciseModel model = load_model(f.model_path);
    const ValidationReport report = validate(model);
    if (const Check* bad = report.first_failure()) {
        err << "model validation failed: " << bad->name << " (" << bad->detail << ")\n";
        throw UsageError("invalid model");
    }
    return model;
}

void print_field(std::ostream& out, std::string_view name, const std::string& value)
{
    out << "  " << std::left << std::setw(22) << name << value << '\n';
}

void print_field(std::ostream& out, std::string_view name, double value)
{
    print_field(out, name, format_double(value));
}

void print_report(std::ostream& out, const CrispModel& m, const ThresholdReport& r)
{
    out << "thresholds at p = " << format_double(m.p) << '\n';
    print_field(out, "beta1", r.beta1);
    print_field(out, "beta2", r.beta2);
    print_field(out, "beta3", r.beta3);
    print_field(out, "R0s", r.R0s);
    print_field(out, "R1s", r.R1s);
    print_field(out, "regime", std::string(to_string(r.regime)));
    const auto& p = r.predictions;
    auto opt = [&out](std::string_view name, const std::optional<double>& v) {
        if (v) {
            print_field(out, name, *v);
        }
    };
    opt("x_lyapunov_bound", p.x_lyapunov_bound);
    opt("y_lyapunov_bound", p.y_lyapunov_bound);
    opt("S_mean_limit", p.S_mean_limit);
    opt("x_mean_limit", p.x_mean_limit);
    opt("y_mean_lower_bound", p.y_mean_lower_bound);
}

nlohmann::json report_json(const CrispModel& m, const ThresholdReport& r)
{
    nlohmann::json j = {
        {"p", m.p},
        {"crisp",
         {{"S0", m.S0}, {"D", m.D}, {"m1", m.m1}, {"delta1", m.delta1}, {"sigma1", m.sigma1},
          {"m2", m.m2}, {"delta2", m.delta2}, {"sigma2", m.sigma2}, {"sigma3", m.sigma3}}},
        {"beta1", r.beta1},
        {"beta2", r.beta2},
        {"beta3", r.beta3},
        {"R0s", r.R0s},
        {"R1s", r.R1s},
        {"regime", std::string(to_string(r.regime))},
    };
    nlohmann::json pred = nlohmann::json::object();
    const auto& p = r.predictions;
    auto opt = [&pred](const char* name, const std::optional<double>& v) {
        if (v) {
            pred[name] = *v;
        }
    };
    opt("x_lyapunov_bound", p.x_lyapunov_bound);
    opt("y_lyapunov_bound", p.y_lyapunov_bound);
    opt("S_mean_limit", p.S_mean_limit);
    opt("x_mean_limit", p.x_mean_limit);
    opt("y_mean_lower_bound", p.y_mean_lower_bound);
    j["predictions"] = pred;
    return j;
}

void print_h3(std::ostream& out, const CrispModel& m, double theta)
{
    const H3Report h = check_h3(m, theta);
    out << "moment condition at theta = " << format_double(theta) << '\n';
    print_field(out, "sigma_sq", h.sigma_sq);
    print_field(out, "zeta", h.zeta);
    print_field(out, "lhs", h.lhs);
    print_field(out, "holds", std::string(h.holds ? "yes" : "no"));
}

void print_verdict(std::ostream& out, const Verdict& v)
{
    out << "regime " << to_string(v.regime) << '\n';
    if (v.claims.empty()) {
        out << "  no asymptotic claims apply at a threshold boundary\n";
        return;
    }
    out << "  " << std::left << std::setw(24) << "claim" << std::setw(4) << "" << std::right
        << std::setw(22) << "predicted" << std::setw(22) << "empirical" << std::setw(12) << "tolerance"
        << "  result\n";
    for (const auto& c : v.claims) {
        out << "  " << std::left << std::setw(24) << c.id << std::setw(4) << c.relation << std::right
            << std::setw(22) << format_double(c.predicted) << std::setw(22) << format_double(c.empirical)
            << std::setw(12) << format_double(c.tolerance) << "  " << (c.passed ? "PASS" : "FAIL") << '\n';
    }
}

void print_written(std::ostream& out, const std::vector<std::string>& written)
{
    for (const auto& w : written) {
        out << "wrote " << w << '\n';
    }
}

int cmd_validate(const Flags& f, std::ostream& out, std::ostream& err)
{
    const ImpreciseModel model = load_model(f.model_path);
    const ValidationReport report = validate(model);
    out << "validation of " << f.model_path << '\n';
    for (const auto& c : report.checks) {
        out << "  " << (c.passed ? "ok   " : "FAIL ") << std::left << std::setw(24) << c.name << c.detail
            << '\n';
    }
    print_field(out, "moment bound c", report.moment_bound);
    if (const Check* bad = report.first_failure()) {
        err << "validation failed: " << bad->name << '\n';
        return kExitUsage;
    }
    if (f.theta) {
        print_h3(out, crispify(model, f.p), *f.theta);
    }
    return kExitOk;
}

int cmd_thresholds(const Flags& f, std::ostream& out, std::ostream& err)
{
    const ImpreciseModel model = load_checked(f, err);
    const CrispModel crisp = crispify(model, f.p);
    const ThresholdReport report = classify(crisp, f.boundary_tol);
    if (f.json) {
        out << report_json(crisp, report).dump(2) << '\n';
    } else {
        print_report(out, crisp, report);
        if (f.theta) {
            print_h3(out, crisp, *f.theta);
        }
    }
    return kExitOk;
}

int cmd_simulate(const Flags& f, bool deterministic, std::ostream& out, std::ostream& err)
{
    const ImpreciseModel model = load_checked(f, err);
    const CrispModel crisp = crispify(model, f.p);
    const SimConfig config = make_config(f);
    const Trajectory traj = deterministic ? simulate_ode(crisp, config) : simulate(crisp, config);

    std::vector<std::string> written;
    {
        auto os = open_output(f, deterministic ? "ode.csv" : "trajectory.csv", written);
        write_trajectory_csv(os, traj, crisp);
    }
    if (!deterministic && f.jumps) {
        auto os = open_output(f, "jumps.csv", written);
        write_jumps_csv(os, traj, crisp);
    }
    const State& last = traj.states.back();
    const Vec3& mean = traj.means.back();
    out << (deterministic ? "RK4" : "jump-diffusion") << " run to t = " << format_double(traj.horizon())
        << " (" << traj.substeps << " steps, " << traj.jump_log.size() << " jumps)\n";
    print_field(out, "S, x, y", format_double(last.S) + ", " + format_double(last.x) + ", " +
                                    format_double(last.y));
    print_field(out, "<S>, <x>, <y>", format_double(mean[0]) + ", " + format_double(mean[1]) + ", " +
                                          format_double(mean[2]));
    print_field(out, "ln x/t, ln y/t",
                format_double(traj.lnx_over_t.back()) + ", " + format_double(traj.lny_over_t.back()));
    print_field(out, "phi", conservation_residual(traj, crisp).back());
    print_written(out, written);
    return kExitOk;
}

int cmd_ensemble(const Flags& f, bool with_verify, std::ostream& out, std::ostream& err)
{
    const ImpreciseModel model = load_checked(f, err);
    const CrispModel crisp = crispify(model, f.p);
    const SimConfig config = make_config(f);
    const ThresholdReport report = classify(crisp, f.boundary_tol);
    const EnsembleSummary summary = ensemble(crisp, config, make_options(f));

    std::vector<std::string> written;
    {
        auto os = open_output(f, "ensemble.csv", written);
        write_ensemble_csv(os, summary);
    }
    {
        auto os = open_output(f, "terminal.csv", written);
        write_terminal_csv(os, summary);
    }

    out << summary.n_paths << " paths to t = " << format_double(summary.horizon) << " ("
        << summary.n_failed << " aborted)\n";
    print_report(out, crisp, report);
    const TerminalStats t = terminal_stats(summary);
    print_field(out, "median <S>_w", t.median_meanS);
    print_field(out, "median <x>_w", t.median_meanx);
    print_field(out, "median <y>_w", t.median_meany);
    print_field(out, "median ln x/t", t.median_lnx_over_t);
    print_field(out, "median ln y/t", t.median_lny_over_t);
    print_field(out, "extinct x fraction", t.extinct_x_fraction);
    print_field(out, "extinct y fraction", t.extinct_y_fraction);

    int status = kExitOk;
    if (with_verify) {
        const Verdict verdict = verify(report, summary, make_tolerances(f));
        {
            auto os = open_output(f, "verdict.csv", written);
            write_verdict_csv(os, verdict);
        }
        print_verdict(out, verdict);
        status = verdict.passed() ? kExitOk : kExitClaimFailed;
    }
    print_written(out, written);
    return status;
}

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream& err)
{
    const ImpreciseModel model = load_checked(f, err);
    const std::vector<double> grid = parse_list(f.p_grid, "--p-grid");
    const SimConfig config = make_config(f);
    const auto rows = p_sweep(model, grid, config, make_options(f), make_tolerances(f));

    std::vector<std::string> written;
    {
        auto os = open_output(f, "sweep.csv", written);
        write_sweep_csv(os, rows);
    }
    bool all_pass = true;
    out << std::left << std::setw(10) << "p" << std::setw(22) << "R0s" << std::setw(22) << "R1s"
        << std::setw(18) << "regime" << "verdict\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(10) << format_double(r.p);
        if (r.report) {
            out << std::setw(22) << format_double(r.report->R0s) << std::setw(22)
                << format_double(r.report->R1s) << std::setw(18) << to_string(r.report->regime);
        }
        if (r.verdict) {
            out << (r.verdict->passed() ? "pass" : "fail");
            all_pass = all_pass && r.verdict->passed();
        }
        if (!r.error.empty()) {
            out << "error: " << r.error;
            all_pass = false;
        }
        out << '\n';
    }
    print_written(out, written);
    return all_pass ? kExitOk : kExitClaimFailed;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Imprecise stochastic food-chain chemostat with Levy jumps: thresholds, "
                 "simulation and Monte Carlo verification"};
    app.name("ichem");
    app.require_subcommand(1);

    auto add_model = [](CLI::App* sub, Flags& f) {
        sub->add_option("--model", f.model_path, "Model file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--p", f.p, "Imprecision level in [0, 1]")->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
    };
    auto add_sim = [](CLI::App* sub, Flags& f, double default_t_end) {
        f.t_end = default_t_end;
        sub->add_option("--t-end", f.t_end, "Horizon")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--dt", f.dt, "Step size")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--init", f.init, "Initial state S,x,y")->capture_default_str();
        sub->add_option("--stride", f.stride, "Record every n-th grid point (0: about 1000 rows)")
            ->capture_default_str();
        sub->add_option("--out", f.out_dir, "Output directory")->capture_default_str();
    };
    auto add_stochastic = [](CLI::App* sub, Flags& f) {
        sub->add_option("--seed", f.seed, "Random seed")->capture_default_str();
        sub->add_option("--scheme", f.scheme, "log-euler or direct-euler")
            ->check(CLI::IsMember({"log-euler", "direct-euler"}))
            ->capture_default_str();
    };
    auto add_ensemble = [](CLI::App* sub, Flags& f, std::size_t default_paths) {
        f.paths = default_paths;
        sub->add_option("--paths", f.paths, "Number of paths")->capture_default_str();
        sub->add_option("--workers", f.workers, "Worker threads (0: all cores)")->capture_default_str();
        sub->add_option("--burn-in", f.burn_in, "Burn-in fraction for time averages")
            ->check(CLI::Range(0.0, 0.99))
            ->capture_default_str();
    };
    auto add_tolerances = [](CLI::App* sub, Flags& f) {
        sub->add_option("--tol-rate", f.tol_rate, "Slack on Lyapunov-rate bounds")->capture_default_str();
        sub->add_option("--tol-mean", f.tol_mean, "Relative slack on time averages")->capture_default_str();
        sub->add_option("--min-horizon", f.min_horizon, "Shortest horizon verify accepts")
            ->capture_default_str();
    };
    auto add_theta = [](CLI::App* sub, Flags& f) {
        sub->add_option("--theta", f.theta, "Also check the moment condition with this exponent (> 2)");
    };

    Flags fv, ft, fsim, fode, fens, fver, fsw;

    auto* validate_cmd = app.add_subcommand("validate", "Check a model file and report its constants");
    add_model(validate_cmd, fv);
    add_theta(validate_cmd, fv);

    auto* thresholds_cmd = app.add_subcommand("thresholds", "Noise penalties, thresholds and regime");
    add_model(thresholds_cmd, ft);
    add_theta(thresholds_cmd, ft);
    thresholds_cmd->add_option("--boundary-tol", ft.boundary_tol, "Tolerance around R = 1")
        ->capture_default_str();
    thresholds_cmd->add_flag("--json", ft.json, "Print the report as JSON");

    auto* simulate_cmd = app.add_subcommand("simulate", "Integrate one jump-diffusion path");
    add_model(simulate_cmd, fsim);
    add_sim(simulate_cmd, fsim, 100.0);
    add_stochastic(simulate_cmd, fsim);
    simulate_cmd->add_flag("--jumps", fsim.jumps, "Also write the jump log");

    auto* ode_cmd = app.add_subcommand("ode", "Integrate the deterministic system with RK4");
    add_model(ode_cmd, fode);
    add_sim(ode_cmd, fode, 100.0);

    auto* ensemble_cmd = app.add_subcommand("ensemble", "Monte Carlo ensemble statistics");
    add_model(ensemble_cmd, fens);
    add_sim(ensemble_cmd, fens, 2000.0);
    add_stochastic(ensemble_cmd, fens);
    add_ensemble(ensemble_cmd, fens, 200);

    auto* verify_cmd = app.add_subcommand("verify", "Check the regime's long-run claims by Monte Carlo");
    add_model(verify_cmd, fver);
    add_sim(verify_cmd, fver, 2000.0);
    add_stochastic(verify_cmd, fver);
    add_ensemble(verify_cmd, fver, 200);
    add_tolerances(verify_cmd, fver);

    auto* sweep_cmd = app.add_subcommand("sweep", "Thresholds, and verdicts when --paths > 0, across p");
    sweep_cmd->add_option("--model", fsw.model_path, "Model file (JSON)")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--p-grid", fsw.p_grid, "Comma-separated p values")->capture_default_str();
    add_sim(sweep_cmd, fsw, 2000.0);
    add_stochastic(sweep_cmd, fsw);
    add_ensemble(sweep_cmd, fsw, 0);
    add_tolerances(sweep_cmd, fsw);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate_cmd->parsed()) {
            return cmd_validate(fv, out, err);
        }
        if (thresholds_cmd->parsed()) {
            return cmd_thresholds(ft, out, err);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(fsim, false, out, err);
        }
        if (ode_cmd->parsed()) {
            return cmd_simulate(fode, true, out, err);
        }
        if (ensemble_cmd->parsed()) {
            return cmd_ensemble(fens, false, out, err);
        }
        if (verify_cmd->parsed()) {
            return cmd_ensemble(fver, true, out, err);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(fsw, out, err);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const EnsembleError& e) {
        err << "error: " << e.what() << '\n';
        return kExitClaimFailed;
    } catch (const SimulationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitClaimFailed;
    }
    return kExitUsage;
}

} // namespace ichem::cli
