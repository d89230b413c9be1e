#include "ichem/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace ichem {

namespace {

// values must be sorted and NaN-free.
double quantile_sorted(const std::vector<double>& v, double q)
{
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return frac == 0.0 ? v[lo] : v[lo] + frac * (v[hi] - v[lo]);
}

bool has_nan(const std::vector<double>& v)
{
    return std::any_of(v.begin(), v.end(), [](double x) { return std::isnan(x); });
}

} // namespace

double percentile(std::vector<double> values, double q)
{
    if (values.empty()) {
        throw DomainError("percentile of an empty sample");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw DomainError("percentile level must lie in [0, 1]");
    }
    if (has_nan(values)) {
        return std::nan("");
    }
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, q);
}

double median(std::vector<double> values)
{
    return percentile(std::move(values), 0.5);
}

namespace {

struct PathResult {
    bool ok = false;
    std::string error;
    Trajectory traj;
};

Band make_band(std::vector<double>& v)
{
    Band b;
    double sum = 0.0;
    for (double x : v) {
        sum += x;
    }
    b.mean = sum / static_cast<double>(v.size());
    if (has_nan(v)) {
        b.p5 = b.p50 = b.p95 = std::nan("");
        return b;
    }
    std::sort(v.begin(), v.end());
    b.p5 = quantile_sorted(v, 0.05);
    b.p50 = quantile_sorted(v, 0.5);
    b.p95 = quantile_sorted(v, 0.95);
    return b;
}

void run_paths(const CrispModel& model, const SimConfig& config, std::vector<PathResult>& results,
               unsigned workers)
{
    const std::size_t n = results.size();
    auto run_one = [&](std::size_t i) {
        SimConfig c = config;
        c.path = static_cast<std::uint32_t>(i);
        try {
            results[i].traj = simulate(model, c);
            results[i].ok = true;
        } catch (const SimulationError& e) {
            results[i].ok = false;
            results[i].error = e.what();
        }
    };
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            run_one(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                run_one(i);
            }
        });
    }
}

} // namespace

EnsembleSummary ensemble(const CrispModel& model, const SimConfig& config,
                         const EnsembleOptions& options)
{
    if (options.n_paths < 1) {
        throw DomainError("ensemble needs at least one path");
    }
    if (!(options.burn_in >= 0.0 && options.burn_in < 1.0)) {
        throw DomainError("burn-in fraction must lie in [0, 1)");
    }
    require_valid(model);
    require_valid(config);

    unsigned workers = options.workers;
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    std::vector<PathResult> results(options.n_paths);
    run_paths(model, config, results, workers);

    EnsembleSummary s;
    s.n_paths = options.n_paths;
    s.burn_in = options.burn_in;
    s.paths.resize(options.n_paths);
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].ok) {
            ++s.n_failed;
        }
    }
    if (static_cast<double>(s.n_failed) >=
            options.max_failure_fraction * static_cast<double>(options.n_paths) &&
        s.n_failed > 0) {
        std::ostringstream msg;
        msg << s.n_failed << " of " << options.n_paths << " paths aborted";
        for (const auto& r : results) {
            if (!r.ok) {
                msg << "; first failure: " << r.error;
                break;
            }
        }
        throw EnsembleError(msg.str());
    }

    const Trajectory* reference = nullptr;
    for (const auto& r : results) {
        if (r.ok) {
            reference = &r.traj;
            break;
        }
    }
    s.times = reference->times;
    s.horizon = reference->horizon();
    const std::size_t n_rec = s.times.size();

    // Burn-in window start: the last recorded time not after burn_in * T.
    std::size_t window_idx = n_rec;
    if (options.burn_in > 0.0) {
        const double target = options.burn_in * s.horizon;
        for (std::size_t r = 0; r < n_rec && s.times[r] <= target; ++r) {
            window_idx = r;
        }
    }
    s.window_start = window_idx < n_rec ? s.times[window_idx] : 0.0;

    const double inv_d1 = 1.0 / model.delta1;
    const double inv_d12 = 1.0 / (model.delta1 * model.delta2);

    std::vector<std::vector<double>> phis(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        PathTerminal& pt = s.paths[i];
        pt.path = static_cast<std::uint32_t>(i);
        pt.ok = results[i].ok;
        pt.error = results[i].error;
        if (!pt.ok) {
            continue;
        }
        const Trajectory& tr = results[i].traj;
        phis[i] = conservation_residual(tr, model);
        const double T = tr.horizon();
        pt.state = tr.states.back();
        pt.mean = tr.means.back();
        if (window_idx < n_rec) {
            const double tb = tr.times[window_idx];
            for (std::size_t c = 0; c < 3; ++c) {
                // The difference cancels to rounding noise once a component is extinct.
                pt.window_mean[c] =
                    std::max(0.0, (T * pt.mean[c] - tb * tr.means[window_idx][c]) / (T - tb));
            }
        } else {
            pt.window_mean = pt.mean;
        }
        pt.window_biomass = pt.window_mean[1] * inv_d1 + pt.window_mean[2] * inv_d12;
        pt.lnx_over_t = tr.lnx_over_t.back();
        pt.lny_over_t = tr.lny_over_t.back();
        pt.phi = phis[i].back();
        pt.floor_time = tr.floor_time;
        for (std::size_t c = 0; c < 3; ++c) {
            pt.brownian_over_t[c] = tr.brownian_martingale[c] / T;
            pt.jump_over_t[c] = tr.jump_martingale[c] / T;
        }
    }

    s.bands.resize(n_rec);
    s.extinct_x_fraction.assign(n_rec, 0.0);
    s.extinct_y_fraction.assign(n_rec, 0.0);
    std::vector<char> flag_x(results.size(), 0);
    std::vector<char> flag_y(results.size(), 0);
    std::array<std::vector<double>, kQuantityCount> column;
    for (auto& c : column) {
        c.reserve(results.size());
    }
    const double n_ok = static_cast<double>(s.n_ok());
    for (std::size_t r = 0; r < n_rec; ++r) {
        for (auto& c : column) {
            c.clear();
        }
        std::size_t ext_x = 0;
        std::size_t ext_y = 0;
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (!results[i].ok) {
                continue;
            }
            const Trajectory& tr = results[i].traj;
            const State& st = tr.states[r];
            const Vec3& m = tr.means[r];
            const double t = tr.times[r];
            column[0].push_back(st.S);
            column[1].push_back(st.x);
            column[2].push_back(st.y);
            column[3].push_back(m[0]);
            column[4].push_back(m[1]);
            column[5].push_back(m[2]);
            column[6].push_back(tr.lnx_over_t[r]);
            column[7].push_back(tr.lny_over_t[r]);
            column[8].push_back(phis[i][r]);

            const auto floored = [t](const std::optional<double>& ft) { return ft && *ft <= t; };
            flag_x[i] = flag_x[i] || st.x < options.extinction_threshold || floored(tr.floor_time[1]);
            flag_y[i] = flag_y[i] || st.y < options.extinction_threshold || floored(tr.floor_time[2]);
            ext_x += flag_x[i] ? 1 : 0;
            ext_y += flag_y[i] ? 1 : 0;
        }
        for (std::size_t q = 0; q < kQuantityCount; ++q) {
            s.bands[r][q] = make_band(column[q]);
        }
        s.extinct_x_fraction[r] = static_cast<double>(ext_x) / n_ok;
        s.extinct_y_fraction[r] = static_cast<double>(ext_y) / n_ok;
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
        s.paths[i].extinct_x = flag_x[i] != 0;
        s.paths[i].extinct_y = flag_y[i] != 0;
    }
    return s;
}

bool Verdict::passed() const noexcept
{
    return std::all_of(claims.begin(), claims.end(), [](const Claim& c) { return c.passed; });
}

Verdict verify(const ThresholdReport& report, const EnsembleSummary& summary,
               const VerifyTolerances& tol)
{
    if (summary.n_ok() == 0) {
        throw DomainError("verify needs at least one successful path");
    }
    if (summary.horizon < tol.min_horizon) {
        std::ostringstream msg;
        msg << "horizon " << summary.horizon << " is shorter than the minimum " << tol.min_horizon
            << "; asymptotic claims would be misleading";
        throw DomainError(msg.str());
    }

    Verdict v;
    v.regime = report.regime;
    const auto& pred = report.predictions;

    const double med_lnx = median(summary.collect([](const PathTerminal& p) { return p.lnx_over_t; }));
    const double med_lny = median(summary.collect([](const PathTerminal& p) { return p.lny_over_t; }));
    const double med_S = median(summary.collect([](const PathTerminal& p) { return p.window_mean[0]; }));
    const double med_x = median(summary.collect([](const PathTerminal& p) { return p.window_mean[1]; }));

    auto upper_bound = [&v](std::string id, std::string source, double bound, double stat, double slack) {
        v.claims.push_back({std::move(id), std::move(source), "<=", bound, stat, slack, stat <= bound + slack});
    };
    auto limit = [&v](std::string id, std::string source, double target, double stat, double rel) {
        const double slack = rel * std::abs(target);
        v.claims.push_back(
            {std::move(id), std::move(source), "~=", target, stat, slack, std::abs(stat - target) <= slack});
    };

    switch (report.regime) {
    case Regime::BothExtinct:
        upper_bound("x_lyapunov_rate", "x_lyapunov_bound", *pred.x_lyapunov_bound, med_lnx, tol.rate);
        upper_bound("y_lyapunov_rate", "y_lyapunov_bound", *pred.y_lyapunov_bound, med_lny, tol.rate);
        limit("S_mean_limit", "S_mean_limit", *pred.S_mean_limit, med_S, tol.mean);
        {
            // With <S> -> S0 the budget identity leaves no room for biomass.
            const double biomass =
                median(summary.collect([](const PathTerminal& p) { return p.window_biomass; }));
            upper_bound("biomass_mean_vanishes", "corollary", 0.0, biomass, tol.mean * *pred.S_mean_limit);
        }
        break;
    case Regime::PreyOnlyPersists:
        upper_bound("y_lyapunov_rate", "y_lyapunov_bound", *pred.y_lyapunov_bound, med_lny, tol.rate);
        limit("S_mean_limit", "S_mean_limit", *pred.S_mean_limit, med_S, tol.mean);
        limit("x_mean_limit", "x_mean_limit", *pred.x_mean_limit, med_x, tol.mean);
        break;
    case Regime::Persistent: {
        const double bound = *pred.y_mean_lower_bound;
        const double p5 = percentile(summary.collect([](const PathTerminal& p) { return p.window_mean[2]; }), 0.05);
        const double slack = tol.mean * std::abs(bound);
        v.claims.push_back({"y_mean_lower_bound", "y_mean_lower_bound", ">=", bound, p5, slack, p5 >= bound - slack});
        break;
    }
    case Regime::Boundary:
        break;
    }
    return v;
}

MartingaleReport martingale_diagnostics(const EnsembleSummary& summary, const CrispModel& model)
{
    MartingaleReport r;
    r.horizon = summary.horizon;
    r.n_paths = summary.n_ok();
    if (r.n_paths == 0) {
        return r;
    }
    const double n = static_cast<double>(r.n_paths);
    const Vec3 sigma = model.sigma();
    for (std::size_t i = 0; i < 3; ++i) {
        r.brownian_values[i] = summary.collect([i](const PathTerminal& p) { return p.brownian_over_t[i]; });
        r.jump_values[i] = summary.collect([i](const PathTerminal& p) { return p.jump_over_t[i]; });
        auto fill = [n](MartingaleStat& st, const std::vector<double>& vals, double variance_rate, double T) {
            double sum = 0.0;
            double sum_abs = 0.0;
            for (double v : vals) {
                sum += v;
                sum_abs += std::abs(v);
            }
            st.mean = sum / n;
            st.mean_abs = sum_abs / n;
            // M(T)/T has variance variance_rate / T for each path.
            st.std_error = std::sqrt(variance_rate / (T * n));
        };
        fill(r.brownian[i], r.brownian_values[i], sigma[i] * sigma[i], r.horizon);
        fill(r.jump[i], r.jump_values[i], model.jumps.log_second_moment(i), r.horizon);
    }
    return r;
}

TerminalStats terminal_stats(const EnsembleSummary& summary)
{
    TerminalStats t;
    t.n_failed = summary.n_failed;
    if (summary.n_ok() == 0) {
        return t;
    }
    t.median_meanS = median(summary.collect([](const PathTerminal& p) { return p.window_mean[0]; }));
    t.median_meanx = median(summary.collect([](const PathTerminal& p) { return p.window_mean[1]; }));
    t.median_meany = median(summary.collect([](const PathTerminal& p) { return p.window_mean[2]; }));
    t.median_lnx_over_t = median(summary.collect([](const PathTerminal& p) { return p.lnx_over_t; }));
    t.median_lny_over_t = median(summary.collect([](const PathTerminal& p) { return p.lny_over_t; }));
    if (!summary.extinct_x_fraction.empty()) {
        t.extinct_x_fraction = summary.extinct_x_fraction.back();
        t.extinct_y_fraction = summary.extinct_y_fraction.back();
    }
    return t;
}

std::vector<SweepRow> p_sweep(const ImpreciseModel& model, std::vector<double> p_grid,
                              const SimConfig& config, const EnsembleOptions& options,
                              const VerifyTolerances& tol)
{
    if (p_grid.empty()) {
        throw DomainError("p grid must not be empty");
    }
    for (double p : p_grid) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DomainError("every p in the grid must lie in [0, 1]");
        }
    }
    std::sort(p_grid.begin(), p_grid.end());

    std::vector<SweepRow> rows;
    rows.reserve(p_grid.size());
    for (double p : p_grid) {
        SweepRow row;
        row.p = p;
        try {
            row.model = crispify(model, p);
            row.report = classify(*row.model);
            if (options.n_paths > 0) {
                const EnsembleSummary summary = ensemble(*row.model, config, options);
                row.terminal = terminal_stats(summary);
                row.verdict = verify(*row.report, summary, tol);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace ichem
