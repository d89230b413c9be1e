#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ichem/integrator.hpp"
#include "ichem/thresholds.hpp"

namespace ichem {

// Per-record quantities aggregated across paths, in CSV column order.
enum class Quantity : std::size_t { S, x, y, meanS, meanx, meany, lnx_over_t, lny_over_t, phi };
inline constexpr std::size_t kQuantityCount = 9;
inline constexpr std::array<std::string_view, kQuantityCount> kQuantityNames = {
    "S", "x", "y", "meanS", "meanx", "meany", "lnx_over_t", "lny_over_t", "phi",
};

struct Band {
    double mean = 0.0;
    double p5 = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
};

struct EnsembleOptions {
    std::size_t n_paths = 100;
    // Worker threads; 0 picks std::thread::hardware_concurrency().
    unsigned workers = 0;
    // Time-average claims use the window [burn_in * T, T].
    double burn_in = 0.5;
    // A path counts as extinct in x (or y) from the first recorded time the
    // component is below this level or has hit the log floor. Sticky.
    double extinction_threshold = 1e-15;
    // At or above this fraction of aborted paths the ensemble fails.
    double max_failure_fraction = 0.1;
};

// Final-time statistics of one path.
struct PathTerminal {
    std::uint32_t path = 0;
    bool ok = false;
    std::string error;
    State state;
    // Running averages over [0, T].
    Vec3 mean{0.0, 0.0, 0.0};
    // Averages over the burn-in window [t_b, T].
    Vec3 window_mean{0.0, 0.0, 0.0};
    // <x>/delta1 + <y>/(delta1 delta2) over the window, in nutrient units.
    double window_biomass = 0.0;
    double lnx_over_t = 0.0;
    double lny_over_t = 0.0;
    double phi = 0.0;
    bool extinct_x = false;
    bool extinct_y = false;
    std::array<std::optional<double>, 3> floor_time;
    // M_i(T)/T and the compensated jump martingale over T.
    Vec3 brownian_over_t{0.0, 0.0, 0.0};
    Vec3 jump_over_t{0.0, 0.0, 0.0};
};

struct EnsembleSummary {
    std::size_t n_paths = 0;
    std::size_t n_failed = 0;
    double horizon = 0.0;
    double burn_in = 0.0;
    // Recorded time at which the burn-in window starts (0 when burn_in = 0).
    double window_start = 0.0;
    std::vector<double> times;
    std::vector<std::array<Band, kQuantityCount>> bands;
    std::vector<double> extinct_x_fraction;
    std::vector<double> extinct_y_fraction;
    // Indexed by path; failed paths carry ok = false and an error message.
    std::vector<PathTerminal> paths;

    std::size_t n_ok() const noexcept { return n_paths - n_failed; }
    // Values of a terminal statistic over the successful paths, in path order.
    template <class F>
    std::vector<double> collect(F&& f) const
    {
        std::vector<double> out;
        out.reserve(paths.size());
        for (const auto& p : paths) {
            if (p.ok) {
                out.push_back(f(p));
            }
        }
        return out;
    }
};

class EnsembleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Linear interpolation between order statistics (q in [0, 1]).
double percentile(std::vector<double> values, double q);
double median(std::vector<double> values);

// Runs options.n_paths independent paths (path i uses config.seed with path
// index i) and aggregates them in path order; the result does not depend on
// the number of workers. Throws EnsembleError when too many paths abort.
EnsembleSummary ensemble(const CrispModel& model, const SimConfig& config,
                         const EnsembleOptions& options);

struct VerifyTolerances {
    // Absolute slack on Lyapunov-rate bounds (1/time).
    double rate = 0.02;
    // Relative slack on time-average limits and bounds.
    double mean = 0.05;
    // verify() refuses shorter horizons.
    double min_horizon = 500.0;
};

struct Claim {
    std::string id;
    // Prediction field this claim checks, or "corollary".
    std::string source;
    std::string relation;
    double predicted = 0.0;
    double empirical = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct Verdict {
    Regime regime = Regime::Boundary;
    std::vector<Claim> claims;

    bool passed() const noexcept;
};

// Checks the regime's long-run predictions against the ensemble's final-time
// statistics: medians for rates and limits, the 5th percentile for the
// persistence lower bound. Throws DomainError when the horizon is shorter
// than tol.min_horizon.
Verdict verify(const ThresholdReport& report, const EnsembleSummary& summary,
               const VerifyTolerances& tol);

struct MartingaleStat {
    double mean = 0.0;
    double mean_abs = 0.0;
    // Analytic standard error of `mean` under the martingale's terminal law.
    double std_error = 0.0;
};

struct MartingaleReport {
    double horizon = 0.0;
    std::size_t n_paths = 0;
    std::array<MartingaleStat, 3> brownian;
    std::array<MartingaleStat, 3> jump;
    // Per-path signed terminal values, path order.
    std::array<std::vector<double>, 3> brownian_values;
    std::array<std::vector<double>, 3> jump_values;
};

MartingaleReport martingale_diagnostics(const EnsembleSummary& summary, const CrispModel& model);

struct TerminalStats {
    double median_meanS = 0.0;
    double median_meanx = 0.0;
    double median_meany = 0.0;
    double median_lnx_over_t = 0.0;
    double median_lny_over_t = 0.0;
    double extinct_x_fraction = 0.0;
    double extinct_y_fraction = 0.0;
    std::size_t n_failed = 0;
};

TerminalStats terminal_stats(const EnsembleSummary& summary);

struct SweepRow {
    double p = 0.0;
    std::optional<CrispModel> model;
    std::optional<ThresholdReport> report;
    std::optional<TerminalStats> terminal;
    std::optional<Verdict> verdict;
    // Empty unless something in this row failed; the sweep continues.
    std::string error;
};

// One row per p (sorted ascending). With options.n_paths == 0 only the
// crisp model and thresholds are computed.
std::vector<SweepRow> p_sweep(const ImpreciseModel& model, std::vector<double> p_grid,
                              const SimConfig& config, const EnsembleOptions& options,
                              const VerifyTolerances& tol);

} // namespace ichem
