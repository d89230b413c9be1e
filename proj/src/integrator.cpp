#include "ichem/integrator.hpp"

#include <cmath>
#include <sstream>

namespace ichem {

namespace {

[[noreturn]] void abort_path(const char* what, double t, const Vec3& v)
{
    std::ostringstream msg;
    msg << what << " at t = " << t << " (state " << v[0] << ", " << v[1] << ", " << v[2] << ")";
    throw SimulationError(msg.str(), t);
}

std::size_t uniform_steps(const SimConfig& c)
{
    const double n = std::ceil(c.t_end / c.dt - 1e-9);
    return static_cast<std::size_t>(std::max(1.0, n));
}

// k-th node of the uniform grid; the last node is exactly t_end.
double grid_time(const SimConfig& c, std::size_t k, std::size_t n)
{
    return k == n ? c.t_end : static_cast<double>(k) * c.dt;
}

State to_state(const Vec3& v) noexcept { return {v[0], v[1], v[2]}; }

// Shared bookkeeping for the running averages and recorded rows.
class Recorder {
public:
    Recorder(Trajectory& traj, const State& initial) : traj_(traj), prev_{initial.S, initial.x, initial.y} {}

    // Trapezoid over [t, t + h] from the current left value to `right`.
    void accumulate(const Vec3& right, double h) noexcept
    {
        for (std::size_t i = 0; i < 3; ++i) {
            integral_[i] += 0.5 * (prev_[i] + right[i]) * h;
        }
        prev_ = right;
    }

    // Replace the left value after a jump without accumulating.
    void reset_left(const Vec3& v) noexcept { prev_ = v; }

    void record(double t, const Vec3& value, double lnx_over_t, double lny_over_t)
    {
        traj_.times.push_back(t);
        traj_.states.push_back(to_state(value));
        traj_.means.push_back({integral_[0] / t, integral_[1] / t, integral_[2] / t});
        traj_.lnx_over_t.push_back(lnx_over_t);
        traj_.lny_over_t.push_back(lny_over_t);
    }

private:
    Trajectory& traj_;
    Vec3 prev_;
    Vec3 integral_{0.0, 0.0, 0.0};
};

std::size_t reserve_rows(const SimConfig& c, std::size_t n)
{
    return n / c.output_stride + 2;
}

} // namespace

void require_valid(const SimConfig& config, bool allow_zero_initial)
{
    if (!(config.t_end > 0.0) || !std::isfinite(config.t_end)) {
        throw DomainError("t_end must be positive and finite");
    }
    if (!(config.dt > 0.0) || !(config.dt <= config.t_end)) {
        throw DomainError("dt must be positive and not exceed t_end");
    }
    if (config.output_stride == 0) {
        throw DomainError("output stride must be at least 1");
    }
    for (double v : {config.initial.S, config.initial.x, config.initial.y}) {
        const bool ok = allow_zero_initial ? v >= 0.0 : v > 0.0;
        if (!ok || !std::isfinite(v)) {
            throw DomainError(allow_zero_initial ? "initial state must be nonnegative"
                                                 : "initial state must be strictly positive");
        }
    }
}

std::vector<JumpEvent> sample_jumps(const JumpSpec& jumps, double t_end, const CounterStream& rng)
{
    std::vector<JumpEvent> events;
    const double rate = jumps.total_rate();
    if (jumps.empty() || !(rate > 0.0)) {
        return events;
    }
    double t = 0.0;
    for (std::uint64_t n = 0;; ++n) {
        const auto u = rng.uniforms(kJumpStream, n);
        t += -std::log(u[0]) / rate;
        if (t > t_end) {
            break;
        }
        const double target = u[1] * rate;
        double cumulative = 0.0;
        std::size_t mark = jumps.size() - 1;
        for (std::size_t k = 0; k < jumps.size(); ++k) {
            cumulative += jumps.marks[k].weight;
            if (target < cumulative) {
                mark = k;
                break;
            }
        }
        events.push_back({t, mark});
    }
    return events;
}

Vec3 log_drift(const CrispModel& model, const State& s) noexcept
{
    const auto& J = model.jumps;
    return {
        model.D * model.S0 / s.S - model.D - model.m1 * s.x / model.delta1 -
            0.5 * model.sigma1 * model.sigma1 - J.compensator(0),
        model.m1 * s.S - model.m2 * s.y / model.delta2 - model.D -
            0.5 * model.sigma2 * model.sigma2 - J.compensator(1),
        model.m2 * s.x - model.D - 0.5 * model.sigma3 * model.sigma3 - J.compensator(2),
    };
}

Vec3 jump_log_increment(const JumpSpec& jumps, std::span<const JumpEvent> events, double duration)
{
    Vec3 inc{0.0, 0.0, 0.0};
    for (const auto& e : events) {
        for (std::size_t i = 0; i < 3; ++i) {
            inc[i] += std::log1p(jumps.marks.at(e.mark).gamma[i]);
        }
    }
    for (std::size_t i = 0; i < 3; ++i) {
        inc[i] -= duration * jumps.compensator(i);
    }
    return inc;
}

Trajectory simulate(const CrispModel& model, const SimConfig& config)
{
    require_valid(model);
    require_valid(config);

    const CounterStream rng(config.seed, config.path);
    Trajectory traj;
    traj.jump_log = sample_jumps(model.jumps, config.t_end, rng);

    const std::size_t n = uniform_steps(config);
    const std::size_t rows = reserve_rows(config, n);
    traj.times.reserve(rows);
    traj.states.reserve(rows);
    traj.means.reserve(rows);
    traj.lnx_over_t.reserve(rows);
    traj.lny_over_t.reserve(rows);

    const Vec3 sigma = model.sigma();
    const bool log_scheme = config.scheme == Scheme::LogEuler;

    // Log-jump sizes and the per-component compensator, precomputed per mark.
    std::vector<Vec3> log_jump(model.jumps.size());
    for (std::size_t k = 0; k < model.jumps.size(); ++k) {
        for (std::size_t i = 0; i < 3; ++i) {
            log_jump[k][i] = std::log1p(model.jumps.marks[k].gamma[i]);
        }
    }
    const Vec3 compensator{model.jumps.compensator(0), model.jumps.compensator(1),
                           model.jumps.compensator(2)};

    // `value` is the state; `logv` its logarithm (authoritative for LogEuler).
    Vec3 value{config.initial.S, config.initial.x, config.initial.y};
    Vec3 logv{std::log(value[0]), std::log(value[1]), std::log(value[2])};
    Vec3 frozen_ratio{0.0, 0.0, 0.0};
    Vec3 jump_log_sum{0.0, 0.0, 0.0};
    Vec3 brownian{0.0, 0.0, 0.0};

    Recorder rec(traj, config.initial);

    auto apply_floor = [&](double t) {
        for (std::size_t i = 0; i < 3; ++i) {
            if (logv[i] < kLogFloor) {
                if (!traj.floor_time[i]) {
                    traj.floor_time[i] = t;
                    frozen_ratio[i] = logv[i] / t;
                }
                logv[i] = kLogFloor;
            }
        }
    };

    auto advance = [&](double t_next, double h) {
        const std::uint64_t q = traj.substeps++;
        const double sqrt_h = std::sqrt(h);
        Vec3 dB{0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < 3; ++i) {
            if (sigma[i] != 0.0) {
                dB[i] = sigma[i] * sqrt_h * rng.normal(static_cast<std::uint32_t>(i), q);
                brownian[i] += dB[i];
            }
        }
        if (log_scheme) {
            const Vec3 g = log_drift(model, to_state(value));
            for (std::size_t i = 0; i < 3; ++i) {
                logv[i] += g[i] * h + dB[i];
            }
            if (!std::isfinite(logv[0]) || !std::isfinite(logv[1]) || !std::isfinite(logv[2])) {
                abort_path("non-finite log-state", t_next, logv);
            }
            apply_floor(t_next);
            value = {std::exp(logv[0]), std::exp(logv[1]), std::exp(logv[2])};
            if (!std::isfinite(value[0]) || !std::isfinite(value[1]) || !std::isfinite(value[2])) {
                abort_path("state overflow", t_next, logv);
            }
        } else {
            const Vec3 f = drift(model, to_state(value));
            for (std::size_t i = 0; i < 3; ++i) {
                value[i] += (f[i] - compensator[i] * value[i]) * h + value[i] * dB[i];
            }
            if (!(value[0] > 0.0 && value[1] > 0.0 && value[2] > 0.0) ||
                !std::isfinite(value[0] + value[1] + value[2])) {
                abort_path("positivity lost", t_next, value);
            }
            logv = {std::log(value[0]), std::log(value[1]), std::log(value[2])};
        }
        rec.accumulate(value, h);
    };

    auto apply_jump = [&](const JumpEvent& e) {
        const Vec3& lj = log_jump[e.mark];
        for (std::size_t i = 0; i < 3; ++i) {
            jump_log_sum[i] += lj[i];
        }
        if (log_scheme) {
            for (std::size_t i = 0; i < 3; ++i) {
                logv[i] += lj[i];
            }
            apply_floor(e.time);
            value = {std::exp(logv[0]), std::exp(logv[1]), std::exp(logv[2])};
        } else {
            const Vec3& g = model.jumps.marks[e.mark].gamma;
            for (std::size_t i = 0; i < 3; ++i) {
                value[i] *= 1.0 + g[i];
            }
            logv = {std::log(value[0]), std::log(value[1]), std::log(value[2])};
        }
        rec.reset_left(value);
    };

    double t = 0.0;
    std::size_t next_event = 0;
    const auto& events = traj.jump_log;
    for (std::size_t k = 1; k <= n; ++k) {
        const double t_target = grid_time(config, k, n);
        for (;;) {
            const bool jump_due = next_event < events.size() && events[next_event].time <= t_target;
            const double t_next = jump_due ? events[next_event].time : t_target;
            if (t_next > t) {
                advance(t_next, t_next - t);
                t = t_next;
            }
            if (!jump_due) {
                break;
            }
            apply_jump(events[next_event]);
            ++next_event;
        }
        if (k % config.output_stride == 0 || k == n) {
            const double rx = traj.floor_time[1] ? frozen_ratio[1] : logv[1] / t;
            const double ry = traj.floor_time[2] ? frozen_ratio[2] : logv[2] / t;
            rec.record(t, value, rx, ry);
        }
    }

    for (std::size_t i = 0; i < 3; ++i) {
        traj.brownian_martingale[i] = brownian[i];
        traj.jump_martingale[i] = jump_log_sum[i] - t * model.jumps.log_drift(i);
    }
    return traj;
}

Trajectory simulate_ode(const CrispModel& model, const SimConfig& config)
{
    require_valid(model);
    require_valid(config, /*allow_zero_initial=*/true);

    Trajectory traj;
    const std::size_t n = uniform_steps(config);
    const std::size_t rows = reserve_rows(config, n);
    traj.times.reserve(rows);
    traj.states.reserve(rows);
    traj.means.reserve(rows);
    traj.lnx_over_t.reserve(rows);
    traj.lny_over_t.reserve(rows);

    auto rhs = [&model](const Vec3& v) { return ode_rhs(model, to_state(v)); };
    auto axpy = [](const Vec3& v, double a, const Vec3& d) {
        return Vec3{v[0] + a * d[0], v[1] + a * d[1], v[2] + a * d[2]};
    };

    Vec3 value{config.initial.S, config.initial.x, config.initial.y};
    Recorder rec(traj, config.initial);
    double t = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double t_next = grid_time(config, k, n);
        const double h = t_next - t;
        const Vec3 k1 = rhs(value);
        const Vec3 k2 = rhs(axpy(value, 0.5 * h, k1));
        const Vec3 k3 = rhs(axpy(value, 0.5 * h, k2));
        const Vec3 k4 = rhs(axpy(value, h, k3));
        for (std::size_t i = 0; i < 3; ++i) {
            value[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (!std::isfinite(value[0]) || !std::isfinite(value[1]) || !std::isfinite(value[2])) {
            abort_path("non-finite state", t_next, value);
        }
        ++traj.substeps;
        rec.accumulate(value, h);
        t = t_next;
        if (k % config.output_stride == 0 || k == n) {
            rec.record(t, value, std::log(value[1]) / t, std::log(value[2]) / t);
        }
    }
    return traj;
}

std::vector<double> conservation_residual(const Trajectory& traj, const CrispModel& model)
{
    std::vector<double> phi;
    phi.reserve(traj.size());
    const double inv_d1 = 1.0 / model.delta1;
    const double inv_d12 = 1.0 / (model.delta1 * model.delta2);
    for (const auto& m : traj.means) {
        phi.push_back(m[0] - model.S0 + m[1] * inv_d1 + m[2] * inv_d12);
    }
    return phi;
}

} // namespace ichem
