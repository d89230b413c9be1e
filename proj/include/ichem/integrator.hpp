#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ichem/model.hpp"
#include "ichem/rng.hpp"

namespace ichem {

enum class Scheme {
    // Euler-Maruyama on (ln S, ln x, ln y); positive by construction.
    LogEuler,
    // Euler-Maruyama on (S, x, y). Diagnostic only: it can step a component
    // through zero, which aborts the path.
    DirectEuler,
};

struct SimConfig {
    State initial{1.0, 1.0, 1.0};
    double t_end = 100.0;
    double dt = 0.01;
    std::uint64_t seed = 1;
    // Path index within an ensemble; selects an independent random stream.
    std::uint32_t path = 0;
    // Record every n-th point of the uniform grid (the final time is always
    // recorded).
    std::size_t output_stride = 1;
    Scheme scheme = Scheme::LogEuler;
};

// Throws DomainError on a nonpositive horizon or step, dt > t_end, a zero
// stride, or an initial state that is not strictly positive (nonnegative when
// allow_zero_initial is set, which only the deterministic solver accepts).
void require_valid(const SimConfig& config, bool allow_zero_initial = false);

struct JumpEvent {
    double time = 0.0;
    std::size_t mark = 0;

    friend bool operator==(const JumpEvent&, const JumpEvent&) = default;
};

// Log-coordinates are clamped here; a component that reaches the floor is
// flagged numerically extinct.
inline constexpr double kLogFloor = -700.0;

// Random stream tags: 0..2 are the Brownian motions B1..B3, 3 the jump clock.
inline constexpr std::uint32_t kJumpStream = 3;

struct Trajectory {
    // Recorded times (strictly increasing, all > 0) and matching rows.
    std::vector<double> times;
    std::vector<State> states;
    // Running time averages <S>_t, <x>_t, <y>_t over the fine grid.
    std::vector<Vec3> means;
    // ln x(t)/t and ln y(t)/t. Once a component has been flagged numerically
    // extinct the ratio is frozen at its value at the flag time.
    std::vector<double> lnx_over_t;
    std::vector<double> lny_over_t;
    std::vector<JumpEvent> jump_log;
    // First time each of S, x, y hit kLogFloor.
    std::array<std::optional<double>, 3> floor_time;
    // M_i(T) = sigma_i B_i(T) at the final time.
    Vec3 brownian_martingale{0.0, 0.0, 0.0};
    // Compensated log-jump martingale sum ln(1+gamma_i) - T sum_k ln(1+gamma_i,k) weight_k.
    Vec3 jump_martingale{0.0, 0.0, 0.0};
    // Number of fine-grid substeps taken (uniform steps plus jump splits).
    std::size_t substeps = 0;

    std::size_t size() const noexcept { return times.size(); }
    double horizon() const noexcept { return times.empty() ? 0.0 : times.back(); }
};

// Compound-Poisson event times on (0, t_end] with rate jumps.total_rate();
// each event carries mark k with probability weight_k / total_rate.
std::vector<JumpEvent> sample_jumps(const JumpSpec& jumps, double t_end, const CounterStream& rng);

// Ito-corrected drift of (ln S, ln x, ln y), including the jump compensator
// -sum_k gamma_i(u_k) weight_k.
Vec3 log_drift(const CrispModel& model, const State& s) noexcept;

// Jump part of the log increment over [0, duration]: the sum of
// ln(1 + gamma_i) over `events` minus duration * sum_k gamma_i,k weight_k.
// Its expectation per unit time is minus the jump part of beta_i.
Vec3 jump_log_increment(const JumpSpec& jumps, std::span<const JumpEvent> events, double duration);

// Integrates the jump-diffusion system on the jump-adapted grid. Throws
// SimulationError on a non-finite state.
Trajectory simulate(const CrispModel& model, const SimConfig& config);

// Classical fixed-step RK4 for the deterministic system; scheme and seed are
// ignored.
Trajectory simulate_ode(const CrispModel& model, const SimConfig& config);

// phi(t) = <S>_t - S0 + <x>_t / delta1 + <y>_t / (delta1 delta2) per record.
std::vector<double> conservation_residual(const Trajectory& traj, const CrispModel& model);

} // namespace ichem
