#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ichem/interval.hpp"

namespace ichem {

using Vec3 = std::array<double, 3>;

// One atom of the finite jump-mark measure: rate `weight` (1/time) and the
// relative jump sizes of S, x, y. A jump with this mark multiplies component
// i by (1 + gamma[i]).
struct JumpMark {
    std::string label;
    double weight = 0.0;
    Vec3 gamma{0.0, 0.0, 0.0};
};

// Finite discrete mark space. All integrals against the mark measure are the
// corresponding weighted sums over `marks`; an empty list means no jumps.
struct JumpSpec {
    std::vector<JumpMark> marks;

    bool empty() const noexcept { return marks.empty(); }
    std::size_t size() const noexcept { return marks.size(); }

    // Total mark-measure mass (sum of weights).
    double total_rate() const noexcept;

    // sum_k gamma_i(u_k) * weight_k, the compensator rate of component i.
    double compensator(std::size_t i) const noexcept;

    // sum_k (gamma_i(u_k) - ln(1 + gamma_i(u_k))) * weight_k, always >= 0.
    double log_penalty(std::size_t i) const noexcept;

    // sum_k ln(1 + gamma_i(u_k)) * weight_k.
    double log_drift(std::size_t i) const noexcept;

    // sum_k ln(1 + gamma_i(u_k))^2 * weight_k, the predictable quadratic
    // variation rate of the compensated log-jump martingale.
    double log_second_moment(std::size_t i) const noexcept;
};

// Chemostat model with interval-valued parameters. Plain aggregate: the
// positivity invariants are checked by validate(), not on construction, so
// that a malformed model can still be reported on.
struct ImpreciseModel {
    double S0 = 0.0;
    Interval D, m1, delta1, sigma1, m2, delta2, sigma2, sigma3;
    JumpSpec jumps;
};

// Fully numeric parameter set at imprecision level p.
struct CrispModel {
    double S0 = 0.0;
    double D = 0.0;
    double m1 = 0.0;
    double delta1 = 0.0;
    double sigma1 = 0.0;
    double m2 = 0.0;
    double delta2 = 0.0;
    double sigma2 = 0.0;
    double sigma3 = 0.0;
    JumpSpec jumps;
    double p = 0.0;

    Vec3 sigma() const noexcept { return {sigma1, sigma2, sigma3}; }
};

// Throws DomainError unless every rate/yield is positive, every volatility
// nonnegative and finite, and every jump mark has weight > 0 and gamma > -1.
void require_valid(const CrispModel& model);

// Nutrient, prey and predator concentrations.
struct State {
    double S = 0.0;
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const State&, const State&) = default;
};

CrispModel crispify(const ImpreciseModel& model, double p);

// Degenerate interval model reproducing a crisp one (p is dropped).
ImpreciseModel to_imprecise(const CrispModel& model);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<Check> checks;
    // Smallest constant bounding sum_k ln(1+gamma_i)^2 weight_k over i.
    double moment_bound = 0.0;
    // Per-component bound on |ln(1+gamma_i(u_k))|.
    Vec3 log_jump_bound{0.0, 0.0, 0.0};
    // Global Lipschitz constant of the linear jump coefficients,
    // sum_k gamma_i(u_k)^2 weight_k.
    Vec3 jump_lipschitz{0.0, 0.0, 0.0};

    bool ok() const noexcept;
    // First failing check, or nullptr.
    const Check* first_failure() const noexcept;
};

// Never throws; each violated invariant becomes a failed check.
ValidationReport validate(const ImpreciseModel& model);

struct H3Report {
    double zeta = 0.0;
    double sigma_sq = 0.0;
    double lhs = 0.0;
    bool holds = false;
};

// Moment condition D - (theta-1)/2 * max_i sigma_i^2 - zeta/theta > 0 with
// zeta = sum_k [(1 + max_i gamma_i)^theta - 1 - min_i gamma_i] weight_k.
// Throws DomainError for theta <= 2.
H3Report check_h3(const CrispModel& model, double theta);

// Drift of the jump-diffusion system; identical to the deterministic
// right-hand side.
Vec3 drift(const CrispModel& model, const State& s) noexcept;
Vec3 ode_rhs(const CrispModel& model, const State& s) noexcept;

} // namespace ichem
