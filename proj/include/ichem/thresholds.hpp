#pragma once

#include <optional>
#include <string_view>

#include "ichem/model.hpp"

namespace ichem {

enum class Regime { BothExtinct, PreyOnlyPersists, Persistent, Boundary };

std::string_view to_string(Regime r) noexcept;

// Long-run quantities predicted for the classified regime. A field is empty
// when the regime makes no statement about it.
struct PredictedAsymptotics {
    // Upper bound on limsup ln x(t)/t.
    std::optional<double> x_lyapunov_bound;
    // Upper bound on limsup ln y(t)/t.
    std::optional<double> y_lyapunov_bound;
    // Limit of the running mean of S.
    std::optional<double> S_mean_limit;
    // Limit of the running mean of x.
    std::optional<double> x_mean_limit;
    // Lower bound on liminf of the running mean of y.
    std::optional<double> y_mean_lower_bound;
};

struct ThresholdReport {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double beta3 = 0.0;
    double R0s = 0.0;
    double R1s = 0.0;
    Regime regime = Regime::Boundary;
    PredictedAsymptotics predictions;
};

inline constexpr double kDefaultBoundaryTol = 1e-9;

// Noise penalty of component i (1-based): sigma_i^2 / 2 plus the jump term
// sum_k (gamma_i - ln(1 + gamma_i)) weight_k.
double beta(const CrispModel& model, int i);

// Prey invasion threshold S0 m1 / (D + beta2).
double r0s(const CrispModel& model);

// Predator invasion threshold
// S0 m1 m2 delta1 / (m2 delta1 (D + beta2) + m1 (D + beta3)).
double r1s(const CrispModel& model);

ThresholdReport classify(const CrispModel& model, double boundary_tol = kDefaultBoundaryTol);

} // namespace ichem
