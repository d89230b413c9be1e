#include "ichem/thresholds.hpp"

namespace ichem {

std::string_view to_string(Regime r) noexcept
{
    switch (r) {
    case Regime::BothExtinct:
        return "BothExtinct";
    case Regime::PreyOnlyPersists:
        return "PreyOnlyPersists";
    case Regime::Persistent:
        return "Persistent";
    case Regime::Boundary:
        return "Boundary";
    }
    return "Boundary";
}

double beta(const CrispModel& model, int i)
{
    if (i < 1 || i > 3) {
        throw DomainError("beta index must be 1, 2 or 3");
    }
    const double sigma = model.sigma()[static_cast<std::size_t>(i - 1)];
    return 0.5 * sigma * sigma + model.jumps.log_penalty(static_cast<std::size_t>(i - 1));
}

double r0s(const CrispModel& model)
{
    const double denom = model.D + beta(model, 2);
    if (!(denom > 0.0)) {
        throw DomainError("R0s denominator D + beta2 must be positive");
    }
    return model.S0 * model.m1 / denom;
}

double r1s(const CrispModel& model)
{
    const double denom = model.m2 * model.delta1 * (model.D + beta(model, 2)) +
                         model.m1 * (model.D + beta(model, 3));
    if (!(denom > 0.0)) {
        throw DomainError("R1s denominator must be positive");
    }
    return model.S0 * model.m1 * model.m2 * model.delta1 / denom;
}

ThresholdReport classify(const CrispModel& model, double boundary_tol)
{
    ThresholdReport r;
    r.beta1 = beta(model, 1);
    r.beta2 = beta(model, 2);
    r.beta3 = beta(model, 3);
    r.R0s = r0s(model);
    r.R1s = r1s(model);

    const double D = model.D;
    // Common rate factor of the predator statements.
    const double predator_rate = model.m2 * model.delta1 * (D + r.beta2) / model.m1 + D + r.beta3;

    auto& pred = r.predictions;
    if (r.R0s < 1.0 - boundary_tol) {
        r.regime = Regime::BothExtinct;
        pred.x_lyapunov_bound = (D + r.beta2) * (r.R0s - 1.0);
        pred.y_lyapunov_bound = -(D + r.beta3);
        pred.S_mean_limit = model.S0;
    } else if (r.R1s < 1.0 - boundary_tol && r.R0s > 1.0 + boundary_tol) {
        r.regime = Regime::PreyOnlyPersists;
        pred.y_lyapunov_bound = predator_rate * (r.R1s - 1.0);
        pred.S_mean_limit = (D + r.beta2) / model.m1;
        pred.x_mean_limit = model.delta1 / model.m1 * (D + r.beta2) * (r.R0s - 1.0);
    } else if (r.R1s > 1.0 + boundary_tol) {
        r.regime = Regime::Persistent;
        const double m1 = model.m1;
        const double m2 = model.m2;
        pred.y_mean_lower_bound = m1 * model.delta2 / (m1 * m2 + m2 * m2 * model.delta1) *
                                  predator_rate * (r.R1s - 1.0);
    } else {
        r.regime = Regime::Boundary;
    }
    return r;
}

} // namespace ichem
