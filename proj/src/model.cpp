#include "ichem/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ichem {

double JumpSpec::total_rate() const noexcept
{
    double total = 0.0;
    for (const auto& m : marks) {
        total += m.weight;
    }
    return total;
}

double JumpSpec::compensator(std::size_t i) const noexcept
{
    double total = 0.0;
    for (const auto& m : marks) {
        total += m.gamma[i] * m.weight;
    }
    return total;
}

double JumpSpec::log_penalty(std::size_t i) const noexcept
{
    double total = 0.0;
    for (const auto& m : marks) {
        total += (m.gamma[i] - std::log1p(m.gamma[i])) * m.weight;
    }
    return total;
}

double JumpSpec::log_drift(std::size_t i) const noexcept
{
    double total = 0.0;
    for (const auto& m : marks) {
        total += std::log1p(m.gamma[i]) * m.weight;
    }
    return total;
}

double JumpSpec::log_second_moment(std::size_t i) const noexcept
{
    double total = 0.0;
    for (const auto& m : marks) {
        const double l = std::log1p(m.gamma[i]);
        total += l * l * m.weight;
    }
    return total;
}

namespace {

void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << name << " must be positive and finite (got " << v << ")";
        throw DomainError(msg.str());
    }
}

void require_nonnegative(double v, const char* name)
{
    if (!(v >= 0.0) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << name << " must be nonnegative and finite (got " << v << ")";
        throw DomainError(msg.str());
    }
}

void require_valid_jumps(const JumpSpec& jumps)
{
    for (std::size_t k = 0; k < jumps.size(); ++k) {
        const auto& m = jumps.marks[k];
        if (!(m.weight > 0.0) || !std::isfinite(m.weight)) {
            throw DomainError("jump mark " + std::to_string(k) + ": weight must be positive");
        }
        for (std::size_t i = 0; i < 3; ++i) {
            if (!(m.gamma[i] > -1.0) || !std::isfinite(m.gamma[i])) {
                throw DomainError("jump mark " + std::to_string(k) + ": gamma" +
                                  std::to_string(i + 1) + " must exceed -1");
            }
        }
    }
}

} // namespace

void require_valid(const CrispModel& model)
{
    require_positive(model.S0, "S0");
    require_positive(model.D, "D");
    require_positive(model.m1, "m1");
    require_positive(model.delta1, "delta1");
    require_positive(model.m2, "m2");
    require_positive(model.delta2, "delta2");
    require_nonnegative(model.sigma1, "sigma1");
    require_nonnegative(model.sigma2, "sigma2");
    require_nonnegative(model.sigma3, "sigma3");
    require_valid_jumps(model.jumps);
}

CrispModel crispify(const ImpreciseModel& model, double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("imprecision level p must lie in [0, 1]");
    }
    require_positive(model.S0, "S0");
    require_valid_jumps(model.jumps);

    CrispModel c;
    c.S0 = model.S0;
    c.D = interval_value(model.D, p);
    c.m1 = interval_value(model.m1, p);
    c.delta1 = interval_value(model.delta1, p);
    c.sigma1 = interval_value(model.sigma1, p);
    c.m2 = interval_value(model.m2, p);
    c.delta2 = interval_value(model.delta2, p);
    c.sigma2 = interval_value(model.sigma2, p);
    c.sigma3 = interval_value(model.sigma3, p);
    c.jumps = model.jumps;
    c.p = p;
    return c;
}

ImpreciseModel to_imprecise(const CrispModel& model)
{
    ImpreciseModel m;
    m.S0 = model.S0;
    m.D = Interval::point(model.D);
    m.m1 = Interval::point(model.m1);
    m.delta1 = Interval::point(model.delta1);
    m.sigma1 = Interval::point(model.sigma1);
    m.m2 = Interval::point(model.m2);
    m.delta2 = Interval::point(model.delta2);
    m.sigma2 = Interval::point(model.sigma2);
    m.sigma3 = Interval::point(model.sigma3);
    m.jumps = model.jumps;
    return m;
}

bool ValidationReport::ok() const noexcept
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* ValidationReport::first_failure() const noexcept
{
    for (const auto& c : checks) {
        if (!c.passed) {
            return &c;
        }
    }
    return nullptr;
}

ValidationReport validate(const ImpreciseModel& model)
{
    ValidationReport report;
    auto add = [&report](std::string name, bool passed, std::string detail) {
        report.checks.push_back({std::move(name), passed, std::move(detail)});
    };
    auto num = [](double v) {
        std::ostringstream s;
        s << v;
        return s.str();
    };

    add("S0_positive", model.S0 > 0.0 && std::isfinite(model.S0), "S0 = " + num(model.S0));

    const std::pair<const char*, const Interval*> fields[] = {
        {"D", &model.D},           {"m1", &model.m1},         {"delta1", &model.delta1},
        {"sigma1", &model.sigma1}, {"m2", &model.m2},         {"delta2", &model.delta2},
        {"sigma2", &model.sigma2}, {"sigma3", &model.sigma3},
    };
    for (const auto& [name, iv] : fields) {
        const bool ok = iv->lower() > 0.0 && std::isfinite(iv->upper());
        std::ostringstream detail;
        detail << name << " = " << *iv;
        add(std::string(name) + "_positive", ok, detail.str());
    }

    std::ostringstream weight_detail;
    bool weights_ok = true;
    std::ostringstream gamma_detail;
    bool gammas_ok = true;
    for (std::size_t k = 0; k < model.jumps.size(); ++k) {
        const auto& m = model.jumps.marks[k];
        if (!(m.weight > 0.0) || !std::isfinite(m.weight)) {
            weights_ok = false;
            weight_detail << (weight_detail.tellp() > 0 ? "; " : "") << "mark " << k << " weight = " << m.weight;
        }
        for (std::size_t i = 0; i < 3; ++i) {
            if (!(m.gamma[i] > -1.0) || !std::isfinite(m.gamma[i])) {
                gammas_ok = false;
                gamma_detail << (gamma_detail.tellp() > 0 ? "; " : "") << "mark " << k << " gamma" << (i + 1)
                             << " = " << m.gamma[i];
            }
        }
    }
    add("jump_weights_positive", weights_ok,
        weights_ok ? std::to_string(model.jumps.size()) + " mark(s)" : weight_detail.str());
    add("gamma_gt_neg1", gammas_ok, gammas_ok ? "all jump coefficients > -1" : gamma_detail.str());

    for (std::size_t i = 0; i < 3; ++i) {
        double bound = 0.0;
        for (const auto& m : model.jumps.marks) {
            bound = std::max(bound, std::abs(std::log1p(m.gamma[i])));
        }
        report.log_jump_bound[i] = bound;
        report.moment_bound = std::max(report.moment_bound, model.jumps.log_second_moment(i));
        double lip = 0.0;
        for (const auto& m : model.jumps.marks) {
            lip += m.gamma[i] * m.gamma[i] * m.weight;
        }
        report.jump_lipschitz[i] = lip;
    }

    add("jump_moment_bound", std::isfinite(report.moment_bound),
        "c = " + num(report.moment_bound));
    const bool bounded = std::all_of(report.log_jump_bound.begin(), report.log_jump_bound.end(),
                                     [](double v) { return std::isfinite(v); });
    add("log_jump_bounded", bounded,
        "K = (" + num(report.log_jump_bound[0]) + ", " + num(report.log_jump_bound[1]) + ", " +
            num(report.log_jump_bound[2]) + ")");
    // Jump coefficients gamma_i(u) z are linear in z, hence globally Lipschitz.
    const bool lipschitz = std::all_of(report.jump_lipschitz.begin(), report.jump_lipschitz.end(),
                                       [](double v) { return std::isfinite(v); });
    add("jump_lipschitz", lipschitz,
        "L = (" + num(report.jump_lipschitz[0]) + ", " + num(report.jump_lipschitz[1]) + ", " +
            num(report.jump_lipschitz[2]) + ")");
    return report;
}

H3Report check_h3(const CrispModel& model, double theta)
{
    if (!(theta > 2.0)) {
        throw DomainError("moment exponent theta must exceed 2");
    }
    H3Report r;
    r.sigma_sq = std::max({model.sigma1 * model.sigma1, model.sigma2 * model.sigma2,
                           model.sigma3 * model.sigma3});
    for (const auto& m : model.jumps.marks) {
        const double gmax = std::max({m.gamma[0], m.gamma[1], m.gamma[2]});
        const double gmin = std::min({m.gamma[0], m.gamma[1], m.gamma[2]});
        r.zeta += (std::pow(1.0 + gmax, theta) - 1.0 - gmin) * m.weight;
    }
    r.lhs = model.D - 0.5 * (theta - 1.0) * r.sigma_sq - r.zeta / theta;
    r.holds = r.lhs > 0.0;
    return r;
}

Vec3 drift(const CrispModel& model, const State& s) noexcept
{
    const double uptake = model.m1 * s.S * s.x;
    const double predation = model.m2 * s.x * s.y;
    return {
        model.D * (model.S0 - s.S) - uptake / model.delta1,
        uptake - model.D * s.x - predation / model.delta2,
        predation - model.D * s.y,
    };
}

Vec3 ode_rhs(const CrispModel& model, const State& s) noexcept
{
    return drift(model, s);
}

} // namespace ichem
