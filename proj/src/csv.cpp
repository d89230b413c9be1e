#include "ichem/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace ichem {

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

class Row {
public:
    explicit Row(std::ostream& os) : os_(os) {}
    ~Row() { os_ << '\n'; }

    Row& operator<<(double v)
    {
        sep();
        os_ << format_double(v);
        return *this;
    }
    Row& operator<<(std::string_view s)
    {
        sep();
        os_ << s;
        return *this;
    }
    Row& operator<<(std::size_t n)
    {
        sep();
        os_ << n;
        return *this;
    }

private:
    void sep()
    {
        if (!first_) {
            os_ << ',';
        }
        first_ = false;
    }

    std::ostream& os_;
    bool first_ = true;
};

std::string_view flag(bool b) { return b ? "1" : "0"; }

} // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const CrispModel& model)
{
    os << "t,S,x,y,meanS,meanx,meany,lnx_over_t,lny_over_t,phi\n";
    const auto phi = conservation_residual(traj, model);
    for (std::size_t r = 0; r < traj.size(); ++r) {
        const State& s = traj.states[r];
        const Vec3& m = traj.means[r];
        Row(os) << traj.times[r] << s.S << s.x << s.y << m[0] << m[1] << m[2] << traj.lnx_over_t[r]
                << traj.lny_over_t[r] << phi[r];
    }
}

void write_jumps_csv(std::ostream& os, const Trajectory& traj, const CrispModel& model)
{
    os << "t,mark\n";
    for (const auto& e : traj.jump_log) {
        Row(os) << e.time << std::string_view(model.jumps.marks.at(e.mark).label);
    }
}

void write_ensemble_csv(std::ostream& os, const EnsembleSummary& summary)
{
    os << 't';
    for (auto name : kQuantityNames) {
        os << ',' << name << "_mean," << name << "_p5," << name << "_p50," << name << "_p95";
    }
    os << ",extinct_x_frac,extinct_y_frac\n";
    for (std::size_t r = 0; r < summary.times.size(); ++r) {
        Row row(os);
        row << summary.times[r];
        for (const Band& b : summary.bands[r]) {
            row << b.mean << b.p5 << b.p50 << b.p95;
        }
        row << summary.extinct_x_fraction[r] << summary.extinct_y_fraction[r];
    }
}

void write_terminal_csv(std::ostream& os, const EnsembleSummary& summary)
{
    os << "path,ok,S,x,y,meanS,meanx,meany,window_meanS,window_meanx,window_meany,lnx_over_t,"
          "lny_over_t,phi,extinct_x,extinct_y,M1_over_T,M2_over_T,M3_over_T,Mj1_over_T,"
          "Mj2_over_T,Mj3_over_T,error\n";
    for (const auto& p : summary.paths) {
        Row row(os);
        row << static_cast<std::size_t>(p.path) << flag(p.ok);
        if (!p.ok) {
            for (int k = 0; k < 20; ++k) {
                row << std::string_view("");
            }
            // Messages contain commas; quote them.
            row << std::string_view("\"" + p.error + "\"");
            continue;
        }
        row << p.state.S << p.state.x << p.state.y << p.mean[0] << p.mean[1] << p.mean[2]
            << p.window_mean[0] << p.window_mean[1] << p.window_mean[2] << p.lnx_over_t
            << p.lny_over_t << p.phi << flag(p.extinct_x) << flag(p.extinct_y)
            << p.brownian_over_t[0] << p.brownian_over_t[1] << p.brownian_over_t[2]
            << p.jump_over_t[0] << p.jump_over_t[1] << p.jump_over_t[2] << std::string_view("");
    }
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows)
{
    os << "p,S0,D,m1,delta1,sigma1,m2,delta2,sigma2,sigma3,beta1,beta2,beta3,R0s,R1s,regime,"
          "median_meanS,median_meanx,median_meany,median_lnx_over_t,median_lny_over_t,"
          "extinct_x_frac,extinct_y_frac,n_failed,verdict,error\n";
    const double nan = std::nan("");
    for (const auto& r : rows) {
        Row row(os);
        row << r.p;
        if (r.model) {
            const CrispModel& m = *r.model;
            row << m.S0 << m.D << m.m1 << m.delta1 << m.sigma1 << m.m2 << m.delta2 << m.sigma2 << m.sigma3;
        } else {
            for (int k = 0; k < 9; ++k) {
                row << nan;
            }
        }
        if (r.report) {
            const ThresholdReport& t = *r.report;
            row << t.beta1 << t.beta2 << t.beta3 << t.R0s << t.R1s << to_string(t.regime);
        } else {
            row << nan << nan << nan << nan << nan << std::string_view("");
        }
        if (r.terminal) {
            const TerminalStats& s = *r.terminal;
            row << s.median_meanS << s.median_meanx << s.median_meany << s.median_lnx_over_t
                << s.median_lny_over_t << s.extinct_x_fraction << s.extinct_y_fraction << s.n_failed;
        } else {
            for (int k = 0; k < 7; ++k) {
                row << std::string_view("");
            }
            row << std::string_view("");
        }
        if (r.verdict) {
            row << std::string_view(r.verdict->passed() ? "pass" : "fail");
        } else {
            row << std::string_view("");
        }
        row << std::string_view(r.error.empty() ? std::string() : "\"" + r.error + "\"");
    }
}

void write_verdict_csv(std::ostream& os, const Verdict& verdict)
{
    os << "claim,source,relation,predicted,empirical,tolerance,passed\n";
    for (const auto& c : verdict.claims) {
        Row(os) << std::string_view(c.id) << std::string_view(c.source) << std::string_view(c.relation)
                << c.predicted << c.empirical << c.tolerance << flag(c.passed);
    }
}

} // namespace ichem
