#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ichem/integrator.hpp"
#include "ichem/thresholds.hpp"

using namespace ichem;

namespace {

CrispModel persistence_set()
{
    CrispModel c;
    c.S0 = 4.0;
    c.D = 0.2;
    c.m1 = 1.0;
    c.delta1 = 0.5;
    c.m2 = 0.6;
    c.delta2 = 0.5;
    c.sigma1 = c.sigma2 = c.sigma3 = 0.1;
    return c;
}

CrispModel extinction_set()
{
    CrispModel c;
    c.S0 = 1.0;
    c.D = 0.5;
    c.m1 = 0.4;
    c.delta1 = 0.5;
    c.m2 = 0.3;
    c.delta2 = 0.5;
    c.sigma1 = c.sigma2 = c.sigma3 = 0.1;
    return c;
}

CrispModel noise_free(CrispModel c)
{
    c.sigma1 = c.sigma2 = c.sigma3 = 0.0;
    c.jumps.marks.clear();
    return c;
}

CrispModel with_jumps(CrispModel c)
{
    c.jumps.marks = {{"crash", 0.5, {-0.3, -0.3, -0.3}}, {"bloom", 0.5, {0.5, 0.5, 0.5}}};
    return c;
}

SimConfig config(double t_end, double dt, std::uint64_t seed = 1)
{
    SimConfig c;
    c.t_end = t_end;
    c.dt = dt;
    c.seed = seed;
    return c;
}

double max_state_diff(const Trajectory& a, const Trajectory& b, std::size_t b_stride)
{
    double err = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) {
        const State& u = a.states[r];
        const State& v = b.states[(r + 1) * b_stride - 1];
        err = std::max({err, std::abs(u.S - v.S), std::abs(u.x - v.x), std::abs(u.y - v.y)});
    }
    return err;
}

} // namespace

TEST_CASE("config validation")
{
    SimConfig c = config(10, 0.1);
    CHECK_NOTHROW(require_valid(c));
    c.dt = 0.0;
    CHECK_THROWS_AS(require_valid(c), DomainError);
    c.dt = 20.0;
    CHECK_THROWS_AS(require_valid(c), DomainError);
    c = config(-1, 0.1);
    CHECK_THROWS_AS(require_valid(c), DomainError);
    c = config(10, 0.1);
    c.output_stride = 0;
    CHECK_THROWS_AS(require_valid(c), DomainError);
    c = config(10, 0.1);
    c.initial = {1.0, 0.0, 1.0};
    CHECK_THROWS_AS(require_valid(c), DomainError);
    CHECK_NOTHROW(require_valid(c, true));
    CHECK_THROWS_AS(simulate(persistence_set(), c), DomainError);
    CHECK_NOTHROW(simulate_ode(persistence_set(), c));
}

TEST_CASE("recorded grid: strided, strictly increasing, ends exactly at t_end")
{
    SimConfig c = config(1.0, 0.03);
    c.output_stride = 5;
    const Trajectory tr = simulate(persistence_set(), c);
    // ceil(1/0.03) = 34 steps: rows at 5, 10, ..., 30 and the final step.
    REQUIRE(tr.size() == 7);
    CHECK(tr.times.front() > 0.0);
    CHECK(tr.times.back() == 1.0);
    CHECK(std::is_sorted(tr.times.begin(), tr.times.end()));
    CHECK(std::adjacent_find(tr.times.begin(), tr.times.end()) == tr.times.end());
    CHECK(tr.means.size() == tr.size());
    CHECK(tr.lnx_over_t.size() == tr.size());
    CHECK(tr.substeps == 34);
}

TEST_CASE("sample_jumps: empty without marks, ordered in (0, t_end]")
{
    const CounterStream rng(1, 0);
    CHECK(sample_jumps(JumpSpec{}, 1000.0, rng).empty());
    const JumpSpec j = with_jumps(persistence_set()).jumps;
    const auto ev = sample_jumps(j, 50.0, rng);
    REQUIRE_FALSE(ev.empty());
    CHECK(ev.front().time > 0.0);
    CHECK(ev.back().time <= 50.0);
    for (std::size_t i = 1; i < ev.size(); ++i) {
        CHECK(ev[i - 1].time < ev[i].time);
    }
    CHECK(sample_jumps(j, 50.0, rng) == ev);
    CHECK(sample_jumps(j, 50.0, CounterStream(1, 1)) != ev);
}

TEST_CASE("sample_jumps: Poisson count and mark proportions")
{
    JumpSpec j;
    j.marks = {{"a", 0.5, {0.1, 0.1, 0.1}}, {"b", 1.5, {0.1, 0.1, 0.1}}};
    const int seeds = 500;
    double count = 0.0;
    double first = 0.0;
    for (int s = 0; s < seeds; ++s) {
        const auto ev = sample_jumps(j, 1000.0, CounterStream(static_cast<std::uint64_t>(s), 0));
        count += static_cast<double>(ev.size());
        first += static_cast<double>(std::count_if(ev.begin(), ev.end(), [](const JumpEvent& e) {
            return e.mark == 0;
        }));
    }
    // Lambda = 2: mean 2000 events per path, variance 2000.
    const double mean = count / seeds;
    CHECK(std::abs(mean - 2000.0) < 3.0 * std::sqrt(2000.0 / seeds));
    // Mark 0 carries a quarter of the mass.
    const double frac = first / count;
    CHECK(std::abs(frac - 0.25) < 3.0 * std::sqrt(0.25 * 0.75 / count));
}

TEST_CASE("log drift and jump increment")
{
    CrispModel c = with_jumps(persistence_set());
    const State s{1.5, 0.4, 0.3};
    const Vec3 g = log_drift(c, s);
    const double comp = 0.5 * -0.3 + 0.5 * 0.5;
    CHECK(g[0] == doctest::Approx(c.D * c.S0 / s.S - c.D - c.m1 * s.x / c.delta1 - 0.005 - comp));
    CHECK(g[1] == doctest::Approx(c.m1 * s.S - c.m2 * s.y / c.delta2 - c.D - 0.005 - comp));
    CHECK(g[2] == doctest::Approx(c.m2 * s.x - c.D - 0.005 - comp));

    const std::vector<JumpEvent> ev{{0.2, 0}, {0.7, 1}, {0.9, 1}};
    const Vec3 inc = jump_log_increment(c.jumps, ev, 2.0);
    CHECK(inc[1] == doctest::Approx(std::log(0.7) + 2.0 * std::log(1.5) - 2.0 * comp));
    CHECK(jump_log_increment(JumpSpec{}, {}, 5.0) == Vec3{0.0, 0.0, 0.0});
}

TEST_CASE("jump increment per unit time averages to minus the jump part of beta")
{
    const CrispModel c = with_jumps(persistence_set());
    const double T = 2000.0;
    double sum = 0.0;
    const int paths = 200;
    for (int s = 0; s < paths; ++s) {
        const auto ev = sample_jumps(c.jumps, T, CounterStream(7, static_cast<std::uint32_t>(s)));
        sum += jump_log_increment(c.jumps, ev, T)[0] / T;
    }
    const double expected = -c.jumps.log_penalty(0);
    const double se = std::sqrt(c.jumps.log_second_moment(0) / (T * paths));
    CHECK(std::abs(sum / paths - expected) < 4.0 * se);
}

TEST_CASE("positivity on random valid models with jumps")
{
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        CrispModel c = with_jumps(seed % 2 ? persistence_set() : extinction_set());
        c.sigma2 = 0.05 * static_cast<double>(seed % 7);
        const Trajectory tr = simulate(c, config(100.0, 0.01, seed));
        for (const State& s : tr.states) {
            CHECK(s.S > 0.0);
            CHECK(s.x > 0.0);
            CHECK(s.y > 0.0);
        }
    }
}

TEST_CASE("the jump log drives the jump-adapted grid")
{
    const CrispModel c = with_jumps(persistence_set());
    SimConfig cfg = config(20.0, 0.01, 3);
    cfg.path = 5;
    const Trajectory tr = simulate(c, cfg);
    CHECK(tr.jump_log == sample_jumps(c.jumps, 20.0, CounterStream(3, 5)));
    // Every jump strictly inside a grid cell splits it.
    std::size_t splits = 0;
    for (const auto& e : tr.jump_log) {
        const double k = e.time / 0.01;
        splits += std::abs(k - std::round(k)) > 1e-9 ? 1 : 0;
    }
    CHECK(tr.substeps == 2000 + splits);
    CHECK(tr.jump_martingale[0] ==
          doctest::Approx(jump_log_increment(c.jumps, tr.jump_log, 20.0)[0] +
                          20.0 * c.jumps.log_penalty(0)));
}

TEST_CASE("determinism and stream separation")
{
    const CrispModel c = with_jumps(persistence_set());
    const Trajectory a = simulate(c, config(30.0, 0.01, 9));
    const Trajectory b = simulate(c, config(30.0, 0.01, 9));
    CHECK(a.states == b.states);
    CHECK(a.means == b.means);
    CHECK(a.lny_over_t == b.lny_over_t);
    CHECK(a.jump_log == b.jump_log);
    const Trajectory d = simulate(c, config(30.0, 0.01, 10));
    CHECK(d.states.back() != a.states.back());
}

TEST_CASE("no jumps means a zero jump martingale")
{
    const Trajectory tr = simulate(persistence_set(), config(50.0, 0.01, 4));
    CHECK(tr.jump_log.empty());
    CHECK(tr.jump_martingale == Vec3{0.0, 0.0, 0.0});
    CHECK(tr.brownian_martingale[0] != 0.0);
}

TEST_CASE("pure predator noise: ln y is a Brownian motion with drift -sigma^2/2")
{
    CrispModel c;
    c.S0 = 1.0;
    c.D = 1e-9;
    c.m1 = 1e-3;
    c.delta1 = 1.0;
    c.m2 = 1e-9;
    c.delta2 = 1.0;
    c.sigma3 = 0.5;
    const double T = 1.0;
    const int seeds = 1000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int s = 0; s < seeds; ++s) {
        SimConfig cfg = config(T, 0.01, static_cast<std::uint64_t>(s));
        cfg.initial = {1.0, 1e-12, 1.0};
        const Trajectory tr = simulate(c, cfg);
        const double v = std::log(tr.states.back().y) + 0.5 * c.sigma3 * c.sigma3 * T;
        sum += v;
        sum2 += v * v;
        CHECK(v == doctest::Approx(tr.brownian_martingale[2]).epsilon(1e-6));
    }
    const double mean = sum / seeds;
    const double se = std::sqrt((sum2 / seeds - mean * mean) / seeds);
    CHECK(std::abs(mean) < 3.0 * se);
}

TEST_CASE("log floor: the predator is flagged and its ratio frozen")
{
    // ln y falls at about 0.505 per unit time in the extinction set.
    const CrispModel c = extinction_set();
    SimConfig cfg = config(1600.0, 0.05, 2);
    cfg.output_stride = 100;
    const Trajectory tr = simulate(c, cfg);
    REQUIRE(tr.floor_time[2].has_value());
    CHECK(*tr.floor_time[2] > 1200.0);
    CHECK(*tr.floor_time[2] < 1500.0);
    CHECK(std::log(tr.states.back().y) == doctest::Approx(kLogFloor));
    CHECK(tr.states.back().y > 0.0);
    const double frozen = tr.lny_over_t.back();
    CHECK(frozen < kLogFloor / *tr.floor_time[2] + 1e-12);
    CHECK(frozen > kLogFloor / *tr.floor_time[2] - 1.0 / *tr.floor_time[2]);
    CHECK(frozen == tr.lny_over_t[tr.size() - 2]);
    CHECK(frozen == doctest::Approx(-0.505).epsilon(0.05));
    CHECK_FALSE(tr.floor_time[0].has_value());
}

TEST_CASE("direct Euler agrees with log Euler for small noise and aborts when positivity is lost")
{
    const CrispModel c = persistence_set();
    SimConfig cfg = config(10.0, 0.001, 5);
    cfg.scheme = Scheme::DirectEuler;
    const Trajectory d = simulate(c, cfg);
    cfg.scheme = Scheme::LogEuler;
    const Trajectory l = simulate(c, cfg);
    CHECK(d.states.back().x == doctest::Approx(l.states.back().x).epsilon(0.02));
    CHECK(d.states.back().y == doctest::Approx(l.states.back().y).epsilon(0.02));

    CrispModel wild = c;
    wild.sigma2 = 5.0;
    SimConfig coarse = config(50.0, 0.5, 1);
    coarse.scheme = Scheme::DirectEuler;
    CHECK_THROWS_AS(simulate(wild, coarse), SimulationError);
    coarse.scheme = Scheme::LogEuler;
    CHECK_NOTHROW(simulate(wild, coarse));
}

TEST_CASE("zero noise: log Euler tracks RK4 to first order")
{
    const CrispModel c = noise_free(persistence_set());
    auto worst_rel = [&c](double dt) {
        const SimConfig cfg = config(50.0, dt);
        const Trajectory sde = simulate(c, cfg);
        const Trajectory ode = simulate_ode(c, cfg);
        REQUIRE(sde.size() == ode.size());
        CHECK(sde.brownian_martingale == Vec3{0.0, 0.0, 0.0});
        double worst = 0.0;
        for (std::size_t r = 0; r < sde.size(); ++r) {
            const State& a = sde.states[r];
            const State& b = ode.states[r];
            worst = std::max({worst, std::abs(a.S - b.S) / b.S, std::abs(a.x - b.x) / b.x,
                              std::abs(a.y - b.y) / b.y});
        }
        return worst;
    };
    const double coarse = worst_rel(2e-3);
    const double fine = worst_rel(1e-3);
    CHECK(coarse / fine == doctest::Approx(2.0).epsilon(0.05));
    CHECK(fine < 2e-3);
}

TEST_CASE("RK4 converges at fourth order")
{
    const CrispModel c = noise_free(persistence_set());
    const Trajectory a = simulate_ode(c, config(20.0, 0.1));
    const Trajectory b = simulate_ode(c, config(20.0, 0.05));
    const Trajectory d = simulate_ode(c, config(20.0, 0.025));
    const double e1 = max_state_diff(a, b, 2);
    const double e2 = max_state_diff(b, d, 2);
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("RK4 washout: S relaxes to S0 at rate D without consumers")
{
    const CrispModel c = noise_free(extinction_set());
    SimConfig cfg = config(20.0, 0.01);
    cfg.initial = {2.5, 0.0, 0.0};
    const Trajectory tr = simulate_ode(c, cfg);
    for (std::size_t r = 0; r < tr.size(); ++r) {
        const double bound = 1.5 * std::exp(-c.D * tr.times[r]) * (1.0 + 1e-6);
        CHECK(std::abs(tr.states[r].S - c.S0) <= bound);
        CHECK(tr.states[r].x == 0.0);
    }
}

TEST_CASE("RK4 budget: S + x/delta1 + y/(delta1 delta2) relaxes to S0")
{
    const CrispModel c = noise_free(persistence_set());
    SimConfig cfg = config(40.0, 0.01);
    cfg.initial = {1.0, 2.0, 0.5};
    const Trajectory tr = simulate_ode(c, cfg);
    const double sigma0 = 1.0 + 2.0 / c.delta1 + 0.5 / (c.delta1 * c.delta2);
    for (std::size_t r = 0; r < tr.size(); ++r) {
        const State& s = tr.states[r];
        const double total = s.S + s.x / c.delta1 + s.y / (c.delta1 * c.delta2);
        CHECK(std::abs(total - c.S0) <= std::abs(sigma0 - c.S0) * std::exp(-c.D * tr.times[r]) + 1e-9);
    }
}

TEST_CASE("conservation residual decays like 1/t from a budget-consistent start")
{
    const CrispModel c = noise_free(persistence_set());
    SimConfig cfg = config(400.0, 0.01);
    // S + x/delta1 + y/(delta1 delta2) = S0 at t = 0.
    cfg.initial = {2.0, 0.5, 0.25};
    const Trajectory tr = simulate_ode(c, cfg);
    const auto phi = conservation_residual(tr, c);
    REQUIRE(phi.size() == tr.size());
    for (std::size_t r = 0; r < tr.size(); ++r) {
        CHECK(std::abs(phi[r]) <= 1e-8);
    }

    cfg.initial = {1.0, 1.0, 1.0};
    const Trajectory tr2 = simulate_ode(c, cfg);
    const auto phi2 = conservation_residual(tr2, c);
    // phi(t) = (Sigma(0) - S0)(1 - e^{-Dt}) / (D t).
    const double gap = 1.0 + 2.0 + 4.0 - c.S0;
    for (std::size_t r = 0; r < tr2.size(); r += 50) {
        const double t = tr2.times[r];
        const double expected = gap * (1.0 - std::exp(-c.D * t)) / (c.D * t);
        CHECK(phi2[r] == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("running means at an equilibrium equal the state")
{
    CrispModel c = noise_free(persistence_set());
    // Interior equilibrium of the deterministic system.
    const double ystar = *classify(c).predictions.y_mean_lower_bound;
    const double xstar = c.D / c.m2;
    const double Sstar = (c.D + c.m2 * ystar / c.delta2) / c.m1;
    SimConfig cfg = config(10.0, 0.01);
    cfg.initial = {Sstar, xstar, ystar};
    const Trajectory tr = simulate_ode(c, cfg);
    CHECK(tr.means.back()[0] == doctest::Approx(Sstar).epsilon(1e-12));
    CHECK(tr.means.back()[1] == doctest::Approx(xstar).epsilon(1e-12));
    CHECK(tr.means.back()[2] == doctest::Approx(ystar).epsilon(1e-12));
    CHECK(tr.lnx_over_t.back() == doctest::Approx(std::log(xstar) / 10.0).epsilon(1e-12));
}
