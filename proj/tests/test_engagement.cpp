#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ez/envelope.hpp"
#include "ez/error.hpp"

using namespace ez;

namespace {

constexpr double kFastDt = 0.02;

SolverConfig fast_cfg(const MissileParams& p) {
    SolverConfig cfg = default_solver_config(p);
    cfg.dt = kFastDt;
    return cfg;
}

} // namespace

TEST_CASE("engagement geometry conventions") {
    const MissileParams p = sam_a();
    const double r = 20000.0;

    auto [m_in, t_in] = setup_engagement({10000, 400, 180}, r, p);
    CHECK(t_in.velocity.x() < 0.0);
    CHECK(std::abs(t_in.velocity.y()) < 1e-9);
    CHECK(t_in.velocity.z() == 0.0);
    CHECK(t_in.velocity.norm() == doctest::Approx(units::kt_to_mps(400)));
    CHECK(t_in.position.z() == doctest::Approx(units::ft_to_m(10000)));
    CHECK(m_in.velocity.norm() == doctest::Approx(kEjectionSpeed));
    CHECK(m_in.velocity.normalized().dot(t_in.position.normalized()) == doctest::Approx(1.0));
    CHECK(m_in.mass == p.launch_mass);

    auto [m_out, t_out] = setup_engagement({0, 400, 0}, r, p);
    CHECK(t_out.velocity.x() > 0.0);
    CHECK(t_out.position.z() == 0.0);

    auto [m_beam, t_beam] = setup_engagement({0, 400, 90}, r, p);
    CHECK(std::abs(t_beam.velocity.x()) < 1e-9);
}

TEST_CASE("query validation names every offending field") {
    CHECK_NOTHROW(validate_query({-5000, 200, 0}));
    CHECK_NOTHROW(validate_query({45000, 850, 180}));
    try {
        validate_query({50000, 100, 181});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("elevation_ft") != std::string::npos);
        CHECK(msg.find("speed_kt") != std::string::npos);
        CHECK(msg.find("aspect_deg") != std::string::npos);
    }
    CHECK_THROWS_AS(setup_engagement({0, 400, 90}, 0.0, sam_a()), ValidationError);
    CHECK_THROWS_AS(solve_max_range({0, 900, 90}, sam_a(), {}), ValidationError);
}

TEST_CASE("target already inside the hit radius is an immediate hit") {
    const MissileParams p = sam_a();
    MissileState m;
    m.velocity = Vec3(30, 0, 0);
    m.mass = p.launch_mass;
    TargetTrack t;
    t.position = Vec3(10, 0, 0);
    t.velocity = Vec3(-200, 0, 0);
    const EngagementOutcome o = run_engagement(m, t, p, 0.01);
    CHECK(o.result == EngagementResult::Hit);
    CHECK(o.time_of_flight == 0.0);
    CHECK(o.termination_reason == Termination::HitRadius);
}

TEST_CASE("shots at ten times the boundary range miss") {
    // The speed cutoff only applies while the range is opening, and a lofted shot against a
    // distant target is usually still closing when it runs out of energy, so it ends in the ground.
    for (const MissileParams& p : {sam_a(), sam_b()}) {
        for (double aspect : {0.0, 180.0}) {
            const EngagementQuery q{10000, 450, aspect};
            const double boundary = solve_max_range(q, p, fast_cfg(p)).max_range_nm;
            const EngagementOutcome o = simulate_shot(q, units::nm_to_m(10 * boundary), p, kFastDt);
            CHECK(o.result == EngagementResult::Miss);
            CHECK(o.termination_reason != Termination::HitRadius);
            CHECK(o.miss_distance > units::nm_to_m(boundary));
            CHECK(o.time_of_flight <= p.max_flight_time + 1e-9);
        }
    }
}

TEST_CASE("fly-out invariants along a trace") {
    const MissileParams p = sam_a();
    for (double range_nm : {4.0, 12.0, 25.0, 33.0}) {
        std::vector<TraceRow> trace;
        const EngagementOutcome o = simulate_shot({8000, 500, 160}, units::nm_to_m(range_nm), p, 0.01, &trace);
        CHECK((o.result == EngagementResult::Hit) == (o.miss_distance <= p.hit_radius));
        CHECK(o.time_of_flight <= p.max_flight_time);

        double min_range = INFINITY;
        int last_phase = 0;
        for (const TraceRow& r : trace) {
            min_range = std::min(min_range, (r.target - r.missile).norm());
            CHECK(static_cast<int>(r.phase) >= last_phase);
            last_phase = static_cast<int>(r.phase);
            CHECK(r.accel_cmd <= p.g_limit * kGravity * (1 + 1e-12));
        }
        CHECK(o.miss_distance <= min_range + 1e-9);

        const EngagementOutcome again = simulate_shot({8000, 500, 160}, units::nm_to_m(range_nm), p, 0.01);
        CHECK(again.miss_distance == o.miss_distance);
        CHECK(again.steps == o.steps);
    }
}

TEST_CASE("trace csv layout") {
    std::vector<TraceRow> trace;
    simulate_shot({0, 300, 180}, units::nm_to_m(3), sam_a(), 0.05, &trace);
    std::ostringstream os;
    write_trace_csv(os, trace);
    std::istringstream in(os.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == kTraceHeader);
    std::size_t lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == trace.size());
}

TEST_CASE("max range solve brackets the outermost hit") {
    const MissileParams p = sam_a();
    const SolverConfig cfg = fast_cfg(p);
    const EngagementQuery q{10000, 450, 180};
    const MaxRangeResult r = solve_max_range(q, p, cfg);
    REQUIRE(r.status == SolveStatus::Solved);
    CHECK(r.bracket_hi_nm - r.bracket_lo_nm <= cfg.tolerance_nm);
    CHECK(r.max_range_nm >= r.bracket_lo_nm);
    CHECK(r.max_range_nm <= r.bracket_hi_nm);
    CHECK(r.bisection_iterations ==
          static_cast<int>(std::ceil(std::log2(cfg.scan_step_nm / cfg.tolerance_nm))));
    const int scan_points = static_cast<int>(cfg.scan_max_nm / cfg.scan_step_nm);
    CHECK(r.engagements_run <= scan_points + r.bisection_iterations);

    CHECK(hits_at(q, r.max_range_nm - cfg.tolerance_nm, p, cfg.dt));
    CHECK_FALSE(hits_at(q, r.max_range_nm + cfg.tolerance_nm, p, cfg.dt));

    const MaxRangeResult again = solve_max_range(q, p, cfg);
    CHECK(again.max_range_nm == r.max_range_nm);

    const MaxRangeResult brute = brute_force_scan(q, p, 0.5, cfg);
    CHECK(std::abs(brute.max_range_nm - r.max_range_nm) <= 0.5);
    const MaxRangeResult coarse = brute_force_scan(q, p, 2.0, cfg);
    CHECK(coarse.max_range_nm <= brute.max_range_nm + 2.0);
}

TEST_CASE("head-on reach exceeds tail-chase reach") {
    for (const MissileParams& p : {sam_a(), sam_b()}) {
        const SolverConfig cfg = fast_cfg(p);
        const double head = solve_max_range({15000, 500, 180}, p, cfg).max_range_nm;
        const double tail = solve_max_range({15000, 500, 0}, p, cfg).max_range_nm;
        CHECK(head > tail);
    }
}

TEST_CASE("fast receding targets give no engagement or a short reach") {
    const MissileParams p = sam_a();
    const SolverConfig cfg = fast_cfg(p);
    const MaxRangeResult r = solve_max_range({0, 850, 0}, p, cfg);
    const MaxRangeResult brute = brute_force_scan({0, 850, 0}, p, 0.1, cfg);
    CHECK(r.status == brute.status);
    if (r.status == SolveStatus::Solved) CHECK(r.max_range_nm < cfg.scan_step_nm);
    CHECK(brute_force_scan({0, 850, 0}, p, 2.0, cfg).status == SolveStatus::NoEngagement);
}

TEST_CASE("hit windows missed by the coarse scan are recovered") {
    const MissileParams p = sam_a();
    const SolverConfig cfg = fast_cfg(p);
    // Inside the first scan step, then strictly between two coarse points.
    for (const EngagementQuery q : {EngagementQuery{23020.6, 766.848, 2.33137}, EngagementQuery{-1033.74, 645.68, 55.6781}}) {
        CAPTURE(q.aspect_deg);
        REQUIRE(brute_force_scan(q, p, cfg.scan_step_nm, cfg).status == SolveStatus::NoEngagement);
        const MaxRangeResult r = solve_max_range(q, p, cfg);
        const MaxRangeResult brute = brute_force_scan(q, p, 0.1, cfg);
        REQUIRE(r.status == SolveStatus::Solved);
        REQUIRE(brute.status == SolveStatus::Solved);
        CHECK(std::abs(r.max_range_nm - brute.max_range_nm) <= 0.1);
        CHECK(r.bracket_hi_nm - r.bracket_lo_nm <= cfg.tolerance_nm);
        CHECK(hits_at(q, r.max_range_nm, p, cfg.dt));
        CHECK_FALSE(hits_at(q, r.bracket_hi_nm, p, cfg.dt));
    }
}
