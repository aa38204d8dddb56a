#include <doctest.h>

#include "oracles.hpp"

#include "ez/error.hpp"
#include "ez/simcore.hpp"

using namespace ez;

TEST_CASE("isa matches the standard atmosphere") {
    const AtmosphereSample sl = isa_atmosphere(0.0);
    CHECK(sl.density == doctest::Approx(1.225).epsilon(1e-4));
    CHECK(sl.speed_of_sound == doctest::Approx(340.29).epsilon(1e-4));
    CHECK(isa_atmosphere(11000.0).temperature == doctest::Approx(216.65).epsilon(1e-12));

    for (double h = -500.0; h <= 30000.0; h += 250.0) {
        const auto got = isa_atmosphere(h);
        const auto ref = oracle::isa(h);
        CHECK(got.temperature == doctest::Approx(ref.temperature).epsilon(1e-12));
        CHECK(got.density == doctest::Approx(ref.density).epsilon(1e-10));
        CHECK(got.speed_of_sound == doctest::Approx(ref.speed_of_sound).epsilon(1e-12));
    }
}

TEST_CASE("isa density is non-increasing and bounded to its band") {
    double prev = isa_atmosphere(0.0).density;
    for (double h = 10.0; h <= 30000.0; h += 10.0) {
        const double d = isa_atmosphere(h).density;
        CHECK(d <= prev);
        CHECK(d > 0.0);
        prev = d;
    }
    CHECK_THROWS_AS(isa_atmosphere(-501.0), DomainError);
    CHECK_THROWS_AS(isa_atmosphere(30001.0), DomainError);
    const auto a = isa_atmosphere(4321.0);
    const auto b = isa_atmosphere(4321.0);
    CHECK(a.density == b.density);
    CHECK(isa_atmosphere_unchecked(35000.0).temperature == doctest::Approx(216.65));
}

TEST_CASE("thrust and mass profile") {
    const MissileParams p = sam_a();
    const ThrustMass t0 = thrust_and_mass(0.0, p);
    CHECK(t0.thrust == p.boost_thrust);
    CHECK(t0.mass == p.launch_mass);
    CHECK(thrust_and_mass(p.boost_duration / 2, p).mass ==
          doctest::Approx(p.launch_mass - p.propellant_mass_boost / 2));
    CHECK(thrust_and_mass(p.boost_duration + 1.0, p).thrust == p.sustain_thrust);
    const ThrustMass out = thrust_and_mass(p.burn_end_time(), p);
    CHECK(out.thrust == 0.0);
    CHECK(out.mass == doctest::Approx(p.burnout_mass()));
    CHECK(thrust_and_mass(500.0, p).mass == doctest::Approx(p.burnout_mass()));

    double prev = p.launch_mass;
    for (double t = 0; t < 40; t += 0.37) {
        const double m = thrust_and_mass(t, p).mass;
        CHECK(m <= prev);
        CHECK(m >= p.burnout_mass() - 1e-12);
        prev = m;
    }
}

TEST_CASE("drag table and drag law") {
    const MissileParams p = sam_a();
    for (std::size_t i = 0; i < p.cd_table.mach.size(); ++i) {
        CHECK(p.cd_table.cd(p.cd_table.mach[i], true) == p.cd_table.cd_power_on[i]);
        CHECK(p.cd_table.cd(p.cd_table.mach[i], false) == doctest::Approx(p.cd_table.cd_power_on[i] + 0.05));
    }
    CHECK(p.cd_table.cd(10.0, true) == p.cd_table.cd_power_on.back());

    const AtmosphereSample atmo = isa_atmosphere(kSiteAltitudeM);
    MissileState s;
    s.mass = 200;
    CHECK(drag_accel(s, p, atmo, true).norm() == 0.0);

    // Mach 4+ sits on the clamped end of the table, so Cd is fixed and drag scales as v^2.
    s.velocity = Vec3(1500, 0, 0);
    const Vec3 d1 = drag_accel(s, p, atmo, false);
    s.velocity = Vec3(3000, 0, 0);
    const Vec3 d2 = drag_accel(s, p, atmo, false);
    CHECK(d2.norm() == doctest::Approx(4 * d1.norm()).epsilon(1e-12));
    CHECK(d1.x() < 0.0);
    const double expected = 0.5 * atmo.density * 1500.0 * 1500.0 * (0.31 + 0.05) * p.ref_area / 200.0;
    CHECK(d1.norm() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("vacuum ballistic rk4 matches the closed form over 30 s") {
    const MissileParams p = sam_a();
    MissileState s;
    s.velocity = Vec3(300, 40, 500);
    s.position = Vec3(10, -5, 100);
    s.mass = p.launch_mass;
    const ForceModel vacuum{false, false};
    const MissileState end = oracle::coast(s, p, 0.01, 30.0, vacuum);
    const Vec3 ref = oracle::ballistic(s.position, s.velocity, 30.0);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(end.position[i] - ref[i]) <= 1e-3 * std::abs(ref[i]));
    CHECK(end.time == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("rk4 is fourth order on a drag-only coast") {
    const MissileParams p = sam_a();
    MissileState s;
    s.position = Vec3(0, 0, 8000);
    s.velocity = Vec3(640, 0, 60);
    s.time = 30.0; // after burnout so mass is constant
    s.mass = p.burnout_mass();
    const ForceModel coast_forces{false, true};
    const Vec3 x1 = oracle::coast(s, p, 0.5, 5.0, coast_forces).position;
    const Vec3 x2 = oracle::coast(s, p, 0.25, 5.0, coast_forces).position;
    const Vec3 x4 = oracle::coast(s, p, 0.125, 5.0, coast_forces).position;
    CHECK(oracle::observed_order(x1, x2, x4) >= 3.5);
}

TEST_CASE("halving dt barely moves a 10 s endpoint") {
    const MissileParams p = sam_a();
    MissileState s;
    s.velocity = Vec3(30, 0, 30);
    s.mass = p.launch_mass;
    const Vec3 a = oracle::coast(s, p, 0.01, 10.0, {}).position;
    const Vec3 b = oracle::coast(s, p, 0.005, 10.0, {}).position;
    const double step_displacement = oracle::coast(s, p, 0.01, 10.0, {}).velocity.norm() * 0.01;
    CHECK((a - b).norm() < 1e-3 * step_displacement);
}

TEST_CASE("unguided energy never rises after burnout") {
    const MissileParams p = sam_b();
    MissileState s;
    s.position = Vec3(0, 0, 3000);
    s.velocity = Vec3(900, 0, 250);
    s.time = p.burn_end_time() + 0.5;
    s.mass = p.burnout_mass();
    double e = oracle::specific_energy(s);
    for (int i = 0; i < 3000 && s.position.z() > -1000; ++i) {
        s = rk4_step(s, Vec3::Zero(), p, 0.01);
        const double next = oracle::specific_energy(s);
        CHECK(next <= e + 1e-9 * std::abs(e));
        e = next;
    }
}

TEST_CASE("target propagation keeps speed and altitude") {
    TargetTrack t;
    t.position = Vec3(1000, 200, 3000);
    t.velocity = Vec3(-150, 80, 0);
    const TargetTrack same = propagate_target(t, 0.0);
    CHECK(same.position == t.position);
    const TargetTrack moved = propagate_target(t, 2.5);
    CHECK(moved.velocity.norm() == t.velocity.norm());
    CHECK(moved.position.z() == t.position.z());
    CHECK(moved.position.x() == doctest::Approx(1000 - 375));
}

TEST_CASE("params config round-trips and rejects bad input") {
    for (const MissileParams& p : {sam_a(), sam_b()}) {
        const MissileParams q = parse_params(format_params(p));
        CHECK(q.name == p.name);
        CHECK(q.launch_mass == p.launch_mass);
        CHECK(q.cd_table.cd_power_off == p.cd_table.cd_power_off);
        CHECK(q.seeker_activation_range == p.seeker_activation_range);
        CHECK(format_params(q) == format_params(p));
    }
    CHECK_THROWS_AS(parse_params("name = x\n"), ValidationError);
    CHECK_THROWS_AS(parse_params("format_version = 2\n"), ValidationError);
    std::string text = format_params(sam_a());
    CHECK_THROWS_AS(parse_params(text + "bogus_key = 3\n"), ValidationError);
    CHECK_THROWS_AS(preset("sam_z"), ValidationError);

    MissileParams bad = sam_a();
    bad.propellant_mass_boost = 300;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = sam_a();
    bad.seeker_activation_range = 10;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = sam_a();
    bad.cd_table.mach[3] = bad.cd_table.mach[2];
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}
