#include "ez/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ez/error.hpp"

namespace ez {

namespace {

constexpr double kSeaLevelTemperature = 288.15;
constexpr double kSeaLevelPressure = 101325.0;
constexpr double kLapseRate = 0.0065;
constexpr double kTropopause = 11000.0;
constexpr double kGasConstant = 287.05287;
constexpr double kGamma = 1.4;

// Pressure exponent g0 / (L R) for the troposphere.
const double kTropoExponent = kGravity / (kLapseRate * kGasConstant);
const double kTropopauseTemperature = kSeaLevelTemperature - kLapseRate * kTropopause;
const double kTropopausePressure =
    kSeaLevelPressure * std::pow(kTropopauseTemperature / kSeaLevelTemperature, kTropoExponent);

} // namespace

AtmosphereSample isa_atmosphere_unchecked(double altitude_m) {
    double temperature;
    double pressure;
    if (altitude_m <= kTropopause) {
        temperature = kSeaLevelTemperature - kLapseRate * altitude_m;
        pressure = kSeaLevelPressure * std::pow(temperature / kSeaLevelTemperature, kTropoExponent);
    } else {
        temperature = kTropopauseTemperature;
        pressure = kTropopausePressure *
                   std::exp(-kGravity * (altitude_m - kTropopause) / (kGasConstant * temperature));
    }
    return {pressure / (kGasConstant * temperature), std::sqrt(kGamma * kGasConstant * temperature),
            temperature};
}

AtmosphereSample isa_atmosphere(double altitude_m) {
    if (!(altitude_m >= kAtmosphereMinAltitudeM && altitude_m <= kAtmosphereMaxAltitudeM)) {
        std::ostringstream msg;
        msg << "isa_atmosphere: altitude " << altitude_m << " m outside [" << kAtmosphereMinAltitudeM
            << ", " << kAtmosphereMaxAltitudeM << "] m";
        throw DomainError(msg.str());
    }
    return isa_atmosphere_unchecked(altitude_m);
}

double DragTable::cd(double mach_number, bool powered) const {
    const std::vector<double>& cds = powered ? cd_power_on : cd_power_off;
    if (mach_number <= mach.front()) return cds.front();
    if (mach_number >= mach.back()) return cds.back();
    auto it = std::upper_bound(mach.begin(), mach.end(), mach_number);
    const std::size_t hi = static_cast<std::size_t>(it - mach.begin());
    const std::size_t lo = hi - 1;
    const double w = (mach_number - mach[lo]) / (mach[hi] - mach[lo]);
    return cds[lo] + w * (cds[hi] - cds[lo]);
}

void MissileParams::validate() const {
    auto require = [&](bool ok, const char* what) {
        if (!ok) throw ValidationError("MissileParams '" + name + "': " + what);
    };
    require(launch_mass > 0, "launch_mass must be > 0");
    require(propellant_mass_boost > 0 && propellant_mass_sustain > 0, "propellant masses must be > 0");
    require(propellant_mass_boost + propellant_mass_sustain < launch_mass,
            "total propellant must be < launch_mass");
    require(boost_thrust > 0 && sustain_thrust > 0, "thrusts must be > 0");
    require(boost_duration > 0 && sustain_duration > 0, "burn durations must be > 0");
    require(ref_area > 0, "ref_area must be > 0");
    require(cd_table.mach.size() >= 2, "cd_table needs at least two Mach breakpoints");
    require(cd_table.cd_power_on.size() == cd_table.mach.size() &&
                cd_table.cd_power_off.size() == cd_table.mach.size(),
            "cd_table columns must have equal length");
    for (std::size_t i = 1; i < cd_table.mach.size(); ++i)
        require(cd_table.mach[i] > cd_table.mach[i - 1], "cd_table Mach breakpoints must be strictly increasing");
    for (std::size_t i = 0; i < cd_table.mach.size(); ++i)
        require(cd_table.cd_power_on[i] > 0 && cd_table.cd_power_off[i] > 0, "cd_table entries must be > 0");
    require(nav_constant > 0, "nav_constant must be > 0");
    require(g_limit > 0, "g_limit must be > 0");
    require(loft_duration >= 0, "loft_duration must be >= 0");
    require(hit_radius > 0, "hit_radius must be > 0");
    require(seeker_activation_range > hit_radius, "seeker_activation_range must exceed hit_radius");
    require(max_flight_time > 0, "max_flight_time must be > 0");
    require(min_speed >= 0, "min_speed must be >= 0");
}

namespace {

DragTable make_table(std::vector<double> cd_on) {
    DragTable t;
    t.mach = {0.0, 0.6, 0.85, 1.0, 1.2, 1.6, 2.2, 3.0, 4.0};
    t.cd_power_on = std::move(cd_on);
    t.cd_power_off = t.cd_power_on;
    for (double& c : t.cd_power_off) c += 0.05;
    return t;
}

} // namespace

MissileParams sam_a() {
    MissileParams p;
    p.name = "sam_a";
    p.launch_mass = 230.0;
    p.propellant_mass_boost = 51.0;
    p.propellant_mass_sustain = 30.0;
    p.boost_thrust = 20000.0;
    p.boost_duration = 6.0;
    p.sustain_thrust = 5000.0;
    p.sustain_duration = 14.0;
    p.ref_area = 0.0314;
    p.cd_table = make_table({0.32, 0.32, 0.40, 0.62, 0.58, 0.50, 0.42, 0.35, 0.31});
    p.nav_constant = 4.0;
    p.g_limit = 30.0;
    p.loft_pitch_deg = 25.0;
    p.loft_duration = 8.0;
    p.seeker_activation_range = 10000.0;
    p.hit_radius = 15.0;
    p.max_flight_time = 90.0;
    p.min_speed = 250.0;
    return p;
}

MissileParams sam_b() {
    MissileParams p;
    p.name = "sam_b";
    p.launch_mass = 900.0;
    p.propellant_mass_boost = 245.0;
    p.propellant_mass_sustain = 185.0;
    p.boost_thrust = 60000.0;
    p.boost_duration = 10.0;
    p.sustain_thrust = 15000.0;
    p.sustain_duration = 30.0;
    p.ref_area = 0.1134;
    p.cd_table = make_table({0.28, 0.28, 0.36, 0.56, 0.52, 0.45, 0.38, 0.32, 0.28});
    p.nav_constant = 4.0;
    p.g_limit = 25.0;
    p.loft_pitch_deg = 35.0;
    p.loft_duration = 14.0;
    p.seeker_activation_range = 18000.0;
    p.hit_radius = 15.0;
    p.max_flight_time = 180.0;
    p.min_speed = 250.0;
    return p;
}

MissileParams preset(std::string_view id) {
    if (id == "sam_a") return sam_a();
    if (id == "sam_b") return sam_b();
    throw ValidationError("unknown SAM preset '" + std::string(id) + "' (expected sam_a or sam_b)");
}

ThrustMass thrust_and_mass(double t, const MissileParams& p) {
    if (t < p.boost_duration) {
        return {p.boost_thrust, p.launch_mass - p.propellant_mass_boost * (t / p.boost_duration)};
    }
    const double after_boost = p.launch_mass - p.propellant_mass_boost;
    const double ts = t - p.boost_duration;
    if (ts < p.sustain_duration) {
        return {p.sustain_thrust, after_boost - p.propellant_mass_sustain * (ts / p.sustain_duration)};
    }
    return {0.0, p.burnout_mass()};
}

Vec3 drag_accel(const MissileState& state, const MissileParams& params,
                const AtmosphereSample& atmo, bool powered) {
    const double speed = state.velocity.norm();
    if (speed == 0.0) return Vec3::Zero();
    const double cd = params.cd_table.cd(speed / atmo.speed_of_sound, powered);
    const double magnitude = 0.5 * atmo.density * speed * speed * cd * params.ref_area / state.mass;
    return -magnitude / speed * state.velocity;
}

namespace {

// Thrust and the Cd branch are taken at phase_t, mass at t. Callers pick phase_t inside the
// burn phase being integrated so that stages on a phase boundary see the correct side.
Vec3 accel_in_phase(const Vec3& position, const Vec3& velocity, double t, double phase_t,
                    const Vec3& commanded_accel, const MissileParams& params, const ForceModel& forces) {
    ThrustMass tm = thrust_and_mass(phase_t, params);
    tm.mass = thrust_and_mass(t, params).mass;
    Vec3 accel(0.0, 0.0, -kGravity);
    accel += commanded_accel;
    const double speed = velocity.norm();
    if (speed > 0.0) {
        if (forces.thrust && tm.thrust > 0.0) accel += (tm.thrust / tm.mass / speed) * velocity;
        if (forces.drag) {
            const AtmosphereSample atmo = isa_atmosphere_unchecked(altitude_asl(position));
            MissileState s;
            s.position = position;
            s.velocity = velocity;
            s.mass = tm.mass;
            s.time = t;
            accel += drag_accel(s, params, atmo, forces.thrust && tm.thrust > 0.0);
        }
    }
    return accel;
}

} // namespace

Vec3 total_accel(const Vec3& position, const Vec3& velocity, double t, const Vec3& commanded_accel,
                 const MissileParams& params, const ForceModel& forces) {
    return accel_in_phase(position, velocity, t, t, commanded_accel, params, forces);
}

namespace {

// One classical RK4 step over an interval on which thrust and the Cd branch are continuous.
MissileState rk4_smooth(const MissileState& state, const Vec3& commanded_accel, const MissileParams& params,
                        double dt, const ForceModel& forces) {
    const double t = state.time;
    const double phase_t = t + 0.5 * dt;
    const Vec3& p0 = state.position;
    const Vec3& v0 = state.velocity;

    const Vec3 k1v = accel_in_phase(p0, v0, t, phase_t, commanded_accel, params, forces);
    const Vec3 k1p = v0;

    const Vec3 v2 = v0 + 0.5 * dt * k1v;
    const Vec3 k2v = accel_in_phase(p0 + 0.5 * dt * k1p, v2, t + 0.5 * dt, phase_t, commanded_accel, params, forces);
    const Vec3 k2p = v2;

    const Vec3 v3 = v0 + 0.5 * dt * k2v;
    const Vec3 k3v = accel_in_phase(p0 + 0.5 * dt * k2p, v3, t + 0.5 * dt, phase_t, commanded_accel, params, forces);
    const Vec3 k3p = v3;

    const Vec3 v4 = v0 + dt * k3v;
    const Vec3 k4v = accel_in_phase(p0 + dt * k3p, v4, t + dt, phase_t, commanded_accel, params, forces);
    const Vec3 k4p = v4;

    MissileState next;
    next.position = p0 + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    next.velocity = v0 + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    next.time = t + dt;
    next.mass = thrust_and_mass(next.time, params).mass;
    return next;
}

} // namespace

MissileState rk4_step(const MissileState& state, const Vec3& commanded_accel,
                      const MissileParams& params, double dt, const ForceModel& forces) {
    // Thrust jumps at boost end and burnout. A step straddling one is split there so the
    // scheme keeps its order; the returned time is still exactly state.time + dt.
    const double end = state.time + dt;
    for (const double boundary : {params.boost_duration, params.burn_end_time()}) {
        if (state.time < boundary && boundary < end) {
            MissileState mid = rk4_smooth(state, commanded_accel, params, boundary - state.time, forces);
            mid.time = boundary;
            MissileState next = rk4_step(mid, commanded_accel, params, end - boundary, forces);
            next.time = end;
            return next;
        }
    }
    return rk4_smooth(state, commanded_accel, params, dt, forces);
}

TargetTrack propagate_target(const TargetTrack& track, double dt) {
    return {track.position + dt * track.velocity, track.velocity};
}

} // namespace ez
