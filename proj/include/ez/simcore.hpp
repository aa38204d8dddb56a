#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ez/units.hpp"

namespace ez {

using Vec3 = Eigen::Vector3d;

/// Launcher site altitude above sea level. Target elevations are relative to this.
inline constexpr double kSiteAltitudeM = units::ft_to_m(5000.0);
inline constexpr double kGravity = units::kStandardGravity;

struct AtmosphereSample {
    double density;        // kg/m^3
    double speed_of_sound; // m/s
    double temperature;    // K
};

inline constexpr double kAtmosphereMinAltitudeM = -500.0;
inline constexpr double kAtmosphereMaxAltitudeM = 30000.0;

/// International Standard Atmosphere: linear lapse to the 11 km tropopause, isothermal above.
/// Throws DomainError outside [-500 m, 30 km].
AtmosphereSample isa_atmosphere(double altitude_m);

/// Same law without the band check; the isothermal layer is extended above 30 km.
/// Used inside fly-outs where a lofted trajectory may briefly leave the tabulated band.
AtmosphereSample isa_atmosphere_unchecked(double altitude_m);

/// Piecewise-linear drag coefficient against Mach, clamped at the table ends.
struct DragTable {
    std::vector<double> mach;
    std::vector<double> cd_power_on;
    std::vector<double> cd_power_off;

    double cd(double mach_number, bool powered) const;
};

struct MissileParams {
    std::string name;
    double launch_mass = 0;           // kg
    double propellant_mass_boost = 0; // kg
    double propellant_mass_sustain = 0;
    double boost_thrust = 0; // N
    double boost_duration = 0; // s
    double sustain_thrust = 0;
    double sustain_duration = 0;
    double ref_area = 0; // m^2
    DragTable cd_table;
    double nav_constant = 4.0;
    double g_limit = 0;          // g
    double loft_pitch_deg = 0;
    double loft_duration = 0;    // s
    double seeker_activation_range = 0; // m
    double hit_radius = 15.0;    // m
    double max_flight_time = 0;  // s
    double min_speed = 250.0;    // m/s

    double burnout_mass() const { return launch_mass - propellant_mass_boost - propellant_mass_sustain; }
    double burn_end_time() const { return boost_duration + sustain_duration; }

    /// Throws ValidationError naming the first violated invariant.
    void validate() const;
};

/// Medium-range archetype (230 kg, 20 kN x 6 s boost, 5 kN x 14 s sustain, 30 g).
MissileParams sam_a();
/// Long-range archetype (900 kg, 60 kN x 10 s boost, 15 kN x 30 s sustain, 25 g).
MissileParams sam_b();
/// Preset by id ("sam_a", "sam_b"); throws ValidationError for unknown ids.
MissileParams preset(std::string_view id);

/// Key-value config text ("key = value", '#' comments, comma-separated tables).
/// The first non-comment key must be format_version = 1.
MissileParams parse_params(std::string_view text);
std::string format_params(const MissileParams& p);
MissileParams load_params(const std::filesystem::path& path);
/// Resolves a preset id or, failing that, a config file path.
MissileParams resolve_params(const std::string& preset_or_path);

struct MissileState {
    Vec3 position = Vec3::Zero(); // launcher frame, z up, m
    Vec3 velocity = Vec3::Zero(); // m/s
    double mass = 0;
    double time = 0;
};

struct TargetTrack {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero(); // horizontal
};

struct ThrustMass {
    double thrust;
    double mass;
};

/// Boost then sustain at constant thrust, linear propellant depletion in each phase.
ThrustMass thrust_and_mass(double t, const MissileParams& params);

/// Drag deceleration vector for the given state. Zero velocity yields a zero vector.
Vec3 drag_accel(const MissileState& state, const MissileParams& params,
                const AtmosphereSample& atmo, bool powered);

/// Force switches for isolating terms in tests (vacuum, coast).
struct ForceModel {
    bool thrust = true;
    bool drag = true;
};

/// Total translational acceleration at (position, velocity, t) with a held lateral command.
Vec3 total_accel(const Vec3& position, const Vec3& velocity, double t, const Vec3& commanded_accel,
                 const MissileParams& params, const ForceModel& forces = {});

/// One classical RK4 step over position and velocity; mass is re-derived at step end.
MissileState rk4_step(const MissileState& state, const Vec3& commanded_accel,
                      const MissileParams& params, double dt, const ForceModel& forces = {});

TargetTrack propagate_target(const TargetTrack& track, double dt);

/// Altitude above sea level of a launcher-frame position.
inline double altitude_asl(const Vec3& position) { return position.z() + kSiteAltitudeM; }

} // namespace ez
