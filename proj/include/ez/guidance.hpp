#pragma once

#include <string_view>

#include "ez/simcore.hpp"

namespace ez {

struct LosKinematics {
    double range = 0;         // m
    double closing_speed = 0; // m/s, positive when closing
    Vec3 los_rate = Vec3::Zero(); // rad/s
    Vec3 los_unit = Vec3::UnitX(); // missile -> target
};

/// One-way sequence Loft -> Midcourse -> Terminal. Terminal means the seeker is active.
enum class GuidancePhase { Loft = 0, Midcourse = 1, Terminal = 2 };

std::string_view to_string(GuidancePhase phase);

/// Throws DomainError when missile and target positions coincide.
LosKinematics los_kinematics(const MissileState& missile, const TargetTrack& target);

/// Perfect proportional navigation: N * Vc * (los_rate x los_unit).
Vec3 pn_command(const LosKinematics& los, double nav_constant);

/// Steering gain (1/s) of the loft flight-path-angle loop.
inline constexpr double kLoftGain = 2.0;

/// Lateral command pulling the flight-path angle toward params.loft_pitch_deg, already limited.
Vec3 loft_command(const MissileState& state, const MissileParams& params);

/// Terminal latches: once reached it is returned regardless of the current geometry.
GuidancePhase select_phase(const MissileState& state, const LosKinematics& los,
                           const MissileParams& params, GuidancePhase previous);

/// Removes the component along velocity, then clamps the magnitude to g_limit * g.
Vec3 limit_command(const Vec3& accel, const MissileState& state, const MissileParams& params);

} // namespace ez
