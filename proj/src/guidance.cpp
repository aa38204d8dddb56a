#include "ez/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "ez/error.hpp"

namespace ez {

std::string_view to_string(GuidancePhase phase) {
    switch (phase) {
    case GuidancePhase::Loft: return "Loft";
    case GuidancePhase::Midcourse: return "Midcourse";
    case GuidancePhase::Terminal: return "Terminal";
    }
    return "?";
}

LosKinematics los_kinematics(const MissileState& missile, const TargetTrack& target) {
    const Vec3 r = target.position - missile.position;
    const Vec3 v = target.velocity - missile.velocity;
    const double r2 = r.squaredNorm();
    if (r2 == 0.0) throw DomainError("los_kinematics: missile and target positions coincide");
    LosKinematics los;
    los.range = std::sqrt(r2);
    los.los_unit = r / los.range;
    los.closing_speed = -r.dot(v) / los.range;
    los.los_rate = r.cross(v) / r2;
    return los;
}

Vec3 pn_command(const LosKinematics& los, double nav_constant) {
    return nav_constant * los.closing_speed * los.los_rate.cross(los.los_unit);
}

Vec3 loft_command(const MissileState& state, const MissileParams& params) {
    const double speed = state.velocity.norm();
    if (speed == 0.0) return Vec3::Zero();
    const Vec3 vhat = state.velocity / speed;
    // Unit normal to velocity in the vertical plane, pointing toward increasing flight-path angle.
    Vec3 up = Vec3::UnitZ() - vhat.z() * vhat;
    const double up_norm = up.norm();
    if (up_norm < 1e-9) return Vec3::Zero();
    up /= up_norm;
    const double gamma = std::asin(std::clamp(vhat.z(), -1.0, 1.0));
    const double error = units::deg_to_rad(params.loft_pitch_deg) - gamma;
    return limit_command(kLoftGain * speed * error * up, state, params);
}

GuidancePhase select_phase(const MissileState& state, const LosKinematics& los,
                           const MissileParams& params, GuidancePhase previous) {
    if (previous == GuidancePhase::Terminal || los.range <= params.seeker_activation_range)
        return GuidancePhase::Terminal;
    if (previous == GuidancePhase::Loft && state.time < params.loft_duration) return GuidancePhase::Loft;
    return GuidancePhase::Midcourse;
}

Vec3 limit_command(const Vec3& accel, const MissileState& state, const MissileParams& params) {
    const double speed = state.velocity.norm();
    if (speed == 0.0) return Vec3::Zero();
    const Vec3 vhat = state.velocity / speed;
    Vec3 lateral = accel - accel.dot(vhat) * vhat;
    const double limit = params.g_limit * kGravity;
    const double magnitude = lateral.norm();
    if (magnitude > limit) lateral *= limit / magnitude;
    return lateral;
}

} // namespace ez
