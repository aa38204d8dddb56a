#include "ez/engagement.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ez/error.hpp"

namespace ez {

bool in_box(const EngagementQuery& q) {
    const InputBox& b = kInputBox;
    return q.elevation_ft >= b.elevation_lo_ft && q.elevation_ft <= b.elevation_hi_ft &&
           q.speed_kt >= b.speed_lo_kt && q.speed_kt <= b.speed_hi_kt && q.aspect_deg >= b.aspect_lo_deg &&
           q.aspect_deg <= b.aspect_hi_deg;
}

void validate_query(const EngagementQuery& q) {
    const InputBox& b = kInputBox;
    std::ostringstream bad;
    auto check = [&](const char* field, double v, double lo, double hi) {
        if (!(v >= lo && v <= hi)) bad << (bad.tellp() > 0 ? "; " : "") << field << "=" << v << " not in [" << lo << ", " << hi << "]";
    };
    check("elevation_ft", q.elevation_ft, b.elevation_lo_ft, b.elevation_hi_ft);
    check("speed_kt", q.speed_kt, b.speed_lo_kt, b.speed_hi_kt);
    check("aspect_deg", q.aspect_deg, b.aspect_lo_deg, b.aspect_hi_deg);
    if (bad.tellp() > 0) throw ValidationError("query outside input box: " + bad.str());
}

std::string_view to_string(EngagementResult r) { return r == EngagementResult::Hit ? "Hit" : "Miss"; }

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::HitRadius: return "HitRadius";
    case Termination::MaxTime: return "MaxTime";
    case Termination::MinSpeed: return "MinSpeed";
    case Termination::GroundImpact: return "GroundImpact";
    case Termination::Diverging: return "Diverging";
    }
    return "?";
}

std::pair<MissileState, TargetTrack> setup_engagement(const EngagementQuery& query, double ground_range_m,
                                                      const MissileParams& params) {
    validate_query(query);
    if (!(ground_range_m > 0)) throw ValidationError("ground_range must be > 0");

    TargetTrack target;
    target.position = Vec3(ground_range_m, 0.0, units::ft_to_m(query.elevation_ft));
    // Angle between target velocity and the target->launcher direction (-x) is 180 - aspect.
    const double theta = units::deg_to_rad(180.0 - query.aspect_deg);
    const double speed = units::kt_to_mps(query.speed_kt);
    target.velocity = Vec3(-std::cos(theta) * speed, -std::sin(theta) * speed, 0.0);

    MissileState missile;
    missile.position = Vec3::Zero();
    missile.velocity = kEjectionSpeed * target.position.normalized();
    missile.mass = params.launch_mass;
    missile.time = 0.0;
    return {missile, target};
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
    os << kTraceHeader << '\n';
    for (const TraceRow& r : rows) {
        os << r.t << ',' << r.missile.x() << ',' << r.missile.y() << ',' << r.missile.z() << ','
           << r.target.x() << ',' << r.target.y() << ',' << r.target.z() << ',' << to_string(r.phase) << ','
           << r.accel_cmd << '\n';
    }
}

namespace {

struct SegmentMin {
    double range;
    double fraction;
};

// Minimum of |a + s (b - a)| for s in [0, 1]; squared range is quadratic in s.
SegmentMin segment_min(const Vec3& a, const Vec3& b) {
    const Vec3 d = b - a;
    const double dd = d.squaredNorm();
    double s = dd > 0.0 ? std::clamp(-a.dot(d) / dd, 0.0, 1.0) : 0.0;
    return {(a + s * d).norm(), s};
}

bool finite(const Vec3& v) { return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z()); }

} // namespace

EngagementOutcome run_engagement(const MissileState& missile0, const TargetTrack& target0,
                                 const MissileParams& params, double dt, std::vector<TraceRow>* trace) {
    if (!(dt > 0)) throw ValidationError("run_engagement: dt must be > 0");

    MissileState missile = missile0;
    TargetTrack target = target0;
    EngagementOutcome out;

    Vec3 rel = target.position - missile.position;
    double range = rel.norm();
    out.miss_distance = range;
    out.time_of_flight = missile.time;
    if (range <= params.hit_radius) {
        out.result = EngagementResult::Hit;
        out.termination_reason = Termination::HitRadius;
        return out;
    }

    GuidancePhase phase = GuidancePhase::Loft;
    double opening_time = 0.0;
    const double burn_end = params.burn_end_time();

    while (true) {
        const LosKinematics los = los_kinematics(missile, target);
        phase = select_phase(missile, los, params, phase);
        const Vec3 cmd = phase == GuidancePhase::Loft
                             ? loft_command(missile, params)
                             : limit_command(pn_command(los, params.nav_constant), missile, params);
        if (trace) trace->push_back({missile.time, missile.position, target.position, phase, cmd.norm()});

        const double h = std::min(dt, params.max_flight_time - missile.time);
        const double t_prev = missile.time;
        missile = rk4_step(missile, cmd, params, h);
        target = propagate_target(target, h);
        ++out.steps;
        if (!finite(missile.position) || !finite(missile.velocity)) {
            std::ostringstream msg;
            msg << "simulation diverged at t=" << t_prev << " s";
            throw DivergenceError(msg.str());
        }

        const Vec3 rel_next = target.position - missile.position;
        const SegmentMin seg = segment_min(rel, rel_next);
        if (seg.range < out.miss_distance) {
            out.miss_distance = seg.range;
            out.time_of_flight = t_prev + seg.fraction * h;
        }
        const double range_next = rel_next.norm();
        const bool opening = range_next > range;
        rel = rel_next;
        range = range_next;

        if (out.miss_distance <= params.hit_radius) {
            out.result = EngagementResult::Hit;
            out.termination_reason = Termination::HitRadius;
            break;
        }
        out.time_of_flight = missile.time;

        if (phase == GuidancePhase::Terminal) {
            opening_time = opening ? opening_time + h : 0.0;
            if (opening_time >= kDivergenceWindow - 1e-9) {
                out.termination_reason = Termination::Diverging;
                break;
            }
        }
        if (altitude_asl(missile.position) < 0.0) {
            out.termination_reason = Termination::GroundImpact;
            break;
        }
        if (missile.time >= burn_end && opening && missile.velocity.norm() < params.min_speed) {
            out.termination_reason = Termination::MinSpeed;
            break;
        }
        if (missile.time >= params.max_flight_time - 1e-9) {
            out.termination_reason = Termination::MaxTime;
            break;
        }
    }
    if (trace) trace->push_back({missile.time, missile.position, target.position, phase, 0.0});
    return out;
}

EngagementOutcome simulate_shot(const EngagementQuery& query, double ground_range_m,
                                const MissileParams& params, double dt, std::vector<TraceRow>* trace) {
    auto [missile, target] = setup_engagement(query, ground_range_m, params);
    return run_engagement(missile, target, params, dt, trace);
}

} // namespace ez
