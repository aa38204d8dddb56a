#pragma once

#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "ez/guidance.hpp"
#include "ez/simcore.hpp"

namespace ez {

/// Firing condition: target elevation relative to the launcher, true speed, absolute aspect.
struct EngagementQuery {
    double elevation_ft = 0;
    double speed_kt = 0;
    double aspect_deg = 0;
};

struct InputBox {
    double elevation_lo_ft = -5000.0, elevation_hi_ft = 45000.0;
    double speed_lo_kt = 200.0, speed_hi_kt = 850.0;
    double aspect_lo_deg = 0.0, aspect_hi_deg = 180.0;
};

inline constexpr InputBox kInputBox{};

bool in_box(const EngagementQuery& q);
/// Throws ValidationError listing every offending field.
void validate_query(const EngagementQuery& q);

enum class EngagementResult { Hit, Miss };
enum class Termination { HitRadius, MaxTime, MinSpeed, GroundImpact, Diverging };

std::string_view to_string(EngagementResult r);
std::string_view to_string(Termination t);

struct EngagementOutcome {
    EngagementResult result = EngagementResult::Miss;
    double miss_distance = 0; // m
    double time_of_flight = 0; // s
    Termination termination_reason = Termination::MaxTime;
    int steps = 0;
};

/// Ejection speed along the initial line of sight.
inline constexpr double kEjectionSpeed = 30.0;
/// Seconds of continuously opening range after seeker activation before declaring divergence.
inline constexpr double kDivergenceWindow = 3.0;
inline constexpr double kDefaultDt = 0.01;

/// Target placed along +x at `ground_range_m`, x1 above the launcher, heading such that
/// aspect 180 flies at the launcher and aspect 0 flies directly away.
std::pair<MissileState, TargetTrack> setup_engagement(const EngagementQuery& query, double ground_range_m,
                                                      const MissileParams& params);

struct TraceRow {
    double t;
    Vec3 missile;
    Vec3 target;
    GuidancePhase phase;
    double accel_cmd;
};

inline constexpr std::string_view kTraceHeader =
    "t,missile_x,missile_y,missile_z,target_x,target_y,target_z,phase,a_cmd";
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows);

/// Lockstep fly-out until a termination condition. Closest approach is refined inside the
/// bracketing steps by minimizing the squared range of the interpolated relative position.
/// Throws DivergenceError on a non-finite state.
EngagementOutcome run_engagement(const MissileState& missile0, const TargetTrack& target0,
                                 const MissileParams& params, double dt,
                                 std::vector<TraceRow>* trace = nullptr);

/// setup_engagement + run_engagement.
EngagementOutcome simulate_shot(const EngagementQuery& query, double ground_range_m,
                                const MissileParams& params, double dt,
                                std::vector<TraceRow>* trace = nullptr);

} // namespace ez
