#pragma once

#include <string_view>

#include "ez/engagement.hpp"

namespace ez {

struct SolverConfig {
    double scan_max_nm = 80.0;
    double scan_step_nm = 2.0;
    double tolerance_nm = 0.05;
    double fine_step_nm = 0.1; // fallback grid for hit windows narrower than scan_step
    double dt = kDefaultDt;
};

/// Default scan ceiling per archetype (80 nm medium-range, 200 nm long-range).
SolverConfig default_solver_config(const MissileParams& params);

enum class SolveStatus { Solved, NoEngagement };
std::string_view to_string(SolveStatus s);

struct MaxRangeResult {
    double max_range_nm = 0;
    int engagements_run = 0;
    int bisection_iterations = 0;
    double bracket_lo_nm = 0;
    double bracket_hi_nm = 0;
    SolveStatus status = SolveStatus::NoEngagement;
};

/// Outermost hit along ground range: descending coarse scan from scan_max, then bisection
/// between the outermost hit and the miss just beyond it. The reported range is the last
/// confirmed hit (bracket_lo). DivergenceError messages carry the offending range.
///
/// When no coarse point hits, the cells up to one step past the outermost local minimum of
/// coarse miss distance are rescanned at fine_step. Beyond that minimum the miss distance
/// only grows with range, which is taken as unreachable.
MaxRangeResult solve_max_range(const EngagementQuery& query, const MissileParams& params,
                               const SolverConfig& cfg);

/// Oracle: outermost hitting multiple of grid_step in (0, scan_max]. Returns 0 with
/// NoEngagement when none hits.
MaxRangeResult brute_force_scan(const EngagementQuery& query, const MissileParams& params, double grid_step_nm,
                                const SolverConfig& cfg);

/// True when the shot at `range_nm` is a hit.
bool hits_at(const EngagementQuery& query, double range_nm, const MissileParams& params, double dt);

} // namespace ez
