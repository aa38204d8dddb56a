#include "ez/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ez/error.hpp"

namespace ez {

SolverConfig default_solver_config(const MissileParams& params) {
    SolverConfig cfg;
    cfg.scan_max_nm = params.name == "sam_b" ? 200.0 : 80.0;
    return cfg;
}

std::string_view to_string(SolveStatus s) { return s == SolveStatus::Solved ? "Solved" : "NoEngagement"; }

namespace {

EngagementOutcome shot_at(const EngagementQuery& query, double range_nm, const MissileParams& params, double dt) {
    try {
        return simulate_shot(query, units::nm_to_m(range_nm), params, dt);
    } catch (const DivergenceError& e) {
        std::ostringstream msg;
        msg << e.what() << " (ground range " << range_nm << " nm)";
        throw DivergenceError(msg.str());
    }
}

// Outermost k in [1, points] with a hit at k * step, or -1.
int outermost_hit(const EngagementQuery& query, const MissileParams& params, double step, int points, double dt,
                  MaxRangeResult& res, std::vector<double>* miss) {
    for (int k = points; k >= 1; --k) {
        ++res.engagements_run;
        const EngagementOutcome o = shot_at(query, k * step, params, dt);
        if (o.result == EngagementResult::Hit) return k;
        if (miss) (*miss)[k] = o.miss_distance;
    }
    return -1;
}

} // namespace

bool hits_at(const EngagementQuery& query, double range_nm, const MissileParams& params, double dt) {
    return shot_at(query, range_nm, params, dt).result == EngagementResult::Hit;
}

MaxRangeResult solve_max_range(const EngagementQuery& query, const MissileParams& params,
                               const SolverConfig& cfg) {
    validate_query(query);
    if (!(cfg.scan_step_nm > 0 && cfg.tolerance_nm > 0 && cfg.scan_max_nm >= cfg.scan_step_nm &&
          cfg.fine_step_nm > 0))
        throw ValidationError("solver config: need scan_step, tolerance, fine_step > 0 and scan_max >= scan_step");

    MaxRangeResult res;
    const int points = static_cast<int>(std::floor(cfg.scan_max_nm / cfg.scan_step_nm + 1e-9));
    std::vector<double> miss(points + 1, 0.0);
    double step = cfg.scan_step_nm;
    int top = points;
    int hit_index = outermost_hit(query, params, step, points, cfg.dt, res, &miss);

    if (hit_index < 0 && cfg.fine_step_nm < cfg.scan_step_nm) {
        int k_min = points;
        while (k_min > 1 && miss[k_min - 1] < miss[k_min]) --k_min;
        const double reach = std::min((k_min + 1) * cfg.scan_step_nm, cfg.scan_max_nm);
        step = cfg.fine_step_nm;
        top = static_cast<int>(std::floor(reach / step + 1e-9));
        hit_index = outermost_hit(query, params, step, top, cfg.dt, res, nullptr);
    }
    if (hit_index < 0) return res;

    double lo = hit_index * step;
    double hi = hit_index == top && step == cfg.scan_step_nm ? lo : (hit_index + 1) * step;
    while (hi - lo > cfg.tolerance_nm) {
        const double mid = 0.5 * (lo + hi);
        ++res.engagements_run;
        ++res.bisection_iterations;
        if (hits_at(query, mid, params, cfg.dt))
            lo = mid;
        else
            hi = mid;
    }
    res.status = SolveStatus::Solved;
    res.bracket_lo_nm = lo;
    res.bracket_hi_nm = hi;
    res.max_range_nm = lo;
    return res;
}

MaxRangeResult brute_force_scan(const EngagementQuery& query, const MissileParams& params, double grid_step_nm,
                                const SolverConfig& cfg) {
    validate_query(query);
    if (!(grid_step_nm > 0)) throw ValidationError("brute_force_scan: grid_step must be > 0");
    MaxRangeResult res;
    const int points = static_cast<int>(std::floor(cfg.scan_max_nm / grid_step_nm + 1e-9));
    for (int k = points; k >= 1; --k) {
        ++res.engagements_run;
        const double r = k * grid_step_nm;
        if (hits_at(query, r, params, cfg.dt)) {
            res.status = SolveStatus::Solved;
            res.max_range_nm = r;
            res.bracket_lo_nm = r;
            res.bracket_hi_nm = k == points ? r : r + grid_step_nm;
            break;
        }
    }
    return res;
}

} // namespace ez
