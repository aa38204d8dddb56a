#include "ez/scaler.hpp"

#include <cmath>

#include "ez/error.hpp"

namespace ez {

std::string_view to_string(ScalerMode m) {
    switch (m) {
    case ScalerMode::MinMaxSymmetric: return "minmax_symmetric";
    case ScalerMode::ZScore: return "zscore";
    case ScalerMode::Identity: return "identity";
    }
    return "?";
}

ScalerMode parse_scaler_mode(std::string_view s) {
    if (s == "minmax_symmetric") return ScalerMode::MinMaxSymmetric;
    if (s == "zscore") return ScalerMode::ZScore;
    if (s == "identity") return ScalerMode::Identity;
    throw ArtifactError("unknown scaler mode '" + std::string(s) + "'");
}

FeatureScaler FeatureScaler::fit(std::span<const Sample> rows, ScalerMode mode) {
    FeatureScaler sc;
    sc.mode = mode;
    if (mode == ScalerMode::Identity) return sc;
    if (rows.empty()) throw ValidationError("FeatureScaler::fit: no rows");
    for (std::size_t d = 0; d < 3; ++d) {
        if (mode == ScalerMode::MinMaxSymmetric) {
            double lo = features_of(rows[0])[d];
            double hi = lo;
            for (const Sample& s : rows) {
                lo = std::min(lo, features_of(s)[d]);
                hi = std::max(hi, features_of(s)[d]);
            }
            sc.center[d] = 0.5 * (lo + hi);
            sc.half_width[d] = hi > lo ? 0.5 * (hi - lo) : 1.0;
        } else {
            double mean = 0;
            for (const Sample& s : rows) mean += features_of(s)[d];
            mean /= static_cast<double>(rows.size());
            double var = 0;
            for (const Sample& s : rows) var += (features_of(s)[d] - mean) * (features_of(s)[d] - mean);
            var /= static_cast<double>(rows.size());
            sc.center[d] = mean;
            sc.half_width[d] = var > 0 ? std::sqrt(var) : 1.0;
        }
    }
    return sc;
}

} // namespace ez
