#pragma once

#include <array>
#include <span>
#include <string_view>

#include "ez/sampling.hpp"

namespace ez {

enum class ScalerMode { MinMaxSymmetric, ZScore, Identity };

std::string_view to_string(ScalerMode m);
ScalerMode parse_scaler_mode(std::string_view s);

/// Per-feature affine map x -> (x - center) / half_width, fitted on training rows only.
/// MinMaxSymmetric sends the training range to [-1, 1]; ZScore uses mean and standard deviation.
struct FeatureScaler {
    ScalerMode mode = ScalerMode::Identity;
    Point3 center{0, 0, 0};
    Point3 half_width{1, 1, 1};

    static FeatureScaler fit(std::span<const Sample> rows, ScalerMode mode);

    Point3 apply(const Point3& x) const {
        return {(x[0] - center[0]) / half_width[0], (x[1] - center[1]) / half_width[1],
                (x[2] - center[2]) / half_width[2]};
    }
    Point3 invert(const Point3& z) const {
        return {z[0] * half_width[0] + center[0], z[1] * half_width[1] + center[1],
                z[2] * half_width[2] + center[2]};
    }
};

inline Point3 features_of(const Sample& s) { return {s.elevation_ft, s.speed_kt, s.aspect_deg}; }
inline Point3 features_of(const EngagementQuery& q) { return {q.elevation_ft, q.speed_kt, q.aspect_deg}; }

} // namespace ez
