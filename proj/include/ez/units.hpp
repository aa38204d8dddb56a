#pragma once

namespace ez::units {

inline constexpr double kFtToM = 0.3048;
inline constexpr double kKtToMps = 1852.0 / 3600.0;
inline constexpr double kNmToM = 1852.0;
inline constexpr double kDegToRad = 0.017453292519943295;
inline constexpr double kRadToDeg = 57.29577951308232;
inline constexpr double kStandardGravity = 9.80665;

constexpr double ft_to_m(double ft) { return ft * kFtToM; }
constexpr double kt_to_mps(double kt) { return kt * kKtToMps; }
constexpr double nm_to_m(double nm) { return nm * kNmToM; }
constexpr double m_to_nm(double m) { return m / kNmToM; }
constexpr double deg_to_rad(double deg) { return deg * kDegToRad; }
constexpr double rad_to_deg(double rad) { return rad * kRadToDeg; }

} // namespace ez::units
