#pragma once

#include <cmath>

namespace jstpc {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

// RF powers are carried in mW internally; circuit/energy quantities in W.
inline double dbm_to_mw(double dbm) { return db_to_linear(dbm); }
inline double mw_to_dbm(double mw) { return linear_to_db(mw); }
inline double mw_to_w(double mw) { return mw * 1e-3; }

inline constexpr double kSqrt3 = 1.7320508075688772;
inline constexpr double kPi = 3.14159265358979323846;

/// Area of a regular hexagon with circumradius `rg`.
inline constexpr double hexagon_area(double rg) { return 1.5 * kSqrt3 * rg * rg; }

}  // namespace jstpc
