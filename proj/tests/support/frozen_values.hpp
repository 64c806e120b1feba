#pragma once

// Generated by tests/oracles/derive_values.py; do not edit.

namespace frozen {

inline constexpr double kBubblePeriod = 1.0;
inline constexpr double kTriangleD6Period = 0.4999999999999998;
inline constexpr double kBubbleEps1 = 2.0;
inline constexpr double kMassiveBubbleD2 = 0.86081788192800808;
inline constexpr double kSunriseD3 = 6.2831853071795864;
inline constexpr double kBoxD6 = 0.25664048918589621;
inline constexpr double kBoxD6Error = 1.1238070979730994e-6;
inline constexpr double kComplexBetaRe = 0.521690057254644;
inline constexpr double kComplexBetaIm = -0.76431915561594434;
inline constexpr double kSixZeta3 = 7.2123414189575657;
inline constexpr double kPeriod16 = 422.961;

}  // namespace frozen
