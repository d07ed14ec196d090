#pragma once

#include <cmath>

namespace dtsm::math {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
inline constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

/// Standard normal density.
inline double normal_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// Standard normal distribution function via erfc, accurate to ~1 ulp
/// over the whole real line (no cancellation for x << 0).
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

} // namespace dtsm::math
