#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace sidelattice {

struct Interval {
    double low;
    double high;
};

/// Wilson score interval at 95% confidence.
inline Interval wilson_interval(std::size_t successes, std::size_t trials) {
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double center = (phat + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom;
    // The endpoints are exactly 0 and 1 at the extremes; cancellation would leave ~1e-19.
    const double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
    const double high = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {low, high};
}

/// One binomial standard deviation of an estimated rate.
inline double binomial_sigma(double rate, std::size_t trials) {
    if (trials == 0) return 0.0;
    return std::sqrt(std::clamp(rate, 0.0, 1.0) * (1.0 - std::clamp(rate, 0.0, 1.0)) / static_cast<double>(trials));
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace sidelattice
