#pragma once

#include <algorithm>
#include <cmath>

namespace umetric {

// Comparison slack for distances: max(abs, rel * |reference|).
struct Tolerance {
    double rel = 1e-9;
    double abs = 1e-12;

    double slack(double reference) const {
        return std::max(abs, rel * std::abs(reference));
    }

    // a <= b with slack taken on a.
    bool leq(double a, double b) const { return a <= b + slack(a); }

    // a == b within the slack of the larger magnitude.
    bool close(double a, double b) const {
        return std::abs(a - b) <= slack(std::max(std::abs(a), std::abs(b)));
    }
};

}  // namespace umetric
