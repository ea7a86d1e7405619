#pragma once

// Base-2 log-domain arithmetic. Quantities like 2^(-2^n) appear throughout
// the cylinder computations and underflow doubles long before the formulas
// stop being meaningful, so probabilities, multiplicities and entropy terms
// are carried as log2 values wherever they can leave the representable range.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace gentropy {

inline constexpr double kLn2 = 0.6931471805599453094;

inline double neg_inf() { return -std::numeric_limits<double>::infinity(); }
inline double pos_inf() { return std::numeric_limits<double>::infinity(); }

// log2(2^a + 2^b), stable for any ordering of a, b.
inline double logsumexp2(double a, double b) {
    if (std::isinf(a) && a < 0) return b;
    if (std::isinf(b) && b < 0) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp2(lo - hi)) / kLn2;
}

// log2(2^a - 2^b); requires a >= b. Returns -inf when a == b.
inline double logdiffexp2(double a, double b) {
    if (std::isinf(b) && b < 0) return a;
    if (b > a) return std::numeric_limits<double>::quiet_NaN();
    if (b == a) return neg_inf();
    return a + std::log1p(-std::exp2(b - a)) / kLn2;
}

// log2 of a sum of 2^v over a sequence of log2 values.
inline double logsumexp2(const std::vector<double>& vals) {
    double hi = neg_inf();
    for (double v : vals) hi = std::max(hi, v);
    if (std::isinf(hi)) return hi;
    double acc = 0.0;
    for (double v : vals) acc += std::exp2(v - hi);
    return hi + std::log2(acc);
}

// Neumaier-compensated accumulator for linear-domain sums.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Sums values in ascending order of magnitude with compensation.
inline double stable_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    CompensatedSum acc;
    for (double t : terms) acc.add(t);
    return acc.value();
}

// Upper/lower limit estimates of a finite sequence, taken over its tail
// (the last half). Divergence to +infinity is declared either when the
// tail exceeds `inf_threshold`, or when the tail grows monotonically and
// gains at least a factor `growth_factor` end to end; a finite-depth grid
// cannot exceed a fixed threshold for slowly diverging quotients, so the
// trend test stands in for the limit. The mirrored rule detects decay to 0.
struct TailEstimate {
    double liminf = 0.0;   // +inf / 0 after trend extrapolation
    double limsup = 0.0;
    double raw_tail_min = 0.0;
    double raw_tail_max = 0.0;
    bool diverged = false; // trend or threshold fired upward
    bool vanished = false; // trend fired downward
};

TailEstimate tail_limit_estimate(const std::vector<double>& values,
                                 double inf_threshold = 1e12,
                                 double growth_factor = 1.5);

} // namespace gentropy
