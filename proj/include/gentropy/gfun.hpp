#pragma once

// Entropy functions g: concave on [0,1] with g(0) = lim_{x->0+} g(x) = 0,
// together with the asymptotic classifiers that compare g against the
// Shannon function eta(x) = -x ln x near zero. Entropy values are in nats.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gentropy/logdomain.hpp"

namespace gentropy {

// Breakpoint data of a piecewise-linear function, exposed so callers can
// align evaluation grids with the constructed oscillation cycles.
struct PiecewiseInfo {
    // Affine pieces y = intercept + slope * x; the function is their
    // pointwise minimum. Slopes always fit a double; intercepts are kept
    // as log2 because they shrink below the representable range.
    struct Line {
        double slope = 0.0;
        double log2_intercept = 0.0; // -inf for the radial tail piece
    };
    std::vector<Line> lines;      // ordered by increasing slope
    std::vector<double> peak_ell; // log2 x of ratio peaks, shallow to deep
    std::vector<double> valley_ell;
    double deepest_ell = 0.0;     // materialization bound; radial below
    double achieved_liminf = 0.0;
    double achieved_limsup = 0.0; // +inf target reports the last peak value
};

class GFunction {
public:
    GFunction() = default;

    const std::string& name() const;

    // g(x) for x in [0,1]; may underflow for tiny x.
    double eval(double x) const;

    // g(2^ell) in the linear domain for ell <= 0.
    double eval_log2(double ell) const;

    // log2(g(2^ell)) — the log-domain workhorse; -inf where g vanishes.
    double log2_eval(double ell) const;

    // log2 of phi_g(2^ell) = g(x)/x at x = 2^ell.
    double log2_phi(double ell) const { return log2_eval(ell) - ell; }

    bool has_derivative() const;
    double deriv(double x) const;        // analytic or refused
    double log2_deriv(double ell) const; // log2 g'(2^ell), deep region only

    // Whether a closed-form log-domain evaluation exists. Without one,
    // evaluation below x = 2^-960 is refused.
    bool has_log_form() const;

    const PiecewiseInfo* piecewise_info() const;

    // Builtin families (see make_builtin for the string-keyed front end).
    static GFunction shannon();                      // -x ln x
    static GFunction power(double a);                // x^a, 0 < a <= 1
    static GFunction havrda_charvat(double q);       // (x^q - x)/(2^(1-q) - 1)
    static GFunction log_square();                   // x (ln x - 1)^2
    static GFunction affine(std::vector<std::pair<double, GFunction>> parts,
                            std::string name = "");
    static GFunction scaled(double c, const GFunction& g);
    // Linear-domain-only escape hatch for tests; refused below 2^-960.
    static GFunction custom(std::string name, std::function<double(double)> f);

    struct Impl;
    explicit GFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    const Impl& impl() const;

private:
    std::shared_ptr<const Impl> impl_;
};

// String-keyed constructor: family in {"shannon", "power", "havrda_charvat",
// "log_square", "affine"}; params as documented per family.
GFunction make_builtin(const std::string& family, const std::vector<double>& params);

enum class GClass { g0_zero, g0_shannon, g0_infinity, indeterminate };

const char* to_string(GClass c);

struct RatioLimits {
    double liminf_est = 0.0; // +inf when divergence is detected
    double limsup_est = 0.0;
    double raw_tail_min = 0.0; // last-half extremes before extrapolation
    double raw_tail_max = 0.0;
    GClass classification = GClass::indeterminate;
    std::string grid;
};

// Tail liminf/limsup of g1(b^-n)/g2(b^-n) for n = 1..depth. Lemma-backed:
// the geometric subsequence realizes the limits, so a fixed base suffices.
RatioLimits estimate_ratio_limits(const GFunction& g1, const GFunction& g2,
                                  int depth = 60, int base = 2);

// Convenience: classification of g against the Shannon function.
GClass classify(const GFunction& g, int depth = 60);

// Tail liminf of lambda*g(x)/g(lambda*x) over x = lambda^-n, n = 1..depth.
double estimate_U(const GFunction& g, double lambda, int depth = 50);

// Tail limsup of x*g'(x)/g(x) on the dyadic grid; falls back to central
// finite differences when no analytic derivative is available.
double estimate_elasticity(const GFunction& g, int depth = 50);

struct PiecewiseOptions {
    double deepest_ell = -65536.0; // materialize oscillation cycles to here
    int head_depth = 24;           // dyadic interpolation levels before cycling
};

// Constructs a piecewise-linear g1 in G0 whose ratio g1/g2 oscillates with
// prescribed liminf/limsup targets (0 < a <= b <= +inf) as x -> 0+.
GFunction make_piecewise_linear(const GFunction& g2, double target_liminf,
                                double target_limsup,
                                const PiecewiseOptions& opts = {});

} // namespace gentropy
