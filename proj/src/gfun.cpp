#include "gentropy/gfun.hpp"

#include <cmath>
#include <sstream>

#include "gentropy/errors.hpp"

namespace gentropy {

namespace {

// Linear-domain evaluation is refused below this exponent when no closed
// log-domain form exists (subnormal range starts near 2^-1022).
constexpr double kLinearFloorEll = -960.0;

void check_unit_interval(double x) {
    if (!(x >= 0.0) || x > 1.0 + 1e-12)
        throw EvalError("entropy function argument outside [0,1]: x=" + std::to_string(x));
}

} // namespace

struct GFunction::Impl {
    std::string name;

    explicit Impl(std::string n) : name(std::move(n)) {}
    virtual ~Impl() = default;

    virtual double eval(double x) const = 0;

    virtual double log2_eval(double ell) const {
        if (ell < kLinearFloorEll)
            throw EvalError(name + ": no log-domain form below x = 2^-960 (requested ell=" +
                            std::to_string(ell) + ")");
        const double v = eval(std::exp2(ell));
        return v > 0.0 ? std::log2(v) : neg_inf();
    }

    virtual bool has_log_form() const { return true; }
    virtual bool has_derivative() const { return false; }
    virtual double deriv(double) const {
        throw EvalError(name + ": derivative not available");
    }
    virtual double log2_deriv(double) const {
        throw EvalError(name + ": log-domain derivative not available");
    }
    virtual const PiecewiseInfo* piecewise_info() const { return nullptr; }
};

namespace {

struct ShannonImpl final : GFunction::Impl {
    ShannonImpl() : Impl("shannon") {}
    double eval(double x) const override {
        check_unit_interval(x);
        return x > 0.0 ? -x * std::log(x) : 0.0;
    }
    double log2_eval(double ell) const override {
        if (ell >= 0.0) return neg_inf();
        return ell + std::log2(-ell * kLn2);
    }
    bool has_derivative() const override { return true; }
    double deriv(double x) const override { return -std::log(x) - 1.0; }
    double log2_deriv(double ell) const override {
        const double d = -ell * kLn2 - 1.0; // g' at 2^ell
        if (d <= 0.0) throw EvalError("shannon: derivative nonpositive at ell=" +
                                      std::to_string(ell));
        return std::log2(d);
    }
};

struct PowerImpl final : GFunction::Impl {
    double a;
    explicit PowerImpl(double a_) : Impl("power:" + std::to_string(a_)), a(a_) {}
    double eval(double x) const override {
        check_unit_interval(x);
        return x > 0.0 ? std::pow(x, a) : 0.0;
    }
    double log2_eval(double ell) const override { return a * ell; }
    bool has_derivative() const override { return true; }
    double deriv(double x) const override { return a * std::pow(x, a - 1.0); }
    double log2_deriv(double ell) const override {
        return std::log2(a) + (a - 1.0) * ell;
    }
};

struct HavrdaCharvatImpl final : GFunction::Impl {
    double q;
    double c; // 2^(1-q) - 1, shares the sign of (1-q)
    explicit HavrdaCharvatImpl(double q_)
        : Impl("havrda_charvat:" + std::to_string(q_)), q(q_),
          c(std::exp2(1.0 - q_) - 1.0) {}
    double eval(double x) const override {
        check_unit_interval(x);
        if (x <= 0.0) return 0.0;
        return (std::pow(x, q) - x) / c;
    }
    double log2_eval(double ell) const override {
        if (ell >= 0.0) return neg_inf();
        if (q < 1.0) {
            // (x^q - x)/c, c > 0; x^q dominates.
            return q * ell + std::log1p(-std::exp2((1.0 - q) * ell)) / kLn2 - std::log2(c);
        }
        // (x - x^q)/(-c), -c > 0; x dominates.
        return ell + std::log1p(-std::exp2((q - 1.0) * ell)) / kLn2 - std::log2(-c);
    }
    bool has_derivative() const override { return true; }
    double deriv(double x) const override {
        return (q * std::pow(x, q - 1.0) - 1.0) / c;
    }
    double log2_deriv(double ell) const override {
        if (q < 1.0) {
            // (q x^(q-1) - 1)/c with q x^(q-1) -> inf.
            const double rest = q - std::exp2((1.0 - q) * ell);
            if (rest <= 0.0) throw EvalError(name + ": derivative nonpositive at ell=" +
                                             std::to_string(ell));
            return (q - 1.0) * ell + std::log2(rest) - std::log2(c);
        }
        const double rest = 1.0 - q * std::exp2((q - 1.0) * ell);
        if (rest <= 0.0) throw EvalError(name + ": derivative nonpositive at ell=" +
                                         std::to_string(ell));
        return std::log2(rest) - std::log2(-c);
    }
};

struct LogSquareImpl final : GFunction::Impl {
    LogSquareImpl() : Impl("log_square") {}
    double eval(double x) const override {
        check_unit_interval(x);
        if (x <= 0.0) return 0.0;
        const double t = std::log(x) - 1.0;
        return x * t * t;
    }
    double log2_eval(double ell) const override {
        // x (ln x - 1)^2 = 2^ell (1 - ell ln 2)^2 for ell <= 0.
        return ell + 2.0 * std::log2(1.0 - ell * kLn2);
    }
    bool has_derivative() const override { return true; }
    double deriv(double x) const override {
        const double L = std::log(x);
        return L * L - 1.0;
    }
    double log2_deriv(double ell) const override {
        const double L = ell * kLn2;
        const double d = L * L - 1.0;
        if (d <= 0.0) throw EvalError("log_square: derivative nonpositive at ell=" +
                                      std::to_string(ell));
        return std::log2(d);
    }
};

struct AffineImpl final : GFunction::Impl {
    std::vector<std::pair<double, GFunction>> parts;
    AffineImpl(std::vector<std::pair<double, GFunction>> p, std::string n)
        : Impl(std::move(n)), parts(std::move(p)) {
        for (const auto& [c, g] : parts) {
            (void)g;
            if (!(c >= 0.0))
                throw SpecError("affine combination requires nonnegative coefficients");
        }
    }
    double eval(double x) const override {
        double acc = 0.0;
        for (const auto& [c, g] : parts) acc += c * g.eval(x);
        return acc;
    }
    double log2_eval(double ell) const override {
        double acc = neg_inf();
        for (const auto& [c, g] : parts) {
            if (c == 0.0) continue;
            acc = logsumexp2(acc, std::log2(c) + g.log2_eval(ell));
        }
        return acc;
    }
    bool has_log_form() const override {
        for (const auto& [c, g] : parts)
            if (c > 0.0 && !g.has_log_form()) return false;
        return true;
    }
    bool has_derivative() const override {
        for (const auto& [c, g] : parts)
            if (c > 0.0 && !g.has_derivative()) return false;
        return true;
    }
    double deriv(double x) const override {
        double acc = 0.0;
        for (const auto& [c, g] : parts)
            if (c > 0.0) acc += c * g.deriv(x);
        return acc;
    }
    double log2_deriv(double ell) const override {
        double acc = neg_inf();
        for (const auto& [c, g] : parts) {
            if (c == 0.0) continue;
            acc = logsumexp2(acc, std::log2(c) + g.log2_deriv(ell));
        }
        return acc;
    }
};

struct CustomImpl final : GFunction::Impl {
    std::function<double(double)> f;
    CustomImpl(std::string n, std::function<double(double)> fn)
        : Impl(std::move(n)), f(std::move(fn)) {}
    double eval(double x) const override {
        check_unit_interval(x);
        return f(x);
    }
    bool has_log_form() const override { return false; }
};

// Piecewise-linear concave function stored as the pointwise minimum of its
// affine pieces. Slopes always fit a double; intercepts shrink toward zero
// with depth and are kept as log2 values.
struct PiecewiseImpl final : GFunction::Impl {
    PiecewiseInfo info;
    std::vector<double> linear_intercepts; // exp2(log2_intercept); 0 if underflowed
    std::vector<double> cross_ell;         // cross_ell[k]: lines k/k+1 swap activity

    PiecewiseImpl(std::string n, PiecewiseInfo inf)
        : Impl(std::move(n)), info(std::move(inf)) {
        const auto& L = info.lines;
        if (L.size() < 2) throw SpecError(name + ": needs at least two pieces");
        linear_intercepts.reserve(L.size());
        for (const auto& ln : L) linear_intercepts.push_back(std::exp2(ln.log2_intercept));
        cross_ell.reserve(L.size() - 1);
        for (std::size_t k = 0; k + 1 < L.size(); ++k) {
            if (!(L[k + 1].slope > L[k].slope))
                throw SpecError(name + ": slopes must increase with depth");
            if (!(L[k].log2_intercept > L[k + 1].log2_intercept))
                throw SpecError(name + ": intercepts must decrease with depth");
            const double num = logdiffexp2(L[k].log2_intercept, L[k + 1].log2_intercept);
            const double den = std::log2(L[k + 1].slope - L[k].slope);
            cross_ell.push_back(num - den);
            if (k > 0 && cross_ell[k] > cross_ell[k - 1] + 1e-12)
                throw SpecError(name + ": pieces do not form a concave envelope");
        }
    }

    double line_log2_value(std::size_t k, double ell) const {
        const auto& ln = info.lines[k];
        if (ln.slope > 0.0)
            return logsumexp2(ln.log2_intercept, std::log2(ln.slope) + ell);
        // Nonpositive slopes only occur in the shallow head where x is
        // representable; at depth such a line tends to its intercept.
        if (ell < -1000.0) return ln.log2_intercept;
        const double v = linear_intercepts[k] + ln.slope * std::exp2(ell);
        return v > 0.0 ? std::log2(v) : pos_inf(); // non-active piece
    }

    double log2_eval(double ell) const override {
        // cross_ell decreases with k; the active piece at ell is the first k
        // with cross_ell[k] <= ell. Neighbors guard rounding at the joints.
        const auto it = std::lower_bound(cross_ell.begin(), cross_ell.end(), ell,
                                         [](double c, double e) { return c > e; });
        const std::size_t k = static_cast<std::size_t>(it - cross_ell.begin());
        double best = pos_inf();
        const std::size_t lo = k > 0 ? k - 1 : 0;
        const std::size_t hi = std::min(k + 1, info.lines.size() - 1);
        for (std::size_t j = lo; j <= hi; ++j)
            best = std::min(best, line_log2_value(j, ell));
        return best;
    }

    double eval(double x) const override {
        check_unit_interval(x);
        if (x == 0.0) return 0.0;
        return std::exp2(log2_eval(std::log2(x)));
    }

    const PiecewiseInfo* piecewise_info() const override { return &info; }
};

} // namespace

const std::string& GFunction::name() const { return impl().name; }
double GFunction::eval(double x) const { return impl().eval(x); }
double GFunction::eval_log2(double ell) const { return std::exp2(impl().log2_eval(ell)); }
double GFunction::log2_eval(double ell) const { return impl().log2_eval(ell); }
bool GFunction::has_derivative() const { return impl().has_derivative(); }
double GFunction::deriv(double x) const { return impl().deriv(x); }
double GFunction::log2_deriv(double ell) const { return impl().log2_deriv(ell); }
bool GFunction::has_log_form() const { return impl().has_log_form(); }
const PiecewiseInfo* GFunction::piecewise_info() const { return impl().piecewise_info(); }

const GFunction::Impl& GFunction::impl() const {
    if (!impl_) throw SpecError("use of default-constructed GFunction");
    return *impl_;
}

GFunction GFunction::shannon() {
    return GFunction(std::make_shared<ShannonImpl>());
}

GFunction GFunction::power(double a) {
    if (!(a > 0.0) || a > 1.0)
        throw SpecError("power family requires exponent in (0,1], got " + std::to_string(a));
    return GFunction(std::make_shared<PowerImpl>(a));
}

GFunction GFunction::havrda_charvat(double q) {
    if (!(q > 0.0) || q == 1.0)
        throw SpecError("havrda_charvat requires q > 0, q != 1, got " + std::to_string(q));
    return GFunction(std::make_shared<HavrdaCharvatImpl>(q));
}

GFunction GFunction::log_square() {
    return GFunction(std::make_shared<LogSquareImpl>());
}

GFunction GFunction::affine(std::vector<std::pair<double, GFunction>> parts,
                            std::string name) {
    if (parts.empty()) throw SpecError("affine combination needs at least one part");
    if (name.empty()) {
        std::ostringstream os;
        os << "affine(";
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) os << "+";
            os << parts[i].first << "*" << parts[i].second.name();
        }
        os << ")";
        name = os.str();
    }
    return GFunction(std::make_shared<AffineImpl>(std::move(parts), std::move(name)));
}

GFunction GFunction::scaled(double c, const GFunction& g) {
    return affine({{c, g}});
}

GFunction GFunction::custom(std::string name, std::function<double(double)> f) {
    return GFunction(std::make_shared<CustomImpl>(std::move(name), std::move(f)));
}

GFunction make_builtin(const std::string& family, const std::vector<double>& params) {
    auto want = [&](std::size_t n) {
        if (params.size() != n)
            throw SpecError("family '" + family + "' expects " + std::to_string(n) +
                            " parameter(s), got " + std::to_string(params.size()));
    };
    if (family == "shannon" || family == "eta") {
        want(0);
        return GFunction::shannon();
    }
    if (family == "power" || family == "sqrt") {
        if (family == "sqrt") {
            want(0);
            return GFunction::power(0.5);
        }
        want(1);
        return GFunction::power(params[0]);
    }
    if (family == "havrda_charvat" || family == "hc") {
        want(1);
        return GFunction::havrda_charvat(params[0]);
    }
    if (family == "log_square") {
        want(0);
        return GFunction::log_square();
    }
    throw SpecError("unknown entropy function family: '" + family + "'");
}

const char* to_string(GClass c) {
    switch (c) {
        case GClass::g0_zero: return "G0_zero";
        case GClass::g0_shannon: return "G0_shannon";
        case GClass::g0_infinity: return "G0_infinity";
        default: return "indeterminate";
    }
}

RatioLimits estimate_ratio_limits(const GFunction& g1, const GFunction& g2,
                                  int depth, int base) {
    if (depth < 8) throw SpecError("estimate_ratio_limits: depth must be >= 8");
    if (base < 2) throw SpecError("estimate_ratio_limits: base must be >= 2");

    const double step = std::log2(static_cast<double>(base));
    std::vector<double> ratios;
    ratios.reserve(static_cast<std::size_t>(depth));
    for (int n = 1; n <= depth; ++n) {
        const double ell = -step * n;
        double r;
        try {
            r = std::exp2(g1.log2_eval(ell) - g2.log2_eval(ell));
        } catch (const EvalError& e) {
            throw EvalError(std::string(e.what()) + " (deepest valid n = " +
                            std::to_string(n - 1) + ")");
        }
        if (!std::isfinite(r) && !(std::isinf(r) && r > 0))
            throw EvalError("estimate_ratio_limits: invalid ratio at n=" + std::to_string(n));
        ratios.push_back(r);
    }

    const TailEstimate te = tail_limit_estimate(ratios);
    RatioLimits out;
    out.liminf_est = te.liminf;
    out.limsup_est = te.limsup;
    out.raw_tail_min = te.raw_tail_min;
    out.raw_tail_max = te.raw_tail_max;
    {
        std::ostringstream os;
        os << "x = " << base << "^-n, n = 1.." << depth << ", tail = last half";
        out.grid = os.str();
    }

    if (std::isinf(out.liminf_est))
        out.classification = GClass::g0_infinity;
    else if (out.limsup_est == 0.0)
        out.classification = GClass::g0_zero;
    else if (out.liminf_est > 0.0 && std::isfinite(out.limsup_est) &&
             out.limsup_est <= out.liminf_est * 1.10)
        out.classification = GClass::g0_shannon;
    else
        out.classification = GClass::indeterminate;
    return out;
}

GClass classify(const GFunction& g, int depth) {
    return estimate_ratio_limits(g, GFunction::shannon(), depth, 2).classification;
}

double estimate_U(const GFunction& g, double lambda, int depth) {
    if (!(lambda > 1.0)) throw SpecError("estimate_U: lambda must be > 1");
    if (depth < 8) throw SpecError("estimate_U: depth must be >= 8");
    const double step = std::log2(lambda);
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(depth));
    for (int n = 1; n <= depth; ++n) {
        const double ell = -step * n;
        double v;
        try {
            v = std::exp2(step + g.log2_eval(ell) - g.log2_eval(ell + step));
        } catch (const EvalError& e) {
            throw EvalError(std::string(e.what()) + " (deepest valid n = " +
                            std::to_string(n - 1) + ")");
        }
        vals.push_back(v);
    }
    double tail_min = pos_inf();
    for (std::size_t i = vals.size() / 2; i < vals.size(); ++i)
        tail_min = std::min(tail_min, vals[i]);
    return tail_min;
}

double estimate_elasticity(const GFunction& g, int depth) {
    if (depth < 8) throw SpecError("estimate_elasticity: depth must be >= 8");
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(depth));
    for (int n = 1; n <= depth; ++n) {
        const double ell = -static_cast<double>(n);
        double v;
        if (g.has_derivative()) {
            if (ell >= -500.0) {
                const double x = std::exp2(ell);
                v = x * g.deriv(x) / g.eval(x);
            } else {
                v = std::exp2(ell + g.log2_deriv(ell) - g.log2_eval(ell));
            }
        } else {
            if (ell < -500.0)
                throw EvalError("estimate_elasticity: finite differences invalid below "
                                "x = 2^-500 and no analytic derivative (deepest valid n = " +
                                std::to_string(n - 1) + ")");
            const double x = std::exp2(ell);
            const double h = x * 1e-8;
            const double d = (g.eval(std::min(1.0, x + h)) - g.eval(x - h)) / (2.0 * h);
            const double gx = g.eval(x);
            if (!(gx > 0.0))
                throw EvalError("estimate_elasticity: g vanishes at x=" + std::to_string(x));
            v = x * d / gx;
        }
        vals.push_back(v);
    }
    double tail_max = neg_inf();
    for (std::size_t i = vals.size() / 2; i < vals.size(); ++i)
        tail_max = std::max(tail_max, vals[i]);
    return tail_max;
}

// ---------------------------------------------------------------------------
// Piecewise-linear construction with prescribed ratio oscillation.
// ---------------------------------------------------------------------------

namespace {

// log2 of the value of the line (slope s > 0, intercept 2^l_yint) at x = 2^ell.
double line_ratio_log2(double log2_slope, double log2_yint, double ell,
                       const GFunction& g2) {
    return logsumexp2(log2_yint, log2_slope + ell) - g2.log2_eval(ell);
}

// Minimum of the line/g2 ratio over ell in [ell_lo, ell_hi] (coarse scan
// plus ternary refinement; the profile descends then rises along a line).
std::pair<double, double> line_ratio_min(double log2_slope, double log2_yint,
                                         double ell_lo, double ell_hi,
                                         const GFunction& g2) {
    constexpr int kScan = 512;
    double best_ell = ell_hi, best = pos_inf();
    for (int i = 0; i <= kScan; ++i) {
        const double ell = ell_hi + (ell_lo - ell_hi) * i / kScan;
        const double r = line_ratio_log2(log2_slope, log2_yint, ell, g2);
        if (r < best) {
            best = r;
            best_ell = ell;
        }
    }
    const double span = (ell_hi - ell_lo) / kScan;
    double lo = std::max(ell_lo, best_ell - span);
    double hi = std::min(ell_hi, best_ell + span);
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (line_ratio_log2(log2_slope, log2_yint, m1, g2) <
            line_ratio_log2(log2_slope, log2_yint, m2, g2))
            hi = m2;
        else
            lo = m1;
    }
    const double ell = 0.5 * (lo + hi);
    return {std::exp2(line_ratio_log2(log2_slope, log2_yint, ell, g2)), ell};
}

} // namespace

GFunction make_piecewise_linear(const GFunction& g2, double target_liminf,
                                double target_limsup, const PiecewiseOptions& opts) {
    const double a = target_liminf;
    const double b = target_limsup;
    if (!(a > 0.0)) throw SpecError("make_piecewise_linear: target liminf must be > 0");
    if (b < a) throw SpecError("make_piecewise_linear: infeasible targets (limsup < liminf)");
    if (!g2.has_log_form() && opts.deepest_ell < kLinearFloorEll)
        throw SpecError("make_piecewise_linear: g2 lacks a log-domain form for this depth");

    // g2 must vanish at 0 with unbounded origin slope (g2'(0) = inf).
    if (!(std::exp2(g2.log2_eval(-64.0)) >= 0.0) || g2.log2_eval(-64.0) > 0.0)
        throw SpecError("make_piecewise_linear: g2 must be positive and vanish at 0");
    if (std::exp2(g2.log2_phi(-64.0) - g2.log2_phi(-8.0)) < 4.0)
        throw SpecError("make_piecewise_linear: g2'(0) not infinite (phi_g2 not divergent)");

    PiecewiseInfo info;
    info.deepest_ell = opts.deepest_ell;
    const bool unbounded = std::isinf(b);

    // Head: chords of t0*g2 at dyadic points down to 2^-head_depth. Ratio is
    // exactly t0 at each of these points, so the head ends on a peak.
    const double t0 = unbounded ? 2.0 * a : b;
    const int H = std::max(4, opts.head_depth);
    double prev_slope = neg_inf();
    {
        double x_r = 1.0, y_r = t0 * g2.eval(1.0);
        for (int j = 1; j <= H; ++j) {
            const double x_l = std::exp2(-j);
            const double y_l = t0 * std::exp2(g2.log2_eval(-j));
            const double s = (y_r - y_l) / (x_r - x_l);
            const double yint = y_l - s * x_l;
            if (!(yint > 0.0) && !(s > 0.0))
                throw SpecError("make_piecewise_linear: head chord degenerate");
            info.lines.push_back({s, std::log2(yint)});
            if (info.lines.size() > 1 && !(s > prev_slope))
                throw SpecError("make_piecewise_linear: g2 head not strictly concave");
            prev_slope = s;
            x_r = x_l;
            y_r = y_l;
        }
    }

    if (b == a) {
        // Constant-ratio target: keep interpolating chords of a*g2 on every
        // dyadic level down to the materialization bound.
        double ell_r = -H;
        double l_y_r = std::log2(a) + g2.log2_eval(ell_r);
        const long deepest = static_cast<long>(-opts.deepest_ell);
        for (long j = H + 1; j <= deepest; ++j) {
            const double ell_l = -static_cast<double>(j);
            const double l_y_l = std::log2(a) + g2.log2_eval(ell_l);
            const double l_s = logdiffexp2(l_y_r, l_y_l) - logdiffexp2(ell_r, ell_l);
            const double l_yint = logdiffexp2(l_y_l, l_s + ell_l);
            info.lines.push_back({std::exp2(l_s), l_yint});
            ell_r = ell_l;
            l_y_r = l_y_l;
        }
        // Radial closure through the deepest point.
        info.lines.push_back({std::exp2(l_y_r - ell_r), neg_inf()});
        info.achieved_liminf = a;
        info.achieved_limsup = a;
        std::ostringstream nm;
        nm << "piecewise_linear(" << a << "," << b << " vs " << g2.name() << ")";
        return GFunction(std::make_shared<PiecewiseImpl>(nm.str(), std::move(info)));
    }

    // Oscillation cycles. Each cycle is one affine piece through the current
    // peak: its ratio glides down to the valley target a, bottoms out, then
    // rises; the piece ends where the ratio regains the next peak target.
    double ell_p = -static_cast<double>(H);
    double l_y_p = std::log2(t0) + g2.log2_eval(ell_p);
    info.peak_ell.push_back(ell_p);
    double t_up = unbounded ? 4.0 * a : b;
    double worst_valley = pos_inf();
    double best_peak = t0;

    while (ell_p > opts.deepest_ell) {
        const double l_sec = l_y_p - ell_p; // log2 of the origin secant slope
        // Bisect u = log2(1 - sigma); s = sigma * secant, yint = (1-sigma)*y_p.
        double u_hi = logdiffexp2(l_sec, std::log2(prev_slope)) - l_sec; // s > prev_slope
        if (!(u_hi < 0.0)) u_hi = -1e-9;
        const double span_guess = std::abs(ell_p) * (4.0 * best_peak / a) + 128.0;
        const double ell_lo = ell_p - span_guess;
        double u_lo = -span_guess; // radial-like: valley far below a
        auto valley_of = [&](double u) {
            const double l_yint = l_y_p + u;
            const double l_s = logdiffexp2(l_y_p, l_yint) - ell_p;
            return line_ratio_min(l_s, l_yint, ell_lo, ell_p, g2);
        };
        if (valley_of(u_lo).first >= a)
            throw HorizonError("make_piecewise_linear: cannot push valley to target within "
                               "floating-point range (achieved liminf ~= " +
                               std::to_string(valley_of(u_lo).first) + ")");
        for (int it = 0; it < 120; ++it) {
            const double mid = 0.5 * (u_lo + u_hi);
            if (valley_of(mid).first < a)
                u_lo = mid;
            else
                u_hi = mid;
        }
        const double u = u_lo; // valley min <= a, within bisection tolerance of a
        const auto [vmin, ell_v] = valley_of(u);
        const double l_yint = l_y_p + u;
        const double l_s = logdiffexp2(l_y_p, l_yint) - ell_p;
        info.lines.push_back({std::exp2(l_s), l_yint});
        prev_slope = std::exp2(l_s);
        info.valley_ell.push_back(ell_v);
        worst_valley = std::min(worst_valley, vmin);

        // Bend: on the rising branch find the next peak target.
        double lo = ell_v, hi = ell_v;
        while (std::exp2(line_ratio_log2(l_s, l_yint, hi, g2)) < t_up) {
            lo = hi;
            hi = 2.0 * hi - 64.0;
            if (hi < -1e15)
                throw HorizonError("make_piecewise_linear: rising branch never reaches "
                                   "limsup target " + std::to_string(t_up));
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (std::exp2(line_ratio_log2(l_s, l_yint, mid, g2)) < t_up)
                lo = mid;
            else
                hi = mid;
        }
        ell_p = 0.5 * (lo + hi);
        l_y_p = logsumexp2(l_yint, l_s + ell_p);
        info.peak_ell.push_back(ell_p);
        best_peak = t_up;
        if (unbounded) t_up *= 2.0;
    }

    if (info.valley_ell.empty())
        throw HorizonError("make_piecewise_linear: materialization bound reached before "
                           "the first full cycle (achieved limsup = " + std::to_string(t0) +
                           ", no valley placed)");

    // Radial closure through the last bend point.
    info.lines.push_back({std::exp2(l_y_p - ell_p), neg_inf()});
    info.achieved_liminf = worst_valley;
    info.achieved_limsup = best_peak;

    std::ostringstream nm;
    nm << "piecewise_linear(" << a << ",";
    if (unbounded)
        nm << "inf";
    else
        nm << b;
    nm << " vs " << g2.name() << ")";
    return GFunction(std::make_shared<PiecewiseImpl>(nm.str(), std::move(info)));
}

} // namespace gentropy
