#include "gentropy/logdomain.hpp"

#include "gentropy/errors.hpp"

namespace gentropy {

TailEstimate tail_limit_estimate(const std::vector<double>& values,
                                 double inf_threshold, double growth_factor) {
    if (values.size() < 2)
        throw SpecError("tail_limit_estimate: need at least 2 values");

    const std::size_t start = values.size() / 2;
    TailEstimate est;
    est.raw_tail_min = pos_inf();
    est.raw_tail_max = neg_inf();
    bool nondecreasing = true;
    bool nonincreasing = true;
    for (std::size_t i = start; i < values.size(); ++i) {
        const double v = values[i];
        est.raw_tail_min = std::min(est.raw_tail_min, v);
        est.raw_tail_max = std::max(est.raw_tail_max, v);
        if (i > start) {
            const double prev = values[i - 1];
            if (v < prev * (1.0 - 1e-9)) nondecreasing = false;
            if (v > prev * (1.0 + 1e-9)) nonincreasing = false;
        }
    }
    const double first = values[start];
    const double last = values.back();

    const bool grows = nondecreasing && first > 0.0 && last >= growth_factor * first;
    const bool decays = nonincreasing && last >= 0.0 &&
                        (last == 0.0 || first >= growth_factor * last);

    est.diverged = grows || est.raw_tail_max > inf_threshold;
    est.vanished = !est.diverged && decays;

    est.limsup = est.raw_tail_max;
    est.liminf = est.raw_tail_min;
    if (est.raw_tail_max > inf_threshold) est.limsup = pos_inf();
    if (est.raw_tail_min > inf_threshold) est.liminf = pos_inf();
    if (grows) est.limsup = est.liminf = pos_inf();
    if (est.vanished) est.limsup = est.liminf = 0.0;
    return est;
}

} // namespace gentropy
