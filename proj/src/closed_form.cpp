#include "reins/closed_form.hpp"

namespace reins {

const char* to_string(Regime r) noexcept {
    switch (r) {
        case Regime::NoReinsurance: return "NoReinsurance";
        case Regime::ImmediateBeforeTStar: return "ImmediateBeforeTStar";
    }
    return "?";
}

RetentionSchedule optimal_retention(const ModelParams& m) {
    return RetentionSchedule::exponential(m.q / (m.eta * m.sigma0 * m.sigma0), m.big_r, m.big_t);
}

Strategy decide(double t, double /*x*/, const ModelParams& m, const CaseDecision& decision) {
    detail::require_time(t, m);
    // the stopping boundary is purely temporal, so x never matters
    if (decision.t_star && t <= *decision.t_star) return {t, optimal_retention(m)};
    return Strategy::null_strategy(m.big_t);
}

Strategy decide(double t, double x, const ModelParams& m) { return decide(t, x, m, classify(m)); }

}  // namespace reins
