#pragma once

// Closed-form objects of the reinsurance-with-fixed-cost problem: the pure
// reinsurance value V̄ and its minimiser u*, the no-reinsurance value g, the
// stopping indicator H, the thresholds K*, t_A, t*, q*, and the resulting
// value function and optimal strategy.
//
// Everything is a pure function of (arguments, params) and is templated on
// the scalar so the same expressions can be evaluated in extended precision.
// Exponentials of exponentials are assembled in log space; `log_*` variants
// are the primary entry points and the plain ones exponentiate.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "reins/market_model.hpp"
#include "reins/strategy.hpp"

namespace reins {

namespace detail {

template <typename Scalar>
void require_time(Scalar t, const BasicModelParams<Scalar>& m) {
    if (!(t >= Scalar(0) && t <= m.big_t))
        throw std::domain_error("time " + std::to_string(static_cast<double>(t)) +
                                " outside [0, T]");
}

// e^{c (T - t)} - 1
template <typename Scalar>
Scalar growth_m1(Scalar c, Scalar t, const BasicModelParams<Scalar>& m) {
    using std::expm1;
    return expm1(c * (m.big_t - t));
}

}  // namespace detail

/// Minimised Hamiltonian along u*: eta e^{R(T-t)} (q - p) - q^2 / (2 sigma0^2).
template <typename Scalar>
Scalar psi(Scalar t, const BasicModelParams<Scalar>& m) {
    using std::exp;
    detail::require_time(t, m);
    return m.eta * exp(m.big_r * (m.big_t - t)) * (m.q - m.p) -
           m.q * m.q / (Scalar(2) * m.sigma0 * m.sigma0);
}

/// Exponent rate of the no-reinsurance value: eta e^{R(T-t)} (eta e^{R(T-t)} sigma0^2 / 2 - p).
template <typename Scalar>
Scalar h_rate(Scalar t, const BasicModelParams<Scalar>& m) {
    using std::exp;
    detail::require_time(t, m);
    const Scalar a = m.eta * exp(m.big_r * (m.big_t - t));
    return a * (Scalar(0.5) * a * m.sigma0 * m.sigma0 - m.p);
}

/// Optimal retention (q / (eta sigma0^2)) e^{-R(T-t)}; lies in (0,1) when q < eta sigma0^2.
template <typename Scalar>
Scalar u_star(Scalar t, const BasicModelParams<Scalar>& m) {
    using std::exp;
    detail::require_time(t, m);
    return m.q / (m.eta * m.sigma0 * m.sigma0) * exp(-m.big_r * (m.big_t - t));
}

/// Slope of every value in x: log V(t, x) = -wealth_weight(t) * x + const.
template <typename Scalar>
Scalar wealth_weight(Scalar t, const BasicModelParams<Scalar>& m) {
    using std::exp;
    return m.eta * exp(m.big_r * (m.big_t - t));
}

/// log V̄(t, x), the pure reinsurance value.
template <typename Scalar>
Scalar log_v_bar(Scalar t, Scalar x, const BasicModelParams<Scalar>& m) {
    detail::require_time(t, m);
    return -wealth_weight(t, m) * x +
           m.eta * (m.q - m.p) / m.big_r * detail::growth_m1(m.big_r, t, m) -
           m.q * m.q / (Scalar(2) * m.sigma0 * m.sigma0) * (m.big_t - t);
}

template <typename Scalar>
Scalar v_bar(Scalar t, Scalar x, const BasicModelParams<Scalar>& m) {
    using std::exp;
    return exp(log_v_bar(t, x, m));
}

/// log g(t, x) with g(t, x) = E[exp(-eta X_T^{t,x})] without reinsurance.
template <typename Scalar>
Scalar log_g_value(Scalar t, Scalar x, const BasicModelParams<Scalar>& m) {
    detail::require_time(t, m);
    return -wealth_weight(t, m) * x -
           m.eta * m.p / m.big_r * detail::growth_m1(m.big_r, t, m) +
           m.eta * m.eta * m.sigma0 * m.sigma0 / (Scalar(4) * m.big_r) *
               detail::growth_m1(Scalar(2) * m.big_r, t, m);
}

template <typename Scalar>
Scalar g_value(Scalar t, Scalar x, const BasicModelParams<Scalar>& m) {
    using std::exp;
    return exp(log_g_value(t, x, m));
}

/// H(t) = log V̄(t, x - K) - log g(t, x); independent of x.
template <typename Scalar>
Scalar big_h(Scalar t, const BasicModelParams<Scalar>& m) {
    using std::exp;
    detail::require_time(t, m);
    const Scalar tau = m.big_t - t;
    return m.eta * m.q / m.big_r * detail::growth_m1(m.big_r, t, m) -
           m.q * m.q / (Scalar(2) * m.sigma0 * m.sigma0) * tau -
           m.eta * m.eta * m.sigma0 * m.sigma0 / (Scalar(4) * m.big_r) *
               detail::growth_m1(Scalar(2) * m.big_r, t, m) +
           m.eta * m.k * exp(m.big_r * tau);
}

/// Maximum fixed cost at which reinsurance is ever bought. Does not depend on p or K.
template <typename Scalar>
Scalar k_star(const BasicModelParams<Scalar>& m) {
    using std::exp;
    using std::expm1;
    using std::sinh;
    const Scalar rt = m.big_r * m.big_t;
    return m.q / m.big_r * expm1(-rt) +
           m.q * m.q * m.big_t / (Scalar(2) * m.eta * m.sigma0 * m.sigma0) * exp(-rt) +
           m.eta * m.sigma0 * m.sigma0 / (Scalar(2) * m.big_r) * sinh(rt);
}

/// Which of the three shapes the set {L V̄(t, x - K) < 0} = (t_A, T) x R takes.
enum class TaCase {
    Whole,     ///< y* >= e^{RT}: t_A = 0
    Interior,  ///< 1 < y* < e^{RT}: 0 < t_A < T
    Empty,     ///< y* <= 1: t_A = T
};

template <typename Scalar>
struct TaResult {
    Scalar value;
    Scalar y_star;
    TaCase which;
};

template <typename Scalar>
TaResult<Scalar> t_a(const BasicModelParams<Scalar>& m) {
    using std::exp;
    using std::log;
    using std::sqrt;
    const Scalar b = m.q + m.big_r * m.k;
    const Scalar y = (b + sqrt(b * b - m.q * m.q)) / (m.eta * m.sigma0 * m.sigma0);
    if (y >= exp(m.big_r * m.big_t)) return {Scalar(0), y, TaCase::Whole};
    if (y <= Scalar(1)) return {m.big_t, y, TaCase::Empty};
    Scalar value = m.big_t - log(y) / m.big_r;
    if (value < Scalar(0)) value = Scalar(0);
    if (value > m.big_t) value = m.big_t;
    return {value, y, TaCase::Interior};
}

/// H(0) within this of zero is the boundary regime K = K*, treated as NoReinsurance.
inline constexpr double kBoundaryTolerance = 1e-12;
inline constexpr double kRootAbscissaTolerance = 1e-12;
inline constexpr double kRootResidualTolerance = 1e-10;

/// Subscription deadline: the unique root of H in (0, t_A) when H(0) < 0,
/// absent otherwise. Bisection on the increasing branch of H.
template <typename Scalar>
std::optional<Scalar> t_star(const BasicModelParams<Scalar>& m) {
    using std::abs;
    const Scalar h0 = big_h(Scalar(0), m);
    if (h0 >= -Scalar(kBoundaryTolerance)) return std::nullopt;

    const Scalar upper = t_a(m).value;
    if (!(upper > Scalar(0)) || !(big_h(upper, m) > Scalar(0)))
        throw std::logic_error("t_star: H has no sign change on [0, t_A]; parameters breach validation");

    Scalar lo = 0;
    Scalar hi = upper;
    for (int i = 0; i < 400 && hi - lo > Scalar(kRootAbscissaTolerance); ++i) {
        const Scalar mid = lo + (hi - lo) / Scalar(2);
        if (big_h(mid, m) < Scalar(0))
            lo = mid;
        else
            hi = mid;
    }
    const Scalar root = lo + (hi - lo) / Scalar(2);
    if (abs(big_h(root, m)) > Scalar(kRootResidualTolerance))
        throw std::logic_error("t_star: bisection residual above tolerance");
    return root;
}

class NoThreshold : public std::domain_error {
public:
    explicit NoThreshold(double discriminant)
        : std::domain_error("q_star: negative discriminant " + std::to_string(discriminant)),
          discriminant_(discriminant) {}
    double discriminant() const noexcept { return discriminant_; }

private:
    double discriminant_;
};

template <typename Scalar>
struct QStar {
    Scalar value;
    Scalar discriminant;  ///< b^2 - 4ac of the quadratic in q
};

/// Largest reinsurer net profit rate at which the insurer still subscribes,
/// for fixed cost `k`. Uses eta, sigma0, R, T of `m`; m.q and m.k are ignored.
template <typename Scalar>
QStar<Scalar> q_star(Scalar k, const BasicModelParams<Scalar>& m) {
    using std::exp;
    using std::expm1;
    using std::sqrt;
    if (!(k > Scalar(0))) throw std::domain_error("q_star: cost must be positive");
    const Scalar rt = m.big_r * m.big_t;
    const Scalar s2 = m.sigma0 * m.sigma0;
    const Scalar a = m.big_t / (Scalar(2) * s2);
    const Scalar b = -expm1(rt) * m.eta / m.big_r;
    const Scalar c = m.eta * m.eta * s2 / (Scalar(4) * m.big_r) * expm1(Scalar(2) * rt) -
                     m.eta * k * exp(rt);
    const Scalar disc = b * b - Scalar(4) * a * c;
    if (disc < Scalar(0)) throw NoThreshold(static_cast<double>(disc));
    // smaller root, in the cancellation-free form 2c / (-b + sqrt(disc))
    return {Scalar(2) * c / (-b + sqrt(disc)), disc};
}

enum class Regime {
    NoReinsurance,         ///< K >= K*
    ImmediateBeforeTStar,  ///< K < K*
};

const char* to_string(Regime r) noexcept;

template <typename Scalar>
struct BasicCaseDecision {
    Scalar k_star;
    Regime regime;
    TaResult<Scalar> t_a;
    std::optional<Scalar> t_star;
    std::optional<Scalar> q_star;
};

using CaseDecision = BasicCaseDecision<double>;

template <typename Scalar>
BasicCaseDecision<Scalar> classify(const BasicModelParams<Scalar>& m) {
    BasicCaseDecision<Scalar> d{k_star(m), Regime::NoReinsurance, t_a(m), t_star(m), std::nullopt};
    if (d.t_star) d.regime = Regime::ImmediateBeforeTStar;
    try {
        d.q_star = q_star(m.k, m).value;
    } catch (const NoThreshold&) {
    }
    return d;
}

/// log of the optimal value V(t, x); `decision` must come from classify(m).
template <typename Scalar>
Scalar log_value(Scalar t, Scalar x, const BasicModelParams<Scalar>& m,
                 const BasicCaseDecision<Scalar>& decision) {
    detail::require_time(t, m);
    if (decision.t_star && t <= *decision.t_star) return log_v_bar(t, x - m.k, m);
    return log_g_value(t, x, m);
}

template <typename Scalar>
Scalar log_value(Scalar t, Scalar x, const BasicModelParams<Scalar>& m) {
    return log_value(t, x, m, classify(m));
}

template <typename Scalar>
Scalar value(Scalar t, Scalar x, const BasicModelParams<Scalar>& m,
             const BasicCaseDecision<Scalar>& decision) {
    using std::exp;
    return exp(log_value(t, x, m, decision));
}

template <typename Scalar>
Scalar value(Scalar t, Scalar x, const BasicModelParams<Scalar>& m) {
    return value(t, x, m, classify(m));
}

/// Optimal value tabulated on a (t, x) grid: rows follow `t_grid`, columns `x_grid`.
template <typename Scalar, typename TDerived, typename XDerived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> value_table(
    const Eigen::DenseBase<TDerived>& t_grid, const Eigen::DenseBase<XDerived>& x_grid,
    const BasicModelParams<Scalar>& m) {
    const auto decision = classify(m);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(t_grid.size(), x_grid.size());
    for (Eigen::Index i = 0; i < t_grid.size(); ++i)
        for (Eigen::Index j = 0; j < x_grid.size(); ++j)
            out(i, j) = value(Scalar(t_grid(i)), Scalar(x_grid(j)), m, decision);
    return out;
}

/// Optimal strategy seen from (t, x): subscribe now with retention u* if
/// K < K* and t <= t*, otherwise the null strategy (T, 1).
Strategy decide(double t, double x, const ModelParams& m, const CaseDecision& decision);
Strategy decide(double t, double x, const ModelParams& m);

/// Deterministic u* as a schedule object.
RetentionSchedule optimal_retention(const ModelParams& m);

}  // namespace reins
