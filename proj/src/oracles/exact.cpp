#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

#include "reins/closed_form.hpp"
#include "reins/oracles.hpp"

namespace reins {

namespace {

// Gauss-Kronrod 7-15 nodes on [-1, 1] (non-negative half) and weights.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7)
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double estimate;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = kKronrod[7] * fc;
    double gauss = kGauss[3] * fc;
    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = half * kNodes[i];
        const double pair = f(centre - dx) + f(centre + dx);
        kronrod += kKronrod[i] * pair;
        if (i % 2 == 1) gauss += kGauss[i / 2] * pair;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

struct GaussianMoments {
    double mean;
    double variance;
};

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tolerance,
                 std::vector<double> breakpoints) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, tolerance, std::move(breakpoints));

    std::vector<double> edges{a};
    std::sort(breakpoints.begin(), breakpoints.end());
    for (double p : breakpoints)
        if (p > edges.back() && p < b) edges.push_back(p);
    edges.push_back(b);

    std::priority_queue<Segment> queue;
    double total = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        auto s = gauss_kronrod(f, edges[i], edges[i + 1]);
        total += s.estimate;
        error += s.error;
        queue.push(s);
    }
    for (int evaluations = 0; error > std::max(tolerance * std::abs(total), 1e-300); ++evaluations) {
        if (evaluations > 5000) throw ConvergenceError("integrate: tolerance not reached");
        const Segment worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) throw ConvergenceError("integrate: interval underflow");
        const auto left = gauss_kronrod(f, worst.a, mid);
        const auto right = gauss_kronrod(f, mid, worst.b);
        total += left.estimate + right.estimate - worst.estimate;
        error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }
    return total;
}

double utility_of_schedule(double t, double x, double stop_time,
                           const std::function<double(double)>& u, const ModelParams& m,
                           std::vector<double> breakpoints) {
    if (!(t >= 0.0 && t <= stop_time && stop_time <= m.big_t))
        throw std::domain_error("utility_of_schedule: need 0 <= t <= stop_time <= T");
    constexpr double tol = 1e-10;
    const double r = m.big_r;
    const double s2 = m.sigma0 * m.sigma0;

    // uncontrolled span [t, stop_time]
    auto pre = [&](double end) {
        GaussianMoments g{x * std::exp(r * (end - t)), 0.0};
        g.mean += integrate([&](double s) { return std::exp(r * (end - s)) * m.p; }, t, end, tol);
        g.variance = integrate([&](double s) { return std::exp(2.0 * r * (end - s)) * s2; }, t, end, tol);
        return g;
    };

    GaussianMoments terminal{};
    if (stop_time >= m.big_t) {
        terminal = pre(m.big_t);
    } else {
        const auto at_stop = pre(stop_time);
        const double carry = std::exp(r * (m.big_t - stop_time));
        const double drift = integrate(
            [&](double s) { return std::exp(r * (m.big_t - s)) * (m.p - m.q + m.q * u(s)); },
            stop_time, m.big_t, tol, breakpoints);
        const double spread = integrate(
            [&](double s) {
                const double us = u(s);
                return std::exp(2.0 * r * (m.big_t - s)) * s2 * us * us;
            },
            stop_time, m.big_t, tol, breakpoints);
        terminal.mean = (at_stop.mean - m.k) * carry + drift;
        terminal.variance = at_stop.variance * carry * carry + spread;
    }
    return std::exp(-m.eta * terminal.mean + 0.5 * m.eta * m.eta * terminal.variance);
}

double utility_of_schedule(double t, double x, const Strategy& s, const ModelParams& m) {
    std::vector<double> knots;
    for (const auto& piece : s.retention.pieces()) knots.push_back(piece.start);
    return utility_of_schedule(
        t, x, std::min(s.stop_time, m.big_t), [&](double v) { return s.retention(v); }, m, knots);
}

double deterministic_stop_value(double t, double x, double s, const ModelParams& m) {
    if (!(t >= 0.0 && t <= s && s <= m.big_t))
        throw std::domain_error("deterministic_stop_value: need 0 <= t <= s <= T");
    if (s == t && s < m.big_t) return v_bar(t, x - m.k, m);

    const double grow_m1 = std::expm1(m.big_r * (s - t));
    const double mean = x * (1.0 + grow_m1) + m.p / m.big_r * grow_m1;
    const double var = m.sigma0 * m.sigma0 * std::expm1(2.0 * m.big_r * (s - t)) / (2.0 * m.big_r);
    if (s >= m.big_t) return std::exp(-m.eta * mean + 0.5 * m.eta * m.eta * var);

    // V̄(s, y - K) = exp(level + w K - w y) with y ~ N(mean, var)
    const double w = wealth_weight(s, m);
    const double level = log_v_bar(s, 0.0, m);
    return std::exp(level + w * m.k - w * mean + 0.5 * w * w * var);
}

DeterministicStopSearch best_deterministic_stop(double t, double x, const ModelParams& m,
                                                std::size_t n) {
    if (n < 2) throw std::invalid_argument("best_deterministic_stop: need at least 2 points");
    DeterministicStopSearch best{t, deterministic_stop_value(t, x, t, m), 0};
    for (std::size_t i = 1; i < n; ++i) {
        const double s =
            i + 1 == n ? m.big_t : t + (m.big_t - t) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double v = deterministic_stop_value(t, x, s, m);
        if (v < best.best_value) best = {s, v, i};
    }
    return best;
}

}  // namespace reins
