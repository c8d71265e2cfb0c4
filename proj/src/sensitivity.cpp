#include "reins/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace reins {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative distance kept from an open feasibility bound.
constexpr double kBoundaryNudge = 1e-6;

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

}  // namespace

std::string to_string(SweepParam p) {
    switch (p) {
        case SweepParam::Q: return "q";
        case SweepParam::Eta: return "eta";
        case SweepParam::Sigma0: return "sigma0";
        case SweepParam::BigT: return "big_t";
        case SweepParam::K: return "k";
    }
    return "?";
}

SweepParam parse_sweep_param(const std::string& name) {
    for (auto p : {SweepParam::Q, SweepParam::Eta, SweepParam::Sigma0, SweepParam::BigT, SweepParam::K})
        if (to_string(p) == name) return p;
    throw SweepError("unknown sweep parameter `" + name + "` (expected q, eta, sigma0, big_t or k)");
}

ModelParams with_param(const ModelParams& base, SweepParam param, double value) {
    ModelParams m = base;
    switch (param) {
        case SweepParam::Q: m.q = value; break;
        case SweepParam::Eta: m.eta = value; break;
        case SweepParam::Sigma0: m.sigma0 = value; break;
        case SweepParam::BigT: m.big_t = value; break;
        case SweepParam::K: m.k = value; break;
    }
    return m;
}

std::pair<double, double> feasible_interval(const ModelParams& base, SweepParam param) {
    switch (param) {
        case SweepParam::Q: return {base.p, base.eta * base.sigma0 * base.sigma0};
        case SweepParam::Eta: return {base.q / (base.sigma0 * base.sigma0), kInf};
        case SweepParam::Sigma0: return {std::sqrt(base.q / base.eta), kInf};
        case SweepParam::BigT: return {0.0, kInf};
        case SweepParam::K: return {0.0, kInf};
    }
    return {0.0, kInf};
}

SweepRecord evaluate_row(SweepParam param, double value, const ModelParams& base) {
    const ModelParams m = validate(with_param(base, param, value));
    const auto d = classify(m);
    return {param, value, d.k_star, d.t_star, d.q_star, d.regime};
}

SweepResult sweep(SweepParam param, double lo, double hi, std::size_t n, const ModelParams& base,
                  const SweepOptions& options) {
    if (n < 2) throw SweepError("sweep needs at least 2 points");
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
        throw SweepError("sweep range must satisfy lo < hi");

    SweepResult result{{}, {}, lo, hi};
    const auto [f_lo, f_hi] = feasible_interval(base, param);
    if (hi <= f_lo || lo >= f_hi)
        throw SweepError("sweep range [" + fmt(lo) + ", " + fmt(hi) + "] for " + to_string(param) +
                         " lies outside the feasible interval (" + fmt(f_lo) + ", " + fmt(f_hi) + ")");
    if (lo <= f_lo) {
        result.lo = f_lo + kBoundaryNudge * std::max(std::abs(f_lo), 1e-6);
        result.warnings.push_back("truncated " + to_string(param) + " range lower end " + fmt(lo) +
                                  " -> " + fmt(result.lo) + " (feasibility bound " + fmt(f_lo) + ")");
    }
    if (hi >= f_hi) {
        result.hi = f_hi - kBoundaryNudge * std::max(std::abs(f_hi), 1e-6);
        result.warnings.push_back("truncated " + to_string(param) + " range upper end " + fmt(hi) +
                                  " -> " + fmt(result.hi) + " (feasibility bound " + fmt(f_hi) + ")");
    }
    if (options.log_spacing && !(result.lo > 0.0))
        throw SweepError("log spacing needs a positive range");

    for (std::size_t i = 0; i < n; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
        double v = options.log_spacing
                       ? std::exp(std::log(result.lo) + frac * (std::log(result.hi) - std::log(result.lo)))
                       : result.lo + frac * (result.hi - result.lo);
        if (i + 1 == n) v = result.hi;
        try {
            result.records.push_back(evaluate_row(param, v, base));
        } catch (const ValidationError& e) {
            result.warnings.push_back("skipped " + to_string(param) + " = " + fmt(v) + ": " +
                                      e.violations().front().name);
        }
    }
    if (result.records.empty()) throw SweepError("no admissible point in the sweep range");
    return result;
}

std::string MonotonicityVerdict::describe() const {
    switch (trend) {
        case Trend::StrictlyIncreasing: return "strictly increasing";
        case Trend::StrictlyDecreasing: return "strictly decreasing";
        case Trend::Violation: return "violation at index " + std::to_string(*violation_index);
    }
    return "?";
}

MonotonicityVerdict monotonicity_report(const std::vector<double>& v) {
    if (v.size() < 3) throw std::invalid_argument("monotonicity_report needs at least 3 values");
    if (v[1] == v[0]) return {Trend::Violation, 1};
    const bool increasing = v[1] > v[0];
    for (std::size_t i = 2; i < v.size(); ++i) {
        const bool ok = increasing ? v[i] > v[i - 1] : v[i] < v[i - 1];
        if (!ok) return {Trend::Violation, i};
    }
    return {increasing ? Trend::StrictlyIncreasing : Trend::StrictlyDecreasing, std::nullopt};
}

MonotonicityVerdict monotonicity_report(const std::vector<SweepRecord>& records) {
    std::vector<double> k;
    k.reserve(records.size());
    for (const auto& r : records) k.push_back(r.k_star);
    return monotonicity_report(k);
}

void write_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "param,value,k_star,t_star,q_star,regime\n";
    for (const auto& r : records) {
        os << to_string(r.param) << ',' << r.value << ',' << r.k_star << ',';
        if (r.t_star) os << *r.t_star;
        os << ',';
        if (r.q_star) os << *r.q_star;
        os << ',' << to_string(r.regime) << '\n';
    }
}

void write_svg(std::ostream& os, const std::vector<SweepRecord>& records) {
    constexpr double width = 640;
    constexpr double height = 420;
    constexpr double left = 70;
    constexpr double right = 20;
    constexpr double top = 40;
    constexpr double bottom = 50;
    if (records.empty()) throw std::invalid_argument("write_svg: no records");

    double x0 = records.front().value;
    double x1 = records.back().value;
    double y0 = records.front().k_star;
    double y1 = y0;
    for (const auto& r : records) {
        y0 = std::min(y0, r.k_star);
        y1 = std::max(y1, r.k_star);
    }
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;
    auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * (width - left - right); };
    auto py = [&](double v) { return height - bottom - (v - y0) / (y1 - y0) * (height - top - bottom); };

    const auto name = records.front().param == SweepParam::BigT ? std::string("T")
                                                                 : to_string(records.front().param);
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
       << " font-size=\"16\">K* vs " << name << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
       << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
       << height - bottom << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0;
        const double yv = y0 + (y1 - y0) * i / 4.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << height - bottom + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xv
           << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << yv
           << "</text>\n";
    }
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << name
       << "</text>\n";
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& r : records) os << px(r.value) << ',' << py(r.k_star) << ' ';
    os << "\"/>\n</svg>\n";
}

std::vector<PanelSpec> default_panels() {
    return {{SweepParam::Q, 0.02, 0.12},
            {SweepParam::Eta, 0.1, 2.0},
            {SweepParam::Sigma0, 0.3, 1.0},
            {SweepParam::BigT, 1.0, 20.0}};
}

}  // namespace reins
