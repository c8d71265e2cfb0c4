#include "reins/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reins {

namespace {

// \int_a^b e^{c (T - s)} ds
double exp_integral(double c, double horizon, double a, double b) {
    if (c == 0.0) return b - a;
    // e^{c(T-a)} - e^{c(T-b)} = e^{c(T-b)} (e^{c(b-a)} - 1)
    return std::exp(c * (horizon - b)) * std::expm1(c * (b - a)) / c;
}

}  // namespace

RetentionSchedule::RetentionSchedule(std::vector<Piece> pieces, double horizon)
    : pieces_(std::move(pieces)), horizon_(horizon) {
    if (pieces_.empty()) throw std::invalid_argument("retention schedule needs at least one piece");
    if (!(horizon_ > 0.0)) throw std::invalid_argument("retention schedule horizon must be > 0");
    for (std::size_t i = 1; i < pieces_.size(); ++i)
        if (!(pieces_[i].start > pieces_[i - 1].start))
            throw std::invalid_argument("retention schedule knots must be strictly increasing");
    const auto [lo, hi] = range(pieces_.front().start, horizon_);
    if (lo < 0.0 || hi > 1.0) throw std::invalid_argument("retention values must lie in [0, 1]");
}

RetentionSchedule RetentionSchedule::constant(double u, double horizon) {
    return RetentionSchedule({{0.0, u, 0.0}}, horizon);
}

RetentionSchedule RetentionSchedule::exponential(double coef, double rate, double horizon) {
    return RetentionSchedule({{0.0, coef, rate}}, horizon);
}

RetentionSchedule RetentionSchedule::piecewise_constant(std::vector<std::pair<double, double>> knots,
                                                        double horizon) {
    if (knots.empty() || knots.front().first != 0.0)
        throw std::invalid_argument("piecewise schedule must start at time 0");
    std::vector<Piece> pieces;
    pieces.reserve(knots.size());
    for (const auto& [start, u] : knots) pieces.push_back({start, u, 0.0});
    return RetentionSchedule(std::move(pieces), horizon);
}

std::size_t RetentionSchedule::piece_index(double s) const {
    const auto it = std::upper_bound(pieces_.begin(), pieces_.end(), s,
                                     [](double v, const Piece& p) { return v < p.start; });
    return it == pieces_.begin() ? 0 : static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

double RetentionSchedule::operator()(double s) const {
    const auto& piece = pieces_[piece_index(s)];
    return piece.coef * std::exp(-piece.rate * (horizon_ - s));
}

std::pair<double, double> RetentionSchedule::range(double a, double b) const {
    double lo = (*this)(a);
    double hi = lo;
    for (std::size_t i = piece_index(a); i < pieces_.size(); ++i) {
        const double from = std::max(a, pieces_[i].start);
        const double to = i + 1 < pieces_.size() ? std::min(b, pieces_[i + 1].start) : b;
        if (from > to) break;
        // monotone within a piece, so endpoints suffice
        for (double s : {from, to}) {
            const double v = pieces_[i].coef * std::exp(-pieces_[i].rate * (horizon_ - s));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return {lo, hi};
}

double RetentionSchedule::piece_integral(const Piece& piece, double a, double b, double big_r,
                                         int power) const {
    const double c = power * (big_r - piece.rate);
    return std::pow(piece.coef, power) * exp_integral(c, horizon_, a, b);
}

double RetentionSchedule::discounted_integral(double a, double b, double big_r) const {
    double total = 0.0;
    for (std::size_t i = piece_index(a); i < pieces_.size(); ++i) {
        const double from = std::max(a, pieces_[i].start);
        const double to = i + 1 < pieces_.size() ? std::min(b, pieces_[i + 1].start) : b;
        if (from >= to) continue;
        total += piece_integral(pieces_[i], from, to, big_r, 1);
    }
    return total;
}

double RetentionSchedule::discounted_square_integral(double a, double b, double big_r) const {
    double total = 0.0;
    for (std::size_t i = piece_index(a); i < pieces_.size(); ++i) {
        const double from = std::max(a, pieces_[i].start);
        const double to = i + 1 < pieces_.size() ? std::min(b, pieces_[i + 1].start) : b;
        if (from >= to) continue;
        total += piece_integral(pieces_[i], from, to, big_r, 2);
    }
    return total;
}

}  // namespace reins
