#pragma once

#include <utility>
#include <vector>

namespace reins {

/// Deterministic retention schedule on [start, T], piecewise of the form
/// u(s) = coef * exp(-rate * (T - s)). Constant pieces have rate 0; the
/// optimal retention is a single piece with coef q/(eta sigma0^2), rate R.
class RetentionSchedule {
public:
    struct Piece {
        double start;
        double coef;
        double rate;
    };

    RetentionSchedule() = default;

    static RetentionSchedule constant(double u, double horizon);
    static RetentionSchedule exponential(double coef, double rate, double horizon);
    /// `knots` are (start time, retention) pairs; the first must start at 0.
    static RetentionSchedule piecewise_constant(std::vector<std::pair<double, double>> knots,
                                                double horizon);

    double operator()(double s) const;

    /// Exact \int_a^b e^{R(T-s)} u(s) ds.
    double discounted_integral(double a, double b, double big_r) const;
    /// Exact \int_a^b e^{2R(T-s)} u(s)^2 ds.
    double discounted_square_integral(double a, double b, double big_r) const;

    double horizon() const noexcept { return horizon_; }
    const std::vector<Piece>& pieces() const noexcept { return pieces_; }

    /// Smallest and largest value over [a, b].
    std::pair<double, double> range(double a, double b) const;

private:
    RetentionSchedule(std::vector<Piece> pieces, double horizon);

    // \int_a^b c^power e^{power (R - rate)(T - s)} ds over one piece
    double piece_integral(const Piece& piece, double a, double b, double big_r, int power) const;
    std::size_t piece_index(double s) const;

    std::vector<Piece> pieces_;
    double horizon_ = 0.0;
};

/// Subscribe at `stop_time` (paying K once) and retain according to
/// `retention` afterwards. stop_time == T encodes the null strategy (T, 1).
struct Strategy {
    double stop_time;
    RetentionSchedule retention;

    bool is_null(double horizon) const noexcept { return stop_time >= horizon; }

    static Strategy null_strategy(double horizon) {
        return {horizon, RetentionSchedule::constant(1.0, horizon)};
    }
};

}  // namespace reins
