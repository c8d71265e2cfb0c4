#include <algorithm>
#include <cmath>

#include "reins/closed_form.hpp"
#include "reins/oracles.hpp"

namespace reins {

namespace {

// Largest admissible variance ratio var / dx^2 of one lattice step; keeps
// the middle branch weight 1 - s - d^2 >= 1/4.
constexpr double kMaxVarianceRatio = 0.5;
constexpr double kMaxClippedMass = 1e-6;

struct Branch {
    Eigen::Index centre;
    double down;
    double mid;
    double up;
};

}  // namespace

LatticeResult stopping_lattice(const ModelParams& m, const GridSpec& grid) {
    if (grid.n_t < 100 || grid.n_x < 200)
        throw GridError("lattice: grid too coarse (need n_t >= 100, n_x >= 200)");
    if (grid.x_lo > -5.0 || grid.x_hi < 5.0)
        throw GridError("lattice: x-domain must contain [-5, 5]");

    const auto n_nodes = static_cast<Eigen::Index>(grid.n_x) + 1;
    const double dx = (grid.x_hi - grid.x_lo) / static_cast<double>(grid.n_x);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n_nodes, grid.x_lo, grid.x_hi);
    const double out_dt = m.big_t / static_cast<double>(grid.n_t);

    auto step_variance = [&](double dt) {
        return m.sigma0 * m.sigma0 * std::expm1(2.0 * m.big_r * dt) / (2.0 * m.big_r);
    };

    // refine the time step until one step's spread fits the space grid
    std::size_t substeps = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(step_variance(out_dt) / (dx * dx) / kMaxVarianceRatio)));
    while (step_variance(out_dt / static_cast<double>(substeps)) / (dx * dx) > kMaxVarianceRatio)
        ++substeps;
    const double dt = out_dt / static_cast<double>(substeps);
    const double ratio = step_variance(dt) / (dx * dx);

    // one-step moments of the exact Gaussian transition
    const double grow_m1 = std::expm1(m.big_r * dt);
    std::vector<Branch> branches(static_cast<std::size_t>(n_nodes));
    for (Eigen::Index j = 0; j < n_nodes; ++j) {
        const double mean = x(j) * (1.0 + grow_m1) + m.p / m.big_r * grow_m1;
        const auto centre = static_cast<Eigen::Index>(std::llround((mean - grid.x_lo) / dx));
        const double d = (mean - (grid.x_lo + static_cast<double>(centre) * dx)) / dx;
        double down = 0.5 * (ratio + d * d - d);
        double mid = 1.0 - ratio - d * d;
        double up = 0.5 * (ratio + d * d + d);
        const double clipped = std::max(0.0, -down) + std::max(0.0, -mid) + std::max(0.0, -up);
        if (clipped > kMaxClippedMass)
            throw GridError("lattice: time step too fine for the space grid (negative branch weight)");
        if (clipped > 0.0) {
            down = std::max(0.0, down);
            mid = std::max(0.0, mid);
            up = std::max(0.0, up);
            const double total = down + mid + up;
            down /= total;
            mid /= total;
            up /= total;
        }
        branches[static_cast<std::size_t>(j)] = {centre, down, mid, up};
    }

    const auto interior = interior_columns(x);
    const auto n_out = static_cast<Eigen::Index>(grid.n_t);

    LatticeResult result;
    result.substeps = substeps;
    result.lattice_dt = dt;
    result.purely_temporal = true;
    auto& surface = result.surface;
    surface.t_grid = Eigen::VectorXd::LinSpaced(n_out + 1, 0.0, m.big_t);
    surface.x_grid = x;
    surface.values.resize(n_out + 1, n_nodes);
    Eigen::MatrixXd flags = Eigen::MatrixXd::Zero(n_out + 1, n_nodes);

    Eigen::VectorXd w = (-m.eta * x.array()).exp().matrix();
    surface.values.row(n_out) = w.transpose();

    Eigen::VectorXd next(n_nodes);
    Eigen::VectorXd reward(n_nodes);
    const std::size_t total_steps = substeps * grid.n_t;
    for (std::size_t step = total_steps; step-- > 0;) {
        const double t = static_cast<double>(step) * dt;
        const double t_next = static_cast<double>(step + 1) * dt;
        // off-grid values follow the exponential x-profile of the value at t_next
        const double slope = wealth_weight(std::min(t_next, m.big_t), m);
        auto at = [&](Eigen::Index k) {
            if (k < 0) return w(0) * std::exp(slope * dx * static_cast<double>(-k));
            if (k >= n_nodes)
                return w(n_nodes - 1) * std::exp(-slope * dx * static_cast<double>(k - n_nodes + 1));
            return w(k);
        };
        for (Eigen::Index j = 0; j < n_nodes; ++j) {
            const auto& b = branches[static_cast<std::size_t>(j)];
            next(j) = b.down * at(b.centre - 1) + b.mid * at(b.centre) + b.up * at(b.centre + 1);
        }

        // stopping reward V̄(t, x - K) is exponential-affine in x
        const double level = log_v_bar(t, 0.0, m);
        const double wt = wealth_weight(t, m);
        reward = (level - wt * (x.array() - m.k)).exp().matrix();

        bool any_stop = false;
        bool any_continue = false;
        const bool output_row = step % substeps == 0;
        const auto row = static_cast<Eigen::Index>(step / substeps);
        for (Eigen::Index j = 0; j < n_nodes; ++j) {
            const bool stop = reward(j) <= next(j);
            w(j) = stop ? reward(j) : next(j);
            if (interior[static_cast<std::size_t>(j)]) {
                any_stop = any_stop || stop;
                any_continue = any_continue || !stop;
            }
            if (output_row) flags(row, j) = stop ? 1.0 : 0.0;
        }
        if (any_stop && any_continue) {
            result.purely_temporal = false;
            if (!result.mixed_to) result.mixed_to = t;
            result.mixed_from = t;
        }
        if (any_stop && !result.last_stop_time) result.last_stop_time = t;
        if (any_continue) result.first_continue_time = t;
        if (output_row) surface.values.row(row) = w.transpose();
    }
    surface.policy = std::move(flags);
    return result;
}

}  // namespace reins
