#include <algorithm>
#include <cmath>
#include <string>

#include "reins/oracles.hpp"

namespace reins {

namespace {

// Tridiagonal system lower(i) x(i-1) + diag(i) x(i) + upper(i) x(i+1) = rhs(i).
Eigen::VectorXd solve_tridiagonal(const Eigen::VectorXd& lower, Eigen::VectorXd diag,
                                  const Eigen::VectorXd& upper, Eigen::VectorXd rhs) {
    const Eigen::Index n = diag.size();
    for (Eigen::Index i = 1; i < n; ++i) {
        const double w = lower(i) / diag(i - 1);
        diag(i) -= w * upper(i - 1);
        rhs(i) -= w * rhs(i - 1);
    }
    Eigen::VectorXd x(n);
    x(n - 1) = rhs(n - 1) / diag(n - 1);
    for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = (rhs(i) - upper(i) * x(i + 1)) / diag(i);
    return x;
}

struct Stencil {
    Eigen::VectorXd lower;
    Eigen::VectorXd diag;
    Eigen::VectorXd upper;
};

class HjbSolver {
public:
    HjbSolver(const ModelParams& m, const GridSpec& grid, const HjbOptions& options)
        : m_(m), options_(options), n_nodes_(static_cast<Eigen::Index>(grid.n_x) + 1) {
        x_ = Eigen::VectorXd::LinSpaced(n_nodes_, grid.x_lo, grid.x_hi);
        dx_ = (grid.x_hi - grid.x_lo) / static_cast<double>(grid.n_x);
        controls_ = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(options.n_controls), 0.0, 1.0);
    }

    const Eigen::VectorXd& x() const { return x_; }

    // Pointwise minimiser of q u V_x + sigma0^2 u^2 V_xx / 2 at interior nodes.
    Eigen::VectorXd optimal_policy(const Eigen::VectorXd& v) const {
        Eigen::VectorXd u = Eigen::VectorXd::Ones(n_nodes_);
        const double du = controls_(1) - controls_(0);
        const Eigen::Index nc = controls_.size();
        for (Eigen::Index j = 1; j + 1 < n_nodes_; ++j) {
            const double vx = (v(j + 1) - v(j - 1)) / (2.0 * dx_);
            const double vxx = (v(j + 1) - 2.0 * v(j) + v(j - 1)) / (dx_ * dx_);
            auto hamiltonian = [&](double c) {
                return m_.q * c * vx + 0.5 * m_.sigma0 * m_.sigma0 * c * c * vxx;
            };
            Eigen::Index best = 0;
            double best_h = hamiltonian(controls_(0));
            for (Eigen::Index k = 1; k < nc; ++k) {
                const double h = hamiltonian(controls_(k));
                if (h < best_h) {
                    best_h = h;
                    best = k;
                }
            }
            double choice = controls_(best);
            if (best > 0 && best + 1 < nc) {
                const double fm = hamiltonian(controls_(best - 1));
                const double fp = hamiltonian(controls_(best + 1));
                const double curvature = fp - 2.0 * best_h + fm;
                if (curvature > 0.0) {
                    choice -= du * (fp - fm) / (2.0 * curvature);
                    choice = std::clamp(choice, controls_(best - 1), controls_(best + 1));
                }
            }
            u(j) = choice;
        }
        u(0) = u(1);
        u(n_nodes_ - 1) = u(n_nodes_ - 2);
        return u;
    }

    // Discrete L^u without the time derivative; boundary rows left empty.
    Stencil generator(const Eigen::VectorXd& u) const {
        Stencil s{Eigen::VectorXd::Zero(n_nodes_), Eigen::VectorXd::Zero(n_nodes_),
                  Eigen::VectorXd::Zero(n_nodes_)};
        const double h2 = dx_ * dx_;
        for (Eigen::Index j = 1; j + 1 < n_nodes_; ++j) {
            const double a = 0.5 * m_.sigma0 * m_.sigma0 * u(j) * u(j);
            const double b = m_.big_r * x_(j) + m_.p - m_.q + m_.q * u(j);
            double lo = a / h2 - b / (2.0 * dx_);
            double up = a / h2 + b / (2.0 * dx_);
            if (lo < 0.0 || up < 0.0) {
                // upwind where central differencing loses monotonicity
                lo = a / h2 + std::max(-b, 0.0) / dx_;
                up = a / h2 + std::max(b, 0.0) / dx_;
            }
            s.lower(j) = lo;
            s.upper(j) = up;
            s.diag(j) = -(lo + up);
        }
        return s;
    }

    Eigen::VectorXd apply(const Stencil& s, const Eigen::VectorXd& v) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(n_nodes_);
        for (Eigen::Index j = 1; j + 1 < n_nodes_; ++j)
            out(j) = s.lower(j) * v(j - 1) + s.diag(j) * v(j) + s.upper(j) * v(j + 1);
        return out;
    }

    // One backward step from `next` (time t + dt) to time t.
    Eigen::VectorXd step(const Eigen::VectorXd& next, const Eigen::VectorXd& next_policy, double t,
                         double dt, Eigen::VectorXd& policy) const {
        const double theta = options_.scheme == TimeScheme::CrankNicolson ? 0.5 : 1.0;
        Eigen::VectorXd rhs = next;
        if (theta < 1.0) rhs += (1.0 - theta) * dt * apply(generator(next_policy), next);

        const double slope = m_.eta * std::exp(m_.big_r * (m_.big_t - t));
        rhs(0) = 0.0;
        rhs(n_nodes_ - 1) = 0.0;

        Eigen::VectorXd guess = next;
        for (int it = 0; it < options_.max_policy_iterations; ++it) {
            const Eigen::VectorXd u = optimal_policy(guess);
            const Stencil s = generator(u);
            Eigen::VectorXd lower = -theta * dt * s.lower;
            Eigen::VectorXd diag = Eigen::VectorXd::Ones(n_nodes_) - theta * dt * s.diag;
            Eigen::VectorXd upper = -theta * dt * s.upper;
            // V_0 = V_1 e^{slope dx}, V_N = V_{N-1} e^{-slope dx}
            diag(0) = 1.0;
            upper(0) = -std::exp(slope * dx_);
            diag(n_nodes_ - 1) = 1.0;
            lower(n_nodes_ - 1) = -std::exp(-slope * dx_);

            Eigen::VectorXd solved = solve_tridiagonal(lower, diag, upper, rhs);
            const double change = ((solved - guess).array().abs() / solved.array().abs()).maxCoeff();
            const double policy_change = (u - policy).cwiseAbs().maxCoeff();
            guess = std::move(solved);
            policy = u;
            if (it > 0 && (change < options_.policy_tolerance || policy_change == 0.0)) return guess;
        }
        throw ConvergenceError("hjb: policy iteration did not converge at t = " + std::to_string(t));
    }

private:
    ModelParams m_;
    HjbOptions options_;
    Eigen::Index n_nodes_;
    Eigen::VectorXd x_;
    Eigen::VectorXd controls_;
    double dx_;
};

}  // namespace

ValueSurface hjb_pure_reinsurance(const ModelParams& m, const GridSpec& grid,
                                  const HjbOptions& options) {
    if (grid.n_t < 100 || grid.n_x < 200)
        throw GridError("hjb: grid too coarse (need n_t >= 100, n_x >= 200)");
    if (grid.x_lo > -5.0 || grid.x_hi < 5.0)
        throw GridError("hjb: x-domain must contain [-5, 5]");
    if (options.n_controls < 3) throw GridError("hjb: need at least 3 candidate retentions");

    HjbSolver solver(m, grid, options);
    const auto n_t = static_cast<Eigen::Index>(grid.n_t);
    const double dt = m.big_t / static_cast<double>(grid.n_t);

    ValueSurface out;
    out.t_grid = Eigen::VectorXd::LinSpaced(n_t + 1, 0.0, m.big_t);
    out.x_grid = solver.x();
    out.values.resize(n_t + 1, out.x_grid.size());
    Eigen::MatrixXd policy(n_t + 1, out.x_grid.size());

    Eigen::VectorXd v = (-m.eta * out.x_grid.array()).exp().matrix();
    Eigen::VectorXd u = solver.optimal_policy(v);
    out.values.row(n_t) = v.transpose();
    policy.row(n_t) = u.transpose();

    for (Eigen::Index n = n_t - 1; n >= 0; --n) {
        const double t = out.t_grid(n);
        Eigen::VectorXd next_policy = u;
        v = solver.step(v, next_policy, t, dt, u);
        out.values.row(n) = v.transpose();
        policy.row(n) = u.transpose();
    }
    out.policy = std::move(policy);
    return out;
}

}  // namespace reins
