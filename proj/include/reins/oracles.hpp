#pragma once

// Independent numerical solvers used to corroborate the closed forms:
//   - a finite-difference solver for the pure reinsurance HJB equation,
//   - a backward-induction trinomial lattice for the optimal stopping problem,
//   - exact (quadrature-based) utilities of deterministic strategies.
//
// The HJB solver sees only the PDE coefficients. The lattice uses V̄ as the
// stopping reward, which is how the stopping problem is posed.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "reins/market_model.hpp"
#include "reins/strategy.hpp"

namespace reins {

/// Gridded value function; rows follow t_grid, columns x_grid.
struct ValueSurface {
    Eigen::VectorXd t_grid;
    Eigen::VectorXd x_grid;
    Eigen::MatrixXd values;
    /// Retention levels (HJB) or stop flags 1/0 (lattice).
    std::optional<Eigen::MatrixXd> policy;
};

/// Header `t,x,value[,policy]`, row-major by t then x, full precision.
void write_csv(std::ostream& os, const ValueSurface& surface);

class GridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// n_t time steps over [0, T]; n_x space intervals over [x_lo, x_hi].
struct GridSpec {
    std::size_t n_t = 400;
    std::size_t n_x = 800;
    double x_lo = -5.0;
    double x_hi = 10.0;
};

/// Column mask of the central `fraction` of the x-domain.
std::vector<bool> interior_columns(const Eigen::VectorXd& x_grid, double fraction = 0.8);

enum class TimeScheme { CrankNicolson, BackwardEuler };

struct HjbOptions {
    TimeScheme scheme = TimeScheme::CrankNicolson;
    std::size_t n_controls = 101;
    int max_policy_iterations = 50;
    double policy_tolerance = 1e-13;
};

/// Solves min_{u in [0,1]} L^u V = 0 backward from V(T, x) = e^{-eta x}.
/// Policy iteration per time step, pointwise Hamiltonian minimisation over
/// a uniform control grid refined by a parabolic fit. Boundary rows impose
/// the exponential x-profile V(x +- dx) = V(x) e^{-+ eta e^{R(T-t)} dx}.
/// Does not require q < eta sigma0^2.
ValueSurface hjb_pure_reinsurance(const ModelParams& m, const GridSpec& grid,
                                  const HjbOptions& options = {});

struct LatticeResult {
    ValueSurface surface;         ///< values and stop flags on the output grid
    std::size_t substeps;         ///< lattice steps per output time step
    double lattice_dt;            ///< lattice time step
    std::optional<double> last_stop_time;        ///< latest lattice time with a stop
    std::optional<double> first_continue_time;   ///< earliest lattice time with continuation
    bool purely_temporal;  ///< every time slice is all-stop or all-continue (interior nodes)
    /// Earliest and latest lattice times whose slice mixes stop and continue.
    std::optional<double> mixed_from;
    std::optional<double> mixed_to;
};

/// Backward induction W = min(V̄(t, x - K), E[W(t + dt, X_{t+dt})]) with
/// trinomial transitions matching the exact one-step Gaussian mean and
/// variance; W(T, x) = e^{-eta x}. Ties stop.
LatticeResult stopping_lattice(const ModelParams& m, const GridSpec& grid);

/// Adaptive Gauss-Kronrod (7, 15) integration; `breakpoints` inside (a, b)
/// are honoured as interval boundaries.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tolerance = 1e-10, std::vector<double> breakpoints = {});

/// Exact E[exp(-eta X_T)] from (t, x) for the deterministic strategy that
/// subscribes at stop_time (stop_time = T: never) with retention `u`.
/// Gaussian terminal law; every integral is computed by quadrature.
double utility_of_schedule(double t, double x, double stop_time,
                           const std::function<double(double)>& u, const ModelParams& m,
                           std::vector<double> breakpoints = {});
double utility_of_schedule(double t, double x, const Strategy& s, const ModelParams& m);

/// E[V̄(s, X_s^{t,x} - K)] for s < T and E[exp(-eta X_T^{t,x})] for s = T.
double deterministic_stop_value(double t, double x, double s, const ModelParams& m);

struct DeterministicStopSearch {
    double best_time;
    double best_value;
    std::size_t best_index;
};

/// Minimises deterministic_stop_value over n equally spaced s in [t, T].
/// Ties resolve to the earliest time.
DeterministicStopSearch best_deterministic_stop(double t, double x, const ModelParams& m,
                                                std::size_t n = 400);

}  // namespace reins
