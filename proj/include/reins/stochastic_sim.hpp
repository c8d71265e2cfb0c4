#pragma once

// Monte Carlo simulation of the insurer's wealth under the diffusion model,
// with or without a subscription strategy, and of the underlying
// compound-Poisson aggregate claims.
//
// Paths are generated in fixed blocks of kBlockSize; block b draws from the
// sub-stream derive_seed(seed, b). Output therefore depends only on
// (seed, config, params, strategy), never on the thread count.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "reins/market_model.hpp"
#include "reins/strategy.hpp"

namespace reins {

enum class Scheme { ExactGaussian, EulerMaruyama };

struct PathConfig {
    std::size_t n_paths = 100000;
    std::size_t n_steps = 1000;  ///< used by EulerMaruyama only
    std::uint64_t seed = 20240611;
    Scheme scheme = Scheme::ExactGaussian;
    /// Paths 2i and 2i+1 use negated normal draws; requires even n_paths.
    bool antithetic = false;
    unsigned threads = 0;  ///< 0: hardware concurrency
};

inline constexpr std::size_t kBlockSize = 8192;

struct McEstimate {
    double mean;
    double std_error;
    double ci95_low;
    double ci95_high;
    std::size_t n_paths;
    std::uint64_t seed;
};

/// Terminal wealth X_T^{t,x} with no reinsurance.
Eigen::VectorXd simulate_uncontrolled(double t, double x, const ModelParams& m,
                                      const PathConfig& config);

/// Terminal wealth under a strategy: uncontrolled until stop_time, pay K
/// once at stop_time (if < T), then retain according to the schedule.
Eigen::VectorXd simulate_strategy(double t, double x, const Strategy& s, const ModelParams& m,
                                  const PathConfig& config);

/// Euler-Maruyama terminal wealth without reinsurance at several resolutions
/// driven by the same Brownian paths. Each level must divide the largest one;
/// column j holds the samples for levels[j].
Eigen::MatrixXd simulate_uncontrolled_euler_coupled(double t, double x, const ModelParams& m,
                                                    std::span<const std::size_t> levels,
                                                    std::size_t n_paths, std::uint64_t seed);

/// Sample mean of exp(-eta X_T) with its standard error. With `antithetic`,
/// consecutive pairs are averaged first and the error is taken over pairs.
McEstimate mc_exp_utility(const Eigen::VectorXd& terminal_wealth, double eta,
                          std::uint64_t seed = 0, bool antithetic = false);

/// Aggregate claims sum_{n <= N_t} Z_n of the compound Poisson model over
/// [0, horizon]. Exponential claims require mu2 = 2 mu^2; lognormal claims
/// are fitted to (mu, mu2).
Eigen::VectorXd simulate_cramer_lundberg(double horizon, const ActuarialParams& a,
                                         const PathConfig& config);

struct KsResult {
    double statistic;
    double p_value;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One sample per line, full precision.
void write_samples(std::ostream& os, const Eigen::VectorXd& samples);

}  // namespace reins
