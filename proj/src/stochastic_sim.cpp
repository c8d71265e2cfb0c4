#include "reins/stochastic_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "reins/rng.hpp"

namespace reins {

namespace {

void check_config(const PathConfig& c) {
    if (c.n_paths < 1) throw std::invalid_argument("PathConfig: n_paths must be >= 1");
    if (c.n_steps < 1) throw std::invalid_argument("PathConfig: n_steps must be >= 1");
    if (c.antithetic && c.n_paths % 2 != 0)
        throw std::invalid_argument("PathConfig: antithetic sampling needs an even n_paths");
}

unsigned worker_count(unsigned requested, std::size_t n_blocks) {
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::size_t>(n, n_blocks));
}

// Runs body(stream, first, last) for every block of kBlockSize paths.
template <typename Body>
void for_each_block(std::size_t n_paths, std::uint64_t seed, unsigned threads, Body body) {
    const std::size_t n_blocks = (n_paths + kBlockSize - 1) / kBlockSize;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t b = next++; b < n_blocks; b = next++) {
            NormalStream stream(derive_seed(seed, b));
            body(stream, b * kBlockSize, std::min(n_paths, (b + 1) * kBlockSize));
        }
    };
    const unsigned n_workers = worker_count(threads, n_blocks);
    if (n_workers <= 1) {
        work();
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(work);
}

// Each path consumes `n_normals` draws; with antithetic sampling the odd
// path of every pair reuses its partner's draws negated.
template <typename PathFn>
Eigen::VectorXd simulate_paths(const PathConfig& c, std::size_t n_normals, PathFn path) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(c.n_paths));
    for_each_block(c.n_paths, c.seed, c.threads,
                   [&](NormalStream& stream, std::size_t first, std::size_t last) {
                       std::vector<double> z(n_normals);
                       for (std::size_t i = first; i < last; ++i) {
                           if (c.antithetic && (i - first) % 2 == 1) {
                               for (auto& v : z) v = -v;
                           } else {
                               for (auto& v : z) v = stream.normal();
                           }
                           out(static_cast<Eigen::Index>(i)) = path(std::span<const double>(z));
                       }
                   });
    return out;
}

struct GaussianLaw {
    double mean;
    double sd;
};

// Law of X_s given X_t = x without reinsurance.
GaussianLaw uncontrolled_law(double t, double s, double x, const ModelParams& m) {
    const double dt = s - t;
    const double grow_m1 = std::expm1(m.big_r * dt);
    const double var = m.sigma0 * m.sigma0 * std::expm1(2.0 * m.big_r * dt) / (2.0 * m.big_r);
    return {x * (1.0 + grow_m1) + m.p / m.big_r * grow_m1, std::sqrt(var)};
}

void check_start(double t, const ModelParams& m) {
    if (!(t >= 0.0 && t < m.big_t)) throw std::domain_error("simulation start must lie in [0, T)");
}

}  // namespace

Eigen::VectorXd simulate_uncontrolled(double t, double x, const ModelParams& m,
                                      const PathConfig& c) {
    check_config(c);
    check_start(t, m);
    if (c.scheme == Scheme::ExactGaussian) {
        const auto law = uncontrolled_law(t, m.big_t, x, m);
        return simulate_paths(c, 1, [&](std::span<const double> z) { return law.mean + law.sd * z[0]; });
    }
    const double dt = (m.big_t - t) / static_cast<double>(c.n_steps);
    const double sq = m.sigma0 * std::sqrt(dt);
    return simulate_paths(c, c.n_steps, [&](std::span<const double> z) {
        double w = x;
        for (double zi : z) w += (m.big_r * w + m.p) * dt + sq * zi;
        return w;
    });
}

Eigen::VectorXd simulate_strategy(double t, double x, const Strategy& s, const ModelParams& m,
                                  const PathConfig& c) {
    check_config(c);
    check_start(t, m);
    if (!(s.stop_time >= t && s.stop_time <= m.big_t))
        throw std::domain_error("strategy stop time must lie in [t, T]");
    if (s.is_null(m.big_t)) return simulate_uncontrolled(t, x, m, c);

    const auto& u = s.retention;
    if (c.scheme == Scheme::ExactGaussian) {
        const double stop = s.stop_time;
        const auto before = uncontrolled_law(t, stop, x, m);
        const double tau = m.big_t - stop;
        const double grow = std::exp(m.big_r * tau);
        const double drift = (m.p - m.q) * std::expm1(m.big_r * tau) / m.big_r +
                             m.q * u.discounted_integral(stop, m.big_t, m.big_r);
        const double sd_after =
            m.sigma0 * std::sqrt(u.discounted_square_integral(stop, m.big_t, m.big_r));
        return simulate_paths(c, 2, [&](std::span<const double> z) {
            const double at_stop = before.mean + before.sd * z[0];
            return (at_stop - m.k) * grow + drift + sd_after * z[1];
        });
    }

    const double dt = (m.big_t - t) / static_cast<double>(c.n_steps);
    const double sqdt = std::sqrt(dt);
    // cost is paid at the first grid time at or after stop_time
    const auto stop_index =
        static_cast<std::size_t>(std::ceil((s.stop_time - t) / dt - 1e-9));
    std::vector<double> grid_u(c.n_steps);
    for (std::size_t i = 0; i < c.n_steps; ++i) grid_u[i] = u(t + static_cast<double>(i) * dt);

    return simulate_paths(c, c.n_steps, [&](std::span<const double> z) {
        double w = x;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (i == stop_index) w -= m.k;
            if (i >= stop_index) {
                w += (m.big_r * w + m.p - m.q + m.q * grid_u[i]) * dt +
                     m.sigma0 * grid_u[i] * sqdt * z[i];
            } else {
                w += (m.big_r * w + m.p) * dt + m.sigma0 * sqdt * z[i];
            }
        }
        return w;
    });
}

Eigen::MatrixXd simulate_uncontrolled_euler_coupled(double t, double x, const ModelParams& m,
                                                    std::span<const std::size_t> levels,
                                                    std::size_t n_paths, std::uint64_t seed) {
    check_start(t, m);
    if (levels.empty() || n_paths < 1) throw std::invalid_argument("coupled Euler: empty request");
    const std::size_t finest = *std::max_element(levels.begin(), levels.end());
    for (auto l : levels)
        if (l == 0 || finest % l != 0)
            throw std::invalid_argument("coupled Euler: levels must divide the finest level");

    const double fine_dt = (m.big_t - t) / static_cast<double>(finest);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(levels.size()));
    for_each_block(n_paths, seed, 0, [&](NormalStream& stream, std::size_t first, std::size_t last) {
        std::vector<double> z(finest);
        for (std::size_t i = first; i < last; ++i) {
            for (auto& v : z) v = stream.normal();
            for (std::size_t j = 0; j < levels.size(); ++j) {
                const std::size_t stride = finest / levels[j];
                const double dt = fine_dt * static_cast<double>(stride);
                double w = x;
                for (std::size_t step = 0; step < levels[j]; ++step) {
                    double dw = 0.0;
                    for (std::size_t f = 0; f < stride; ++f) dw += z[step * stride + f];
                    w += (m.big_r * w + m.p) * dt + m.sigma0 * std::sqrt(fine_dt) * dw;
                }
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
            }
        }
    });
    return out;
}

McEstimate mc_exp_utility(const Eigen::VectorXd& terminal_wealth, double eta, std::uint64_t seed,
                          bool antithetic) {
    const auto n = static_cast<std::size_t>(terminal_wealth.size());
    if (n == 0) throw std::invalid_argument("mc_exp_utility: no samples");
    if (antithetic && n % 2 != 0) throw std::invalid_argument("mc_exp_utility: odd antithetic sample");

    std::vector<double> y;
    if (antithetic) {
        y.reserve(n / 2);
        for (std::size_t i = 0; i < n; i += 2)
            y.push_back(0.5 * (std::exp(-eta * terminal_wealth(static_cast<Eigen::Index>(i))) +
                               std::exp(-eta * terminal_wealth(static_cast<Eigen::Index>(i + 1)))));
    } else {
        y.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            y.push_back(std::exp(-eta * terminal_wealth(static_cast<Eigen::Index>(i))));
    }

    long double sum = 0.0L;
    for (double v : y) sum += v;
    const long double mean = sum / static_cast<long double>(y.size());
    long double ss = 0.0L;
    for (double v : y) ss += (v - mean) * (v - mean);
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    const double se = y.size() > 1 && *lo != *hi
                          ? static_cast<double>(std::sqrt(ss / (y.size() - 1) / y.size()))
                          : 0.0;
    const auto mu = static_cast<double>(mean);
    return {mu, se, mu - 1.96 * se, mu + 1.96 * se, n, seed};
}

Eigen::VectorXd simulate_cramer_lundberg(double horizon, const ActuarialParams& a,
                                         const PathConfig& c) {
    check_config(c);
    if (!(horizon > 0.0)) throw std::domain_error("horizon must be positive");
    if (auto v = check(a); !v.empty()) throw ValidationError(std::move(v));

    double log_mean = 0.0;
    double log_sd = 0.0;
    if (a.law == ClaimLaw::Exponential) {
        if (std::abs(a.mu2 - 2.0 * a.mu * a.mu) > 1e-9 * a.mu2)
            throw std::invalid_argument("exponential claims require mu2 = 2 mu^2");
    } else {
        if (!(a.mu2 > a.mu * a.mu))
            throw std::invalid_argument("lognormal claims require mu2 > mu^2");
        const double s2 = std::log(a.mu2 / (a.mu * a.mu));
        log_sd = std::sqrt(s2);
        log_mean = std::log(a.mu) - 0.5 * s2;
    }

    Eigen::VectorXd out(static_cast<Eigen::Index>(c.n_paths));
    for_each_block(c.n_paths, c.seed, c.threads,
                   [&](NormalStream& stream, std::size_t first, std::size_t last) {
                       for (std::size_t i = first; i < last; ++i) {
                           double total = 0.0;
                           // arrivals via exponential inter-arrival times
                           for (double clock = -std::log(stream.uniform()) / a.lambda;
                                clock <= horizon;
                                clock += -std::log(stream.uniform()) / a.lambda) {
                               total += a.law == ClaimLaw::Exponential
                                            ? -a.mu * std::log(stream.uniform())
                                            : std::exp(log_mean + log_sd * stream.normal());
                           }
                           out(static_cast<Eigen::Index>(i)) = total;
                       }
                   });
    return out;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    // Kolmogorov tail with the Stephens small-sample correction
    const double en = std::sqrt(na * nb / (na + nb));
    const double lambda = (en + 0.12 + 0.11 / en) * d;
    double p = 0.0;
    if (lambda < 1e-3) {
        p = 1.0;
    } else {
        double sign = 1.0;
        for (int k = 1; k <= 200; ++k) {
            const double term = sign * 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
            p += term;
            if (std::abs(term) < 1e-16) break;
            sign = -sign;
        }
        p = std::clamp(p, 0.0, 1.0);
    }
    return {d, p};
}

void write_samples(std::ostream& os, const Eigen::VectorXd& samples) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index i = 0; i < samples.size(); ++i) os << samples(i) << '\n';
}

}  // namespace reins
