#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "reins/closed_form.hpp"
#include "reins/oracles.hpp"
#include "reins/rng.hpp"
#include "reins/stochastic_sim.hpp"

using namespace reins;

namespace {

struct Moments {
    double mean;
    double var;
    double m4;  // fourth central moment
};

Moments moments(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    const Eigen::ArrayXd c = v.array() - mean;
    const double n = static_cast<double>(v.size());
    return {mean, c.square().sum() / (n - 1), c.square().square().sum() / n};
}

double se_of_variance(const Moments& s, double n) { return std::sqrt((s.m4 - s.var * s.var) / n); }

PathConfig paths(std::size_t n, std::uint64_t seed = 20240611) {
    PathConfig c;
    c.n_paths = n;
    c.seed = seed;
    return c;
}

}  // namespace

TEST(Rng, SplitMixReference) {
    EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Rng, InverseNormalQuantiles) {
    EXPECT_NEAR(inverse_normal_cdf(0.5), 0.0, 1e-16);
    EXPECT_NEAR(inverse_normal_cdf(0.975), 1.959963984540054, 1e-14);
    EXPECT_NEAR(inverse_normal_cdf(0.8413447460685429), 1.0, 1e-13);
    EXPECT_NEAR(inverse_normal_cdf(1e-10), -6.361340902404056, 1e-11);
    for (double p : {1e-5, 0.01, 0.3, 0.49})
        EXPECT_NEAR(inverse_normal_cdf(p), -inverse_normal_cdf(1.0 - p), 1e-9);
    EXPECT_TRUE(std::isfinite(inverse_normal_cdf(1e-300)));
    EXPECT_THROW(inverse_normal_cdf(0.0), std::domain_error);
    EXPECT_THROW(inverse_normal_cdf(1.0), std::domain_error);
}

TEST(Rng, UniformsInOpenInterval) {
    NormalStream s(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Simulation, UncontrolledMoments) {
    const auto m = baseline_params();
    const auto x = simulate_uncontrolled(0.0, m.r0, m, paths(100000));
    const double rt = m.big_r * m.big_t;
    const double mean = m.r0 * std::exp(rt) + m.p / m.big_r * std::expm1(rt);
    const double var = m.sigma0 * m.sigma0 * std::expm1(2 * rt) / (2 * m.big_r);
    const auto s = moments(x);
    const double n = static_cast<double>(x.size());
    EXPECT_LT(std::abs(s.mean - mean), 4.0 * std::sqrt(var / n));
    EXPECT_LT(std::abs(s.var - var), 4.0 * se_of_variance(s, n));
}

TEST(Simulation, EulerMatchesExactInLaw) {
    const auto m = baseline_params();
    auto exact = paths(10000, 1);
    auto euler = paths(10000, 2);
    euler.scheme = Scheme::EulerMaruyama;
    euler.n_steps = 500;
    const Eigen::VectorXd a = simulate_uncontrolled(0.0, m.r0, m, exact);
    const Eigen::VectorXd b = simulate_uncontrolled(0.0, m.r0, m, euler);
    const auto ks = ks_two_sample({a.data(), a.data() + a.size()}, {b.data(), b.data() + b.size()});
    EXPECT_GT(ks.p_value, 1e-3) << "D = " << ks.statistic;
}

TEST(Simulation, KsDetectsShift) {
    const auto m = baseline_params();
    const Eigen::VectorXd a = simulate_uncontrolled(0.0, m.r0, m, paths(10000, 1));
    const Eigen::VectorXd b = simulate_uncontrolled(0.0, m.r0 + 0.2, m, paths(10000, 2));
    EXPECT_LT(ks_two_sample({a.data(), a.data() + a.size()}, {b.data(), b.data() + b.size()}).p_value,
              1e-6);
    const auto same = ks_two_sample({1, 2, 3}, {1, 2, 3});
    EXPECT_DOUBLE_EQ(same.statistic, 0.0);
    EXPECT_DOUBLE_EQ(same.p_value, 1.0);
}

TEST(Simulation, BitIdenticalAcrossThreadCounts) {
    const auto m = baseline_params();
    const auto s = decide(0.0, m.r0, m);
    auto c = paths(3 * kBlockSize + 17, 99);
    c.threads = 1;
    const Eigen::VectorXd one = simulate_strategy(0.0, m.r0, s, m, c);
    c.threads = 4;
    const Eigen::VectorXd four = simulate_strategy(0.0, m.r0, s, m, c);
    EXPECT_EQ(one, four);
    c.scheme = Scheme::EulerMaruyama;
    c.n_steps = 50;
    c.threads = 1;
    const Eigen::VectorXd e1 = simulate_strategy(0.0, m.r0, s, m, c);
    c.threads = 3;
    EXPECT_EQ(e1, simulate_strategy(0.0, m.r0, s, m, c));
    c.seed = 100;
    EXPECT_NE(e1, simulate_strategy(0.0, m.r0, s, m, c));
}

TEST(Simulation, NullStrategyIsUncontrolled) {
    const auto m = baseline_params();
    const auto c = paths(1000, 5);
    EXPECT_EQ(simulate_strategy(0.0, m.r0, Strategy::null_strategy(m.big_t), m, c),
              simulate_uncontrolled(0.0, m.r0, m, c));
}

TEST(Simulation, FullCessionIsDeterministic) {
    const auto m = baseline_params();
    const Strategy all{0.0, RetentionSchedule::constant(0.0, m.big_t)};
    const auto x = simulate_strategy(0.0, m.r0, all, m, paths(5000));
    const double rt = m.big_r * m.big_t;
    const double expected = (m.r0 - m.k) * std::exp(rt) + (m.p - m.q) / m.big_r * std::expm1(rt);
    EXPECT_NEAR(x.minCoeff(), expected, 1e-12);
    EXPECT_NEAR(x.maxCoeff(), expected, 1e-12);
    const auto est = mc_exp_utility(x, m.eta);
    EXPECT_DOUBLE_EQ(est.std_error, 0.0);
    EXPECT_NEAR(est.mean, std::exp(-m.eta * expected), 1e-12);
}

TEST(Simulation, FullRetentionOnlyShiftsByCost) {
    const auto m = baseline_params();
    const double s = 3.0;
    const Strategy keep{s, RetentionSchedule::constant(1.0, m.big_t)};
    const auto x = simulate_strategy(0.0, m.r0, keep, m, paths(100000));
    const double shift = m.k * std::exp(m.big_r * (m.big_t - s));
    const double exact = g_value(0.0, m.r0, m) * std::exp(m.eta * shift);
    EXPECT_NEAR(utility_of_schedule(0.0, m.r0, keep, m), exact, 1e-10 * exact);
    const auto est = mc_exp_utility(x, m.eta);
    EXPECT_LT(std::abs(est.mean - exact), 4.0 * est.std_error);
}

TEST(Simulation, OptimalStrategyMatchesValue) {
    auto m = baseline_params();
    m.k = 0.08;
    const auto x = simulate_strategy(0.0, m.r0, decide(0.0, m.r0, m), m, paths(100000));
    const auto est = mc_exp_utility(x, m.eta);
    EXPECT_LT(std::abs(est.mean - value(0.0, m.r0, m)), 4.0 * est.std_error);
    EXPECT_LE(est.ci95_low, est.mean);
    EXPECT_GE(est.ci95_high, est.mean);
}

TEST(Simulation, EulerStrategyWithLateStop) {
    const auto m = baseline_params();
    const Strategy s{2.5, RetentionSchedule::constant(0.5, m.big_t)};
    auto c = paths(40000, 8);
    c.scheme = Scheme::EulerMaruyama;
    c.n_steps = 400;  // 2.5 is a grid time
    const auto est = mc_exp_utility(simulate_strategy(0.0, m.r0, s, m, c), m.eta);
    EXPECT_LT(std::abs(est.mean - utility_of_schedule(0.0, m.r0, s, m)), 4.0 * est.std_error);
}

TEST(Simulation, EulerWeakOrderOne) {
    const auto m = baseline_params();
    const std::array<std::size_t, 5> levels{10, 20, 40, 80, 160};
    const Eigen::MatrixXd x = simulate_uncontrolled_euler_coupled(0.0, m.r0, m, levels, 20000, 4);
    std::vector<double> mean;
    for (Eigen::Index j = 0; j < x.cols(); ++j) mean.push_back((-m.eta * x.col(j).array()).exp().mean());
    for (std::size_t j = 2; j < mean.size(); ++j) {
        const double ratio = std::abs(mean[j - 2] - mean[j - 1]) / std::abs(mean[j - 1] - mean[j]);
        EXPECT_GT(ratio, 1.6) << "level " << levels[j];
        EXPECT_LT(ratio, 2.4) << "level " << levels[j];
    }
    EXPECT_THROW(simulate_uncontrolled_euler_coupled(0.0, m.r0, m, std::array<std::size_t, 2>{3, 10}, 10, 1),
                 std::invalid_argument);
}

TEST(Simulation, AntitheticHalvesVariancePerDraw) {
    const auto m = baseline_params();
    const std::size_t n = 50000;
    auto plain = paths(n, 12);
    auto anti = paths(2 * n, 12);
    anti.antithetic = true;
    const auto s = decide(0.0, m.r0, m);
    const auto p = mc_exp_utility(simulate_strategy(0.0, m.r0, s, m, plain), m.eta);
    const auto a = mc_exp_utility(simulate_strategy(0.0, m.r0, s, m, anti), m.eta, 12, true);
    // n antithetic pairs against n independent paths: the same number of normal draws
    EXPECT_LE(a.std_error * a.std_error, 0.5 * p.std_error * p.std_error);
    EXPECT_LT(std::abs(a.mean - value(0.0, m.r0, m)), 4.0 * a.std_error);
}

TEST(Simulation, AntitheticPairsAreMirrored) {
    const auto m = baseline_params();
    auto c = paths(10, 3);
    c.antithetic = true;
    const auto x = simulate_uncontrolled(0.0, m.r0, m, c);
    const double rt = m.big_r * m.big_t;
    const double mean = m.r0 * std::exp(rt) + m.p / m.big_r * std::expm1(rt);
    for (Eigen::Index i = 0; i < 10; i += 2) EXPECT_NEAR(x(i) + x(i + 1), 2 * mean, 1e-12);
    c.n_paths = 11;
    EXPECT_THROW(simulate_uncontrolled(0.0, m.r0, m, c), std::invalid_argument);
}

TEST(Simulation, InvalidRequests) {
    const auto m = baseline_params();
    EXPECT_THROW(simulate_uncontrolled(10.0, 0.0, m, paths(10)), std::domain_error);
    EXPECT_THROW(simulate_uncontrolled(0.0, 0.0, m, paths(0)), std::invalid_argument);
    EXPECT_THROW(simulate_strategy(5.0, 0.0, decide(0.0, 0.0, m), m, paths(10)), std::domain_error);
    EXPECT_THROW(mc_exp_utility(Eigen::VectorXd(), 0.5), std::invalid_argument);
}

TEST(CramerLundberg, ExponentialClaimMoments) {
    const ActuarialParams a{.lambda = 3.0, .mu = 0.5, .mu2 = 0.5, .theta_i = 0.1, .theta = 0.2,
                            .law = ClaimLaw::Exponential};
    const double t = 2.0;
    const auto s = simulate_cramer_lundberg(t, a, paths(100000, 21));
    const auto mo = moments(s);
    const double n = static_cast<double>(s.size());
    EXPECT_LT(std::abs(mo.mean - a.lambda * a.mu * t), 4.0 * std::sqrt(mo.var / n));
    EXPECT_LT(std::abs(mo.var - a.lambda * a.mu2 * t), 4.0 * se_of_variance(mo, n));
}

TEST(CramerLundberg, LognormalClaimMoments) {
    const ActuarialParams a{.lambda = 5.0, .mu = 0.2, .mu2 = 0.1, .theta_i = 0.1, .theta = 0.2};
    const double t = 1.0;
    const auto s = simulate_cramer_lundberg(t, a, paths(100000, 22));
    const auto mo = moments(s);
    const double n = static_cast<double>(s.size());
    EXPECT_LT(std::abs(mo.mean - a.lambda * a.mu * t), 4.0 * std::sqrt(mo.var / n));
    EXPECT_LT(std::abs(mo.var - a.lambda * a.mu2 * t), 4.0 * se_of_variance(mo, n));
}

TEST(CramerLundberg, ClaimLawChecks) {
    const ActuarialParams bad{.lambda = 1.0, .mu = 1.0, .mu2 = 3.0, .theta_i = 0.1, .theta = 0.2,
                              .law = ClaimLaw::Exponential};
    EXPECT_THROW(simulate_cramer_lundberg(1.0, bad, paths(10)), std::invalid_argument);
    const ActuarialParams degenerate{.lambda = 1.0, .mu = 1.0, .mu2 = 1.0, .theta_i = 0.1, .theta = 0.2};
    EXPECT_THROW(simulate_cramer_lundberg(1.0, degenerate, paths(10)), std::invalid_argument);
}

TEST(Simulation, WriteSamples) {
    Eigen::VectorXd v(2);
    v << 0.1, -2.5;
    std::ostringstream os;
    write_samples(os, v);
    EXPECT_EQ(os.str(), "0.10000000000000001\n-2.5\n");
}
