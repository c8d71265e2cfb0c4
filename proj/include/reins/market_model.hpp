#pragma once

// Model parameters for the proportional reinsurance problem with a fixed
// subscription cost, plus the actuarial (Cramer-Lundberg) parametrisation
// they can be derived from.

#include <cmath>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace reins {

/// Economic and market parameters. Plain aggregate: closed-form routines
/// accept any instance, `validate` is what enforces admissibility.
template <typename Scalar>
struct BasicModelParams {
    Scalar p;       ///< insurer net profit rate
    Scalar q;       ///< reinsurer net profit rate
    Scalar sigma0;  ///< diffusion volatility
    Scalar eta;     ///< CARA risk aversion
    Scalar big_r;   ///< risk-free rate R
    Scalar big_t;   ///< horizon T
    Scalar k;       ///< fixed subscription cost K
    Scalar r0;      ///< initial capital R_0

    template <typename Other>
    BasicModelParams<Other> cast() const {
        return {Other(p),     Other(q),     Other(sigma0), Other(eta),
                Other(big_r), Other(big_t), Other(k),      Other(r0)};
    }

    bool operator==(const BasicModelParams&) const = default;
};

using ModelParams = BasicModelParams<double>;

enum class ClaimLaw { Exponential, Lognormal };

struct ActuarialParams {
    double lambda;   ///< claim intensity
    double mu;       ///< mean claim size
    double mu2;      ///< second moment of claim size
    double theta_i;  ///< insurer safety loading
    double theta;    ///< reinsurer safety loading
    ClaimLaw law = ClaimLaw::Lognormal;
};

/// Everything `from_actuarial` needs besides the claim model.
struct MarketTerms {
    double eta;
    double big_r;
    double big_t;
    double k;
    double r0;
};

struct ConstraintViolation {
    std::string name;   ///< constraint, e.g. "q > p"
    double value;       ///< offending value
    double bound;       ///< the bound it failed against
};

std::ostream& operator<<(std::ostream& os, const ConstraintViolation& v);

class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<ConstraintViolation> violations);
    const std::vector<ConstraintViolation>& violations() const noexcept { return violations_; }

private:
    std::vector<ConstraintViolation> violations_;
};

/// Baseline market (T = 10, eta = 0.5, sigma0 = 0.5, q = 0.1, R = 0.05) with the repository
/// defaults p = 0.05, K = 0.1, R_0 = 1.
ModelParams baseline_params();

/// Every violated invariant; empty means admissible.
std::vector<ConstraintViolation> check(const ModelParams& raw);
std::vector<ConstraintViolation> check(const ActuarialParams& a);

/// Throws ValidationError listing every violated constraint.
ModelParams validate(const ModelParams& raw);

/// sigma0 = sqrt(lambda mu2), p = theta_i lambda mu, q = theta lambda mu.
ModelParams from_actuarial(const ActuarialParams& a, const MarketTerms& market);

// ---------------------------------------------------------------------------
// Flat key-value configuration

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Keys exactly as field names, `key = value`, `#` comments.
using KeyValues = std::map<std::string, double>;

KeyValues parse_key_values(const std::string& text);

/// Builds parameters from parsed keys. The market keys (q, sigma0, eta, big_r,
/// big_t) are required unless the full actuarial set (lambda, mu, mu2,
/// theta_i, theta) is given in place of p, q, sigma0; p, k, r0 fall back to
/// repository defaults. Unknown keys throw ConfigError. Not validated.
ModelParams params_from_key_values(const KeyValues& kv);

ModelParams load_config(const std::string& path);

std::string to_config_text(const ModelParams& m);

}  // namespace reins
