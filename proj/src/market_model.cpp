#include "reins/market_model.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace reins {

namespace {

std::string describe(const std::vector<ConstraintViolation>& violations) {
    std::ostringstream os;
    os << "invalid model parameters:";
    for (const auto& v : violations) os << "\n  " << v;
    return os.str();
}

void require_positive(std::vector<ConstraintViolation>& out, const char* name, double v) {
    if (!std::isfinite(v)) {
        out.push_back({std::string(name) + " finite", v, 0.0});
    } else if (!(v > 0.0)) {
        out.push_back({std::string(name) + " > 0", v, 0.0});
    }
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::ostream& operator<<(std::ostream& os, const ConstraintViolation& v) {
    return os << v.name << " violated (value " << v.value << ", bound " << v.bound << ")";
}

ValidationError::ValidationError(std::vector<ConstraintViolation> violations)
    : std::invalid_argument(describe(violations)), violations_(std::move(violations)) {}

ModelParams baseline_params() {
    return {.p = 0.05, .q = 0.1, .sigma0 = 0.5, .eta = 0.5,
            .big_r = 0.05, .big_t = 10.0, .k = 0.1, .r0 = 1.0};
}

std::vector<ConstraintViolation> check(const ModelParams& m) {
    std::vector<ConstraintViolation> out;
    require_positive(out, "p", m.p);
    require_positive(out, "q", m.q);
    require_positive(out, "sigma0", m.sigma0);
    require_positive(out, "eta", m.eta);
    require_positive(out, "big_r", m.big_r);
    require_positive(out, "big_t", m.big_t);
    require_positive(out, "k", m.k);
    require_positive(out, "r0", m.r0);
    if (!out.empty()) return out;

    // non-cheap reinsurance
    if (!(m.q > m.p)) out.push_back({"q > p", m.q, m.p});
    // keeps the optimal retention inside (0, 1)
    const double cap = m.eta * m.sigma0 * m.sigma0;
    if (!(m.q < cap)) out.push_back({"q < eta*sigma0^2", m.q, cap});
    return out;
}

std::vector<ConstraintViolation> check(const ActuarialParams& a) {
    std::vector<ConstraintViolation> out;
    require_positive(out, "lambda", a.lambda);
    require_positive(out, "mu", a.mu);
    require_positive(out, "mu2", a.mu2);
    require_positive(out, "theta_i", a.theta_i);
    require_positive(out, "theta", a.theta);
    if (!out.empty()) return out;
    if (a.mu2 < a.mu * a.mu) out.push_back({"mu2 >= mu^2", a.mu2, a.mu * a.mu});
    if (!(a.theta > a.theta_i)) out.push_back({"theta > theta_i", a.theta, a.theta_i});
    return out;
}

ModelParams validate(const ModelParams& raw) {
    auto violations = check(raw);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return raw;
}

ModelParams from_actuarial(const ActuarialParams& a, const MarketTerms& market) {
    auto violations = check(a);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    const ModelParams m{.p = a.theta_i * a.lambda * a.mu,
                        .q = a.theta * a.lambda * a.mu,
                        .sigma0 = std::sqrt(a.lambda * a.mu2),
                        .eta = market.eta,
                        .big_r = market.big_r,
                        .big_t = market.big_t,
                        .k = market.k,
                        .r0 = market.r0};
    return validate(m);
}

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected `key = value`");
        const auto key = trim(line.substr(0, eq));
        const auto raw = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        double value = 0.0;
        try {
            std::size_t used = 0;
            value = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
        } catch (const std::exception&) {
            throw ConfigError("line " + std::to_string(lineno) + ": key `" + key +
                              "` has non-numeric value `" + raw + "`");
        }
        if (!std::isfinite(value))
            throw ConfigError("key `" + key + "` must be a finite number");
        if (!kv.emplace(key, value).second) throw ConfigError("duplicate key `" + key + "`");
    }
    return kv;
}

ModelParams params_from_key_values(const KeyValues& kv) {
    static const std::set<std::string> known = {"p",     "q",     "sigma0", "eta",     "big_r",
                                                "big_t", "k",     "r0",     "lambda",  "mu",
                                                "mu2",   "theta", "theta_i"};
    for (const auto& [key, value] : kv)
        if (!known.contains(key)) throw ConfigError("unknown key `" + key + "`");

    auto has = [&](const char* key) { return kv.contains(key); };
    auto get = [&](const char* key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError(std::string("missing required key `") + key + "`");
        return it->second;
    };

    const auto defaults = baseline_params();
    const bool actuarial =
        has("lambda") || has("mu") || has("mu2") || has("theta") || has("theta_i");

    ModelParams m = defaults;
    m.eta = get("eta");
    m.big_r = get("big_r");
    m.big_t = get("big_t");
    m.k = has("k") ? get("k") : defaults.k;
    m.r0 = has("r0") ? get("r0") : defaults.r0;

    if (actuarial) {
        for (const char* key : {"p", "q", "sigma0"})
            if (has(key))
                throw ConfigError(std::string("key `") + key +
                                  "` conflicts with actuarial keys (lambda, mu, mu2, theta, theta_i)");
        const ActuarialParams a{.lambda = get("lambda"),
                                .mu = get("mu"),
                                .mu2 = get("mu2"),
                                .theta_i = get("theta_i"),
                                .theta = get("theta")};
        if (auto violations = check(a); !violations.empty())
            throw ValidationError(std::move(violations));
        m.p = a.theta_i * a.lambda * a.mu;
        m.q = a.theta * a.lambda * a.mu;
        m.sigma0 = std::sqrt(a.lambda * a.mu2);
    } else {
        m.q = get("q");
        m.sigma0 = get("sigma0");
        m.p = has("p") ? get("p") : defaults.p;
    }
    return m;
}

ModelParams load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file `" + path + "`");
    std::ostringstream buf;
    buf << in.rdbuf();
    return params_from_key_values(parse_key_values(buf.str()));
}

std::string to_config_text(const ModelParams& m) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << "p = " << m.p << "\nq = " << m.q << "\nsigma0 = " << m.sigma0 << "\neta = " << m.eta
       << "\nbig_r = " << m.big_r << "\nbig_t = " << m.big_t << "\nk = " << m.k
       << "\nr0 = " << m.r0 << "\n";
    return os.str();
}

}  // namespace reins
