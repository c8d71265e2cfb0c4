#pragma once

// Threshold sweeps over one model parameter at a time.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "reins/closed_form.hpp"
#include "reins/market_model.hpp"

namespace reins {

enum class SweepParam { Q, Eta, Sigma0, BigT, K };

std::string to_string(SweepParam p);
/// Accepts the config key names: q, eta, sigma0, big_t, k.
SweepParam parse_sweep_param(const std::string& name);

struct SweepRecord {
    SweepParam param;
    double value;
    double k_star;
    std::optional<double> t_star;
    std::optional<double> q_star;
    Regime regime;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    /// Human-readable notes about range truncation and skipped points.
    std::vector<std::string> warnings;
    double lo;  ///< effective range after truncation
    double hi;
};

struct SweepOptions {
    bool log_spacing = false;
};

class SweepError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Params with `param` set to `value`, everything else from `base`.
ModelParams with_param(const ModelParams& base, SweepParam param, double value);

/// The open interval of values of `param` for which `base` stays admissible.
std::pair<double, double> feasible_interval(const ModelParams& base, SweepParam param);

/// Evaluates K*, t*, q* and the regime at n points of [lo, hi]. The range
/// is first truncated to the feasible interval (with a warning); points
/// that still fail validation are skipped and reported.
SweepResult sweep(SweepParam param, double lo, double hi, std::size_t n, const ModelParams& base,
                  const SweepOptions& options = {});

/// Record for a single parameter value, computed from scratch.
SweepRecord evaluate_row(SweepParam param, double value, const ModelParams& base);

enum class Trend { StrictlyIncreasing, StrictlyDecreasing, Violation };

struct MonotonicityVerdict {
    Trend trend;
    std::optional<std::size_t> violation_index;  ///< second element of the first bad pair

    std::string describe() const;
};

/// Strict monotonicity of k_star along the records (at least 3).
MonotonicityVerdict monotonicity_report(const std::vector<SweepRecord>& records);
MonotonicityVerdict monotonicity_report(const std::vector<double>& values);

/// Header `param,value,k_star,t_star,q_star,regime`; absent optionals are empty.
void write_csv(std::ostream& os, const std::vector<SweepRecord>& records);

/// Standalone SVG line chart of k_star against the swept value.
void write_svg(std::ostream& os, const std::vector<SweepRecord>& records);

struct PanelSpec {
    SweepParam param;
    double lo;
    double hi;
};

/// Default ranges for the four panels (q, eta, sigma0, T).
std::vector<PanelSpec> default_panels();

}  // namespace reins
