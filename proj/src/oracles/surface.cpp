#include <iomanip>
#include <limits>
#include <ostream>

#include "reins/oracles.hpp"

namespace reins {

void write_csv(std::ostream& os, const ValueSurface& s) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << (s.policy ? "t,x,value,policy\n" : "t,x,value\n");
    for (Eigen::Index i = 0; i < s.t_grid.size(); ++i) {
        for (Eigen::Index j = 0; j < s.x_grid.size(); ++j) {
            os << s.t_grid(i) << ',' << s.x_grid(j) << ',' << s.values(i, j);
            if (s.policy) os << ',' << (*s.policy)(i, j);
            os << '\n';
        }
    }
}

std::vector<bool> interior_columns(const Eigen::VectorXd& x_grid, double fraction) {
    std::vector<bool> mask(static_cast<std::size_t>(x_grid.size()), false);
    if (x_grid.size() == 0) return mask;
    const double lo = x_grid(0);
    const double hi = x_grid(x_grid.size() - 1);
    const double margin = 0.5 * (1.0 - fraction) * (hi - lo);
    for (Eigen::Index j = 0; j < x_grid.size(); ++j)
        mask[static_cast<std::size_t>(j)] =
            x_grid(j) >= lo + margin - 1e-12 && x_grid(j) <= hi - margin + 1e-12;
    return mask;
}

}  // namespace reins
