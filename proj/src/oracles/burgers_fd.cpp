#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "ritzkit/error.hpp"

namespace ritzkit::oracle {

double BurgersGrid::at(double x) const {
    const double s = (x + 1.0) / dx;
    const auto i = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0,
                                                       static_cast<double>(u.size() - 2)));
    const double f = s - static_cast<double>(i);
    return (1.0 - f) * u[i] + f * u[i + 1];
}

BurgersGrid burgers_crank_nicolson(double nu, double t_final, std::size_t intervals, double dt) {
    if (intervals < 4 || !(dt > 0.0) || !(t_final >= 0.0)) throw DataError("bad FD grid");
    BurgersGrid grid;
    grid.dx = 2.0 / static_cast<double>(intervals);
    const std::size_t n = intervals + 1;
    const double dx = grid.dx;
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i)
        u[i] = -std::sin(std::numbers::pi * (-1.0 + static_cast<double>(i) * dx));
    u.front() = u.back() = 0.0;

    auto F = [&](const std::vector<double>& v, std::size_t i) {
        return v[i] * (v[i + 1] - v[i - 1]) / (2.0 * dx) -
               nu * (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx);
    };
    const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
    std::vector<double> un(n), fold(n), r(n), lo(n), di(n), up(n), delta(n);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 1; i + 1 < n; ++i) fold[i] = F(u, i);
        un = u;
        for (int it = 0; it < 30; ++it) {
            double rn = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                r[i] = (un[i] - u[i]) / dt + 0.5 * (F(un, i) + fold[i]);
                lo[i] = 0.5 * (-un[i] / (2.0 * dx) - nu / (dx * dx));
                di[i] = 1.0 / dt + 0.5 * ((un[i + 1] - un[i - 1]) / (2.0 * dx) + 2.0 * nu / (dx * dx));
                up[i] = 0.5 * (un[i] / (2.0 * dx) - nu / (dx * dx));
                rn = std::max(rn, std::abs(r[i]));
            }
            // Thomas algorithm on the interior unknowns 1..n-2.
            for (std::size_t i = 2; i + 1 < n; ++i) {
                const double w = lo[i] / di[i - 1];
                di[i] -= w * up[i - 1];
                r[i] -= w * r[i - 1];
            }
            delta[n - 2] = r[n - 2] / di[n - 2];
            for (std::size_t i = n - 2; i-- > 1;) delta[i] = (r[i] - up[i] * delta[i + 1]) / di[i];
            double dn = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                un[i] -= delta[i];
                dn = std::max(dn, std::abs(delta[i]));
            }
            if (dn < 1e-13 || rn < 1e-12) break;
        }
        u.swap(un);
    }
    grid.u = std::move(u);
    grid.t = static_cast<double>(steps) * dt;
    return grid;
}

}  // namespace ritzkit::oracle
