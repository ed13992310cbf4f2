#pragma once

// Independent oracles for tests, the acceptance suite and `ritzkit selftest`. Nothing here
// shares a derivative path with the library: network derivatives come from finite
// differences of a long-double evaluation, parameter gradients from finite differences of
// loss values, and the Burgers cross-check from a Crank-Nicolson solver.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ritzkit/dynamics.hpp"
#include "ritzkit/loss.hpp"
#include "ritzkit/net_core.hpp"

namespace ritzkit::oracle {

/// u(x) in long double (tanhl), including the output scale.
long double eval_ld(const NetworkParams& params, std::span<const long double> x);

/// d^xi u(x) by tensor central differences with two Richardson levels (h, h/2, h/4);
/// the step along x_i is h / max_k |w_ki|.
double fd_partial(const NetworkParams& params, std::span<const double> x, const MultiIndex& xi,
                  double h = 4e-2);

/// Central differences with Richardson extrapolation of a scalar function of theta; the
/// step is chosen per entry from a decade ladder starting at h.
std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> theta, double h = 4e-2);

/// Forward-mode check of a vector function: column j of the Jacobian (rows = outputs).
std::vector<double> fd_jacobian(
    const std::function<std::vector<double>(std::span<const double>)>& f,
    std::span<const double> theta, std::size_t n_out, double h = 4e-2);

/// Sum of |terms| of d^xi u(x); the magnitude against which cancellation is judged.
double partial_magnitude(const NetworkParams& params, std::span<const double> x,
                         const MultiIndex& xi);

/// Crank-Nicolson in time, central differences in space, Newton per step, for
/// u_t + u u_x = nu u_xx on [-1, 1], u(0, x) = -sin(pi x), u(t, +-1) = 0.
struct BurgersGrid {
    double dx = 0.0;
    double t = 0.0;
    std::vector<double> u;  // nodes x_i = -1 + i dx
    double at(double x) const;  // linear interpolation
};
BurgersGrid burgers_crank_nicolson(double nu, double t_final, std::size_t intervals,
                                   double dt);

/// J = |theta|^q / q. Its gradient flow decays like t^{-q/(q-2)} for q > 2 (exponent 1/q)
/// and exponentially for q = 2.
class PowerObjective final : public Objective {
public:
    PowerObjective(std::size_t n, double q) : n_(n), q_(q) {}
    std::size_t size() const override { return n_; }
    double value(std::span<const double> th) const override { return std::pow(norm(th), q_) / q_; }
    double value_and_gradient(std::span<const double> th, std::span<double> g) const override {
        const double r = norm(th);
        const double c = r > 0.0 ? std::pow(r, q_ - 2.0) : 0.0;
        for (std::size_t i = 0; i < n_; ++i) g[i] = c * th[i];
        return std::pow(r, q_) / q_;
    }

private:
    static double norm(std::span<const double> v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }
    std::size_t n_;
    double q_;
};

// ---------------------------------------------------------------- self-test suites

struct SuiteReport {
    std::string name;
    bool passed = true;
    std::size_t cases = 0;
    double worst = 0.0;      // worst relative error seen
    double tolerance = 0.0;
    std::string worst_case;  // description of the worst case
};

/// Analytic partial derivatives vs FD: n_networks seeded networks, m <= 20, d <= 3,
/// every |xi| <= 4; relative error < 1e-5.
SuiteReport derivative_suite(std::uint64_t seed = 1, std::size_t n_networks = 100);

/// Loss gradients vs FD for every loss kind and both trainable modes; relative error < 1e-6.
SuiteReport gradient_suite(std::uint64_t seed = 2, std::size_t instances_per_kind = 10);

/// Named loss instances used by the gradient suite (exposed for unit tests).
struct LossInstance {
    std::string name;
    LossSpec spec;
    NetworkParams params;
};
std::vector<LossInstance> loss_instances(std::uint64_t seed, Trainable mode);

/// Relative gradient error ||g - g_fd|| / max(||g_fd||, floor).
double gradient_error(std::span<const double> g, std::span<const double> g_fd, double floor);

}  // namespace ritzkit::oracle
