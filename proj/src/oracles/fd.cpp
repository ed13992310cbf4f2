#include <cmath>

#include "oracles.hpp"
#include "ritzkit/error.hpp"

namespace ritzkit::oracle {

long double eval_ld(const NetworkParams& params, std::span<const long double> x) {
    long double s = 0.0L;
    for (std::size_t k = 0; k < params.m; ++k) {
        long double z = params.b[k];
        for (std::size_t i = 0; i < params.d; ++i)
            z += static_cast<long double>(params.weight(k, i)) * x[i];
        s += static_cast<long double>(params.a[k]) * tanhl(z);
    }
    if (params.scaling == Scaling::ntk) s /= sqrtl(static_cast<long double>(params.m));
    return s;
}

namespace {

long double binomial(int n, int k) {
    long double r = 1.0L;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Tensor central difference with per-coordinate steps h[i].
long double tensor_difference(const NetworkParams& params, std::span<const double> x,
                              const MultiIndex& xi, std::span<const long double> h) {
    const std::size_t d = params.d;
    std::vector<int> j(d, 0);
    std::vector<long double> pt(d);
    long double total = 0.0L;
    while (true) {
        long double coeff = 1.0L;
        for (std::size_t i = 0; i < d; ++i) {
            const int n = xi[i];
            coeff *= ((j[i] % 2) ? -1.0L : 1.0L) * binomial(n, j[i]) / powl(h[i], n);
            pt[i] = static_cast<long double>(x[i]) + (0.5L * n - j[i]) * h[i];
        }
        total += coeff * eval_ld(params, pt);
        std::size_t i = 0;
        for (; i < d; ++i) {
            if (j[i] < xi[i]) {
                ++j[i];
                break;
            }
            j[i] = 0;
        }
        if (i == d) break;
    }
    return total;
}

}  // namespace

double fd_partial(const NetworkParams& params, std::span<const double> x, const MultiIndex& xi,
                  double h) {
    if (x.size() != params.d || xi.size() != params.d) throw DimensionError("dimension mismatch");
    // Step along coordinate i is scaled to the fastest variation max_k |w_ki|.
    std::vector<long double> step(params.d);
    for (std::size_t i = 0; i < params.d; ++i) {
        double wmax = 0.0;
        for (std::size_t k = 0; k < params.m; ++k)
            wmax = std::max(wmax, std::abs(params.weight(k, i)));
        step[i] = h / std::max(wmax, 1e-2);
    }
    // Two Richardson levels over steps h, h/2, h/4 (error O(h^6)).
    long double level[3];
    for (int l = 0; l < 3; ++l) {
        level[l] = tensor_difference(params, x, xi, step);
        for (auto& s : step) s *= 0.5L;
    }
    const long double r0 = (4.0L * level[1] - level[0]) / 3.0L;
    const long double r1 = (4.0L * level[2] - level[1]) / 3.0L;
    return static_cast<double>((16.0L * r1 - r0) / 15.0L);
}

double partial_magnitude(const NetworkParams& params, std::span<const double> x,
                         const MultiIndex& xi) {
    const int n = xi.order();
    double s = 0.0;
    for (std::size_t k = 0; k < params.m; ++k) {
        double z = params.b[k];
        for (std::size_t i = 0; i < params.d; ++i) z += params.weight(k, i) * x[i];
        s += std::abs(params.a[k] * tanh_kth_derivative(n, z) *
                      multi_index_power(params.row(k), xi));
    }
    return s * params.output_scale();
}

std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> theta, double h) {
    std::vector<double> th(theta.begin(), theta.end()), g(theta.size());
    auto central = [&](std::size_t i, double step) {
        const double orig = th[i];
        th[i] = orig + step;
        const double fp = f(th);
        th[i] = orig - step;
        const double fm = f(th);
        th[i] = orig;
        return (fp - fm) / (2.0 * step);
    };
    // Richardson estimates over a ladder of steps h, h/10, h/100, h/1000; keep the one that
    // agrees best with its successor (curvature-heavy entries need the smaller steps).
    for (std::size_t i = 0; i < th.size(); ++i) {
        double step = h * std::max(1.0, std::abs(th[i]));
        double est[4];
        for (auto& e : est) {
            e = (4.0 * central(i, 0.5 * step) - central(i, step)) / 3.0;
            step *= 0.1;
        }
        std::size_t best = 0;
        for (std::size_t k = 1; k < 3; ++k)
            if (std::abs(est[k] - est[k + 1]) < std::abs(est[best] - est[best + 1])) best = k;
        g[i] = est[best + 1];
    }
    return g;
}

std::vector<double> fd_jacobian(
    const std::function<std::vector<double>(std::span<const double>)>& f,
    std::span<const double> theta, std::size_t n_out, double h) {
    const std::size_t n = theta.size();
    std::vector<double> th(theta.begin(), theta.end()), jac(n_out * n);
    auto central = [&](std::size_t i, double step) {
        const double orig = th[i];
        th[i] = orig + step;
        auto fp = f(th);
        th[i] = orig - step;
        auto fm = f(th);
        th[i] = orig;
        for (std::size_t r = 0; r < n_out; ++r) fp[r] = (fp[r] - fm[r]) / (2.0 * step);
        return fp;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double step = h * std::max(1.0, std::abs(th[i]));
        const auto c = central(i, step);
        const auto fi = central(i, 0.5 * step);
        for (std::size_t r = 0; r < n_out; ++r) jac[r * n + i] = (4.0 * fi[r] - c[r]) / 3.0;
    }
    return jac;
}

double gradient_error(std::span<const double> g, std::span<const double> g_fd, double floor) {
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        diff += (g[i] - g_fd[i]) * (g[i] - g_fd[i]);
        ref += g_fd[i] * g_fd[i];
    }
    return std::sqrt(diff) / std::max(std::sqrt(ref), floor);
}

}  // namespace ritzkit::oracle
