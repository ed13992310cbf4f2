#include "ritzkit/kernels.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ritzkit {

namespace {

double pairwise(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise(v, half) + pairwise(v + half, n - half);
}

int g_threads = 0;

}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise(v.data(), v.size()); }

void pairwise_row_reduce(std::vector<double>& rows, std::size_t n_rows, std::size_t cols,
                         std::span<double> out) {
    if (n_rows == 0) {
        for (auto& o : out) o = 0.0;
        return;
    }
    // Stride-doubling tree: row i absorbs row i + stride.
    for (std::size_t stride = 1; stride < n_rows; stride *= 2) {
        for (std::size_t i = 0; i + stride < n_rows; i += 2 * stride) {
            double* dst = rows.data() + i * cols;
            const double* src = rows.data() + (i + stride) * cols;
            for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
        }
    }
    for (std::size_t c = 0; c < cols; ++c) out[c] = rows[c];
}

int kernel_threads() {
#ifdef _OPENMP
    if (g_threads > 0) return g_threads;
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("RITZKIT_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0 && cap < n) n = cap;
        } catch (const std::exception&) {
        }
    }
    return n;
#else
    return 1;
#endif
}

void set_kernel_threads(int n) { g_threads = n; }

std::vector<double> gram_columns(std::span<const double> a, std::size_t n, std::size_t p) {
    std::vector<double> c(p * p, 0.0);
    const long long pp = static_cast<long long>(p);
#pragma omp parallel for schedule(dynamic, 4) num_threads(kernel_threads())
    for (long long ii = 0; ii < pp; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += a[r * p + i] * a[r * p + j];
            c[i * p + j] = s;
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < i; ++j) c[i * p + j] = c[j * p + i];
    return c;
}

std::vector<double> gram_rows(std::span<const double> a, std::size_t n, std::size_t p) {
    std::vector<double> c(n * n, 0.0);
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 4) num_threads(kernel_threads())
    for (long long ii = 0; ii < nn; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) s += a[i * p + k] * a[j * p + k];
            c[i * n + j] = s;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) c[i * n + j] = c[j * n + i];
    return c;
}

namespace serial {

std::vector<double> gram_columns(std::span<const double> a, std::size_t n, std::size_t p) {
    std::vector<double> c(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += a[r * p + i] * a[r * p + j];
            c[i * p + j] = s;
        }
    return c;
}

std::vector<double> gram_rows(std::span<const double> a, std::size_t n, std::size_t p) {
    std::vector<double> c(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < p; ++k) s += a[i * p + k] * a[j * p + k];
            c[i * n + j] = s;
        }
    return c;
}

}  // namespace serial

}  // namespace ritzkit
