#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ritzkit {

/// Points per work block. Reductions run over blocks in a fixed tree order, so results do
/// not depend on the number of threads.
inline constexpr std::size_t kPointBlock = 64;

/// Fixed-order pairwise sum.
double pairwise_sum(std::span<const double> v);

/// rows x cols row-major; returns the column sums, reducing rows pairwise in fixed order.
/// Overwrites `rows` as scratch.
void pairwise_row_reduce(std::vector<double>& rows, std::size_t n_rows, std::size_t cols,
                         std::span<double> out);

/// Threads used by parallel kernels; honours RITZKIT_THREADS when set.
int kernel_threads();
void set_kernel_threads(int n);

/// Dense C = A^T A for A (n x p row-major), giving p x p; parallel over output rows.
std::vector<double> gram_columns(std::span<const double> a, std::size_t n, std::size_t p);
/// Dense C = A A^T for A (n x p row-major), giving n x n; parallel over output rows.
std::vector<double> gram_rows(std::span<const double> a, std::size_t n, std::size_t p);

namespace serial {
std::vector<double> gram_columns(std::span<const double> a, std::size_t n, std::size_t p);
std::vector<double> gram_rows(std::span<const double> a, std::size_t n, std::size_t p);
}  // namespace serial

}  // namespace ritzkit
