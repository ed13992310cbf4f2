#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ritzkit/geometry.hpp"
#include "ritzkit/loss.hpp"
#include "ritzkit/operators.hpp"

namespace ritzkit {

enum class GramProvenance { interior_outer, boundary_outer, full_w, full_a, boundary_feature_gamma };
const char* to_string(GramProvenance p);

/// Dense symmetric matrix, row-major.
struct GramMatrix {
    std::size_t n = 0;
    std::vector<double> data;
    GramProvenance provenance = GramProvenance::interior_outer;

    double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
    double frobenius() const;
    std::string to_csv() const;
};

/// K_ij = <d_a r_i, d_a r_j> over interior or boundary collocation points (raw residuals).
GramMatrix gram_outer(const LossEvaluator& loss, Region which);
GramMatrix gram_outer(const LossSpec& spec, const NetworkParams& params, Region which);

/// Over the stacked [s; h] residuals: G from the (w, b) derivatives, G~ from the a derivatives.
std::pair<GramMatrix, GramMatrix> gram_full(const LossEvaluator& loss);
std::pair<GramMatrix, GramMatrix> gram_full(const LossSpec& spec, const NetworkParams& params);

/// ||K_t - K_0||_F / ||K_0||_F.
double relative_drift(const GramMatrix& k_t, const GramMatrix& k_0);

struct EigenResult {
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // column j is the eigenvector of values[j]; n x n row-major
    std::size_t sweeps = 0;
    bool converged = false;
};

/// Cyclic Jacobi: sweeps until the off-diagonal Frobenius norm is at most
/// 1e-14 ||M||_F, at most 100 sweeps. Throws DataError for non-symmetric input.
EigenResult symmetric_eigen(std::span<const double> m, std::size_t n, bool want_vectors = false);
double min_eigenvalue(std::span<const double> m, std::size_t n);
double min_eigenvalue(const GramMatrix& m);

/// Feature Gram over a facet sample: entries sum_q w_q phi_i(x_q) phi_j(x_q) with
/// phi_k = alpha tanh(z_k) + beta (w_k . n) tanh'(z_k), z_k = w_k . x + b_k.
GramMatrix gamma_feature_gram(const NetworkParams& params, const FacetSample& gamma,
                              const RobinSpec& robin);

struct CoercivityCertificate {
    double lambda_min = 0.0;
    double C = 0.0;              // lambda_min^{-1/2}; infinity when lambda_min <= 0
    double bootstrap_se = 0.0;   // over 10 resamples of the quadrature points
    bool positive = false;       // lambda_min > 0; false flags a too coarse quadrature
    std::size_t n_points = 0;
    GramMatrix gram;
};

/// Quadrature size used by the certificate: max(50 m, 1000).
std::size_t coercivity_quadrature_size(std::size_t m);

/// Requires admissible inner parameters for the facet's normal axis (DataError otherwise).
CoercivityCertificate boundary_coercivity_certificate(const NetworkParams& params,
                                                      const FacetSample& gamma,
                                                      const RobinSpec& robin,
                                                      std::uint64_t bootstrap_seed = 0,
                                                      bool require_admissible = true);

/// det [tanh(w_k . x_i + b_k)]_{ik} for exactly m points (row-major m x d).
double discrete_independence_det(const NetworkParams& params, std::span<const double> points);

/// LU with partial pivoting; exactly 0 when a pivot column vanishes.
double determinant(std::vector<double> a, std::size_t n);

}  // namespace ritzkit
