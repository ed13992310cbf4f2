#include "ritzkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "ritzkit/error.hpp"
#include "ritzkit/kernels.hpp"

namespace ritzkit {

const char* to_string(GramProvenance p) {
    switch (p) {
        case GramProvenance::interior_outer: return "interior_outer";
        case GramProvenance::boundary_outer: return "boundary_outer";
        case GramProvenance::full_w: return "full_w";
        case GramProvenance::full_a: return "full_a";
        case GramProvenance::boundary_feature_gamma: return "boundary_feature_gamma";
    }
    return "?";
}

double GramMatrix::frobenius() const {
    double s = 0.0;
    for (double v : data) s += v * v;
    return std::sqrt(s);
}

std::string GramMatrix::to_csv() const {
    std::ostringstream os;
    char buf[40];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data[i * n + j]);
            os << (j ? "," : "") << buf;
        }
        os << "\n";
    }
    return os.str();
}

namespace {

// Keeps columns [c0, c1) of an n x p row-major matrix.
std::vector<double> take_columns(const std::vector<double>& a, std::size_t n, std::size_t p,
                                 std::size_t c0, std::size_t c1) {
    std::vector<double> out(n * (c1 - c0));
    for (std::size_t i = 0; i < n; ++i)
        std::copy(a.begin() + i * p + c0, a.begin() + i * p + c1, out.begin() + i * (c1 - c0));
    return out;
}

}  // namespace

GramMatrix gram_outer(const LossEvaluator& loss, Region which) {
    const std::size_t n = loss.n_points(which);
    const std::size_t p = loss.size();
    const std::size_t m = loss.params().m;
    auto jac = loss.residual_jacobian(which, false);
    if (p != m) jac = take_columns(jac, n, p, 0, m);
    GramMatrix g;
    g.n = n;
    g.data = gram_rows(jac, n, m);
    g.provenance = which == Region::interior ? GramProvenance::interior_outer
                                             : GramProvenance::boundary_outer;
    return g;
}

GramMatrix gram_outer(const LossSpec& spec, const NetworkParams& params, Region which) {
    return gram_outer(LossEvaluator(spec, params), which);
}

std::pair<GramMatrix, GramMatrix> gram_full(const LossEvaluator& loss) {
    if (loss.params().trainable != Trainable::full)
        throw ConfigError("full Gram matrices need all parameters trainable");
    const std::size_t p = loss.size();
    const std::size_t m = loss.params().m;
    auto ji = loss.residual_jacobian(Region::interior, true);
    auto jb = loss.residual_jacobian(Region::boundary, true);
    const std::size_t n1 = loss.n_points(Region::interior);
    const std::size_t n2 = loss.n_points(Region::boundary);
    ji.insert(ji.end(), jb.begin(), jb.end());
    const std::size_t n = n1 + n2;
    GramMatrix g, gt;
    g.n = gt.n = n;
    g.provenance = GramProvenance::full_w;
    gt.provenance = GramProvenance::full_a;
    g.data = gram_rows(take_columns(ji, n, p, m, p), n, p - m);
    gt.data = gram_rows(take_columns(ji, n, p, 0, m), n, m);
    return {std::move(g), std::move(gt)};
}

std::pair<GramMatrix, GramMatrix> gram_full(const LossSpec& spec, const NetworkParams& params) {
    return gram_full(LossEvaluator(spec, params));
}

double relative_drift(const GramMatrix& k_t, const GramMatrix& k_0) {
    if (k_t.n != k_0.n || k_t.provenance != k_0.provenance)
        throw DimensionError("drift needs Gram matrices of the same shape and provenance");
    const double base = k_0.frobenius();
    if (base == 0.0) throw NumericError("initial Gram matrix has zero norm");
    double s = 0.0;
    for (std::size_t i = 0; i < k_t.data.size(); ++i) {
        const double diff = k_t.data[i] - k_0.data[i];
        s += diff * diff;
    }
    return std::sqrt(s) / base;
}

// ---------------------------------------------------------------- Jacobi

EigenResult symmetric_eigen(std::span<const double> m, std::size_t n, bool want_vectors) {
    if (m.size() != n * n) throw DimensionError("matrix size does not match n");
    double fro = 0.0, amax = 0.0;
    for (double v : m) {
        fro += v * v;
        amax = std::max(amax, std::abs(v));
    }
    fro = std::sqrt(fro);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(m[i * n + j] - m[j * n + i]) > 1e-12 * std::max(amax, 1e-300))
                throw DataError("matrix is not symmetric");

    std::vector<double> a(m.begin(), m.end());
    std::vector<double> v;
    if (want_vectors) {
        v.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    }
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
        return std::sqrt(s);
    };
    const double threshold = 1e-14 * fro;
    EigenResult res;
    while (res.sweeps < 100) {
        if (off_norm() <= threshold) {
            res.converged = true;
            break;
        }
        ++res.sweeps;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a[r * n + p], arq = a[r * n + q];
                    a[r * n + p] = a[p * n + r] = c * arp - s * arq;
                    a[r * n + q] = a[q * n + r] = s * arp + c * arq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = a[q * n + p] = 0.0;
                if (want_vectors) {
                    for (std::size_t r = 0; r < n; ++r) {
                        const double vrp = v[r * n + p], vrq = v[r * n + q];
                        v[r * n + p] = c * vrp - s * vrq;
                        v[r * n + q] = s * vrp + c * vrq;
                    }
                }
            }
        }
    }
    if (!res.converged && off_norm() <= threshold) res.converged = true;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });
    res.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) res.values[k] = a[order[k] * n + order[k]];
    if (want_vectors) {
        res.vectors.assign(n * n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t r = 0; r < n; ++r) res.vectors[r * n + k] = v[r * n + order[k]];
    }
    return res;
}

double min_eigenvalue(std::span<const double> m, std::size_t n) {
    if (n == 0) throw DimensionError("empty matrix");
    const auto r = symmetric_eigen(m, n, false);
    if (!r.converged) throw NumericError("Jacobi eigensolver did not converge in 100 sweeps");
    return r.values.front();
}

double min_eigenvalue(const GramMatrix& m) { return min_eigenvalue(m.data, m.n); }

// ---------------------------------------------------------------- coercivity

namespace {

// Feature rows phi_k(x_q) (n_q x m), weighted by sqrt(w_q).
std::vector<double> gamma_features(const NetworkParams& params, const FacetSample& gamma,
                                   const RobinSpec& robin) {
    const std::size_t m = params.m, d = params.d, nq = gamma.size();
    std::vector<double> wn(m, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t i = 0; i < d; ++i) wn[k] += params.weight(k, i) * gamma.normal[i];
    std::vector<double> rows(nq * m);
    for (std::size_t q = 0; q < nq; ++q) {
        const auto x = gamma.point(q);
        const double sw = std::sqrt(gamma.weights[q]);
        for (std::size_t k = 0; k < m; ++k) {
            double z = params.b[k];
            for (std::size_t i = 0; i < d; ++i) z += params.weight(k, i) * x[i];
            const double s = std::tanh(z);
            rows[q * m + k] = sw * (robin.alpha * s + robin.beta * wn[k] * (1.0 - s * s));
        }
    }
    return rows;
}

}  // namespace

GramMatrix gamma_feature_gram(const NetworkParams& params, const FacetSample& gamma,
                              const RobinSpec& robin) {
    params.validate();
    robin.validate();
    if (gamma.d != params.d) throw DimensionError("facet sample dimension mismatch");
    GramMatrix g;
    g.n = params.m;
    g.provenance = GramProvenance::boundary_feature_gamma;
    g.data = gram_columns(gamma_features(params, gamma, robin), gamma.size(), params.m);
    return g;
}

std::size_t coercivity_quadrature_size(std::size_t m) { return std::max<std::size_t>(50 * m, 1000); }

CoercivityCertificate boundary_coercivity_certificate(const NetworkParams& params,
                                                      const FacetSample& gamma,
                                                      const RobinSpec& robin,
                                                      std::uint64_t bootstrap_seed,
                                                      bool require_admissible) {
    if (gamma.size() < params.m)
        throw DataError("coercivity audit needs at least m quadrature points on the facet");
    if (require_admissible) {
        std::size_t axis = 0;
        for (std::size_t i = 0; i < gamma.normal.size(); ++i)
            if (gamma.normal[i] != 0.0) axis = i;
        const auto rep = check_admissible(params, axis);
        if (!rep.ok) throw DataError("inner parameters are not admissible for this facet");
    }
    CoercivityCertificate cert;
    cert.gram = gamma_feature_gram(params, gamma, robin);
    cert.n_points = gamma.size();
    cert.lambda_min = min_eigenvalue(cert.gram);
    cert.positive = cert.lambda_min > 0.0;
    cert.C = cert.positive ? 1.0 / std::sqrt(cert.lambda_min)
                           : std::numeric_limits<double>::infinity();

    // Bootstrap over the quadrature points.
    const std::size_t nq = gamma.size(), m = params.m;
    const auto rows = gamma_features(params, gamma, robin);
    CounterRng rng(bootstrap_seed, streams::audit);
    std::vector<double> lam;
    std::vector<double> resampled(nq * m);
    for (int rep = 0; rep < 10; ++rep) {
        for (std::size_t q = 0; q < nq; ++q) {
            const auto src = static_cast<std::size_t>(rng.uniform() * static_cast<double>(nq));
            std::copy(rows.begin() + std::min(src, nq - 1) * m,
                      rows.begin() + (std::min(src, nq - 1) + 1) * m, resampled.begin() + q * m);
        }
        lam.push_back(min_eigenvalue(gram_columns(resampled, nq, m), m));
    }
    const double mean = std::accumulate(lam.begin(), lam.end(), 0.0) / 10.0;
    double var = 0.0;
    for (double l : lam) var += (l - mean) * (l - mean);
    cert.bootstrap_se = std::sqrt(var / 9.0);
    return cert;
}

double determinant(std::vector<double> a, std::size_t n) {
    if (a.size() != n * n) throw DimensionError("matrix size does not match n");
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
        if (a[piv * n + k] == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
            det = -det;
        }
        const double pk = a[k * n + k];
        det *= pk;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i * n + k] / pk;
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
        }
    }
    return det;
}

double discrete_independence_det(const NetworkParams& params, std::span<const double> points) {
    params.validate();
    const std::size_t m = params.m, d = params.d;
    if (points.size() != m * d) throw DimensionError("need exactly m points of dimension d");
    std::vector<double> s(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < m; ++k) {
            double z = params.b[k];
            for (std::size_t c = 0; c < d; ++c) z += params.weight(k, c) * points[i * d + c];
            s[i * m + k] = std::tanh(z);
        }
    return determinant(std::move(s), m);
}

}  // namespace ritzkit
