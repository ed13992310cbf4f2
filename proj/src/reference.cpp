#include "ritzkit/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ritzkit/error.hpp"

namespace ritzkit {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix with off-diagonal
// sqrt(k/2); weights are sqrt(pi) times the squared first eigenvector components.
// Implicit QL tracking only the first row of the eigenvector matrix.
GaussHermite build_gauss_hermite(std::size_t n) {
    std::vector<double> d(n, 0.0), e(n, 0.0), z(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) e[k - 1] = std::sqrt(static_cast<double>(k) / 2.0);
    z[0] = 1.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (++iter > 60) throw NumericError("Gauss-Hermite eigen-iteration failed");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    const double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    const double zf = z[i + 1];
                    z[i + 1] = s * z[i] + c * zf;
                    z[i] = c * z[i] - s * zf;
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    GaussHermite gh;
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    for (auto i : order) {
        gh.nodes.push_back(d[i]);
        gh.weights.push_back(sqrt_pi * z[i] * z[i]);
    }
    return gh;
}

double cole_hopf_with(const GaussHermite& gh, double t, double x, double nu) {
    const double s = std::sqrt(4.0 * nu * t);
    const double k = 1.0 / (2.0 * std::numbers::pi * nu);
    double emax = -std::numeric_limits<double>::infinity();
    std::vector<double> ex(gh.nodes.size());
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        const double y = x - s * gh.nodes[i];
        ex[i] = -std::cos(std::numbers::pi * y) * k;
        if (gh.weights[i] > 0.0) emax = std::max(emax, ex[i]);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        if (gh.weights[i] == 0.0) continue;
        const double y = x - s * gh.nodes[i];
        const double wi = gh.weights[i] * std::exp(ex[i] - emax);
        num += wi * std::sin(std::numbers::pi * y);
        den += wi;
    }
    return -num / den;
}

}  // namespace

const GaussHermite& gauss_hermite(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, GaussHermite> cache;
    if (n < 1) throw DataError("Gauss-Hermite rule needs n >= 1");
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gauss_hermite(n)).first;
    return it->second;
}

ColeHopfValue burgers_reference_detail(double t, double x, double nu) {
    if (!(t > 0.0)) throw DataError("Cole-Hopf reference needs t > 0");
    if (!(nu > 0.0)) throw DataError("Cole-Hopf reference needs nu > 0");
    ColeHopfValue out;
    double prev = cole_hopf_with(gauss_hermite(64), t, x, nu);
    out.value = prev;
    out.nodes = 64;
    for (std::size_t n : {128u, 256u, 512u}) {
        const double cur = cole_hopf_with(gauss_hermite(n), t, x, nu);
        out.value = cur;
        out.nodes = n;
        if (std::abs(cur - prev) <= 1e-7) {
            out.agreed = true;
            break;
        }
        prev = cur;
    }
    return out;
}

double burgers_reference(double t, double x, double nu) {
    return burgers_reference_detail(t, x, nu).value;
}

// ---------------------------------------------------------------- manufactured

double Factor1D::derivative(double x, int n) const {
    switch (kind) {
        case Kind::constant: return n == 0 ? c : 0.0;
        case Kind::sine:
            return c * std::pow(omega, n) *
                   std::sin(omega * x + phase + n * std::numbers::pi / 2.0);
        case Kind::exponential: return c * std::pow(omega, n) * std::exp(omega * x);
        case Kind::polynomial: {
            std::vector<double> p = poly;
            for (int k = 0; k < n; ++k) {
                if (p.size() <= 1) return 0.0;
                for (std::size_t i = 1; i < p.size(); ++i) p[i - 1] = static_cast<double>(i) * p[i];
                p.pop_back();
            }
            double v = 0.0;
            for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
            return c * v;
        }
    }
    return 0.0;
}

SeparableFunction::SeparableFunction(std::vector<Factor1D> factors)
    : factors_(std::move(factors)) {
    if (factors_.empty()) throw DimensionError("separable function needs d >= 1");
}

double SeparableFunction::value(std::span<const double> x) const {
    return partial(x, MultiIndex::zero(dim()));
}

double SeparableFunction::partial(std::span<const double> x, const MultiIndex& xi) const {
    if (x.size() != dim() || xi.size() != dim()) throw DimensionError("dimension mismatch");
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) v *= factors_[i].derivative(x[i], xi[i]);
    return v;
}

namespace {

Factor1D sine(double omega, double phase = 0.0) {
    Factor1D f;
    f.kind = Factor1D::Kind::sine;
    f.omega = omega;
    f.phase = phase;
    return f;
}

}  // namespace

std::vector<std::string> manufactured_ids() {
    return {"zero", "heat_mode", "sin_sin", "sin_product", "poly_sin"};
}

SeparableFunction manufactured_function(const std::string& id, std::size_t d) {
    constexpr double pi = std::numbers::pi;
    if (d < 1) throw DimensionError("manufactured solution needs d >= 1");
    if (id == "zero") {
        std::vector<Factor1D> fs(d);
        fs[0].c = 0.0;
        return SeparableFunction(fs);
    }
    if (id == "sin_product") return SeparableFunction(std::vector<Factor1D>(d, sine(pi)));
    if (d != 2) throw ConfigError("manufactured solution '" + id + "' is defined for d = 2");
    if (id == "heat_mode") {
        Factor1D decay;
        decay.kind = Factor1D::Kind::exponential;
        decay.omega = -pi * pi;
        return SeparableFunction({decay, sine(pi)});
    }
    if (id == "sin_sin") return SeparableFunction({sine(pi), sine(pi)});
    if (id == "poly_sin") {
        Factor1D poly;
        poly.kind = Factor1D::Kind::polynomial;
        poly.poly = {1.0, 0.0, 1.0};
        return SeparableFunction({poly, sine(pi)});
    }
    throw ConfigError("unknown manufactured solution id '" + id + "'");
}

ManufacturedProblem manufactured_linear(const std::string& id, const LinearOperatorSpec& op,
                                        const Domain& domain, const RobinSpec& robin) {
    robin.validate();
    const std::size_t d = op.dim();
    if (domain.dim() != d) throw DimensionError("domain and operator dimensions differ");
    auto fn = std::make_shared<SeparableFunction>(manufactured_function(id, d));
    auto terms = std::make_shared<std::vector<LinearTerm>>(op.terms().begin(), op.terms().end());
    ManufacturedProblem mp;
    mp.id = id;
    mp.u = ScalarField(id, [fn](std::span<const double> x) { return fn->value(x); });
    mp.f = ScalarField("L(" + id + ")", [fn, terms](std::span<const double> x) {
        double s = 0.0;
        for (const auto& t : *terms) s += t.coeff(x) * fn->partial(x, t.xi);
        return s;
    });
    std::vector<Facet> facets(domain.facets().begin(), domain.facets().end());
    mp.g = ScalarField("B(" + id + ")", [fn, facets, robin, d](std::span<const double> x) {
        double v = robin.alpha * fn->value(x);
        if (robin.beta == 0.0) return v;
        // Face of the point: the facet whose plane is nearest.
        const Facet* best = nullptr;
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& f : facets) {
            const double e = std::abs(x[f.axis] - f.value);
            if (e < dist) {
                dist = e;
                best = &f;
            }
        }
        for (std::size_t i = 0; i < d; ++i)
            if (best->normal[i] != 0.0)
                v += robin.beta * best->normal[i] * fn->partial(x, MultiIndex::unit(d, i));
        return v;
    });
    return mp;
}

ScalarField builtin_field(const std::string& name) {
    if (name == "zero") return ScalarField(0.0);
    if (name == "one") return ScalarField(1.0);
    if (name == "neg_sin_pi_x")
        return ScalarField(name, [](std::span<const double> x) {
            return -std::sin(std::numbers::pi * (x.size() >= 2 ? x[1] : x[0]));
        });
    throw ConfigError("unknown field '" + name + "'");
}

std::string reference_grid_csv(const std::function<double(double, double)>& u,
                               std::span<const double> ts, std::span<const double> xs) {
    std::ostringstream os;
    os << "t,x,u\n";
    char buf[96];
    for (double t : ts)
        for (double x : xs) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, x, u(t, x));
            os << buf;
        }
    return os.str();
}

}  // namespace ritzkit
