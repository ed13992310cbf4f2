#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ritzkit/geometry.hpp"
#include "ritzkit/operators.hpp"

namespace ritzkit {

/// Gauss-Hermite rule for the weight exp(-z^2), nodes ascending.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};
/// Cached per n; Golub-Welsch eigenvalues of the Jacobi matrix.
const GaussHermite& gauss_hermite(std::size_t n);

struct ColeHopfValue {
    double value = 0.0;
    std::size_t nodes = 0;   // rule size of the accepted level
    bool agreed = false;     // two successive levels agreed to 1e-7
};

/// Viscous Burgers u_t + u u_x = nu u_xx with u(0, x) = -sin(pi x), via the Cole-Hopf
/// integral ratio in Gauss-Hermite form. Node counts escalate 64 -> 128 -> 256 -> 512 until
/// two successive levels agree to 1e-7. Requires t > 0.
ColeHopfValue burgers_reference_detail(double t, double x, double nu);
double burgers_reference(double t, double x, double nu);

/// One factor of a separable function.
struct Factor1D {
    enum class Kind { constant, sine, exponential, polynomial } kind = Kind::constant;
    double c = 1.0;      // constant value, or amplitude
    double omega = 0.0;  // sine: sin(omega x + phase); exponential: exp(omega x)
    double phase = 0.0;
    std::vector<double> poly;  // polynomial coefficients, lowest degree first

    double derivative(double x, int n) const;
};

/// u*(x) = prod_i factor_i(x_i), with exact partial derivatives of any order.
class SeparableFunction {
public:
    explicit SeparableFunction(std::vector<Factor1D> factors);
    std::size_t dim() const { return factors_.size(); }
    double value(std::span<const double> x) const;
    double partial(std::span<const double> x, const MultiIndex& xi) const;

private:
    std::vector<Factor1D> factors_;
};

/// Manufactured triple for a linear problem: exact solution, source f = L u*, boundary data
/// g = alpha u* + beta du*/dn on the faces of the box.
struct ManufacturedProblem {
    std::string id;
    ScalarField u;
    ScalarField f;
    ScalarField g;
};

/// Shipped ids: zero (any d), heat_mode (e^{-pi^2 t} sin(pi x), d = 2 with t first),
/// sin_sin (sin(pi x0) sin(pi x1)), sin_product (prod_i sin(pi x_i)), poly_sin
/// ((1 + x0^2) sin(pi x1)). Throws ConfigError for unknown ids.
SeparableFunction manufactured_function(const std::string& id, std::size_t d);
std::vector<std::string> manufactured_ids();

ManufacturedProblem manufactured_linear(const std::string& id, const LinearOperatorSpec& op,
                                        const Domain& domain, const RobinSpec& robin = {});

/// Named fields: "zero", "neg_sin_pi_x" (-sin(pi x1), x1 the first spatial coordinate of a
/// time slab), "one". Throws ConfigError for unknown names.
ScalarField builtin_field(const std::string& name);

/// CSV "t,x,u" over the tensor grid.
std::string reference_grid_csv(const std::function<double(double, double)>& u,
                               std::span<const double> ts, std::span<const double> xs);

}  // namespace ritzkit
