#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ritzkit/net_core.hpp"

namespace ritzkit {

/// Scalar field c(x) given as a constant or a callable.
class ScalarField {
public:
    using Fn = std::function<double(std::span<const double>)>;

    ScalarField() : ScalarField(0.0) {}
    ScalarField(double value);  // NOLINT(implicit): constants read naturally at call sites
    ScalarField(std::string name, Fn fn);

    double operator()(std::span<const double> x) const {
        return fn_ ? fn_(x) : value_;
    }
    bool is_constant() const { return !fn_; }
    double constant_value() const { return value_; }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    Fn fn_;
    double value_ = 0.0;
};

/// Scalar nonlinearity h(u) supplied together with its derivative.
struct ScalarFunction {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;

    static ScalarFunction zero();
    static ScalarFunction cubic();
};

struct LinearTerm {
    MultiIndex xi;
    ScalarField coeff;
};

/// L u = sum_xi c_xi(x) d^xi u with a unique term of strictly maximal order.
class LinearOperatorSpec {
public:
    /// Throws DataError when require_admissible and the maximal-order term is not unique.
    explicit LinearOperatorSpec(std::vector<LinearTerm> terms, bool require_admissible = true);

    std::span<const LinearTerm> terms() const { return terms_; }
    const MultiIndex& leading() const { return terms_[leading_].xi; }
    std::size_t dim() const { return terms_.front().xi.size(); }
    int order() const { return leading().order(); }
    bool admissible() const { return admissible_; }

    static LinearOperatorSpec identity(std::size_t d);
    /// sum_i d_ii; not admissible for d >= 2.
    static LinearOperatorSpec laplacian(std::size_t d);
    /// d_t - sum_{i>0} d_ii with coordinate 0 as time.
    static LinearOperatorSpec heat(std::size_t d);

private:
    std::vector<LinearTerm> terms_;
    std::size_t leading_ = 0;
    bool admissible_;
};

/// alpha u + beta du/dn, (alpha, beta) != (0, 0).
struct RobinSpec {
    double alpha = 1.0;
    double beta = 0.0;

    void validate() const;
};

enum class NonlinearKind { burgers, p_laplace_monotone, quasilinear_monotone };

struct NonlinearOperatorSpec {
    NonlinearKind kind = NonlinearKind::burgers;
    double nu = 0.0;  // burgers viscosity
    double p = 2.0;   // p-Laplace exponent
    ScalarField q = 0.0;
    ScalarFunction h = ScalarFunction::zero();

    static NonlinearOperatorSpec burgers(double nu);
    static NonlinearOperatorSpec p_laplace(double p, ScalarField q = 0.0,
                                           ScalarFunction h = ScalarFunction::zero());
    static NonlinearOperatorSpec quasilinear(ScalarField q = 0.0,
                                             ScalarFunction h = ScalarFunction::zero());
    void validate() const;
};

/// Viscosity of the benchmark Burgers problem, 0.01/pi.
double burgers_benchmark_viscosity();

enum class EnergyKind { p_laplace, allen_cahn };

struct EnergySpec {
    EnergyKind kind = EnergyKind::allen_cahn;
    double p = 2.0;
    ScalarField f = 0.0;
    double epsilon = 0.1;

    void validate() const;
};

/// eta(x) = prod_i rho_i(x_i) on a hyperrectangle, where rho_i ramps from 0 at each face
/// to 1 over a margin of margin_fraction * side length via the quintic smoothstep.
/// eta is C^2 with exact polynomial derivatives and equals 1 on the inset plateau.
class CutoffSpec {
public:
    CutoffSpec(std::vector<double> lo, std::vector<double> hi, double margin_fraction = 0.1);

    std::size_t dim() const { return lo_.size(); }
    double margin(std::size_t i) const { return margin_fraction_ * (hi_[i] - lo_[i]); }
    std::span<const double> lo() const { return lo_; }
    std::span<const double> hi() const { return hi_; }
    bool in_plateau(std::span<const double> x) const;

    /// d^xi eta(x); |xi| <= 2 and xi_i <= 2.
    double eval(std::span<const double> x, const MultiIndex& xi) const;

    /// rho_i^{(k)}(t) for k in {0,1,2}.
    double ramp(std::size_t i, double t, int k) const;

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
    double margin_fraction_;
};

double cutoff_eval(const CutoffSpec& cutoff, std::span<const double> x, const MultiIndex& xi);

/// Point data for residual evaluation; `normal` is empty at interior points.
struct PointContext {
    std::span<const double> x;
    std::span<const double> normal;
};

/// A pointwise residual expressed through network jets D_j = d^{xi_j} u(x):
/// value R(x, D) and the partials dR/dD_j. Loss gradients follow by the chain rule
/// through accumulate_jet_gradient.
class PointResidual {
public:
    virtual ~PointResidual() = default;
    virtual std::span<const MultiIndex> jets() const = 0;
    /// `partials` may be empty to skip derivative work.
    virtual double evaluate(const PointContext& pt, std::span<const double> jet,
                            std::span<double> partials) const = 0;
    /// True when every partial is independent of the jet values (linear residuals).
    virtual bool is_linear() const { return false; }
};

/// Jets of order <= max_order in graded order: u, du/dx_i, then the (i <= j) second
/// derivatives in row order.
std::vector<MultiIndex> full_jet_layout(std::size_t d, int max_order);
std::size_t hessian_slot(std::size_t d, std::size_t i, std::size_t j);

/// Maps u-jets to (eta u)-jets on a downward-closed layout by the Leibniz rule.
class CutoffTransform {
public:
    CutoffTransform(const CutoffSpec& cutoff, std::span<const MultiIndex> layout,
                    std::span<const double> x);
    void apply(std::span<const double> u_jet, std::span<double> out) const;
    /// out = T^T partials
    void pullback(std::span<const double> partials, std::span<double> out) const;

private:
    std::size_t n_;
    std::vector<double> t_;  // row-major n x n
};

std::unique_ptr<PointResidual> make_linear_residual(LinearOperatorSpec op, ScalarField f,
                                                    std::optional<CutoffSpec> cutoff = {});
std::unique_ptr<PointResidual> make_burgers_residual(double nu, ScalarField f);
std::unique_ptr<PointResidual> make_monotone_residual(NonlinearOperatorSpec op,
                                                      CutoffSpec cutoff, ScalarField f);
std::unique_ptr<PointResidual> make_robin_residual(RobinSpec robin, std::size_t d,
                                                   ScalarField g);
std::unique_ptr<PointResidual> make_energy_density(EnergySpec spec, std::size_t d,
                                                   std::optional<CutoffSpec> cutoff = {});

/// Evaluates a residual at x for the given network.
double evaluate_residual(const PointResidual& r, const NetworkParams& params,
                         const PointContext& pt);

double apply_linear(const LinearOperatorSpec& op, const NetworkParams& params,
                    std::span<const double> x);
/// alpha u + beta grad u . normal; normal must be unit length within 1e-12.
double boundary_value(const NetworkParams& params, std::span<const double> x,
                      std::span<const double> normal, const RobinSpec& robin);
/// u_t + u u_x - nu u_xx at (t, x).
double burgers_residual(const NetworkParams& params, std::span<const double> tx, double nu);
/// L(eta u) + q eta u + h(eta u) for the two monotone families.
double monotone_residual(const NonlinearOperatorSpec& op, const CutoffSpec& cutoff,
                         const NetworkParams& params, std::span<const double> x);
double energy_density(const EnergySpec& spec, const CutoffSpec* cutoff,
                      const NetworkParams& params, std::span<const double> x);

/// Below this gradient magnitude the |grad|^{p-4} curvature term of the p-Laplacian is 0.
inline constexpr double kGradientSingularityEps = 1e-10;

}  // namespace ritzkit
