#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ritzkit/geometry.hpp"
#include "ritzkit/net_core.hpp"
#include "ritzkit/operators.hpp"

namespace ritzkit {

/// Smooth objective over a flat parameter vector.
class Objective {
public:
    virtual ~Objective() = default;
    virtual std::size_t size() const = 0;
    virtual double value(std::span<const double> theta) const = 0;
    /// Writes the gradient into grad (length size()) and returns the value.
    virtual double value_and_gradient(std::span<const double> theta,
                                      std::span<double> grad) const = 0;
};

enum class LossKind { pinn_linear, pinn_nonlinear, ritz };

/// Empirical objective in the 1/2-mean convention:
///   pinn: J = 1/(2 n1) sum_p (L u - f)^2 + lambda/(2 n2) sum_j (B u - g)^2
///   ritz: J = sum_p w_p e(x_p) + lambda/(2 n2) sum_j (B u - g)^2
/// with Monte Carlo weights w_p = |Omega| / n1. With a cutoff the network enters as eta u
/// and the boundary term is dropped (the homogeneous Dirichlet condition holds exactly).
struct LossSpec {
    LossKind kind = LossKind::pinn_linear;
    std::optional<LinearOperatorSpec> linear;
    std::optional<NonlinearOperatorSpec> nonlinear;
    std::optional<EnergySpec> energy;
    RobinSpec robin;
    ScalarField f = 0.0;
    ScalarField g = 0.0;
    double lambda = 1.0;
    CollocationSet collocation;
    std::optional<CutoffSpec> cutoff;

    static LossSpec pinn(LinearOperatorSpec op, CollocationSet pts, ScalarField f,
                         ScalarField g, RobinSpec robin = {}, double lambda = 1.0);
    static LossSpec pinn(NonlinearOperatorSpec op, CollocationSet pts, ScalarField f,
                         ScalarField g, RobinSpec robin = {}, double lambda = 1.0);
    static LossSpec ritz(EnergySpec energy, CollocationSet pts, ScalarField g,
                         RobinSpec robin = {}, double lambda = 1.0);

    bool has_boundary_term() const;
    std::size_t dim() const { return collocation.d; }
    void validate() const;
};

/// s_p = (L u - f)(x_p) / sqrt(n1), h_j = sqrt(lambda / n2) (B u - g)(x_j).
struct ResidualVectors {
    std::vector<double> s;
    std::vector<double> h;
};

enum class Region { interior, boundary };
enum class KernelMode { parallel, serial };

/// Evaluates the loss of one spec for networks sharing its shape. The parallel mode splits
/// collocation points into fixed blocks and reduces them pairwise, so its results are
/// independent of the thread count. For outer-only training it caches the per-jet feature
/// matrices and reuses them while the inner parameters stay unchanged. The serial mode is
/// a plain per-point loop kept as the reference implementation.
///
/// Not safe for concurrent calls on one instance (it owns mutable scratch state).
class LossEvaluator final : public Objective {
public:
    LossEvaluator(LossSpec spec, NetworkParams params, KernelMode mode = KernelMode::parallel);
    ~LossEvaluator() override;
    LossEvaluator(LossEvaluator&&) noexcept;
    LossEvaluator& operator=(LossEvaluator&&) noexcept;

    const LossSpec& spec() const { return spec_; }
    const NetworkParams& params() const { return params_; }
    NetworkParams& params() { return params_; }
    KernelMode mode() const { return mode_; }

    std::size_t size() const override { return params_.trainable_size(); }
    double value(std::span<const double> theta) const override;
    double value_and_gradient(std::span<const double> theta,
                              std::span<double> grad) const override;

    /// At the stored parameters.
    double loss() const;
    std::vector<double> gradient() const;
    ResidualVectors residual_vectors() const;
    std::size_t n_points(Region r) const;

    /// Row p holds the gradient of residual p over the trainable layout (n x size(),
    /// row-major). Raw residuals when scaled is false, rows of s or h otherwise.
    std::vector<double> residual_jacobian(Region r, bool scaled) const;
    /// Raw residual values at the stored parameters.
    std::vector<double> residual_values(Region r) const;

private:
    struct Cache;
    double evaluate(const NetworkParams& p, double* grad) const;
    double evaluate_region(Region r, const NetworkParams& p, double* grad) const;
    double evaluate_region_serial(Region r, const NetworkParams& p, double* grad) const;
    const Cache* feature_cache(Region r, const NetworkParams& p) const;

    LossSpec spec_;
    NetworkParams params_;
    KernelMode mode_;
    std::unique_ptr<PointResidual> interior_;
    std::unique_ptr<PointResidual> boundary_;
    mutable NetworkParams work_;
    mutable std::unique_ptr<Cache> cache_[2];
};

ResidualVectors residual_vectors(const LossSpec& spec, const NetworkParams& params);
double empirical_loss(const LossSpec& spec, const NetworkParams& params);
std::vector<double> loss_gradient(const LossSpec& spec, const NetworkParams& params);

}  // namespace ritzkit
