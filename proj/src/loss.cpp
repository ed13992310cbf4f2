#include "ritzkit/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>

#include "ritzkit/error.hpp"
#include "ritzkit/kernels.hpp"

namespace ritzkit {

LossSpec LossSpec::pinn(LinearOperatorSpec op, CollocationSet pts, ScalarField f, ScalarField g,
                        RobinSpec robin, double lambda) {
    LossSpec s;
    s.kind = LossKind::pinn_linear;
    s.linear = std::move(op);
    s.collocation = std::move(pts);
    s.f = std::move(f);
    s.g = std::move(g);
    s.robin = robin;
    s.lambda = lambda;
    return s;
}

LossSpec LossSpec::pinn(NonlinearOperatorSpec op, CollocationSet pts, ScalarField f,
                        ScalarField g, RobinSpec robin, double lambda) {
    LossSpec s;
    s.kind = LossKind::pinn_nonlinear;
    s.nonlinear = std::move(op);
    s.collocation = std::move(pts);
    s.f = std::move(f);
    s.g = std::move(g);
    s.robin = robin;
    s.lambda = lambda;
    return s;
}

LossSpec LossSpec::ritz(EnergySpec energy, CollocationSet pts, ScalarField g, RobinSpec robin,
                        double lambda) {
    LossSpec s;
    s.kind = LossKind::ritz;
    s.energy = std::move(energy);
    s.collocation = std::move(pts);
    s.g = std::move(g);
    s.robin = robin;
    s.lambda = lambda;
    return s;
}

bool LossSpec::has_boundary_term() const {
    return !cutoff && collocation.n_boundary() > 0;
}

void LossSpec::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DataError("lambda must be >= 0");
    robin.validate();
    if (collocation.d == 0) throw DataError("empty collocation set");
    if (collocation.n_interior() == 0) throw DataError("loss needs interior collocation points");
    if (collocation.n_boundary() == 0 && !cutoff)
        throw DataError("boundary points may be omitted only when a cutoff enforces the "
                        "boundary condition");
    if (cutoff && cutoff->dim() != collocation.d)
        throw DimensionError("cutoff dimension mismatch");
    switch (kind) {
        case LossKind::pinn_linear:
            if (!linear) throw DataError("linear pinn loss without operator");
            if (linear->dim() != collocation.d) throw DimensionError("operator dimension mismatch");
            break;
        case LossKind::pinn_nonlinear:
            if (!nonlinear) throw DataError("nonlinear pinn loss without operator");
            nonlinear->validate();
            if (nonlinear->kind == NonlinearKind::burgers) {
                if (collocation.d != 2) throw DimensionError("Burgers residual needs d = 2");
                if (cutoff) throw DataError("Burgers residual does not take a cutoff");
            } else if (!cutoff) {
                throw DataError("monotone operator families need a cutoff");
            }
            break;
        case LossKind::ritz:
            if (!energy) throw DataError("ritz loss without energy");
            energy->validate();
            break;
    }
}

struct LossEvaluator::Cache {
    std::vector<double> w;
    std::vector<double> b;
    std::size_t jets = 0;
    std::size_t m = 0;
    std::vector<double> phi;  // [point][jet][neuron]
};

namespace {

constexpr std::size_t kCacheLimit = 40'000'000;  // doubles

std::unique_ptr<PointResidual> make_interior(const LossSpec& s) {
    switch (s.kind) {
        case LossKind::pinn_linear:
            return make_linear_residual(*s.linear, s.f, s.cutoff);
        case LossKind::pinn_nonlinear:
            if (s.nonlinear->kind == NonlinearKind::burgers)
                return make_burgers_residual(s.nonlinear->nu, s.f);
            return make_monotone_residual(*s.nonlinear, *s.cutoff, s.f);
        case LossKind::ritz:
            return make_energy_density(*s.energy, s.collocation.d, s.cutoff);
    }
    return nullptr;
}

struct PointView {
    std::span<const double> x;
    std::span<const double> normal;
};

PointView point_of(const CollocationSet& c, Region r, std::size_t p) {
    if (r == Region::interior) return {c.interior_point(p), {}};
    return {c.boundary_point(p), c.normal(p)};
}

// Contribution alpha R + beta R^2 / 2 of one point; its gradient scale is alpha + beta R.
struct PointWeight {
    double alpha;
    double beta;
};

PointWeight weight_of(const LossSpec& s, Region r, std::size_t p) {
    if (r == Region::boundary)
        return {0.0, s.lambda / static_cast<double>(s.collocation.n_boundary())};
    if (s.kind == LossKind::ritz) return {s.collocation.interior_weights[p], 0.0};
    return {0.0, 1.0 / static_cast<double>(s.collocation.n_interior())};
}

class ErrorTrap {
public:
    template <class F>
    void run(F&& f) {
        try {
            f();
        } catch (...) {
#pragma omp critical(ritzkit_error_trap)
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::exception_ptr error_;
};

}  // namespace

LossEvaluator::LossEvaluator(LossSpec spec, NetworkParams params, KernelMode mode)
    : spec_(std::move(spec)), params_(std::move(params)), mode_(mode) {
    spec_.validate();
    params_.validate();
    if (params_.d != spec_.dim()) throw DimensionError("network and loss dimensions differ");
    interior_ = make_interior(spec_);
    if (spec_.has_boundary_term())
        boundary_ = make_robin_residual(spec_.robin, spec_.dim(), spec_.g);
    work_ = params_;
}

LossEvaluator::~LossEvaluator() = default;
LossEvaluator::LossEvaluator(LossEvaluator&&) noexcept = default;
LossEvaluator& LossEvaluator::operator=(LossEvaluator&&) noexcept = default;

std::size_t LossEvaluator::n_points(Region r) const {
    if (r == Region::interior) return spec_.collocation.n_interior();
    return boundary_ ? spec_.collocation.n_boundary() : 0;
}

const LossEvaluator::Cache* LossEvaluator::feature_cache(Region r, const NetworkParams& p) const {
    if (p.trainable != Trainable::outer_only) return nullptr;
    const PointResidual& res = r == Region::interior ? *interior_ : *boundary_;
    const std::size_t n = n_points(r);
    const auto jets = res.jets();
    if (n * jets.size() * p.m > kCacheLimit) return nullptr;
    auto& slot = cache_[r == Region::interior ? 0 : 1];
    if (slot && slot->m == p.m && slot->w == p.w && slot->b == p.b) return slot.get();

    auto c = std::make_unique<Cache>();
    c->w = p.w;
    c->b = p.b;
    c->m = p.m;
    c->jets = jets.size();
    c->phi.assign(n * c->jets * c->m, 0.0);
    ErrorTrap trap;
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
    for (long long pp = 0; pp < nn; ++pp) {
        trap.run([&] {
            const auto pt = static_cast<std::size_t>(pp);
            const auto x = point_of(spec_.collocation, r, pt).x;
            for (std::size_t j = 0; j < c->jets; ++j) {
                const auto row = feature_derivative_vector(p, x, jets[j]);
                std::copy(row.begin(), row.end(), c->phi.begin() + (pt * c->jets + j) * c->m);
            }
        });
    }
    trap.rethrow();
    slot = std::move(c);
    return slot.get();
}

double LossEvaluator::evaluate_region(Region r, const NetworkParams& p, double* grad) const {
    const std::size_t n = n_points(r);
    if (n == 0) return 0.0;
    const PointResidual& res = r == Region::interior ? *interior_ : *boundary_;
    const auto jets = res.jets();
    const std::size_t nj = jets.size();
    const std::size_t np = p.trainable_size();
    const Cache* cache = feature_cache(r, p);

    const std::size_t nb = (n + kPointBlock - 1) / kPointBlock;
    std::vector<double> block_val(nb, 0.0);
    std::vector<double> block_grad(grad ? nb * np : 0, 0.0);
    ErrorTrap trap;
    const long long nbb = static_cast<long long>(nb);
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
    for (long long bb = 0; bb < nbb; ++bb) {
        trap.run([&] {
            const auto blk = static_cast<std::size_t>(bb);
            std::vector<double> jet(nj), part(grad ? nj : 0);
            std::span<double> g;
            if (grad) g = {block_grad.data() + blk * np, np};
            double vsum = 0.0;
            const std::size_t end = std::min(n, (blk + 1) * kPointBlock);
            for (std::size_t pt = blk * kPointBlock; pt < end; ++pt) {
                const auto pv = point_of(spec_.collocation, r, pt);
                const double* phi = cache ? cache->phi.data() + pt * nj * p.m : nullptr;
                if (phi) {
                    for (std::size_t j = 0; j < nj; ++j) {
                        double s = 0.0;
                        const double* row = phi + j * p.m;
                        for (std::size_t k = 0; k < p.m; ++k) s += row[k] * p.a[k];
                        jet[j] = s;
                    }
                } else {
                    jet_values(p, pv.x, jets, jet);
                }
                const double R = res.evaluate({pv.x, pv.normal}, jet, part);
                const PointWeight w = weight_of(spec_, r, pt);
                vsum += w.alpha * R + 0.5 * w.beta * R * R;
                if (!grad) continue;
                const double scale = w.alpha + w.beta * R;
                if (phi) {
                    for (std::size_t j = 0; j < nj; ++j) {
                        const double cj = scale * part[j];
                        if (cj == 0.0) continue;
                        const double* row = phi + j * p.m;
                        for (std::size_t k = 0; k < p.m; ++k) g[k] += cj * row[k];
                    }
                } else {
                    accumulate_jet_gradient(p, pv.x, jets, part, scale, g);
                }
            }
            block_val[blk] = vsum;
        });
    }
    trap.rethrow();
    if (grad) {
        std::vector<double> total(np);
        pairwise_row_reduce(block_grad, nb, np, total);
        for (std::size_t i = 0; i < np; ++i) grad[i] += total[i];
    }
    return pairwise_sum(block_val);
}

double LossEvaluator::evaluate_region_serial(Region r, const NetworkParams& p,
                                             double* grad) const {
    const std::size_t n = n_points(r);
    if (n == 0) return 0.0;
    const PointResidual& res = r == Region::interior ? *interior_ : *boundary_;
    const auto jets = res.jets();
    const std::size_t np = p.trainable_size();
    std::vector<double> jet(jets.size()), part(grad ? jets.size() : 0);
    double total = 0.0;
    for (std::size_t pt = 0; pt < n; ++pt) {
        const auto pv = point_of(spec_.collocation, r, pt);
        jet_values(p, pv.x, jets, jet);
        const double R = res.evaluate({pv.x, pv.normal}, jet, part);
        const PointWeight w = weight_of(spec_, r, pt);
        total += w.alpha * R + 0.5 * w.beta * R * R;
        if (grad) accumulate_jet_gradient(p, pv.x, jets, part, w.alpha + w.beta * R, {grad, np});
    }
    return total;
}

double LossEvaluator::evaluate(const NetworkParams& p, double* grad) const {
    if (grad) std::fill(grad, grad + p.trainable_size(), 0.0);
    if (mode_ == KernelMode::serial)
        return evaluate_region_serial(Region::interior, p, grad) +
               evaluate_region_serial(Region::boundary, p, grad);
    return evaluate_region(Region::interior, p, grad) +
           evaluate_region(Region::boundary, p, grad);
}

namespace {

// Frozen parts of the stored parameters may be edited through params(); carry them over.
void sync_frozen(const NetworkParams& src, NetworkParams& dst) {
    if (dst.m != src.m || dst.d != src.d || dst.trainable != src.trainable) {
        dst = src;
        return;
    }
    dst.scaling = src.scaling;
    if (src.trainable == Trainable::outer_only) {
        dst.w = src.w;
        dst.b = src.b;
    }
}

}  // namespace

double LossEvaluator::value(std::span<const double> theta) const {
    sync_frozen(params_, work_);
    work_.set_trainable(theta);
    return evaluate(work_, nullptr);
}

double LossEvaluator::value_and_gradient(std::span<const double> theta,
                                         std::span<double> grad) const {
    if (grad.size() != size()) throw DimensionError("gradient buffer has wrong length");
    sync_frozen(params_, work_);
    work_.set_trainable(theta);
    return evaluate(work_, grad.data());
}

double LossEvaluator::loss() const { return evaluate(params_, nullptr); }

std::vector<double> LossEvaluator::gradient() const {
    std::vector<double> g(size());
    evaluate(params_, g.data());
    return g;
}

std::vector<double> LossEvaluator::residual_values(Region r) const {
    const std::size_t n = n_points(r);
    std::vector<double> out(n);
    if (n == 0) return out;
    const PointResidual& res = r == Region::interior ? *interior_ : *boundary_;
    const auto jets = res.jets();
    ErrorTrap trap;
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
    for (long long pp = 0; pp < nn; ++pp) {
        trap.run([&] {
            const auto pt = static_cast<std::size_t>(pp);
            const auto pv = point_of(spec_.collocation, r, pt);
            std::vector<double> jet(jets.size());
            jet_values(params_, pv.x, jets, jet);
            out[pt] = res.evaluate({pv.x, pv.normal}, jet, {});
        });
    }
    trap.rethrow();
    return out;
}

ResidualVectors LossEvaluator::residual_vectors() const {
    if (spec_.kind == LossKind::ritz)
        throw ConfigError("residual vectors are defined for pinn losses only");
    ResidualVectors rv;
    rv.s = residual_values(Region::interior);
    const double si = 1.0 / std::sqrt(static_cast<double>(rv.s.size()));
    for (auto& v : rv.s) v *= si;
    rv.h = residual_values(Region::boundary);
    if (!rv.h.empty()) {
        const double sb = std::sqrt(spec_.lambda / static_cast<double>(rv.h.size()));
        for (auto& v : rv.h) v *= sb;
    }
    return rv;
}

std::vector<double> LossEvaluator::residual_jacobian(Region r, bool scaled) const {
    if (r == Region::interior && spec_.kind == LossKind::ritz)
        throw ConfigError("interior residual jacobian is defined for pinn losses only");
    const std::size_t n = n_points(r);
    const std::size_t np = size();
    std::vector<double> out(n * np, 0.0);
    if (n == 0) return out;
    const PointResidual& res = r == Region::interior ? *interior_ : *boundary_;
    const auto jets = res.jets();
    double scale = 1.0;
    if (scaled)
        scale = r == Region::interior ? 1.0 / std::sqrt(static_cast<double>(n))
                                      : std::sqrt(spec_.lambda / static_cast<double>(n));
    ErrorTrap trap;
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(kernel_threads())
    for (long long pp = 0; pp < nn; ++pp) {
        trap.run([&] {
            const auto pt = static_cast<std::size_t>(pp);
            const auto pv = point_of(spec_.collocation, r, pt);
            std::vector<double> jet(jets.size()), part(jets.size());
            jet_values(params_, pv.x, jets, jet);
            res.evaluate({pv.x, pv.normal}, jet, part);
            accumulate_jet_gradient(params_, pv.x, jets, part, scale,
                                    {out.data() + pt * np, np});
        });
    }
    trap.rethrow();
    return out;
}

ResidualVectors residual_vectors(const LossSpec& spec, const NetworkParams& params) {
    return LossEvaluator(spec, params).residual_vectors();
}

double empirical_loss(const LossSpec& spec, const NetworkParams& params) {
    return LossEvaluator(spec, params).loss();
}

std::vector<double> loss_gradient(const LossSpec& spec, const NetworkParams& params) {
    return LossEvaluator(spec, params).gradient();
}

}  // namespace ritzkit
