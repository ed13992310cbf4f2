#include "ritzkit/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ritzkit/error.hpp"

namespace ritzkit {

ScalarField::ScalarField(double value) : name_(std::to_string(value)), value_(value) {}

ScalarField::ScalarField(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

ScalarFunction ScalarFunction::zero() {
    return {"zero", [](double) { return 0.0; }, [](double) { return 0.0; }};
}

ScalarFunction ScalarFunction::cubic() {
    return {"cubic", [](double u) { return u * u * u; }, [](double u) { return 3.0 * u * u; }};
}

LinearOperatorSpec::LinearOperatorSpec(std::vector<LinearTerm> terms, bool require_admissible)
    : terms_(std::move(terms)), admissible_(true) {
    if (terms_.empty()) throw DataError("linear operator needs at least one term");
    const std::size_t d = terms_.front().xi.size();
    int best = -1;
    int count_best = 0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        if (t.xi.size() != d) throw DimensionError("linear operator terms differ in dimension");
        if (t.xi.order() > kMaxDerivativeOrder)
            throw OrderExceeded("linear operator term " + t.xi.to_string() +
                                " exceeds the maximum derivative order");
        if (t.coeff.is_constant() && t.coeff.constant_value() == 0.0) continue;
        if (t.xi.order() > best) {
            best = t.xi.order();
            count_best = 1;
            leading_ = i;
        } else if (t.xi.order() == best) {
            ++count_best;
        }
    }
    if (best < 0) throw DataError("linear operator has no nonzero term");
    admissible_ = count_best == 1;
    if (require_admissible && !admissible_)
        throw DataError("linear operator must have a unique term of maximal order");
}

LinearOperatorSpec LinearOperatorSpec::identity(std::size_t d) {
    return LinearOperatorSpec({{MultiIndex::zero(d), 1.0}});
}

LinearOperatorSpec LinearOperatorSpec::laplacian(std::size_t d) {
    std::vector<LinearTerm> terms;
    for (std::size_t i = 0; i < d; ++i) terms.push_back({MultiIndex::unit(d, i, 2), 1.0});
    return LinearOperatorSpec(std::move(terms), false);
}

LinearOperatorSpec LinearOperatorSpec::heat(std::size_t d) {
    if (d < 2) throw DimensionError("heat operator needs a time and a space coordinate");
    std::vector<LinearTerm> terms{{MultiIndex::unit(d, 0), 1.0}};
    for (std::size_t i = 1; i < d; ++i) terms.push_back({MultiIndex::unit(d, i, 2), -1.0});
    return LinearOperatorSpec(std::move(terms));
}

void RobinSpec::validate() const {
    if (alpha == 0.0 && beta == 0.0) throw DataError("Robin coefficients are both zero");
}

NonlinearOperatorSpec NonlinearOperatorSpec::burgers(double nu) {
    NonlinearOperatorSpec s;
    s.kind = NonlinearKind::burgers;
    s.nu = nu;
    return s;
}

NonlinearOperatorSpec NonlinearOperatorSpec::p_laplace(double p, ScalarField q, ScalarFunction h) {
    NonlinearOperatorSpec s;
    s.kind = NonlinearKind::p_laplace_monotone;
    s.p = p;
    s.q = std::move(q);
    s.h = std::move(h);
    s.validate();
    return s;
}

NonlinearOperatorSpec NonlinearOperatorSpec::quasilinear(ScalarField q, ScalarFunction h) {
    NonlinearOperatorSpec s;
    s.kind = NonlinearKind::quasilinear_monotone;
    s.q = std::move(q);
    s.h = std::move(h);
    s.validate();
    return s;
}

void NonlinearOperatorSpec::validate() const {
    if (kind == NonlinearKind::p_laplace_monotone && !(p >= 2.0))
        throw DataError("p-Laplace exponent must satisfy p >= 2");
    if (kind != NonlinearKind::burgers) {
        if (!h.value || !h.derivative) throw DataError("h(u) needs a value and a derivative");
        if (h.value(0.0) != 0.0) throw DataError("h(0) must vanish");
        if (q.is_constant() && q.constant_value() < 0.0) throw DataError("q must be >= 0");
    }
}

double burgers_benchmark_viscosity() { return 0.01 / std::numbers::pi; }

void EnergySpec::validate() const {
    if (kind == EnergyKind::p_laplace && !(p >= 2.0))
        throw DataError("p-Laplace energy exponent must satisfy p >= 2");
    if (kind == EnergyKind::allen_cahn && !(epsilon > 0.0))
        throw DataError("Allen-Cahn epsilon must be positive");
}

// ---------------------------------------------------------------- cutoff

CutoffSpec::CutoffSpec(std::vector<double> lo, std::vector<double> hi, double margin_fraction)
    : lo_(std::move(lo)), hi_(std::move(hi)), margin_fraction_(margin_fraction) {
    if (lo_.size() != hi_.size() || lo_.empty())
        throw DimensionError("cutoff bounds differ in dimension");
    for (std::size_t i = 0; i < lo_.size(); ++i)
        if (!(lo_[i] < hi_[i])) throw DataError("cutoff box is degenerate");
    if (!(margin_fraction_ > 0.0 && margin_fraction_ < 0.5))
        throw DataError("cutoff margin fraction must lie in (0, 0.5)");
}

bool CutoffSpec::in_plateau(std::span<const double> x) const {
    for (std::size_t i = 0; i < dim(); ++i)
        if (x[i] < lo_[i] + margin(i) || x[i] > hi_[i] - margin(i)) return false;
    return true;
}

namespace {

// quintic smoothstep 10 s^3 - 15 s^4 + 6 s^5 and its first two derivatives
double smoothstep(double s, int k) {
    s = std::clamp(s, 0.0, 1.0);
    switch (k) {
        case 0: return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
        case 1: return 30.0 * s * s * (1.0 - s) * (1.0 - s);
        case 2: return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
        default: throw OrderExceeded("smoothstep derivative order above 2");
    }
}

}  // namespace

double CutoffSpec::ramp(std::size_t i, double t, int k) const {
    const double delta = margin(i);
    if (t <= lo_[i] + delta) {
        const double s = (t - lo_[i]) / delta;
        if (s <= 0.0) return 0.0;
        return smoothstep(s, k) / std::pow(delta, k);
    }
    if (t >= hi_[i] - delta) {
        const double s = (hi_[i] - t) / delta;
        if (s <= 0.0) return 0.0;
        const double sign = (k % 2 == 1) ? -1.0 : 1.0;
        return sign * smoothstep(s, k) / std::pow(delta, k);
    }
    return k == 0 ? 1.0 : 0.0;
}

double CutoffSpec::eval(std::span<const double> x, const MultiIndex& xi) const {
    if (x.size() != dim() || xi.size() != dim()) throw DimensionError("cutoff dimension mismatch");
    if (xi.order() > 2) throw OrderExceeded("cutoff derivatives are available up to order 2");
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        v *= ramp(i, x[i], xi[i]);
        if (v == 0.0) return 0.0;
    }
    return v;
}

double cutoff_eval(const CutoffSpec& cutoff, std::span<const double> x, const MultiIndex& xi) {
    return cutoff.eval(x, xi);
}

// ---------------------------------------------------------------- jets

std::vector<MultiIndex> full_jet_layout(std::size_t d, int max_order) {
    return multi_indices_up_to(d, max_order);
}

std::size_t hessian_slot(std::size_t d, std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return 1 + d + i * d - i * (i - 1) / 2 + (j - i);
}

namespace {

std::size_t find_slot(std::span<const MultiIndex> layout, const MultiIndex& xi) {
    for (std::size_t k = 0; k < layout.size(); ++k)
        if (layout[k] == xi) return k;
    throw DataError("multi-index " + xi.to_string() + " missing from jet layout");
}

int binomial_small(int n, int k) {
    int r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double norm_sq(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

CutoffTransform::CutoffTransform(const CutoffSpec& cutoff, std::span<const MultiIndex> layout,
                                 std::span<const double> x)
    : n_(layout.size()), t_(layout.size() * layout.size(), 0.0) {
    const std::size_t d = cutoff.dim();
    std::vector<int> diff(d);
    for (std::size_t r = 0; r < n_; ++r) {
        const auto& xi = layout[r];
        for (std::size_t c = 0; c < n_; ++c) {
            const auto& nu = layout[c];
            bool below = true;
            int coef = 1;
            for (std::size_t i = 0; i < d && below; ++i) {
                if (nu[i] > xi[i]) below = false;
                else {
                    diff[i] = xi[i] - nu[i];
                    coef *= binomial_small(xi[i], nu[i]);
                }
            }
            if (!below) continue;
            t_[r * n_ + c] = coef * cutoff.eval(x, MultiIndex(diff));
        }
    }
}

void CutoffTransform::apply(std::span<const double> u_jet, std::span<double> out) const {
    for (std::size_t r = 0; r < n_; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < n_; ++c) s += t_[r * n_ + c] * u_jet[c];
        out[r] = s;
    }
}

void CutoffTransform::pullback(std::span<const double> partials, std::span<double> out) const {
    for (std::size_t c = 0; c < n_; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < n_; ++r) s += t_[r * n_ + c] * partials[r];
        out[c] = s;
    }
}

namespace {

// Wraps a residual on eta*u jets so that it consumes u jets.
template <class Inner>
double with_cutoff(const std::optional<CutoffSpec>& cutoff, std::span<const MultiIndex> layout,
                   const PointContext& pt, std::span<const double> jet,
                   std::span<double> partials, Inner&& inner) {
    if (!cutoff) return inner(jet, partials);
    CutoffTransform tr(*cutoff, layout, pt.x);
    std::vector<double> tilde(jet.size());
    tr.apply(jet, tilde);
    if (partials.empty()) return inner(std::span<const double>(tilde), std::span<double>{});
    std::vector<double> ptilde(jet.size());
    const double v = inner(std::span<const double>(tilde), std::span<double>(ptilde));
    tr.pullback(ptilde, partials);
    return v;
}

class LinearResidual final : public PointResidual {
public:
    LinearResidual(LinearOperatorSpec op, ScalarField f, std::optional<CutoffSpec> cutoff)
        : op_(std::move(op)), f_(std::move(f)), cutoff_(std::move(cutoff)) {
        if (cutoff_) {
            if (op_.order() > 2)
                throw OrderExceeded("cutoff ansatz supports operators up to order 2");
            if (cutoff_->dim() != op_.dim()) throw DimensionError("cutoff dimension mismatch");
            layout_ = full_jet_layout(op_.dim(), op_.order());
        } else {
            for (const auto& t : op_.terms()) {
                bool present = false;
                for (const auto& xi : layout_) present = present || xi == t.xi;
                if (!present) layout_.push_back(t.xi);
            }
        }
        for (const auto& t : op_.terms()) slots_.push_back(find_slot(layout_, t.xi));
    }

    std::span<const MultiIndex> jets() const override { return layout_; }
    bool is_linear() const override { return true; }

    double evaluate(const PointContext& pt, std::span<const double> jet,
                    std::span<double> partials) const override {
        return with_cutoff(cutoff_, layout_, pt, jet, partials,
                           [&](std::span<const double> v, std::span<double> dv) {
                               if (!dv.empty()) std::fill(dv.begin(), dv.end(), 0.0);
                               double r = -f_(pt.x);
                               const auto terms = op_.terms();
                               for (std::size_t k = 0; k < terms.size(); ++k) {
                                   const double c = terms[k].coeff(pt.x);
                                   r += c * v[slots_[k]];
                                   if (!dv.empty()) dv[slots_[k]] += c;
                               }
                               return r;
                           });
    }

private:
    LinearOperatorSpec op_;
    ScalarField f_;
    std::optional<CutoffSpec> cutoff_;
    std::vector<MultiIndex> layout_;
    std::vector<std::size_t> slots_;
};

class BurgersResidual final : public PointResidual {
public:
    BurgersResidual(double nu, ScalarField f)
        : nu_(nu), f_(std::move(f)),
          layout_{MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{0, 1}, MultiIndex{0, 2}} {}

    std::span<const MultiIndex> jets() const override { return layout_; }

    double evaluate(const PointContext& pt, std::span<const double> v,
                    std::span<double> dv) const override {
        if (pt.x.size() != 2) throw DimensionError("Burgers residual needs (t, x) points");
        const double u = v[0], ut = v[1], ux = v[2], uxx = v[3];
        if (!dv.empty()) {
            dv[0] = ux;
            dv[1] = 1.0;
            dv[2] = u;
            dv[3] = -nu_;
        }
        return ut + u * ux - nu_ * uxx - f_(pt.x);
    }

private:
    double nu_;
    ScalarField f_;
    std::vector<MultiIndex> layout_;
};

class MonotoneResidual final : public PointResidual {
public:
    MonotoneResidual(NonlinearOperatorSpec op, CutoffSpec cutoff, ScalarField f)
        : op_(std::move(op)), cutoff_(std::move(cutoff)), f_(std::move(f)),
          layout_(full_jet_layout(cutoff_->dim(), 2)) {
        if (op_.kind == NonlinearKind::burgers)
            throw DataError("Burgers is not a monotone operator family");
        op_.validate();
    }

    std::span<const MultiIndex> jets() const override { return layout_; }

    double evaluate(const PointContext& pt, std::span<const double> jet,
                    std::span<double> partials) const override {
        return with_cutoff(cutoff_, layout_, pt, jet, partials,
                           [&](std::span<const double> v, std::span<double> dv) {
                               return on_tilde(pt.x, v, dv);
                           });
    }

private:
    double on_tilde(std::span<const double> x, std::span<const double> v,
                    std::span<double> dv) const {
        const std::size_t d = cutoff_->dim();
        const double u = v[0];
        const auto g = v.subspan(1, d);
        const double q = op_.q(x);
        if (q < 0.0) throw DataError("q(x) < 0 at an evaluated point");
        const double hu = op_.h.value(u);
        if (hu * u < 0.0) throw DataError("h(u) u < 0 at an evaluated value");

        double lap = 0.0;
        for (std::size_t i = 0; i < d; ++i) lap += v[hessian_slot(d, i, i)];
        auto hess = [&](std::size_t i, std::size_t j) { return v[hessian_slot(d, i, j)]; };
        double gHg = 0.0;
        std::vector<double> Hg(d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) Hg[i] += hess(i, j) * g[j];
        for (std::size_t i = 0; i < d; ++i) gHg += g[i] * Hg[i];
        const double gn2 = norm_sq(g);
        const double gn = std::sqrt(gn2);
        const bool want = !dv.empty();
        if (want) std::fill(dv.begin(), dv.end(), 0.0);

        double r = q * u + hu - f_(x);
        if (want) dv[0] += q + op_.h.derivative(u);

        if (op_.kind == NonlinearKind::quasilinear_monotone) {
            r += -(1.0 + u * u) * lap - 2.0 * u * gn2;
            if (want) {
                dv[0] += -2.0 * u * lap - 2.0 * gn2;
                for (std::size_t i = 0; i < d; ++i) {
                    dv[1 + i] += -4.0 * u * g[i];
                    dv[hessian_slot(d, i, i)] += -(1.0 + u * u);
                }
            }
            return r;
        }

        const double p = op_.p;
        // -|g|^{p-2} lap
        const double gp2 = (p == 2.0) ? 1.0 : std::pow(gn, p - 2.0);
        r += -gp2 * lap;
        if (want)
            for (std::size_t i = 0; i < d; ++i) dv[hessian_slot(d, i, i)] += -gp2;
        if (p == 2.0) return r;

        const bool singular = gn < kGradientSingularityEps;
        if (singular && p < 4.0) return r;  // curvature terms vanish in the limit
        const double gp4 = (p == 4.0) ? 1.0 : std::pow(gn, p - 4.0);
        // -(p-2) |g|^{p-4} g^T H g
        r += -(p - 2.0) * gp4 * gHg;
        if (!want) return r;
        for (std::size_t i = 0; i < d; ++i) {
            // d/dg_i of -|g|^{p-2} lap
            dv[1 + i] += -(p - 2.0) * gp4 * g[i] * lap;
            // d/dg_i of -(p-2)|g|^{p-4} gHg
            double t = 2.0 * gp4 * Hg[i];
            if (p != 4.0 && !singular) t += (p - 4.0) * std::pow(gn, p - 6.0) * g[i] * gHg;
            dv[1 + i] += -(p - 2.0) * t;
            for (std::size_t j = i; j < d; ++j) {
                const double mult = (i == j) ? 1.0 : 2.0;
                dv[hessian_slot(d, i, j)] += -(p - 2.0) * gp4 * mult * g[i] * g[j];
            }
        }
        return r;
    }

    NonlinearOperatorSpec op_;
    std::optional<CutoffSpec> cutoff_;
    ScalarField f_;
    std::vector<MultiIndex> layout_;
};

class RobinResidual final : public PointResidual {
public:
    RobinResidual(RobinSpec robin, std::size_t d, ScalarField g)
        : robin_(robin), g_(std::move(g)), layout_(full_jet_layout(d, 1)) {
        robin_.validate();
        if (robin_.beta == 0.0) layout_.resize(1);
    }

    std::span<const MultiIndex> jets() const override { return layout_; }
    bool is_linear() const override { return true; }

    double evaluate(const PointContext& pt, std::span<const double> v,
                    std::span<double> dv) const override {
        double r = robin_.alpha * v[0] - g_(pt.x);
        if (!dv.empty()) dv[0] = robin_.alpha;
        if (robin_.beta != 0.0) {
            if (pt.normal.size() + 1 != layout_.size())
                throw DimensionError("Robin residual needs an outward normal");
            for (std::size_t i = 0; i < pt.normal.size(); ++i) {
                r += robin_.beta * pt.normal[i] * v[1 + i];
                if (!dv.empty()) dv[1 + i] = robin_.beta * pt.normal[i];
            }
        }
        return r;
    }

private:
    RobinSpec robin_;
    ScalarField g_;
    std::vector<MultiIndex> layout_;
};

class EnergyDensity final : public PointResidual {
public:
    EnergyDensity(EnergySpec spec, std::size_t d, std::optional<CutoffSpec> cutoff)
        : spec_(std::move(spec)), cutoff_(std::move(cutoff)), layout_(full_jet_layout(d, 1)) {
        spec_.validate();
        if (cutoff_ && cutoff_->dim() != d) throw DimensionError("cutoff dimension mismatch");
    }

    std::span<const MultiIndex> jets() const override { return layout_; }

    double evaluate(const PointContext& pt, std::span<const double> jet,
                    std::span<double> partials) const override {
        return with_cutoff(cutoff_, layout_, pt, jet, partials,
                           [&](std::span<const double> v, std::span<double> dv) {
                               return on_tilde(pt.x, v, dv);
                           });
    }

private:
    double on_tilde(std::span<const double> x, std::span<const double> v,
                    std::span<double> dv) const {
        const double u = v[0];
        const auto g = v.subspan(1);
        const double gn2 = norm_sq(g);
        const bool want = !dv.empty();
        if (spec_.kind == EnergyKind::allen_cahn) {
            const double e2 = spec_.epsilon * spec_.epsilon;
            const double w = u * u - 1.0;
            if (want) {
                dv[0] = w * u;
                for (std::size_t i = 0; i < g.size(); ++i) dv[1 + i] = e2 * g[i];
            }
            return 0.5 * e2 * gn2 + 0.25 * w * w;
        }
        const double p = spec_.p;
        const double fx = spec_.f(x);
        const double gp2 = (p == 2.0) ? 1.0 : std::pow(std::sqrt(gn2), p - 2.0);
        if (want) {
            dv[0] = -fx;
            for (std::size_t i = 0; i < g.size(); ++i) dv[1 + i] = gp2 * g[i];
        }
        return gp2 * gn2 / p - fx * u;
    }

    EnergySpec spec_;
    std::optional<CutoffSpec> cutoff_;
    std::vector<MultiIndex> layout_;
};

}  // namespace

std::unique_ptr<PointResidual> make_linear_residual(LinearOperatorSpec op, ScalarField f,
                                                    std::optional<CutoffSpec> cutoff) {
    return std::make_unique<LinearResidual>(std::move(op), std::move(f), std::move(cutoff));
}

std::unique_ptr<PointResidual> make_burgers_residual(double nu, ScalarField f) {
    return std::make_unique<BurgersResidual>(nu, std::move(f));
}

std::unique_ptr<PointResidual> make_monotone_residual(NonlinearOperatorSpec op,
                                                      CutoffSpec cutoff, ScalarField f) {
    return std::make_unique<MonotoneResidual>(std::move(op), std::move(cutoff), std::move(f));
}

std::unique_ptr<PointResidual> make_robin_residual(RobinSpec robin, std::size_t d,
                                                   ScalarField g) {
    return std::make_unique<RobinResidual>(robin, d, std::move(g));
}

std::unique_ptr<PointResidual> make_energy_density(EnergySpec spec, std::size_t d,
                                                   std::optional<CutoffSpec> cutoff) {
    return std::make_unique<EnergyDensity>(std::move(spec), d, std::move(cutoff));
}

double evaluate_residual(const PointResidual& r, const NetworkParams& params,
                         const PointContext& pt) {
    const auto jets = r.jets();
    std::vector<double> v(jets.size());
    jet_values(params, pt.x, jets, v);
    return r.evaluate(pt, v, {});
}

double apply_linear(const LinearOperatorSpec& op, const NetworkParams& params,
                    std::span<const double> x) {
    if (op.dim() != params.d) throw DimensionError("operator dimension mismatch");
    LinearResidual r(op, 0.0, std::nullopt);
    return evaluate_residual(r, params, {x, {}});
}

double boundary_value(const NetworkParams& params, std::span<const double> x,
                      std::span<const double> normal, const RobinSpec& robin) {
    if (normal.size() != params.d) throw DimensionError("normal dimension mismatch");
    if (std::abs(std::sqrt(norm_sq(normal)) - 1.0) > 1e-12)
        throw DataError("boundary normal is not unit length");
    RobinResidual r(robin, params.d, 0.0);
    return evaluate_residual(r, params, {x, normal});
}

double burgers_residual(const NetworkParams& params, std::span<const double> tx, double nu) {
    if (params.d != 2 || tx.size() != 2) throw DimensionError("Burgers residual needs d = 2");
    BurgersResidual r(nu, 0.0);
    return evaluate_residual(r, params, {tx, {}});
}

double monotone_residual(const NonlinearOperatorSpec& op, const CutoffSpec& cutoff,
                         const NetworkParams& params, std::span<const double> x) {
    if (cutoff.dim() != params.d) throw DimensionError("cutoff dimension mismatch");
    MonotoneResidual r(op, cutoff, 0.0);
    return evaluate_residual(r, params, {x, {}});
}

double energy_density(const EnergySpec& spec, const CutoffSpec* cutoff,
                      const NetworkParams& params, std::span<const double> x) {
    std::optional<CutoffSpec> c;
    if (cutoff) c = *cutoff;
    EnergyDensity r(spec, params.d, std::move(c));
    return evaluate_residual(r, params, {x, {}});
}

}  // namespace ritzkit
