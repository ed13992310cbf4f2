#include <cmath>
#include <cstdio>
#include <numbers>

#include "oracles.hpp"
#include "ritzkit/geometry.hpp"
#include "ritzkit/reference.hpp"

namespace ritzkit::oracle {

namespace {

constexpr double kDerivativeTol = 1e-5;
constexpr double kGradientTol = 1e-6;

NetworkParams random_network(CounterRng& rng, std::size_t m, std::size_t d, Trainable mode) {
    NetworkParams p(m, d, (rng.next_u64() & 1) ? Scaling::ntk : Scaling::plain, mode);
    for (auto& v : p.a) v = rng.normal();
    for (auto& v : p.w) v = rng.normal();
    for (auto& v : p.b) v = 0.5 * rng.normal();
    return p;
}

ScalarField wave_field() {
    return ScalarField("wave", [](std::span<const double> x) {
        double s = 0.3;
        for (std::size_t i = 0; i < x.size(); ++i) s += std::sin(1.3 * x[i] + 0.2 * i);
        return s;
    });
}

}  // namespace

SuiteReport derivative_suite(std::uint64_t seed, std::size_t n_networks) {
    SuiteReport rep;
    rep.name = "derivative_fd";
    rep.tolerance = kDerivativeTol;
    for (std::size_t net = 0; net < n_networks; ++net) {
        CounterRng rng(seed, 1000 + net);
        const std::size_t d = 1 + rng.next_u64() % 3;
        const std::size_t m = 1 + rng.next_u64() % 20;
        const NetworkParams p = random_network(rng, m, d, Trainable::full);
        std::vector<double> x(d);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        for (const auto& xi : multi_indices_up_to(d, 4)) {
            const double exact = partial_derivative(p, x, xi);
            const double fd = fd_partial(p, x, xi);
            // Cancellation floor: a thousandth of the summed term magnitudes.
            const double scale = std::max(std::abs(exact), 1e-3 * partial_magnitude(p, x, xi));
            const double err = scale > 0.0 ? std::abs(exact - fd) / scale : std::abs(fd);
            ++rep.cases;
            if (err > rep.worst) {
                rep.worst = err;
                rep.worst_case = "network " + std::to_string(net) + " (m=" + std::to_string(m) +
                                 ", d=" + std::to_string(d) + ") xi=" + xi.to_string();
            }
        }
    }
    rep.passed = rep.worst < rep.tolerance;
    return rep;
}

std::vector<LossInstance> loss_instances(std::uint64_t seed, Trainable mode) {
    std::vector<LossInstance> out;
    const std::size_t m = 5;
    CounterRng rng(seed, 77 + (mode == Trainable::full ? 1 : 0));
    const auto box = Domain::hyperrectangle({0.0, 0.0}, {1.0, 1.0}, 1);
    const auto slab = Domain::time_slab(0.0, 1.0, {-1.0}, {1.0});
    const CutoffSpec unit_cutoff({0.0, 0.0}, {1.0, 1.0});
    auto pts = [&](const Domain& dom, std::size_t n2) {
        return sample(dom, 7, n2, rng.next_u64());
    };
    auto add = [&](std::string name, LossSpec spec) {
        out.push_back({std::move(name), std::move(spec), random_network(rng, m, 2, mode)});
    };

    {
        std::vector<LinearTerm> terms;
        terms.push_back({MultiIndex{2, 0}, ScalarField("1+x0/2", [](std::span<const double> x) {
                                               return 1.0 + 0.5 * x[0];
                                           })});
        terms.push_back({MultiIndex{0, 1}, -0.7});
        terms.push_back({MultiIndex{0, 0}, 0.4});
        LinearOperatorSpec op(std::move(terms));
        add("pinn_linear_dirichlet",
            LossSpec::pinn(op, pts(box, 5), wave_field(), wave_field(), {1.0, 0.0}, 0.8));
        add("pinn_linear_robin",
            LossSpec::pinn(op, pts(box, 5), wave_field(), 0.25, {1.0, 0.5}, 1.3));
        auto cut = LossSpec::pinn(op, pts(box, 0), wave_field(), 0.0);
        cut.cutoff = unit_cutoff;
        add("pinn_linear_cutoff", std::move(cut));
    }
    add("pinn_heat_neumann", LossSpec::pinn(LinearOperatorSpec::heat(2), pts(slab, 6), 0.0,
                                            builtin_field("neg_sin_pi_x"), {0.0, 1.0}, 1.0));
    add("pinn_burgers", LossSpec::pinn(NonlinearOperatorSpec::burgers(burgers_benchmark_viscosity()),
                                       pts(slab, 5), 0.0, builtin_field("neg_sin_pi_x")));
    {
        auto s = LossSpec::pinn(NonlinearOperatorSpec::p_laplace(3.0, 1.0, ScalarFunction::cubic()),
                                pts(box, 0), wave_field(), 0.0);
        s.cutoff = unit_cutoff;
        add("pinn_p_laplace", std::move(s));
    }
    {
        auto s = LossSpec::pinn(NonlinearOperatorSpec::quasilinear(0.5, ScalarFunction::cubic()),
                                pts(box, 0), wave_field(), 0.0);
        s.cutoff = unit_cutoff;
        add("pinn_quasilinear", std::move(s));
    }
    {
        EnergySpec e;
        e.kind = EnergyKind::allen_cahn;
        e.epsilon = 0.3;
        add("ritz_allen_cahn", LossSpec::ritz(e, pts(box, 5), wave_field(), {1.0, 0.0}, 2.0));
    }
    {
        EnergySpec e;
        e.kind = EnergyKind::p_laplace;
        e.p = 3.0;
        e.f = wave_field();
        auto s = LossSpec::ritz(e, pts(box, 0), 0.0);
        s.cutoff = unit_cutoff;
        add("ritz_p_laplace_cutoff", std::move(s));
    }
    return out;
}

SuiteReport gradient_suite(std::uint64_t seed, std::size_t instances_per_kind) {
    SuiteReport rep;
    rep.name = "loss_gradient_fd";
    rep.tolerance = kGradientTol;
    for (Trainable mode : {Trainable::outer_only, Trainable::full}) {
        for (std::size_t inst = 0; inst < instances_per_kind; ++inst) {
            for (auto& li : loss_instances(seed * 7919 + inst, mode)) {
                for (KernelMode km : {KernelMode::parallel, KernelMode::serial}) {
                    LossEvaluator ev(li.spec, li.params, km);
                    const auto theta = li.params.trainable_vector();
                    std::vector<double> g(theta.size());
                    const double J = ev.value_and_gradient(theta, g);
                    const auto gfd = fd_gradient(
                        [&](std::span<const double> th) { return ev.value(th); }, theta);
                    const double err = gradient_error(g, gfd, 1e-8 * std::max(1.0, std::abs(J)));
                    ++rep.cases;
                    if (err > rep.worst) {
                        rep.worst = err;
                        rep.worst_case = li.name + " (" + to_string(mode) + ", instance " +
                                         std::to_string(inst) + ")";
                    }
                }
            }
        }
    }
    rep.passed = rep.worst < rep.tolerance;
    return rep;
}

}  // namespace ritzkit::oracle
