#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ritzkit/error.hpp"
#include "ritzkit/kernels.hpp"
#include "ritzkit/loss.hpp"
#include "ritzkit/reference.hpp"

using namespace ritzkit;

namespace {

NetworkParams small_net(std::uint64_t seed, std::size_t m, std::size_t d, Trainable t) {
    CounterRng rng(seed, 3);
    NetworkParams p(m, d, Scaling::plain, t);
    for (auto& v : p.a) v = rng.normal();
    for (auto& v : p.w) v = rng.normal();
    for (auto& v : p.b) v = rng.normal();
    return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace

TEST_CASE("identity loss matches a direct sum in the half-mean convention") {
    const auto dom = Domain::hyperrectangle({0.0, 0.0}, {1.0, 1.0}, 1);
    const auto pts = sample(dom, 13, 7, 4);
    const auto net = small_net(1, 4, 2, Trainable::full);
    const double lambda = 0.7;
    const auto spec = LossSpec::pinn(LinearOperatorSpec::identity(2), pts, 0.3, -0.2,
                                     RobinSpec{1.0, 0.0}, lambda);
    double si = 0.0, sb = 0.0;
    for (std::size_t p = 0; p < pts.n_interior(); ++p) {
        const double r = eval(net, pts.interior_point(p)) - 0.3;
        si += r * r;
    }
    for (std::size_t j = 0; j < pts.n_boundary(); ++j) {
        const double r = eval(net, pts.boundary_point(j)) + 0.2;
        sb += r * r;
    }
    const double expect = si / (2.0 * 13) + lambda * sb / (2.0 * 7);
    CHECK(rel(empirical_loss(spec, net), expect) < 1e-13);

    const auto rv = residual_vectors(spec, net);
    double half = 0.0;
    for (double v : rv.s) half += v * v;
    for (double v : rv.h) half += v * v;
    CHECK(rel(0.5 * half, expect) < 1e-13);
}

TEST_CASE("zero network and zero data give zero loss") {
    const auto dom = Domain::time_slab(0.0, 1.0, {-1.0}, {1.0});
    const auto pts = sample(dom, 20, 10, 2);
    NetworkParams net(5, 2);
    for (auto& v : net.w) v = 1.0;
    CHECK(empirical_loss(LossSpec::pinn(LinearOperatorSpec::heat(2), pts, 0.0, 0.0), net) == 0.0);
    CHECK(empirical_loss(LossSpec::pinn(NonlinearOperatorSpec::burgers(0.1), pts, 0.0, 0.0), net) ==
          0.0);
}

TEST_CASE("boundary weight scales linearly with lambda") {
    const auto dom = Domain::hyperrectangle({0.0, 0.0}, {1.0, 1.0}, 1);
    const auto pts = sample(dom, 9, 9, 6);
    const auto net = small_net(2, 3, 2, Trainable::outer_only);
    auto s0 = LossSpec::pinn(LinearOperatorSpec::identity(2), pts, 0.0, 1.0, {}, 0.0);
    auto s1 = s0;
    s1.lambda = 1.0;
    auto s2 = s0;
    s2.lambda = 2.0;
    const double j0 = empirical_loss(s0, net), j1 = empirical_loss(s1, net),
                 j2 = empirical_loss(s2, net);
    CHECK(rel(j2 - j0, 2.0 * (j1 - j0)) < 1e-12);
    s0.lambda = -1.0;
    CHECK_THROWS_AS(s0.validate(), DataError);
}

TEST_CASE("cutoff drops the boundary term and boundary points are optional") {
    const auto dom = Domain::hyperrectangle({0.0, 0.0}, {1.0, 1.0}, 1);
    auto spec = LossSpec::pinn(LinearOperatorSpec::identity(2), sample(dom, 10, 0, 1), 0.0, 5.0);
    CHECK_THROWS_AS(spec.validate(), DataError);
    spec.cutoff = CutoffSpec({0.0, 0.0}, {1.0, 1.0});
    CHECK_NOTHROW(spec.validate());
    CHECK_FALSE(spec.has_boundary_term());
    // With g = 5 a boundary term would be large; only the interior contributes.
    NetworkParams zero(3, 2);
    CHECK(empirical_loss(spec, zero) == 0.0);
}

TEST_CASE("spec validation") {
    const auto slab = Domain::time_slab(0.0, 1.0, {-1.0, -1.0}, {1.0, 1.0});
    auto s = LossSpec::pinn(NonlinearOperatorSpec::burgers(0.1), sample(slab, 5, 5, 1), 0.0, 0.0);
    CHECK_THROWS_AS(s.validate(), DimensionError);
    const auto box = Domain::hyperrectangle({0.0, 0.0}, {1.0, 1.0}, 1);
    auto mono = LossSpec::pinn(NonlinearOperatorSpec::p_laplace(3.0), sample(box, 5, 5, 1), 0.0, 0.0);
    CHECK_THROWS_AS(mono.validate(), DataError);
    auto wrong = LossSpec::pinn(LinearOperatorSpec::identity(3), sample(box, 5, 5, 1), 0.0, 0.0);
    CHECK_THROWS_AS(wrong.validate(), DimensionError);
    CHECK_THROWS_AS(LossEvaluator(LossSpec::pinn(LinearOperatorSpec::identity(2),
                                                 sample(box, 5, 5, 1), 0.0, 0.0),
                                  NetworkParams(3, 3)),
                    DimensionError);
}

TEST_CASE("gradients agree with finite differences for every loss kind") {
    for (Trainable mode : {Trainable::outer_only, Trainable::full}) {
        for (auto& li : oracle::loss_instances(31, mode)) {
            CAPTURE(li.name);
            LossEvaluator ev(li.spec, li.params);
            const auto theta = li.params.trainable_vector();
            std::vector<double> g(theta.size());
            const double J = ev.value_and_gradient(theta, g);
            CHECK(rel(J, ev.value(theta)) < 1e-14);
            const auto gfd =
                oracle::fd_gradient([&](std::span<const double> th) { return ev.value(th); }, theta);
            CHECK(oracle::gradient_error(g, gfd, 1e-8 * std::max(1.0, std::abs(J))) < 1e-6);
        }
    }
}

TEST_CASE("serial reference and parallel kernels agree") {
    for (Trainable mode : {Trainable::outer_only, Trainable::full}) {
        for (auto& li : oracle::loss_instances(5, mode)) {
            CAPTURE(li.name);
            LossEvaluator par(li.spec, li.params, KernelMode::parallel);
            LossEvaluator ser(li.spec, li.params, KernelMode::serial);
            const auto theta = li.params.trainable_vector();
            std::vector<double> gp(theta.size()), gs(theta.size());
            const double jp = par.value_and_gradient(theta, gp);
            const double js = ser.value_and_gradient(theta, gs);
            CHECK(rel(jp, js) < 1e-12);
            CHECK(oracle::gradient_error(gp, gs, 1e-12) < 1e-11);
        }
    }
}

TEST_CASE("results do not depend on the thread count") {
    const auto slab = Domain::time_slab(0.0, 1.0, {-1.0}, {1.0});
    const auto pts = sample(slab, 1000, 100, 9);
    const auto net = small_net(4, 20, 2, Trainable::full);
    const auto spec = LossSpec::pinn(NonlinearOperatorSpec::burgers(0.05), pts, 0.0,
                                     builtin_field("neg_sin_pi_x"));
    LossEvaluator ev(spec, net);
    const auto theta = net.trainable_vector();
    std::vector<double> g1(theta.size()), g3(theta.size());
    set_kernel_threads(1);
    const double j1 = ev.value_and_gradient(theta, g1);
    set_kernel_threads(3);
    const double j3 = ev.value_and_gradient(theta, g3);
    set_kernel_threads(0);
    CHECK(j1 == j3);
    CHECK(g1 == g3);
}

TEST_CASE("outer-only feature cache follows changes of the inner parameters") {
    const auto box = Domain::hyperrectangle({0.0, 0.0}, {1.0, 1.0}, 1);
    const auto spec = LossSpec::pinn(LinearOperatorSpec::heat(2), sample(box, 150, 70, 2), 1.0, 0.5);
    auto net = small_net(8, 6, 2, Trainable::outer_only);
    LossEvaluator ev(spec, net);
    const auto theta = net.trainable_vector();
    const double before = ev.value(theta);
    CHECK(ev.value(theta) == before);
    ev.params().w[0] += 0.25;
    auto moved = net;
    moved.w[0] += 0.25;
    const double after = ev.value(theta);
    CHECK(after != before);
    CHECK(rel(after, LossEvaluator(spec, moved, KernelMode::serial).value(theta)) < 1e-12);
}

TEST_CASE("residual jacobian matches finite differences of residual values") {
    for (auto& li : oracle::loss_instances(12, Trainable::full)) {
        if (li.spec.kind == LossKind::ritz) continue;
        CAPTURE(li.name);
        LossEvaluator ev(li.spec, li.params);
        const auto theta = li.params.trainable_vector();
        for (Region r : {Region::interior, Region::boundary}) {
            const std::size_t n = ev.n_points(r);
            if (n == 0) continue;
            const auto jac = ev.residual_jacobian(r, false);
            auto f = [&](std::span<const double> th) {
                LossEvaluator e2(li.spec, li.params);
                e2.params().set_trainable(th);
                return e2.residual_values(r);
            };
            const auto fd = oracle::fd_jacobian(f, theta, n, 1e-2);
            double err = 0.0, mag = 1e-8;
            for (std::size_t i = 0; i < jac.size(); ++i) {
                err = std::max(err, std::abs(jac[i] - fd[i]));
                mag = std::max(mag, std::abs(fd[i]));
            }
            CHECK(err / mag < 1e-6);
        }
    }
}

TEST_CASE("scaled jacobian rows reproduce the gradient") {
    for (auto& li : oracle::loss_instances(3, Trainable::outer_only)) {
        if (li.spec.kind == LossKind::ritz) continue;
        CAPTURE(li.name);
        LossEvaluator ev(li.spec, li.params);
        const auto rv = ev.residual_vectors();
        const std::size_t np = ev.size();
        std::vector<double> g(np, 0.0);
        auto add = [&](Region r, const std::vector<double>& res) {
            const auto jac = ev.residual_jacobian(r, true);
            for (std::size_t p = 0; p < res.size(); ++p)
                for (std::size_t k = 0; k < np; ++k) g[k] += res[p] * jac[p * np + k];
        };
        add(Region::interior, rv.s);
        if (!rv.h.empty()) add(Region::boundary, rv.h);
        CHECK(oracle::gradient_error(g, ev.gradient(), 1e-12) < 1e-10);
    }
}

TEST_CASE("ritz losses refuse residual vectors") {
    for (auto& li : oracle::loss_instances(3, Trainable::outer_only)) {
        if (li.spec.kind != LossKind::ritz) continue;
        CHECK_THROWS_AS(residual_vectors(li.spec, li.params), ConfigError);
    }
}
