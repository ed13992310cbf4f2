#include <doctest.h>

#include <cmath>

#include "ritzkit/diagnostics.hpp"
#include "ritzkit/error.hpp"

using namespace ritzkit;

namespace {

std::vector<double> random_symmetric(std::size_t n, CounterRng& rng) {
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) a[i * n + j] = a[j * n + i] = rng.normal();
    return a;
}

NetworkParams random_net(std::size_t m, std::size_t d, std::uint64_t seed,
                         Trainable t = Trainable::outer_only) {
    InitScheme s;
    s.kind = InitKind::random_feature;
    s.seed = seed;
    auto p = initialize(s, m, d);
    CounterRng rng(seed, 99);
    for (auto& a : p.a) a = rng.normal();
    p.trainable = t;
    return p;
}

}  // namespace

TEST_CASE("jacobi eigenpairs") {
    CounterRng rng(1, 50);
    for (std::size_t n : {1u, 2u, 5u, 12u}) {
        const auto a = random_symmetric(n, rng);
        const auto e = symmetric_eigen(a, n, true);
        CHECK(e.converged);
        double trace = 0.0, sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) trace += a[i * n + i];
        for (double v : e.values) sum += v;
        CHECK(sum == doctest::Approx(trace).epsilon(1e-12));
        for (std::size_t j = 0; j + 1 < n; ++j) CHECK(e.values[j] <= e.values[j + 1]);
        for (std::size_t j = 0; j < n; ++j) {
            double res = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double av = 0.0;
                for (std::size_t k = 0; k < n; ++k) av += a[i * n + k] * e.vectors[k * n + j];
                res = std::max(res, std::abs(av - e.values[j] * e.vectors[i * n + j]));
            }
            CHECK(res < 1e-12 * (1.0 + std::abs(e.values[j])) * n);
        }
    }
    // 2x2 closed form.
    const double p = 2.0, q = -1.0, r = 0.5;
    const double mid = 0.5 * (p + r), rad = std::sqrt(0.25 * (p - r) * (p - r) + q * q);
    CHECK(min_eigenvalue(std::vector<double>{p, q, q, r}, 2) == doctest::Approx(mid - rad).epsilon(1e-14));
    CHECK_THROWS_AS(symmetric_eigen(std::vector<double>{1.0, 2.0, 3.0, 4.0}, 2), DataError);
}

TEST_CASE("determinant") {
    CHECK(determinant({2.0, 0.0, 1.0, 1.0, 3.0, 2.0, 1.0, 1.0, 2.0}, 3) == doctest::Approx(6.0));
    CHECK(determinant({0.0, 1.0, 1.0, 0.0}, 2) == doctest::Approx(-1.0));
    CHECK(determinant({1.0, 2.0, 2.0, 4.0}, 2) == 0.0);
    CHECK_THROWS_AS(determinant({1.0, 2.0}, 2), DimensionError);
}

TEST_CASE("outer Gram of the identity operator is the feature Gram") {
    const auto dom = Domain::hyperrectangle({0.0, 0.0}, {1.0, 1.0}, 1);
    const auto pts = sample(dom, 12, 6, 3);
    const auto net = random_net(7, 2, 4);
    const auto spec = LossSpec::pinn(LinearOperatorSpec::identity(2), pts, 0.0, 0.0);
    const auto k = gram_outer(spec, net, Region::interior);
    REQUIRE(k.n == 12);
    CHECK(k.provenance == GramProvenance::interior_outer);
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j) {
            const auto fi = feature_derivative_vector(net, pts.interior_point(i), MultiIndex::zero(2));
            const auto fj = feature_derivative_vector(net, pts.interior_point(j), MultiIndex::zero(2));
            double s = 0.0;
            for (std::size_t c = 0; c < 7; ++c) s += fi[c] * fj[c];
            CHECK(k(i, j) == doctest::Approx(s).epsilon(1e-13));
        }
    CHECK(min_eigenvalue(k) > -1e-12);
    const auto kb = gram_outer(spec, net, Region::boundary);
    CHECK(kb.n == 6);
    CHECK(kb.provenance == GramProvenance::boundary_outer);
}

TEST_CASE("full Grams are scaled blocks of the stacked residual Jacobian") {
    const auto dom = Domain::time_slab(0.0, 1.0, {-1.0}, {1.0});
    const auto pts = sample(dom, 10, 4, 8);
    auto net = random_net(5, 2, 2, Trainable::full);
    const double lambda = 2.0;
    const auto spec = LossSpec::pinn(LinearOperatorSpec::heat(2), pts, 0.0, 0.0, {}, lambda);
    const auto [g, gt] = gram_full(spec, net);
    CHECK(g.n == 14);
    CHECK(gt.n == 14);
    CHECK(g.provenance == GramProvenance::full_w);
    CHECK(gt.provenance == GramProvenance::full_a);
    auto outer = net;
    outer.trainable = Trainable::outer_only;
    const auto ki = gram_outer(spec, outer, Region::interior);
    const auto kb = gram_outer(spec, outer, Region::boundary);
    CHECK(gt(1, 2) == doctest::Approx(ki(1, 2) / 10.0).epsilon(1e-12));
    CHECK(gt(11, 12) == doctest::Approx(kb(1, 2) * lambda / 4.0).epsilon(1e-12));
    CHECK(min_eigenvalue(g) > -1e-12);
    CHECK_THROWS_AS(gram_full(spec, outer), ConfigError);
}

TEST_CASE("relative drift") {
    GramMatrix a;
    a.n = 2;
    a.data = {1.0, 0.5, 0.5, 2.0};
    auto b = a;
    CHECK(relative_drift(b, a) == 0.0);
    for (auto& v : b.data) v *= 3.0;
    CHECK(relative_drift(b, a) == doctest::Approx(2.0));
    b.provenance = GramProvenance::boundary_outer;
    CHECK_THROWS_AS(relative_drift(b, a), DimensionError);
    GramMatrix z = a;
    for (auto& v : z.data) v = 0.0;
    CHECK_THROWS_AS(relative_drift(a, z), NumericError);
    CHECK(a.to_csv() == "1,0.5\n0.5,2\n");
}

TEST_CASE("gamma feature Gram and the coercivity certificate") {
    const auto dom = Domain::hyperrectangle({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, 2);
    const auto net = random_net(6, 3, 10);
    const auto fs = sample_facet(dom, dom.gamma(), coercivity_quadrature_size(6), 5);
    CHECK(fs.size() == 1000);
    CHECK(coercivity_quadrature_size(30) == 1500);
    for (const RobinSpec robin : {RobinSpec{1.0, 0.0}, RobinSpec{0.0, 1.0}, RobinSpec{1.0, 1.0}}) {
        const auto g = gamma_feature_gram(net, fs, robin);
        // Direct quadrature for one entry.
        double s = 0.0;
        for (std::size_t q = 0; q < fs.size(); ++q) {
            auto phi = [&](std::size_t k) {
                double z = net.b[k], wn = 0.0;
                for (std::size_t i = 0; i < 3; ++i) {
                    z += net.weight(k, i) * fs.point(q)[i];
                    wn += net.weight(k, i) * fs.normal[i];
                }
                const double t = std::tanh(z);
                return robin.alpha * t + robin.beta * wn * (1.0 - t * t);
            };
            s += fs.weights[q] * phi(1) * phi(4);
        }
        CHECK(g(1, 4) == doctest::Approx(s).epsilon(1e-12));

        const auto cert = boundary_coercivity_certificate(net, fs, robin, 3);
        CHECK(cert.positive);
        CHECK(cert.C == doctest::Approx(1.0 / std::sqrt(cert.lambda_min)));
        CHECK(cert.bootstrap_se >= 0.0);
        CounterRng rng(4, streams::audit);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> a(6);
            for (auto& v : a) v = rng.normal();
            double aga = 0.0, aa = 0.0;
            for (std::size_t i = 0; i < 6; ++i) {
                aa += a[i] * a[i];
                for (std::size_t j = 0; j < 6; ++j) aga += a[i] * g(i, j) * a[j];
            }
            CHECK(std::sqrt(aa) <= cert.C * std::sqrt(aga) * (1.0 + 1e-8));
        }
    }

    auto dup = net;
    for (std::size_t i = 0; i < 3; ++i) dup.weight(1, i) = dup.weight(0, i);
    dup.b[1] = dup.b[0];
    CHECK_THROWS_AS(boundary_coercivity_certificate(dup, fs, {1.0, 0.0}), DataError);
    const auto c = boundary_coercivity_certificate(dup, fs, {1.0, 0.0}, 0, false);
    CHECK(c.lambda_min < 1e-10);

    const auto few = sample_facet(dom, dom.gamma(), 3, 5);
    CHECK_THROWS_AS(boundary_coercivity_certificate(net, few, {1.0, 0.0}), DataError);
}

TEST_CASE("discrete independence determinant") {
    InitScheme s;
    s.kind = InitKind::small_normal;
    s.delta = 1e-2;
    const auto dom = Domain::hyperrectangle({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, 2);
    for (std::uint64_t t = 0; t < 20; ++t) {
        s.seed = t;
        const auto net = initialize(s, 8, 3);
        auto pts = sample_facet(dom, dom.gamma(), 8, 100 + t).points;
        CHECK(std::abs(discrete_independence_det(net, pts)) > 0.0);
        std::copy(pts.begin(), pts.begin() + 3, pts.begin() + 3);
        CHECK(discrete_independence_det(net, pts) == 0.0);
    }
    CHECK_THROWS_AS(discrete_independence_det(initialize(s, 8, 3), std::vector<double>(6)),
                    DimensionError);
}
