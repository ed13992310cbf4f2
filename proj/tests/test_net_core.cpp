#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ritzkit/error.hpp"
#include "ritzkit/geometry.hpp"
#include "ritzkit/net_core.hpp"

using namespace ritzkit;

namespace {

NetworkParams random_net(std::uint64_t seed, std::size_t m, std::size_t d, Scaling s,
                         Trainable t) {
    CounterRng rng(seed, 42);
    NetworkParams p(m, d, s, t);
    for (auto& v : p.a) v = rng.normal();
    for (auto& v : p.w) v = rng.normal();
    for (auto& v : p.b) v = rng.normal();
    return p;
}

}  // namespace

TEST_CASE("tanh derivative polynomials") {
    const auto p1 = tanh_derivative_polynomial(1);
    REQUIRE(p1.size() >= 3);
    CHECK(p1[0] == 1);
    CHECK(p1[1] == 0);
    CHECK(p1[2] == -1);
    CHECK(tanh_kth_derivative(0, 0.3) == doctest::Approx(std::tanh(0.3)).epsilon(1e-15));
    CHECK(tanh_kth_derivative(1, 0.0) == 1.0);
    CHECK(tanh_kth_derivative(2, 0.0) == 0.0);
    CHECK(tanh_kth_derivative(3, 0.0) == -2.0);
    CHECK(tanh_kth_derivative(5, 0.0) == 16.0);
    CHECK_THROWS_AS(tanh_kth_derivative(kMaxDerivativeOrder + 1, 0.0), OrderExceeded);
}

TEST_CASE("tanh derivatives agree with central differences of the previous order") {
    for (int k = 1; k <= kMaxDerivativeOrder; ++k)
        for (double t = -3.0; t <= 3.0; t += 0.37) {
            const double h = 1e-5;
            const double fd =
                (tanh_kth_derivative(k - 1, t + h) - tanh_kth_derivative(k - 1, t - h)) / (2 * h);
            CHECK(std::abs(fd - tanh_kth_derivative(k, t)) < 1e-6 * tanh_derivative_bound(k));
        }
}

TEST_CASE("tanh derivative bound dominates the derivative") {
    for (int k = 0; k <= kMaxDerivativeOrder; ++k)
        for (double t = -6.0; t <= 6.0; t += 0.01)
            CHECK(std::abs(tanh_kth_derivative(k, t)) <= tanh_derivative_bound(k));
}

TEST_CASE("tanh_derivatives fills every order consistently") {
    double out[kMaxDerivativeOrder + 1];
    tanh_derivatives(0.7, kMaxDerivativeOrder, out);
    for (int k = 0; k <= kMaxDerivativeOrder; ++k)
        CHECK(out[k] == doctest::Approx(tanh_kth_derivative(k, 0.7)).epsilon(1e-14));
}

TEST_CASE("multi-index enumeration and errors") {
    CHECK(multi_indices_up_to(2, 2).size() == 6);
    CHECK(multi_indices_up_to(3, 4).size() == 35);
    CHECK(MultiIndex{2, 1}.order() == 3);
    CHECK_THROWS_AS(MultiIndex({-1, 0}), DataError);
    CHECK_THROWS_AS(MultiIndex({0, 1}).lowered(0), DataError);
    CHECK(MultiIndex({1, 2}).lowered(1) == MultiIndex({1, 1}));
}

TEST_CASE("ntk scaling divides the plain network by sqrt(m)") {
    auto p = random_net(1, 9, 2, Scaling::plain, Trainable::full);
    auto q = p;
    q.scaling = Scaling::ntk;
    const double x[2] = {0.2, -0.4};
    CHECK(eval(q, x) == doctest::Approx(eval(p, x) / 3.0).epsilon(1e-14));
}

TEST_CASE("a = 0 gives the zero function and zero derivatives") {
    auto p = random_net(2, 7, 3, Scaling::plain, Trainable::full);
    std::fill(p.a.begin(), p.a.end(), 0.0);
    const double x[3] = {0.1, 0.2, 0.3};
    for (const auto& xi : multi_indices_up_to(3, 3)) CHECK(partial_derivative(p, x, xi) == 0.0);
}

TEST_CASE("partial derivatives match the finite-difference oracle") {
    const auto rep = oracle::derivative_suite(11, 30);
    INFO(rep.worst_case);
    CHECK(rep.passed);
    CHECK(rep.worst < 1e-5);
}

TEST_CASE("wrong point dimension is rejected") {
    auto p = random_net(3, 4, 2, Scaling::plain, Trainable::full);
    const double x[3] = {0, 0, 0};
    CHECK_THROWS_AS(eval(p, std::span<const double>(x, 3)), DimensionError);
    CHECK_THROWS_AS(partial_derivative(p, std::span<const double>(x, 2), MultiIndex{1, 0, 0}),
                    DimensionError);
}

TEST_CASE("feature vector is independent of a and contracts to the derivative") {
    auto p = random_net(4, 6, 2, Scaling::ntk, Trainable::full);
    const double x[2] = {0.3, 0.8};
    const MultiIndex xi{1, 2};
    const auto phi = feature_derivative_vector(p, x, xi);
    auto q = p;
    for (auto& a : q.a) a *= -3.0;
    CHECK(feature_derivative_vector(q, x, xi) == phi);
    double s = 0.0;
    for (std::size_t k = 0; k < p.m; ++k) s += p.a[k] * phi[k];
    CHECK(s == doctest::Approx(partial_derivative(p, x, xi)).epsilon(1e-13));
}

TEST_CASE("inner parameter gradient matches finite differences") {
    auto p = random_net(5, 5, 2, Scaling::plain, Trainable::full);
    const double x[2] = {-0.2, 0.45};
    for (const auto& xi : multi_indices_up_to(2, 3)) {
        const auto g = inner_param_gradient(p, x, xi);
        std::vector<double> inner(p.w);
        inner.insert(inner.end(), p.b.begin(), p.b.end());
        const auto fd = oracle::fd_gradient(
            [&](std::span<const double> th) {
                auto q = p;
                std::copy(th.begin(), th.begin() + q.w.size(), q.w.begin());
                std::copy(th.begin() + q.w.size(), th.end(), q.b.begin());
                return partial_derivative(q, x, xi);
            },
            inner);
        CHECK(oracle::gradient_error(g, fd, 1e-8) < 1e-6);
    }
}

TEST_CASE("jet gradient accumulates the weighted sum of jet gradients") {
    for (Trainable t : {Trainable::outer_only, Trainable::full}) {
        auto p = random_net(6, 4, 2, Scaling::ntk, t);
        const double x[2] = {0.6, -0.1};
        const std::vector<MultiIndex> jets{MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{0, 2}};
        const std::vector<double> coeffs{0.5, -1.5, 2.0};
        std::vector<double> grad(p.trainable_size(), 1.0);  // accumulates into existing values
        accumulate_jet_gradient(p, x, jets, coeffs, 2.0, grad);
        const auto fd = oracle::fd_gradient(
            [&](std::span<const double> th) {
                auto q = p;
                q.set_trainable(th);
                double s = 0.0;
                for (std::size_t j = 0; j < jets.size(); ++j)
                    s += coeffs[j] * partial_derivative(q, x, jets[j]);
                return 2.0 * s;
            },
            p.trainable_vector());
        for (auto& g : grad) g -= 1.0;
        CHECK(oracle::gradient_error(grad, fd, 1e-8) < 1e-7);
    }
}

TEST_CASE("jet values equal individual partial derivatives") {
    auto p = random_net(7, 8, 3, Scaling::plain, Trainable::full);
    const double x[3] = {0.1, -0.5, 0.9};
    const auto jets = multi_indices_up_to(3, 4);
    std::vector<double> out(jets.size());
    jet_values(p, x, jets, out);
    for (std::size_t j = 0; j < jets.size(); ++j)
        CHECK(out[j] == doctest::Approx(partial_derivative(p, x, jets[j])).epsilon(1e-12));
}

TEST_CASE("trainable vector layout") {
    auto p = random_net(8, 3, 2, Scaling::plain, Trainable::full);
    const auto th = p.trainable_vector();
    REQUIRE(th.size() == 3 * 4);
    CHECK(th[0] == p.a[0]);
    CHECK(th[3] == p.w[0]);
    CHECK(th[3 + 6] == p.b[0]);
    p.trainable = Trainable::outer_only;
    CHECK(p.trainable_vector().size() == 3);
    CHECK_THROWS_AS(p.set_trainable(th), DimensionError);
}

TEST_CASE("params JSON round trip is bit exact") {
    auto p = random_net(9, 5, 3, Scaling::ntk, Trainable::full);
    p.a[0] = 0.1;  // not representable in binary
    const auto text = params_to_json(p);
    const auto q = params_from_json(text);
    CHECK(q.m == p.m);
    CHECK(q.d == p.d);
    CHECK(q.scaling == p.scaling);
    CHECK(q.trainable == p.trainable);
    CHECK(q.a == p.a);
    CHECK(q.w == p.w);
    CHECK(q.b == p.b);
    CHECK_THROWS_AS(params_from_json("{\"m\": 2}"), DataError);
}
