#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "ritzkit/error.hpp"
#include "ritzkit/reference.hpp"

using namespace ritzkit;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("Gauss-Hermite moments") {
    const double sq = std::sqrt(pi);
    for (std::size_t n : {1u, 2u, 5u, 20u, 64u, 128u}) {
        const auto& gh = gauss_hermite(n);
        REQUIRE(gh.nodes.size() == n);
        double m0 = 0.0, m2 = 0.0, m4 = 0.0, m1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = gh.nodes[i], w = gh.weights[i];
            CHECK(w > 0.0);
            m0 += w;
            m1 += w * x;
            m2 += w * x * x;
            m4 += w * x * x * x * x;
            if (i) CHECK(gh.nodes[i - 1] < x);
            CHECK(x == doctest::Approx(-gh.nodes[n - 1 - i]).epsilon(1e-12));
        }
        CHECK(m0 == doctest::Approx(sq).epsilon(1e-12));
        CHECK(std::abs(m1) < 1e-12);
        if (n >= 2) CHECK(m2 == doctest::Approx(sq / 2.0).epsilon(1e-12));
        if (n >= 3) CHECK(m4 == doctest::Approx(3.0 * sq / 4.0).epsilon(1e-12));
    }
    CHECK(&gauss_hermite(20) == &gauss_hermite(20));
    // Two-point rule: nodes +-1/sqrt(2).
    CHECK(gauss_hermite(2).nodes[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("Cole-Hopf Burgers reference") {
    const double nu = burgers_benchmark_viscosity();
    CHECK(nu == doctest::Approx(0.01 / pi));
    // Odd in x, zero at the walls.
    CHECK(std::abs(burgers_reference(0.5, 0.0, nu)) < 1e-10);
    CHECK(burgers_reference(0.3, 0.4, nu) == doctest::Approx(-burgers_reference(0.3, -0.4, nu)).epsilon(1e-9));
    // Short times recover the initial profile.
    CHECK(burgers_reference(1e-5, 0.5, nu) == doctest::Approx(-1.0).epsilon(1e-3));
    const auto v = burgers_reference_detail(0.25, 0.3, nu);
    CHECK(v.agreed);
    CHECK_THROWS_AS(burgers_reference(0.0, 0.1, nu), DataError);
    CHECK_THROWS_AS(burgers_reference(0.1, 0.1, 0.0), DataError);
}

TEST_CASE("Cole-Hopf agrees with a Crank-Nicolson solve") {
    for (double nu : {0.1, burgers_benchmark_viscosity()}) {
        CAPTURE(nu);
        const auto grid = oracle::burgers_crank_nicolson(nu, 0.25, 4000, 2.5e-4);
        for (double x : {-0.7, -0.2, 0.15, 0.5, 0.9}) {
            CAPTURE(x);
            CHECK(grid.at(x) == doctest::Approx(burgers_reference(0.25, x, nu)).epsilon(2e-3));
        }
    }
}

TEST_CASE("separable functions and their derivatives") {
    Factor1D s;
    s.kind = Factor1D::Kind::sine;
    s.omega = 2.0;
    s.phase = 0.3;
    s.c = 1.5;
    CHECK(s.derivative(0.4, 0) == doctest::Approx(1.5 * std::sin(1.1)));
    CHECK(s.derivative(0.4, 1) == doctest::Approx(3.0 * std::cos(1.1)));
    CHECK(s.derivative(0.4, 2) == doctest::Approx(-6.0 * std::sin(1.1)));
    Factor1D p;
    p.kind = Factor1D::Kind::polynomial;
    p.poly = {1.0, 0.0, 2.0};
    CHECK(p.derivative(3.0, 0) == doctest::Approx(19.0));
    CHECK(p.derivative(3.0, 1) == doctest::Approx(12.0));
    CHECK(p.derivative(3.0, 3) == 0.0);
    Factor1D e;
    e.kind = Factor1D::Kind::exponential;
    e.omega = -0.5;
    CHECK(e.derivative(2.0, 2) == doctest::Approx(0.25 * std::exp(-1.0)));

    SeparableFunction f({s, p});
    const std::vector<double> x{0.4, 3.0};
    CHECK(f.value(x) == doctest::Approx(1.5 * std::sin(1.1) * 19.0));
    CHECK(f.partial(x, MultiIndex{1, 1}) == doctest::Approx(3.0 * std::cos(1.1) * 12.0));
}

TEST_CASE("manufactured problems") {
    const auto slab = Domain::time_slab(0.0, 1.0, {0.0}, {1.0});
    const auto heat = manufactured_linear("heat_mode", LinearOperatorSpec::heat(2), slab);
    for (double t : {0.0, 0.3}) {
        for (double xx : {0.1, 0.5, 0.8}) {
            const std::vector<double> x{t, xx};
            CHECK(std::abs(heat.f(x)) < 1e-12);
            CHECK(heat.u(x) == doctest::Approx(std::exp(-pi * pi * t) * std::sin(pi * xx)));
            CHECK(heat.g(x) == heat.u(x));
        }
    }

    const auto box = Domain::hyperrectangle({0.0, 0.0}, {1.0, 1.0}, 1);
    const auto lap = manufactured_linear("sin_sin", LinearOperatorSpec::laplacian(2), box,
                                         RobinSpec{0.0, 1.0});
    const std::vector<double> in{0.3, 0.6};
    CHECK(lap.f(in) == doctest::Approx(-2.0 * pi * pi * lap.u(in)));
    // Neumann data on the face x0 = 0 (outward normal -e0).
    const std::vector<double> face{0.0, 0.25};
    CHECK(lap.g(face) == doctest::Approx(-pi * std::sin(pi * 0.25)));

    for (const auto& id : manufactured_ids()) CHECK_NOTHROW(manufactured_function(id, 2));
    CHECK_THROWS_AS(manufactured_function("nope", 2), ConfigError);
    CHECK_THROWS_AS(manufactured_linear("sin_sin", LinearOperatorSpec::identity(3), box),
                    DimensionError);
}

TEST_CASE("builtin fields and grids") {
    const auto g = builtin_field("neg_sin_pi_x");
    CHECK(g(std::vector<double>{0.0, 0.5}) == doctest::Approx(-1.0));
    CHECK(builtin_field("one")(std::vector<double>{0.2}) == 1.0);
    CHECK(builtin_field("zero")(std::vector<double>{0.2}) == 0.0);
    CHECK_THROWS_AS(builtin_field("two"), ConfigError);
    const std::vector<double> ts{0.5}, xs{0.0, 1.0};
    const auto csv = reference_grid_csv([](double t, double x) { return t + x; }, ts, xs);
    CHECK(csv.rfind("t,x,u\n", 0) == 0);
    CHECK(csv.find("1.5") != std::string::npos);
}
