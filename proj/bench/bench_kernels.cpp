// Timing of the blocked OpenMP loss kernels against the serial reference loop.
// Usage: ritzkit_bench [repeats]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "ritzkit/geometry.hpp"
#include "ritzkit/kernels.hpp"
#include "ritzkit/loss.hpp"
#include "ritzkit/reference.hpp"

using namespace ritzkit;

namespace {

struct Case {
    std::string name;
    LossSpec spec;
    NetworkParams params;
};

double seconds_per_call(const LossEvaluator& ev, std::span<const double> theta, int repeats,
                        double& value) {
    std::vector<double> g(theta.size());
    value = ev.value_and_gradient(theta, g);  // warm caches
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) value = ev.value_and_gradient(theta, g);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;
    const auto slab = Domain::time_slab(0.0, 1.0, {-1.0}, {1.0});
    const auto burgers = NonlinearOperatorSpec::burgers(burgers_benchmark_viscosity());

    std::vector<Case> cases;
    {
        InitScheme s;
        s.kind = InitKind::random_feature;
        s.seed = 1;
        NetworkParams p = initialize(s, 100, 2);
        CounterRng rng(1, 99);
        for (auto& a : p.a) a = rng.normal();
        cases.push_back({"burgers rf m=100 n=10000 outer", LossSpec::pinn(burgers, sample(slab, 10000, 100, 1), 0.0,
                                                                   builtin_field("neg_sin_pi_x")),
                         p});
    }
    {
        InitScheme s;
        s.kind = InitKind::ntk;
        s.seed = 2;
        cases.push_back({"burgers ntk m=1000 n=2000 full", LossSpec::pinn(burgers, sample(slab, 2000, 100, 2), 0.0,
                                                                   builtin_field("neg_sin_pi_x")),
                         initialize(s, 1000, 2)});
    }
    {
        InitScheme s;
        s.kind = InitKind::ntk;
        s.seed = 3;
        cases.push_back({"heat ntk m=2000 n=500 full",
                         LossSpec::pinn(LinearOperatorSpec::heat(2), sample(slab, 500, 100, 3), 0.0,
                                        builtin_field("neg_sin_pi_x")),
                         initialize(s, 2000, 2)});
    }

    std::printf("threads: %d, repeats: %d\n", kernel_threads(), repeats);
    std::printf("%-34s %12s %12s %8s %12s\n", "case", "serial [ms]", "parallel [ms]", "speedup",
                "|dJ|");
    for (const auto& c : cases) {
        const auto theta = c.params.trainable_vector();
        double js = 0.0, jp = 0.0;
        const double ts = seconds_per_call(LossEvaluator(c.spec, c.params, KernelMode::serial),
                                           theta, repeats, js);
        const double tp = seconds_per_call(LossEvaluator(c.spec, c.params, KernelMode::parallel),
                                           theta, repeats, jp);
        std::printf("%-34s %12.3f %12.3f %8.2f %12.2e\n", c.name.c_str(), 1e3 * ts, 1e3 * tp,
                    ts / tp, std::abs(js - jp));
    }
    return 0;
}
