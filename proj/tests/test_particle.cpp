#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scto/particle.hpp"

using namespace scto;

namespace {

SelfConsistentModel expanding_model(double delta, int n) {
    SelfConsistentModel m;
    m.cls = SystemClass::Expanding;
    m.base_maps = {make_doubling_map()};
    m.couplings = {make_product_trig_kernel()};
    m.delta = delta;
    m.grid_n = n;
    return m;
}

}  // namespace

TEST_CASE("counter rng: range, determinism, argument sensitivity") {
    for (std::uint64_t i = 0; i < 1000; ++i) {
        double u = counter_uniform(42, i, i * 3, i * 7);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(counter_hash(1, 2, 3, 4) == counter_hash(1, 2, 3, 4));
    CHECK(counter_hash(1, 2, 3, 4) != counter_hash(2, 2, 3, 4));
    CHECK(counter_hash(1, 2, 3, 4) != counter_hash(1, 3, 3, 4));
    CHECK(counter_hash(1, 2, 3, 4) != counter_hash(1, 2, 4, 4));
    CHECK(counter_hash(1, 2, 3, 4) != counter_hash(1, 2, 3, 5));
    // rough uniformity of the low bit
    int ones = 0;
    for (std::uint64_t i = 0; i < 4096; ++i)
        ones += counter_hash(7, i, 0, 0) & 1u;
    CHECK(ones > 1800);
    CHECK(ones < 2300);
}

TEST_CASE("reflect_interval folds the line onto [0,1]") {
    CHECK(reflect_interval(0.3) == doctest::Approx(0.3));
    CHECK(reflect_interval(1.2) == doctest::Approx(0.8));
    CHECK(reflect_interval(-0.3) == doctest::Approx(0.3));
    CHECK(reflect_interval(2.5) == doctest::Approx(0.5));
    CHECK(reflect_interval(-1.7) == doctest::Approx(0.3));
    CHECK(reflect_interval(0.0) == doctest::Approx(0.0));
    CHECK(reflect_interval(1.0) == doctest::Approx(1.0));
}

TEST_CASE("ensembles: bounds and density sampling") {
    ParticleEnsemble e = uniform_ensemble(50000, 9);
    for (double x : e.states) {
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    // sample from a tilted density and compare histograms
    const int n = 16;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = 0.5 + (i + 0.5) / n;  // mean 1
    GridDensity f(n, v);
    ParticleEnsemble s = ensemble_from_density(f, 200000, 10);
    GridDensity hist = empirical_density(s, n);
    for (int i = 0; i < n; ++i)
        CHECK(hist.values[i] == doctest::Approx(f.values[i]).epsilon(0.05));
}

TEST_CASE("empirical density is a histogram with the right normalization") {
    ParticleEnsemble e;
    e.states = {0.1, 0.1, 0.6};
    GridDensity h = empirical_density(e, 2);
    CHECK(h.values[0] == doctest::Approx(2.0 * 2 / 3));
    CHECK(h.values[1] == doctest::Approx(2.0 / 3));
    CHECK(h.mass() == doctest::Approx(1.0));
}

TEST_CASE("multinomial concentration of the uniform histogram") {
    const std::size_t N = 200000;
    const int n = 32;
    ParticleEnsemble e = uniform_ensemble(N, 77);
    GridDensity h = empirical_density(e, n);
    double band = 3.0 * std::sqrt(static_cast<double>(n) / N);
    for (double v : h.values) CHECK(std::fabs(v - 1.0) <= band);
}

TEST_CASE("noise samplers stay on their supports") {
    const int n = 256;
    NoiseSampler line(make_raised_cosine(0.1, n), true);
    double mean = 0;
    for (std::uint64_t a = 0; a < 20000; ++a) {
        double d = line.draw(3, 1, a);
        CHECK(std::fabs(d) <= 0.1 + 1e-12);
        mean += d;
    }
    CHECK(std::fabs(mean / 20000) < 0.002);

    NoiseSampler wrapped(make_wrapped_gaussian(0.1, n), false);
    for (std::uint64_t a = 0; a < 2000; ++a) {
        double d = wrapped.draw(3, 1, a);
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
    }
}

TEST_CASE("two-agent hand oracle for the coupled doubling update") {
    SelfConsistentModel m = expanding_model(0.03, 64);
    ParticleEnsemble e;
    e.states = {0.1, 0.3};
    e.seed = 5;
    step_ensemble(e, m);
    // moment of (1+cos 2 pi y) over pre-update states, then
    // x <- wrap(T x + delta * moment * sin(2 pi T x))
    double moment =
        0.5 * ((1 + std::cos(kTwoPi * 0.1)) + (1 + std::cos(kTwoPi * 0.3)));
    for (int i = 0; i < 2; ++i) {
        double t = wrap_unit(2.0 * (i == 0 ? 0.1 : 0.3));
        double expect = wrap_unit(t + 0.03 * moment * std::sin(kTwoPi * t));
        CHECK(e.states[i] == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK(e.step_count == 1);
}

TEST_CASE("trajectories are bitwise reproducible per seed") {
    SelfConsistentModel m;
    m.cls = SystemClass::AdditiveNoiseCircle;
    m.base_maps = {make_doubling_map()};
    m.couplings = {make_product_trig_kernel()};
    m.noise = make_wrapped_gaussian(0.05, 128);
    m.delta = 0.02;
    m.grid_n = 128;
    ParticleEnsemble a = uniform_ensemble(500, 31);
    ParticleEnsemble b = uniform_ensemble(500, 31);
    ParticleEnsemble c = uniform_ensemble(500, 32);
    for (int k = 0; k < 10; ++k) {
        step_ensemble(a, m);
        step_ensemble(b, m);
        step_ensemble(c, m);
    }
    CHECK(a.states == b.states);
    CHECK(a.states != c.states);
}

TEST_CASE("separable fast path matches the O(N^2) fallback") {
    SelfConsistentModel fast = expanding_model(0.04, 64);
    SelfConsistentModel slow = fast;
    slow.couplings[0].separable.clear();
    ParticleEnsemble ea = uniform_ensemble(2000, 13);
    ParticleEnsemble eb = uniform_ensemble(2000, 13);
    for (int k = 0; k < 5; ++k) {
        step_ensemble(ea, fast);
        step_ensemble(eb, slow);
    }
    for (std::size_t i = 0; i < ea.states.size(); ++i)
        CHECK(ea.states[i] == doctest::Approx(eb.states[i]).epsilon(1e-12));
}

TEST_CASE("pair budget rejects oversized non-separable runs") {
    SelfConsistentModel m = expanding_model(0.04, 64);
    m.couplings[0].separable.clear();
    ParticleEnsemble e = uniform_ensemble(5000, 1);
    CHECK_THROWS_AS(step_ensemble(e, m, 1'000'000), ConfigError);
}

TEST_CASE("reflecting dynamics keep particles in the interval") {
    SelfConsistentModel m;
    m.cls = SystemClass::ReflectingKernelInterval;
    m.base_maps = {make_tent_map()};
    m.couplings = {make_sine_difference_kernel()};
    m.noise = make_raised_cosine(0.1, 128);
    m.delta = 0.05;
    m.grid_n = 128;
    ParticleEnsemble e = uniform_ensemble(2000, 21);
    for (int k = 0; k < 50; ++k) {
        step_ensemble(e, m);
        for (double x : e.states) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
        }
    }
}

TEST_CASE("stationary histogram tracks the solver fixed point") {
    const int n = 32;
    SelfConsistentModel m = expanding_model(0.05, n);
    auto [f, trace] = thm_existence_iteration(m, GridDensity::uniform(n), 1e-10);
    REQUIRE(trace.converged);
    ParticleEnsemble e = uniform_ensemble(50000, 123);
    GridDensity hist = stationary_histogram(e, m, 50, 100, n);
    double gap = 0;
    for (int i = 0; i < n; ++i) gap += std::fabs(hist.values[i] - f.values[i]) / n;
    CHECK(gap < 0.05);
}
