#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "scto/optimal_coupling.hpp"

using namespace scto;

namespace {

SelfConsistentModel doubling_model(int n) {
    SelfConsistentModel m;
    m.cls = SystemClass::Expanding;
    m.base_maps = {make_doubling_map()};
    m.couplings = {make_product_trig_kernel()};
    m.delta = 0.0;
    m.grid_n = n;
    return m;
}

std::vector<double> random_coeffs(int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> c(k);
    for (double& x : c) x = u(rng);
    return c;
}

}  // namespace

TEST_CASE("basis bookkeeping: indices, weights, mode kernels") {
    PerturbationBasis basis;
    basis.degree = 2;
    basis.weight_exponent = 3;
    CHECK(basis.modes_per_var() == 5);
    CHECK(basis.num_modes() == 25);
    auto [k0, l0] = basis.mode_indices(0);
    CHECK(k0 == 0);
    CHECK(l0 == 0);
    CHECK(basis.weight(0) == doctest::Approx(1.0));

    // every mode kernel evaluates to phi_k(x) phi_l(y)
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int m = 0; m < basis.num_modes(); ++m) {
        auto [k, l] = basis.mode_indices(m);
        CouplingKernel ker = basis.mode_kernel(m);
        REQUIRE(ker.separable.size() == 1);
        for (int t = 0; t < 20; ++t) {
            double x = u(rng), y = u(rng);
            CHECK(ker.eval(x, y) ==
                  doctest::Approx(fourier_mode(k, x) * fourier_mode(l, y))
                      .epsilon(1e-12));
        }
        CHECK(basis.weight(m) >= 1.0);
    }
}

TEST_CASE("combine and eval agree with the coefficient expansion") {
    PerturbationBasis basis;
    basis.degree = 2;
    auto c = random_coeffs(basis.num_modes(), 7);
    CouplingKernel h = basis.combine(c);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        double x = u(rng), y = u(rng);
        double direct = basis.eval(c, x, y);
        double expand = 0;
        for (int m = 0; m < basis.num_modes(); ++m) {
            auto [k, l] = basis.mode_indices(m);
            expand += c[m] * fourier_mode(k, x) * fourier_mode(l, y);
        }
        CHECK(direct == doctest::Approx(expand).epsilon(1e-12));
        CHECK(h.eval(x, y) == doctest::Approx(expand).epsilon(1e-12));
    }
}

TEST_CASE("weighted norm/dot and functional are bilinear") {
    PerturbationBasis basis;
    basis.degree = 3;
    int k = basis.num_modes();
    auto u = random_coeffs(k, 3), v = random_coeffs(k, 4);
    CHECK(weighted_dot(basis, u, u) ==
          doctest::Approx(weighted_norm(basis, u) * weighted_norm(basis, u))
              .epsilon(1e-12));
    std::vector<double> w(k);
    for (int i = 0; i < k; ++i) w[i] = 2 * u[i] - 3 * v[i];
    CHECK(weighted_dot(basis, w, v) ==
          doctest::Approx(2 * weighted_dot(basis, u, v) -
                          3 * weighted_dot(basis, v, v))
              .epsilon(1e-10));
    CHECK(functional_value(u, w) ==
          doctest::Approx(2 * functional_value(u, u) - 3 * functional_value(u, v))
              .epsilon(1e-10));
}

TEST_CASE("response gradient: adjoint fast path matches per-mode solves") {
    const int n = 256;
    SelfConsistentModel m = doubling_model(n);
    PerturbationBasis basis;
    basis.degree = 2;
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i) c[i] = std::cos(kTwoPi * (i + 0.5) / n);
    auto slow = response_gradient(c, m, basis, false);
    auto fast = response_gradient(c, m, basis, true);
    REQUIRE(slow.size() == static_cast<std::size_t>(basis.num_modes()));
    REQUIRE(fast.size() == slow.size());
    double sup = 0;
    for (std::size_t i = 0; i < slow.size(); ++i) {
        sup = std::max(sup, std::fabs(slow[i]));
        CHECK(slow[i] == doctest::Approx(fast[i]).epsilon(1e-9));
        CHECK(std::fabs(slow[i] - fast[i]) < 1e-9);
    }
    CHECK(sup > 0.0);  // some mode actually moves the observable
}

TEST_CASE("ball optimizer: closed form, scaling covariance, dominance") {
    PerturbationBasis basis;
    basis.degree = 3;
    int k = basis.num_modes();
    auto g = random_coeffs(k, 11);
    const double r = 0.7;
    OptimalCoupling opt = optimize_ball(g, basis, r);
    CHECK(!opt.all_feasible_optimal);
    CHECK(weighted_norm(basis, opt.coeffs) == doctest::Approx(r).epsilon(1e-10));
    CHECK(opt.J == doctest::Approx(functional_value(g, opt.coeffs)).epsilon(1e-10));

    // J is maximal over random feasible points
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 10000; ++t) {
        std::vector<double> c(k);
        for (double& x : c) x = u(rng);
        double nc = weighted_norm(basis, c);
        for (double& x : c) x *= r / nc;  // project to the sphere
        CHECK(functional_value(g, c) <= opt.J + 1e-9);
    }

    // scaling the gradient leaves the maximizer unchanged
    std::vector<double> g2(g);
    for (double& x : g2) x *= 3.7;
    OptimalCoupling opt2 = optimize_ball(g2, basis, r);
    for (int i = 0; i < k; ++i)
        CHECK(opt2.coeffs[i] == doctest::Approx(opt.coeffs[i]).epsilon(1e-10));

    // zero gradient: flag, zero J
    OptimalCoupling flat = optimize_ball(std::vector<double>(k, 0.0), basis, r);
    CHECK(flat.all_feasible_optimal);
    CHECK(flat.J == 0.0);
}

TEST_CASE("box optimizer: coordinatewise sign rule") {
    PerturbationBasis basis;
    basis.degree = 1;
    int k = basis.num_modes();
    auto g = random_coeffs(k, 13);
    std::vector<double> lo(k, -0.5), hi(k, 0.25);
    ConvexConstraint box = ConvexConstraint::box(lo, hi);
    box.validate(k);
    OptimalCoupling opt = optimize_convex(g, basis, box);
    for (int i = 0; i < k; ++i) {
        double expect = g[i] > 0 ? hi[i] : (g[i] < 0 ? lo[i] : 0.0);
        CHECK(opt.coeffs[i] == doctest::Approx(expect).epsilon(1e-10));
    }
    CHECK(box.contains(basis, opt.coeffs));
}

TEST_CASE("ball constraint through optimize_convex delegates to the closed form") {
    PerturbationBasis basis;
    basis.degree = 2;
    int k = basis.num_modes();
    auto g = random_coeffs(k, 17);
    ConvexConstraint ball = ConvexConstraint::ball(0.4);
    OptimalCoupling a = optimize_convex(g, basis, ball);
    OptimalCoupling b = optimize_ball(g, basis, 0.4);
    for (int i = 0; i < k; ++i)
        CHECK(a.coeffs[i] == doctest::Approx(b.coeffs[i]).epsilon(1e-12));
}

TEST_CASE("ball-intersect-box: feasible, and dominates random feasible points") {
    PerturbationBasis basis;
    basis.degree = 2;
    int k = basis.num_modes();
    auto g = random_coeffs(k, 19);
    std::vector<double> lo(k, -0.05), hi(k, 0.08);
    ConvexConstraint P = ConvexConstraint::ball_intersect_box(0.5, lo, hi);
    P.validate(k);
    OptimalCoupling opt = optimize_convex(g, basis, P);
    CHECK(P.contains(basis, opt.coeffs, 1e-7));
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 10000; ++t) {
        std::vector<double> c(k);
        for (int i = 0; i < k; ++i) c[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
        if (weighted_norm(basis, c) > 0.5) continue;
        CHECK(functional_value(g, c) <= opt.J + 1e-7);
    }
}

TEST_CASE("constraint validation rejects sets excluding zero") {
    ConvexConstraint bad = ConvexConstraint::box({0.1, 0.1}, {0.2, 0.2});
    CHECK_THROWS_AS(bad.validate(2), ConfigError);
    ConvexConstraint badball = ConvexConstraint::ball(-1.0);
    CHECK_THROWS_AS(badball.validate(2), ConfigError);
    ConvexConstraint wrongdim = ConvexConstraint::box({-1.0}, {1.0});
    CHECK_THROWS_AS(wrongdim.validate(2), ConfigError);
}
