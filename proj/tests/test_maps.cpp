#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "scto/analysis.hpp"
#include "scto/maps.hpp"

using namespace scto;

namespace {

// uniform quadrature degree check: covering number of preimages
int count_preimages(const CircleMap& m, double y) {
    int c = 0;
    for (const auto& br : m.branches) {
        double x = br.inverse(y);
        if (x >= br.a - 1e-9 && x <= br.b + 1e-9 &&
            std::fabs(wrap_unit(m.eval(wrap_unit(x))) - wrap_unit(y)) < 1e-8)
            ++c;
    }
    return c;
}

}  // namespace

TEST_CASE("doubling map: branches invert the dynamics") {
    CircleMap m = make_doubling_map();
    CHECK(m.eval(0.1) == doctest::Approx(0.2));
    CHECK(m.eval(0.6) == doctest::Approx(0.2));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        double y = u(rng);
        CHECK(count_preimages(m, y) == 2);
        for (const auto& br : m.branches) {
            double x = br.inverse(y);
            CHECK(m.eval(x) == doctest::Approx(y).epsilon(1e-12));
            CHECK(br.inverse_deriv(y) == doctest::Approx(0.5));
        }
    }
}

TEST_CASE("perturbed doubling: round-trip and degree 2") {
    const double eps = 0.05;
    CircleMap m = make_perturbed_doubling_map(eps);
    CHECK(m.eval(0.0) == doctest::Approx(0.0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        double y = u(rng);
        CHECK(count_preimages(m, y) == 2);
        for (const auto& br : m.branches) {
            double x = br.inverse(y);
            CHECK(wrap_unit(m.eval(x)) == doctest::Approx(y).epsilon(1e-10));
            // inverse derivative consistent with the chain rule
            CHECK(br.inverse_deriv(y) == doctest::Approx(1.0 / m.deriv(x)).epsilon(1e-8));
        }
    }
    CHECK_THROWS_AS(make_perturbed_doubling_map(0.2), ConfigError);
}

TEST_CASE("tent map: interval dynamics") {
    CircleMap m = make_tent_map();
    CHECK(m.interval_map);
    CHECK(m.eval(0.25) == doctest::Approx(0.5));
    CHECK(m.eval(0.5) == doctest::Approx(1.0));
    CHECK(m.eval(0.75) == doctest::Approx(0.5));
    for (double y : {0.1, 0.3, 0.7, 0.9}) {
        CHECK(m.branches[0].inverse(y) == doctest::Approx(y / 2));
        CHECK(m.branches[1].inverse(y) == doctest::Approx(1 - y / 2));
    }
}

TEST_CASE("coupling kernels: separable decomposition matches eval") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const CouplingKernel& k :
         {make_sine_difference_kernel(), make_product_trig_kernel(),
          make_cosy_sinx_kernel(),
          make_fourier_table_kernel({{0.0, 0.3}, {0.1, 0.0, 0.5}})}) {
        REQUIRE(!k.separable.empty());
        for (int t = 0; t < 200; ++t) {
            double x = u(rng), y = u(rng);
            double direct = k.eval(x, y);
            double viaterms = 0, dviaterms = 0;
            for (const auto& term : k.separable) {
                viaterms += term.fx(x) * term.fy(y);
                dviaterms += term.dfx(x) * term.fy(y);
            }
            CHECK(direct == doctest::Approx(viaterms).epsilon(1e-12));
            CHECK(k.dx_eval(x, y) == doctest::Approx(dviaterms).epsilon(1e-12));
            // finite-difference check of dx_eval
            double hstep = 1e-6;
            double fd = (k.eval(x + hstep, y) - k.eval(x - hstep, y)) / (2 * hstep);
            CHECK(k.dx_eval(x, y) == doctest::Approx(fd).epsilon(1e-4));
        }
    }
}

TEST_CASE("mean-field displacement: linearity and known values") {
    const int n = 256;
    GridDensity uniform = GridDensity::uniform(n);
    // sin(2pi(y-x)) against uniform: S == 0
    Displacement d = mean_field_displacement(make_sine_difference_kernel(), uniform);
    for (double s : d.S) CHECK(std::fabs(s) < 1e-12);
    // (1+cos(2pi y)) sin(2pi x) against uniform: S(x) = sin(2pi x)
    Displacement d2 = mean_field_displacement(make_product_trig_kernel(), uniform);
    for (int i = 0; i < n; ++i) {
        double x = (i + 0.5) / n;
        CHECK(d2.S[i] == doctest::Approx(std::sin(kTwoPi * x)).epsilon(1e-10));
        CHECK(d2.Sderiv[i] ==
              doctest::Approx(kTwoPi * std::cos(kTwoPi * x)).epsilon(1e-9));
    }
    // separable fast path equals the generic double loop
    CouplingKernel generic = make_product_trig_kernel();
    generic.separable.clear();
    GridDensity f = random_smooth_density(n, 77);
    Displacement fast = mean_field_displacement(make_product_trig_kernel(), f);
    Displacement slow = mean_field_displacement(generic, f);
    for (int i = 0; i < n; ++i) {
        CHECK(fast.S[i] == doctest::Approx(slow.S[i]).epsilon(1e-12));
        CHECK(fast.Sderiv[i] == doctest::Approx(slow.Sderiv[i]).epsilon(1e-12));
    }
}

TEST_CASE("mean-field diffeo: regime checks, inversion, identity") {
    const int n = 128;
    GridDensity uniform = GridDensity::uniform(n);
    Displacement d = mean_field_displacement(make_product_trig_kernel(), uniform);

    MeanFieldDiffeo id(0.0, d);
    CHECK(id.is_identity());
    CHECK(id.apply(0.3) == doctest::Approx(0.3));

    MeanFieldDiffeo phi(0.05, d);
    CHECK(!phi.is_identity());
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        double x = u(rng);
        double y = phi.apply(x);
        double back = phi.invert(y);
        CHECK(std::fabs(back - x) < 1e-10);
        CHECK(phi.deriv(x) == doctest::Approx(1.0 + 0.05 * phi.displacement_deriv(x)));
        CHECK(phi.deriv(x) > 0.0);
    }
    // delta * max|S'| = delta * 2pi >= 1
    CHECK_THROWS_AS(MeanFieldDiffeo(0.2, d), RegimeError);
}
