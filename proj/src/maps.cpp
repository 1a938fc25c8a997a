#include "scto/maps.hpp"

#include <algorithm>
#include <cmath>

#include "scto/simd.hpp"

namespace scto {

namespace {

// Monotone scalar solve on a bracket: bisection to get close, Newton to
// finish. g must be increasing on [lo, hi] with g(lo) <= 0 <= g(hi).
double solve_increasing(const std::function<double(double)>& g,
                        const std::function<double(double)>& gprime,
                        double lo, double hi, double tol) {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 40; ++it) {
        x = 0.5 * (lo + hi);
        double v = g(x);
        if (v > 0)
            hi = x;
        else
            lo = x;
        if (hi - lo < 1e-6) break;
    }
    x = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        double v = g(x);
        if (std::fabs(v) <= tol) return x;
        double d = gprime(x);
        double step = v / d;
        double xn = x - step;
        if (xn <= lo || xn >= hi) xn = 0.5 * (lo + hi);  // keep the bracket
        if (g(xn) > 0)
            hi = xn;
        else
            lo = xn;
        x = xn;
        if (hi - lo < 1e-15) return 0.5 * (lo + hi);
    }
    double res = std::fabs(g(x));
    if (res > 1e-10)
        throw NumericalError("monotone solve failed to converge", res);
    return x;
}

}  // namespace

CircleMap make_doubling_map() {
    CircleMap m;
    m.name = "doubling";
    m.eval = [](double x) { return wrap_unit(2.0 * x); };
    m.deriv = [](double) { return 2.0; };
    m.branches = {
        {0.0, 0.5, [](double x) { return x / 2.0; }, [](double) { return 0.5; }},
        {0.5, 1.0, [](double x) { return (x + 1.0) / 2.0; }, [](double) { return 0.5; }},
    };
    m.min_slope = 2.0;
    m.piecewise_linear = true;
    return m;
}

CircleMap make_perturbed_doubling_map(double eps) {
    if (std::fabs(eps) * kTwoPi >= 1.0)
        throw ConfigError("perturbed-doubling: |eps| must be < 1/(2 pi)");
    CircleMap m;
    m.name = "perturbed-doubling";
    auto lift = [eps](double x) { return 2.0 * x + eps * std::sin(kTwoPi * x); };
    auto lift_d = [eps](double x) { return 2.0 + eps * kTwoPi * std::cos(kTwoPi * x); };
    m.eval = [lift](double x) { return wrap_unit(lift(x)); };
    m.deriv = lift_d;
    // branch cut where the lift reaches 1
    double cut = solve_increasing([lift](double t) { return lift(t) - 1.0; }, lift_d,
                                  0.0, 1.0, 1e-14);
    auto inv = [lift, lift_d](double target, double lo, double hi) {
        return solve_increasing([&, target](double t) { return lift(t) - target; },
                                lift_d, lo, hi, 1e-14);
    };
    m.branches = {
        {0.0, cut, [inv, cut](double x) { return inv(x, 0.0, cut); },
         [lift_d, inv, cut](double x) { return 1.0 / lift_d(inv(x, 0.0, cut)); }},
        {cut, 1.0, [inv, cut](double x) { return inv(x + 1.0, cut, 1.0); },
         [lift_d, inv, cut](double x) { return 1.0 / lift_d(inv(x + 1.0, cut, 1.0)); }},
    };
    m.min_slope = 2.0 - std::fabs(eps) * kTwoPi;
    return m;
}

CircleMap make_tent_map() {
    CircleMap m;
    m.name = "tent";
    m.eval = [](double x) { return std::min(2.0 * x, 2.0 - 2.0 * x); };
    m.deriv = [](double x) { return x < 0.5 ? 2.0 : -2.0; };
    m.branches = {
        {0.0, 0.5, [](double x) { return x / 2.0; }, [](double) { return 0.5; }},
        {0.5, 1.0, [](double x) { return 1.0 - x / 2.0; }, [](double) { return -0.5; }},
    };
    m.min_slope = 2.0;
    m.piecewise_linear = true;
    m.interval_map = true;
    return m;
}

CircleMap make_rotation_map(double alpha) {
    CircleMap m;
    m.name = "rotation";
    m.eval = [alpha](double x) { return wrap_unit(x + alpha); };
    m.deriv = [](double) { return 1.0; };
    m.branches = {{0.0, 1.0, [alpha](double x) { return wrap_unit(x - alpha); },
                   [](double) { return 1.0; }}};
    m.min_slope = 1.0;
    m.piecewise_linear = true;
    return m;
}

CircleMap make_identity_map() {
    CircleMap m = make_rotation_map(0.0);
    m.name = "identity";
    return m;
}

double fourier_mode(int index, double t) {
    if (index == 0) return 1.0;
    int mfreq = (index + 1) / 2;
    return (index % 2 == 1) ? std::cos(kTwoPi * mfreq * t) : std::sin(kTwoPi * mfreq * t);
}

double fourier_mode_deriv(int index, double t) {
    if (index == 0) return 0.0;
    int mfreq = (index + 1) / 2;
    double w = kTwoPi * mfreq;
    return (index % 2 == 1) ? -w * std::sin(w * t) : w * std::cos(w * t);
}

CouplingKernel make_sine_difference_kernel() {
    CouplingKernel k;
    k.name = "sine-difference";
    k.eval = [](double x, double y) { return std::sin(kTwoPi * (y - x)); };
    k.dx_eval = [](double x, double y) { return -kTwoPi * std::cos(kTwoPi * (y - x)); };
    k.lipschitz_bound = kTwoPi;
    // sin(2pi(y-x)) = sin(2pi y)cos(2pi x) - cos(2pi y)sin(2pi x)
    k.separable = {
        {[](double x) { return std::cos(kTwoPi * x); },
         [](double x) { return -kTwoPi * std::sin(kTwoPi * x); },
         [](double y) { return std::sin(kTwoPi * y); }},
        {[](double x) { return -std::sin(kTwoPi * x); },
         [](double x) { return -kTwoPi * std::cos(kTwoPi * x); },
         [](double y) { return std::cos(kTwoPi * y); }},
    };
    return k;
}

CouplingKernel make_product_trig_kernel() {
    CouplingKernel k;
    k.name = "product-of-trigs";
    k.eval = [](double x, double y) {
        return (1.0 + std::cos(kTwoPi * y)) * std::sin(kTwoPi * x);
    };
    k.dx_eval = [](double x, double y) {
        return (1.0 + std::cos(kTwoPi * y)) * kTwoPi * std::cos(kTwoPi * x);
    };
    k.lipschitz_bound = 2.0 * kTwoPi;
    k.separable = {
        {[](double x) { return std::sin(kTwoPi * x); },
         [](double x) { return kTwoPi * std::cos(kTwoPi * x); },
         [](double y) { return 1.0 + std::cos(kTwoPi * y); }},
    };
    return k;
}

CouplingKernel make_cosy_sinx_kernel() {
    CouplingKernel k;
    k.name = "cosy-sinx";
    k.eval = [](double x, double y) { return std::cos(kTwoPi * y) * std::sin(kTwoPi * x); };
    k.dx_eval = [](double x, double y) {
        return std::cos(kTwoPi * y) * kTwoPi * std::cos(kTwoPi * x);
    };
    k.lipschitz_bound = kTwoPi;
    k.separable = {
        {[](double x) { return std::sin(kTwoPi * x); },
         [](double x) { return kTwoPi * std::cos(kTwoPi * x); },
         [](double y) { return std::cos(kTwoPi * y); }},
    };
    return k;
}

CouplingKernel make_fourier_table_kernel(const std::vector<std::vector<double>>& c) {
    CouplingKernel k;
    k.name = "fourier-table";
    auto coeffs = c;
    k.eval = [coeffs](double x, double y) {
        double s = 0;
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            for (std::size_t j = 0; j < coeffs[i].size(); ++j)
                if (coeffs[i][j] != 0.0)
                    s += coeffs[i][j] * fourier_mode(static_cast<int>(i), x) *
                         fourier_mode(static_cast<int>(j), y);
        return s;
    };
    k.dx_eval = [coeffs](double x, double y) {
        double s = 0;
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            for (std::size_t j = 0; j < coeffs[i].size(); ++j)
                if (coeffs[i][j] != 0.0)
                    s += coeffs[i][j] * fourier_mode_deriv(static_cast<int>(i), x) *
                         fourier_mode(static_cast<int>(j), y);
        return s;
    };
    double lip = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c[i].size(); ++j)
            lip += std::fabs(c[i][j]) * kTwoPi * (((i + 1) / 2) + ((j + 1) / 2));
    k.lipschitz_bound = lip;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c[i].size(); ++j)
            if (c[i][j] != 0.0) {
                int ii = static_cast<int>(i), jj = static_cast<int>(j);
                double cc = c[i][j];
                k.separable.push_back(
                    {[ii](double x) { return fourier_mode(ii, x); },
                     [ii](double x) { return fourier_mode_deriv(ii, x); },
                     [jj, cc](double y) { return cc * fourier_mode(jj, y); }});
            }
    return k;
}

Displacement mean_field_displacement(const CouplingKernel& h, const GridDensity& psi) {
    const int n = psi.n;
    Displacement d;
    d.S.assign(n, 0.0);
    d.Sderiv.assign(n, 0.0);
    if (!h.separable.empty()) {
        for (const auto& term : h.separable) {
            double moment = 0;
            for (int j = 0; j < n; ++j)
                moment += term.fy(psi.cell_mid(j)) * psi.values[j];
            moment /= n;
            for (int i = 0; i < n; ++i) {
                double x = psi.cell_mid(i);
                d.S[i] += term.fx(x) * moment;
                d.Sderiv[i] += term.dfx(x) * moment;
            }
        }
    } else {
        for (int i = 0; i < n; ++i) {
            double x = psi.cell_mid(i), s = 0, sd = 0;
            for (int j = 0; j < n; ++j) {
                double y = psi.cell_mid(j);
                s += h.eval(x, y) * psi.values[j];
                sd += h.dx_eval(x, y) * psi.values[j];
            }
            d.S[i] = s / n;
            d.Sderiv[i] = sd / n;
        }
    }
    return d;
}

MeanFieldDiffeo::MeanFieldDiffeo(double delta, Displacement disp)
    : delta_(delta), disp_(std::move(disp)) {
    if (delta_ < 0) throw ConfigError("MeanFieldDiffeo: delta must be >= 0");
    double max_s = 0, max_sd = 0;
    for (double s : disp_.S) max_s = std::max(max_s, std::fabs(s));
    for (double sd : disp_.Sderiv) max_sd = std::max(max_sd, std::fabs(sd));
    if (delta_ * max_sd >= 1.0)
        throw RegimeError("diffeomorphism condition violated: delta*max|S'| = " +
                          std::to_string(delta_ * max_sd) + " >= 1");
    if (delta_ * max_s >= 0.5)
        throw RegimeError("displacement too large: delta*max|S| = " +
                          std::to_string(delta_ * max_s) + " >= 1/2");
    identity_ = (delta_ == 0.0) || (max_s == 0.0 && max_sd == 0.0);
}

double MeanFieldDiffeo::displacement(double x) const {
    return interp_midpoints(disp_.S, x);
}

double MeanFieldDiffeo::displacement_deriv(double x) const {
    return interp_midpoints(disp_.Sderiv, x);
}

double MeanFieldDiffeo::apply(double x) const {
    if (identity_) return wrap_unit(x);
    return wrap_unit(x + delta_ * displacement(x));
}

double MeanFieldDiffeo::deriv(double x) const {
    if (identity_) return 1.0;
    return 1.0 + delta_ * displacement_deriv(x);
}

double MeanFieldDiffeo::invert(double y) const {
    y = wrap_unit(y);
    if (identity_) return y;
    // On the lift, Phi(t) = t + delta*S(t) is increasing and |delta*S| < 1/2,
    // so the solution lies in [y - 0.6, y + 0.6].
    auto g = [this, y](double t) { return t + delta_ * displacement(t) - y; };
    auto gd = [this](double t) { return 1.0 + delta_ * displacement_deriv(t); };
    double x = solve_increasing(g, gd, y - 0.6, y + 0.6, 1e-13);
    return wrap_unit(x);
}

}  // namespace scto
