#include "scto/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace scto {

std::vector<double> random_smooth_function(int n, std::uint64_t seed, int max_mode) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n, 0.0);
    for (int k = 1; k <= max_mode; ++k) {
        double ck = u(rng) / (1.0 + k * k);
        double sk = u(rng) / (1.0 + k * k);
        for (int i = 0; i < n; ++i) {
            double x = kTwoPi * k * (i + 0.5) / n;
            v[i] += ck * std::cos(x) + sk * std::sin(x);
        }
    }
    return v;
}

GridDensity random_smooth_density(int n, std::uint64_t seed, int max_mode) {
    std::vector<double> v = random_smooth_function(n, seed, max_mode);
    double lo = *std::min_element(v.begin(), v.end());
    double hi = *std::max_element(v.begin(), v.end());
    double span = std::max(hi - lo, 1e-12);
    double mass = 0;
    for (double& x : v) {
        x = 0.1 + 0.9 * (x - lo) / span;  // values in [0.1, 1]
        mass += x;
    }
    mass /= n;
    for (double& x : v) x /= mass;
    return GridDensity(n, std::move(v));
}

LYCoefficients fit_ly_coefficients(const LinearApplier& op, int n, NormKind strong,
                                   NormKind weak, int samples, std::uint64_t seed) {
    std::vector<double> s(samples), w(samples), t(samples);
    for (int i = 0; i < samples; ++i) {
        auto f = random_smooth_function(n, seed + 1000 * i, 8);
        s[i] = norm(f, strong);
        w[i] = norm(f, weak);
        t[i] = norm(op(f), strong);
    }
    // least squares t ~ lambda*s + B*w via the 2x2 normal equations
    double ss = 0, sw = 0, ww = 0, st = 0, wt = 0;
    for (int i = 0; i < samples; ++i) {
        ss += s[i] * s[i];
        sw += s[i] * w[i];
        ww += w[i] * w[i];
        st += s[i] * t[i];
        wt += w[i] * t[i];
    }
    LYCoefficients ly;
    ly.strong_norm = strong;
    ly.weak_norm = weak;
    double det = ss * ww - sw * sw;
    if (std::fabs(det) > 1e-9 * ss * ww) {
        ly.lambda1 = (st * ww - wt * sw) / det;
        ly.B = (ss * wt - sw * st) / det;
    } else {
        // strong and weak norms collinear on the samples: single-ratio fit
        ly.lambda1 = ss > 0 ? st / ss : 0.0;
        ly.B = 0.0;
    }
    ly.lambda1 = std::max(ly.lambda1, 0.0);
    ly.B = std::max(ly.B, 0.0);
    for (int i = 0; i < samples; ++i)
        ly.fit_residual = std::max(ly.fit_residual,
                                   t[i] - ly.lambda1 * s[i] - ly.B * w[i]);
    ly.lambda1 *= 1.05;
    ly.B *= 1.05;
    // lift B to cover stragglers when the contraction factor allows it
    if (ly.lambda1 < 1.0) {
        for (int i = 0; i < samples; ++i)
            if (w[i] > 0)
                ly.B = std::max(ly.B, (t[i] - ly.lambda1 * s[i]) / w[i]);
    }
    for (int i = 0; i < samples; ++i)
        if (t[i] > ly.lambda1 * s[i] + ly.B * w[i] + 1e-10) ++ly.violations;
    ly.regime_ok = ly.lambda1 < 1.0;
    return ly;
}

DecaySequence convergence_to_equilibrium(const LinearApplier& op,
                                         const SignedGridFunction& g, int N,
                                         NormKind strong, NormKind weak) {
    if (std::fabs(g.mean()) > 1e-10)
        throw DomainError("convergence_to_equilibrium: input must have zero mean");
    DecaySequence out;
    double s0 = norm(g.values, strong);
    if (s0 == 0) throw DomainError("convergence_to_equilibrium: zero input");
    std::vector<double> v = g.values;
    out.a.reserve(N);
    for (int k = 1; k <= N; ++k) {
        v = op(v);
        out.a.push_back(norm(v, weak) / s0);
    }
    // log-linear fit a_n ~ C e^{-gamma n} over the tail half
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int k = N / 2; k < N; ++k) {
        if (out.a[k] <= 1e-300) continue;
        double x = k + 1, y = std::log(out.a[k]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    if (cnt >= 2) {
        double det = cnt * sxx - sx * sx;
        double slope = (cnt * sxy - sx * sy) / det;
        double icept = (sy * sxx - sx * sxy) / det;
        out.gamma = -slope;
        out.prefactor = std::exp(icept);
    }
    out.gamma_positive = out.gamma > 1e-6;
    return out;
}

ContractionReport contraction_matrix(const LYCoefficients& ly, double K, double Q,
                                     double C, double a_n1, double delta, int n1) {
    if (ly.lambda1 >= 1.0)
        throw DomainError("contraction_matrix: requires lambda1 < 1");
    ContractionReport r;
    r.n1 = n1;
    const double l = ly.lambda1, B = ly.B;
    r.M[0][0] = std::pow(l, n1);
    r.M[0][1] = B / (1.0 - l);
    r.M[1][0] = delta * Q * K * C + a_n1;
    r.M[1][1] = delta * Q * K * n1 * B / (1.0 - l);
    const double tr = r.M[0][0] + r.M[1][1];
    const double det = r.M[0][0] * r.M[1][1] - r.M[0][1] * r.M[1][0];
    const double disc = std::max(tr * tr / 4.0 - det, 0.0);
    r.rho = tr / 2.0 + std::sqrt(disc);
    // leading eigenvector of M^T
    double v0 = r.M[1][0], v1 = r.rho - r.M[0][0];
    if (std::fabs(v0) + std::fabs(v1) < 1e-300) {
        v0 = r.rho - r.M[1][1];
        v1 = r.M[0][1];
    }
    if (std::fabs(v0) + std::fabs(v1) < 1e-300) { v0 = 1; v1 = 0; }
    v0 = std::max(v0, 0.0);
    v1 = std::max(v1, 0.0);
    double sum = v0 + v1;
    r.a = v0 / sum;
    r.b = v1 / sum;
    r.regime_ok = r.rho < 1.0 && r.a >= 0 && r.b >= 0;
    return r;
}

double contraction_delta_star(const LYCoefficients& ly, double K, double Q,
                              double C, double a_n1, int n1, double delta_cap) {
    auto rho_at = [&](double d) {
        return contraction_matrix(ly, K, Q, C, a_n1, d, n1).rho;
    };
    if (rho_at(0.0) >= 1.0) return 0.0;
    double hi = 1e-6;
    while (hi < delta_cap && rho_at(hi) < 1.0) hi *= 2.0;
    if (hi >= delta_cap) return std::numeric_limits<double>::infinity();
    double lo = hi / 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (rho_at(mid) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double balanced_norm(const std::vector<double>& g, double a, double b,
                     NormKind strong, NormKind weak) {
    if (a < 0 || b < 0) throw DomainError("balanced_norm: weights must be >= 0");
    return a * norm(g, strong) + b * norm(g, weak);
}

double fit_operator_sensitivity(
    const std::function<LinearApplier(const GridDensity&)>& frozen, int n,
    double delta, NormKind strong, NormKind weak, int samples,
    std::uint64_t seed) {
    if (delta <= 0)
        throw ConfigError("fit_operator_sensitivity: needs delta > 0");
    double worst = 0;
    for (int i = 0; i < samples; ++i) {
        GridDensity mu1 = random_smooth_density(n, seed + 3 * i);
        GridDensity mu2 = random_smooth_density(n, seed + 3 * i + 1);
        auto f = random_smooth_function(n, seed + 3 * i + 2);
        auto L1f = frozen(mu1)(f);
        auto L2f = frozen(mu2)(f);
        std::vector<double> diffL(n), diffmu(n);
        for (int j = 0; j < n; ++j) {
            diffL[j] = L1f[j] - L2f[j];
            diffmu[j] = mu1.values[j] - mu2.values[j];
        }
        double denom = delta * norm(diffmu, weak) * norm(f, strong);
        if (denom > 0) worst = std::max(worst, norm(diffL, weak) / denom);
    }
    return worst;
}

}  // namespace scto
