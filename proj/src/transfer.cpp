#include "scto/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "scto/simd.hpp"

namespace scto {

TransferMatrix::TransferMatrix(int n_, std::vector<double> e) : n(n_), entries(std::move(e)) {
    if (entries.size() != static_cast<std::size_t>(n) * n)
        throw DomainError("TransferMatrix: wrong entry count");
}

TransferMatrix TransferMatrix::identity(int n) {
    std::vector<double> e(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i) * n + i] = 1.0;
    return TransferMatrix(n, std::move(e));
}

std::vector<double> TransferMatrix::apply(const std::vector<double>& f) const {
    std::vector<double> out(n);
    simd::active().matvec(entries.data(), f.data(), out.data(), n);
    return out;
}

GridDensity TransferMatrix::apply(const GridDensity& f) const {
    return GridDensity(n, apply(f.values), false);
}

SignedGridFunction TransferMatrix::apply(const SignedGridFunction& f) const {
    return SignedGridFunction(n, apply(f.values), false);
}

double TransferMatrix::max_column_defect() const {
    double worst = 0;
    for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += at(i, j);
        worst = std::max(worst, std::fabs(s - 1.0));
    }
    return worst;
}

void TransferMatrix::renormalize_columns() {
    for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += at(i, j);
        if (s > 0)
            for (int i = 0; i < n; ++i) at(i, j) /= s;
    }
}

TransferMatrix TransferMatrix::transpose() const {
    std::vector<double> e(entries.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            e[static_cast<std::size_t>(j) * n + i] = at(i, j);
    return TransferMatrix(n, std::move(e));
}

// ---------------------------------------------------------------- noise

namespace {

NoiseKernel periodize(NoiseKernel k, int n) {
    int K = 1;
    if (k.support_radius > 0) {
        K = static_cast<int>(std::ceil(k.support_radius)) + 1;
        k.tail_bound = 0;
    } else {
        // rho(x+m) over offsets x in [0,1) is bounded by rho(|m|-1)
        double tail;
        for (K = 1; K < 64; ++K) {
            tail = 0;
            for (int m = K + 1; m < K + 40; ++m) tail += k.profile(m - 1.0);
            tail *= 2;
            if (tail < 1e-14) break;
        }
        k.tail_bound = tail;
    }
    k.truncation_terms = K;
    k.n = n;
    k.periodized.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = static_cast<double>(i) / n;
        double s = 0;
        for (int m = -K; m <= K; ++m) s += k.profile(x + m);
        k.periodized[i] = s;
    }
    double mass = simd::active().sum(k.periodized.data(), n) / n;
    simd::active().scale(1.0 / mass, k.periodized.data(), n);
    return k;
}

}  // namespace

NoiseKernel make_wrapped_gaussian(double sigma, int n) {
    if (sigma <= 0) throw ConfigError("gaussian noise: sigma must be > 0");
    NoiseKernel k;
    k.name = "gaussian";
    k.param = sigma;
    double norm_c = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    k.profile = [sigma, norm_c](double x) {
        return norm_c * std::exp(-x * x / (2.0 * sigma * sigma));
    };
    k.dprofile = [sigma, norm_c](double x) {
        return -x / (sigma * sigma) * norm_c * std::exp(-x * x / (2.0 * sigma * sigma));
    };
    k.sup_profile = norm_c;
    k.support_radius = 0;
    return periodize(std::move(k), n);
}

NoiseKernel make_raised_cosine(double w, int n) {
    if (w <= 0 || w > 1) throw ConfigError("raised-cosine noise: width must be in (0,1]");
    NoiseKernel k;
    k.name = "raised-cosine";
    k.param = w;
    k.profile = [w](double x) {
        if (std::fabs(x) >= w) return 0.0;
        return (1.0 + std::cos(M_PI * x / w)) / (2.0 * w);
    };
    k.dprofile = [w](double x) {
        if (std::fabs(x) >= w) return 0.0;
        return -M_PI / (2.0 * w * w) * std::sin(M_PI * x / w);
    };
    k.sup_profile = 1.0 / w;
    k.support_radius = w;
    return periodize(std::move(k), n);
}

NoiseKernel make_grid_delta(int n) {
    NoiseKernel k;
    k.name = "grid-delta";
    k.profile = [](double) { return 0.0; };
    k.dprofile = [](double) { return 0.0; };
    k.n = n;
    k.periodized.assign(n, 0.0);
    k.periodized[0] = static_cast<double>(n);
    k.sup_profile = static_cast<double>(n);
    return k;
}

// ----------------------------------------------------- reflecting kernel

ReflectingKernel reflecting_kernel_matrix(const std::function<double(double)>& Tmap,
                                          const NoiseKernel& rho, int n,
                                          bool renormalize, bool use_derivative) {
    if (rho.support_radius <= 0 || rho.support_radius > 1)
        throw ConfigError("reflecting kernel requires a kernel supported in [-1,1]");
    const auto& prof = use_derivative ? rho.dprofile : rho.profile;
    ReflectingKernel k;
    k.n = n;
    k.entries.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        double ty = Tmap((j + 0.5) / n);
        for (int i = 0; i < n; ++i) {
            double x = (i + 0.5) / n;
            double s = 0;
            for (int m = -2; m <= 2; ++m) {
                s += prof(x + 2.0 * m - ty);
                s += prof(-x + 2.0 * m - ty);
            }
            k.entries[static_cast<std::size_t>(i) * n + j] = s;
        }
    }
    if (renormalize) {
        double worst = 0;
        for (int j = 0; j < n; ++j) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += k.entries[static_cast<std::size_t>(i) * n + j];
            s /= n;
            worst = std::max(worst, std::fabs(s - 1.0));
            if (s > 0)
                for (int i = 0; i < n; ++i)
                    k.entries[static_cast<std::size_t>(i) * n + j] /= s;
        }
        k.renorm_defect = worst;
    }
    return k;
}

std::vector<double> ReflectingKernel::apply(const std::vector<double>& f) const {
    std::vector<double> out(n);
    simd::active().matvec(entries.data(), f.data(), out.data(), n);
    simd::active().scale(1.0 / n, out.data(), n);
    return out;
}

GridDensity ReflectingKernel::apply(const GridDensity& f) const {
    auto v = apply(f.values);
    double mass = simd::active().sum(v.data(), v.size()) / n;
    simd::active().scale(1.0 / mass, v.data(), v.size());
    return GridDensity(n, std::move(v), false);
}

double ReflectingKernel::sup_entry() const {
    double m = 0;
    for (double e : entries) m = std::max(m, e);
    return m;
}

// ------------------------------------------------------- expanding maps

std::vector<double> expanding_transfer_apply(const CircleMap& T,
                                             const std::vector<double>& f,
                                             bool renormalize_mass) {
    if (T.branches.empty())
        throw ConfigError("expanding_transfer_apply: map has no branch data");
    const int n = static_cast<int>(f.size());
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = (i + 0.5) / n;
        double s = 0;
        for (const auto& br : T.branches)
            s += interp_midpoints(f, br.inverse(x)) * std::fabs(br.inverse_deriv(x));
        out[i] = s;
    }
    double mass_in = simd::active().sum(f.data(), f.size());
    double mass_out = simd::active().sum(out.data(), out.size());
    if (renormalize_mass && mass_out != 0.0) {
        simd::active().scale(mass_in / mass_out, out.data(), out.size());
    } else {
        double shift = (mass_in - mass_out) / n;
        for (double& v : out) v += shift;
    }
    return out;
}

GridDensity expanding_transfer_apply(const CircleMap& T, const GridDensity& f) {
    return GridDensity(f.n, expanding_transfer_apply(T, f.values, true), false);
}

SignedGridFunction expanding_transfer_apply(const CircleMap& T,
                                            const SignedGridFunction& f) {
    return SignedGridFunction(f.n, expanding_transfer_apply(T, f.values, false),
                              false);
}

// ---------------------------------------------------------- Ulam matrix

namespace {

// Distribute the preimage interval [lo, hi) (already inside one branch
// domain) over the source cells of column space, weight n * length.
void deposit_interval(TransferMatrix& M, int row, double lo, double hi) {
    if (hi <= lo) return;
    const int n = M.n;
    int j0 = std::clamp(static_cast<int>(std::floor(lo * n)), 0, n - 1);
    int j1 = std::clamp(static_cast<int>(std::ceil(hi * n)) - 1, 0, n - 1);
    for (int j = j0; j <= j1; ++j) {
        double a = std::max(lo, static_cast<double>(j) / n);
        double b = std::min(hi, static_cast<double>(j + 1) / n);
        if (b > a) M.at(row, j) += (b - a) * n;
    }
}

TransferMatrix ulam_exact_piecewise_linear(const CircleMap& T, int n) {
    TransferMatrix M(n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0));
    for (int i = 0; i < n; ++i) {
        double lo_img = static_cast<double>(i) / n;
        double hi_img = static_cast<double>(i + 1) / n;
        for (const auto& br : T.branches) {
            bool increasing = br.inverse_deriv(0.5 * (lo_img + hi_img)) >= 0;
            double e0 = br.inverse(lo_img);
            double e1 = br.inverse(hi_img);
            if (!increasing) std::swap(e0, e1);
            // guard endpoint wrap (e.g. inverse(1.0) mapping to branch start)
            if (e1 < br.a - 1e-12) e1 += 1.0;
            if (e0 > e1) {
                // preimage wraps around the branch domain
                deposit_interval(M, i, std::max(e0, br.a), br.b);
                deposit_interval(M, i, br.a, std::min(e1, br.b));
            } else {
                deposit_interval(M, i, std::max(e0, br.a), std::min(e1, br.b));
            }
        }
    }
    M.renormalize_columns();
    return M;
}

}  // namespace

TransferMatrix ulam_matrix(const std::function<double(double)>& T, int n,
                           int subsamples) {
    TransferMatrix M(n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0));
    const double w = 1.0 / subsamples;
    for (int j = 0; j < n; ++j) {
        for (int s = 0; s < subsamples; ++s) {
            double y = (j + (s + 0.5) / subsamples) / n;
            double ty = T(y);
            int i = std::clamp(static_cast<int>(std::floor(ty * n)), 0, n - 1);
            M.at(i, j) += w;
        }
    }
    return M;
}

TransferMatrix ulam_matrix(const CircleMap& T, int n, int subsamples) {
    if (T.piecewise_linear) return ulam_exact_piecewise_linear(T, n);
    return ulam_matrix(T.eval, n, subsamples);
}

// ----------------------------------------------------------- pushforward

std::vector<double> diffeo_pushforward(const MeanFieldDiffeo& phi,
                                       const std::vector<double>& f,
                                       bool renormalize_mass) {
    if (phi.is_identity()) return f;
    const int n = static_cast<int>(f.size());
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double x = phi.invert((i + 0.5) / n);
        out[i] = interp_midpoints(f, x) / std::fabs(phi.deriv(x));
    }
    double mass_in = simd::active().sum(f.data(), f.size());
    double mass_out = simd::active().sum(out.data(), out.size());
    if (renormalize_mass && mass_out != 0.0) {
        simd::active().scale(mass_in / mass_out, out.data(), out.size());
    } else {
        double shift = (mass_in - mass_out) / n;
        for (double& v : out) v += shift;
    }
    return out;
}

GridDensity diffeo_pushforward(const MeanFieldDiffeo& phi, const GridDensity& f) {
    return GridDensity(f.n, diffeo_pushforward(phi, f.values, true), false);
}

SignedGridFunction diffeo_pushforward(const MeanFieldDiffeo& phi,
                                      const SignedGridFunction& f) {
    return SignedGridFunction(f.n, diffeo_pushforward(phi, f.values, false), false);
}

// ------------------------------------------------------------ convolution

std::vector<double> convolve(const NoiseKernel& rho, const std::vector<double>& f) {
    const int n = static_cast<int>(f.size());
    if (rho.n != n) throw ConfigError("convolve: kernel/function resolution mismatch");
    std::vector<double> out(n, 0.0);
    const auto& k = simd::active();
    for (int s = 0; s < n; ++s) {
        double c = rho.periodized[s] / n;
        if (c == 0.0) continue;
        // out[i] += c * f[i - s mod n], split at the wrap point
        k.axpy(c, f.data(), out.data() + s, n - s);
        if (s > 0) k.axpy(c, f.data() + (n - s), out.data(), s);
    }
    return out;
}

GridDensity convolve(const NoiseKernel& rho, const GridDensity& f) {
    auto v = convolve(rho, f.values);
    double mass = simd::active().sum(v.data(), v.size()) / f.n;
    simd::active().scale(1.0 / mass, v.data(), v.size());
    return GridDensity(f.n, std::move(v), false);
}

SignedGridFunction convolve(const NoiseKernel& rho, const SignedGridFunction& f) {
    return SignedGridFunction(f.n, convolve(rho, f.values), false);
}

// --------------------------------------------------------- fixed density

FixedDensityResult linear_fixed_density(const LinearApplier& apply, int n,
                                        double tol, int max_iter,
                                        const GridDensity* start) {
    const auto& k = simd::active();
    std::vector<double> f = start ? start->values : std::vector<double>(n, 1.0);
    FixedDensityResult res;
    double prev_step = -1;
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<double> g = apply(f);
        double mass = k.sum(g.data(), g.size()) / n;
        if (mass > 0) k.scale(1.0 / mass, g.data(), g.size());
        double step = k.abs_diff_sum(g.data(), f.data(), n) / n;
        res.iterations = it;
        if (prev_step > 0 && step > 0) res.step_ratio = step / prev_step;
        prev_step = step;
        f = std::move(g);
        if (step <= tol) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged)
        throw NumericalError(
            "linear_fixed_density: power iteration did not converge "
            "(possible spectral degeneracy, step ratio " +
                std::to_string(res.step_ratio) + ")",
            prev_step);
    // second-eigenvalue probe on a zero-mean perturbation; a ratio near 1
    // signals eigenvalue-1 multiplicity (fixed density not unique)
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = std::cos(kTwoPi * (i + 0.5) / n);
    double d0 = k.abs_sum(d.data(), n) / n;
    for (int it = 0; it < 5; ++it) d = apply(d);
    double d5 = k.abs_sum(d.data(), n) / n;
    double probe = d0 > 0 ? std::pow(d5 / d0, 0.2) : 0.0;
    if (probe > 0.9999) res.nonunique_warning = true;
    if (res.step_ratio == 0) res.step_ratio = probe;

    for (double& v : f) v = std::max(v, 0.0);
    double mass = k.sum(f.data(), f.size()) / n;
    k.scale(1.0 / mass, f.data(), f.size());
    std::vector<double> g = apply(f);
    res.residual = k.abs_diff_sum(g.data(), f.data(), n) / n;
    res.density = GridDensity(n, std::move(f), false);
    return res;
}

FixedDensityResult linear_fixed_density(const TransferMatrix& m, double tol,
                                        int max_iter) {
    return linear_fixed_density(
        [&m](const std::vector<double>& f) { return m.apply(f); }, m.n, tol, max_iter);
}

FixedDensityResult linear_fixed_density(const ReflectingKernel& kmat, double tol,
                                        int max_iter) {
    return linear_fixed_density(
        [&kmat](const std::vector<double>& f) { return kmat.apply(f); }, kmat.n, tol,
        max_iter);
}

}  // namespace scto
