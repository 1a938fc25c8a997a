#include "scto/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scto/simd.hpp"

namespace scto {

double interp_midpoints(const std::vector<double>& v, double x) {
    const int n = static_cast<int>(v.size());
    double t = wrap_unit(x) * n - 0.5;
    int i0 = static_cast<int>(std::floor(t));
    double frac = t - i0;
    int a = ((i0 % n) + n) % n;
    int b = (a + 1) % n;
    return v[a] * (1.0 - frac) + v[b] * frac;
}

GridDensity::GridDensity(int n_, std::vector<double> v, bool validate)
    : n(n_), values(std::move(v)) {
    if (n < 2 || static_cast<int>(values.size()) != n)
        throw DomainError("GridDensity: bad cell count");
    if (validate) {
        for (double x : values)
            if (x < -1e-12) throw DomainError("GridDensity: negative cell value");
        if (std::fabs(mass() - 1.0) > 1e-9)
            throw DomainError("GridDensity: mass != 1");
    }
}

GridDensity GridDensity::uniform(int n) {
    return GridDensity(n, std::vector<double>(n, 1.0));
}

double GridDensity::mass() const {
    return simd::active().sum(values.data(), values.size()) / n;
}

double GridDensity::interp(double x) const { return interp_midpoints(values, x); }

SignedGridFunction::SignedGridFunction(int n_, std::vector<double> v,
                                       bool zero_mean_flag)
    : n(n_), values(std::move(v)), zero_mean(zero_mean_flag) {
    if (n < 2 || static_cast<int>(values.size()) != n)
        throw DomainError("SignedGridFunction: bad cell count");
    if (zero_mean && std::fabs(mean()) > 1e-10)
        throw DomainError("SignedGridFunction: zero_mean flag but mean != 0");
}

SignedGridFunction SignedGridFunction::from_density(const GridDensity& f) {
    return SignedGridFunction(f.n, f.values, false);
}

double SignedGridFunction::mean() const {
    return simd::active().sum(values.data(), values.size()) / n;
}

double SignedGridFunction::interp(double x) const { return interp_midpoints(values, x); }

void SignedGridFunction::project_zero_mean() {
    double m = mean();
    for (double& x : values) x -= m;
    zero_mean = true;
}

AtomicMeasure::AtomicMeasure(std::vector<std::pair<double, double>> a, bool validate)
    : atoms(std::move(a)) {
    for (auto& [p, w] : atoms) {
        p = wrap_unit(p);
        if (w < 0) throw DomainError("AtomicMeasure: negative weight");
    }
    if (validate && std::fabs(total_weight() - 1.0) > 1e-12)
        throw DomainError("AtomicMeasure: weights must sum to 1");
}

double AtomicMeasure::total_weight() const {
    double s = 0;
    for (const auto& [p, w] : atoms) s += w;
    return s;
}

std::vector<double> cyclic_derivative(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = n * (v[(i + 1) % n] - v[i]);
    return d;
}

namespace {

double dual_lip_norm(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    double mean = simd::active().sum(v.data(), v.size()) / n;
    if (std::fabs(mean) > 1e-10)
        throw DomainError("dual_lip norm requires zero-mean input");
    // cumulative sums F_i = (1/n) sum_{j<=i} v_j; the Kantorovich dual on
    // the circle is min_c (1/n) sum |F_i - c|, attained at the median.
    std::vector<double> F(n);
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        acc += v[i] / n;
        F[i] = acc;
    }
    std::vector<double> sorted = F;
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    double med = sorted[n / 2];
    double s = 0;
    for (double f : F) s += std::fabs(f - med);
    return s / n;
}

}  // namespace

double norm(const std::vector<double>& v, NormKind kind) {
    const auto& k = simd::active();
    const int n = static_cast<int>(v.size());
    switch (kind) {
        case NormKind::L1:
            return k.abs_sum(v.data(), v.size()) / n;
        case NormKind::L2:
            return std::sqrt(k.dot(v.data(), v.data(), v.size()) / n);
        case NormKind::Sup: {
            double m = 0;
            for (double x : v) m = std::max(m, std::fabs(x));
            return m;
        }
        case NormKind::W11: {
            auto d = cyclic_derivative(v);
            return k.abs_sum(v.data(), v.size()) / n + k.abs_sum(d.data(), d.size()) / n;
        }
        case NormKind::W21: {
            auto d = cyclic_derivative(v);
            auto dd = cyclic_derivative(d);
            return (k.abs_sum(v.data(), v.size()) + k.abs_sum(d.data(), d.size()) +
                    k.abs_sum(dd.data(), dd.size())) / n;
        }
        case NormKind::DualLip:
            return dual_lip_norm(v);
    }
    return 0;
}

double norm(const SignedGridFunction& f, NormKind kind) { return norm(f.values, kind); }
double norm(const GridDensity& f, NormKind kind) { return norm(f.values, kind); }

GridDensity ulam_project(const std::function<double(double)>& f, int n,
                         int subsamples) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int q = 0; q < subsamples; ++q)
            s += f((i + (q + 0.5) / subsamples) / n);
        v[i] = s / subsamples;
    }
    double mass = simd::active().sum(v.data(), v.size()) / n;
    simd::active().scale(1.0 / mass, v.data(), v.size());
    return GridDensity(n, std::move(v));
}

GridDensity ulam_project(const GridDensity& fine, int n) {
    if (fine.n % n != 0)
        throw ConfigError("ulam_project: fine resolution not a multiple of n");
    int block = fine.n / n;
    std::vector<double> v(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int b = 0; b < block; ++b) v[i] += fine.values[i * block + b];
        v[i] /= block;
    }
    return GridDensity(n, std::move(v), false);
}

SignedGridFunction ulam_project_signed(const std::function<double(double)>& f,
                                       int n, int subsamples) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int q = 0; q < subsamples; ++q)
            s += f((i + (q + 0.5) / subsamples) / n);
        v[i] = s / subsamples;
    }
    return SignedGridFunction(n, std::move(v));
}

AtomicMeasure hat_atom_project(const AtomicMeasure& mu, int n) {
    std::vector<double> w(n, 0.0);
    for (const auto& [p, wt] : mu.atoms) {
        double t = p * n;
        int i = static_cast<int>(std::floor(t)) % n;
        double frac = t - std::floor(t);
        w[i] += wt * (1.0 - frac);
        w[(i + 1) % n] += wt * frac;
    }
    std::vector<std::pair<double, double>> atoms;
    for (int i = 0; i < n; ++i)
        if (w[i] != 0.0) atoms.emplace_back(static_cast<double>(i) / n, w[i]);
    return AtomicMeasure(std::move(atoms));
}

AtomicMeasure hat_atom_project(const GridDensity& f, int n) {
    if (f.n != n) throw ConfigError("hat_atom_project: resolution mismatch");
    std::vector<std::pair<double, double>> atoms(n);
    for (int i = 0; i < n; ++i) {
        double w = (f.values[(i - 1 + n) % n] + f.values[i]) / (2.0 * n);
        atoms[i] = {static_cast<double>(i) / n, w};
    }
    return AtomicMeasure(std::move(atoms));
}

double wasserstein1_circle(const AtomicMeasure& mu, const AtomicMeasure& nu) {
    // CDF difference of the signed measure mu - nu is a step function;
    // W1 on the circle is min_c int |D - c| dx, a length-weighted median.
    std::vector<std::pair<double, double>> ev;  // (position, signed weight)
    for (const auto& [p, w] : mu.atoms) ev.emplace_back(p, w);
    for (const auto& [p, w] : nu.atoms) ev.emplace_back(p, -w);
    std::sort(ev.begin(), ev.end());
    if (ev.empty()) return 0.0;

    struct Seg { double value, length; };
    std::vector<Seg> segs;
    double d = 0;
    for (std::size_t k = 0; k < ev.size(); ++k) {
        d += ev[k].second;
        double next = (k + 1 < ev.size()) ? ev[k + 1].first : ev[0].first + 1.0;
        double len = next - ev[k].first;
        if (len > 0) segs.push_back({d, len});
    }
    std::sort(segs.begin(), segs.end(),
              [](const Seg& a, const Seg& b) { return a.value < b.value; });
    double half = 0.5, acc = 0, med = segs.back().value;
    for (const auto& s : segs) {
        acc += s.length;
        if (acc >= half) { med = s.value; break; }
    }
    double w1 = 0;
    for (const auto& s : segs) w1 += s.length * std::fabs(s.value - med);
    return w1;
}

GridDensity to_density(const AtomicMeasure& mu, int n) {
    std::vector<double> v(n, 0.0);
    for (const auto& [p, w] : mu.atoms) {
        int i = std::min(n - 1, static_cast<int>(p * n));
        v[i] += w * n;
    }
    return GridDensity(n, std::move(v), false);
}

}  // namespace scto
