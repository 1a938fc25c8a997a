#include "scto/particle.hpp"

#include <algorithm>
#include <cmath>

namespace scto {

namespace {

inline std::uint64_t sm64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t step,
                           std::uint64_t agent, std::uint64_t draw) {
    return sm64(seed ^ sm64(step ^ sm64(agent ^ sm64(draw))));
}

double counter_uniform(std::uint64_t seed, std::uint64_t step, std::uint64_t agent,
                       std::uint64_t draw) {
    return (counter_hash(seed, step, agent, draw) >> 11) * 0x1.0p-53;
}

ParticleEnsemble uniform_ensemble(std::size_t N, std::uint64_t seed) {
    ParticleEnsemble e;
    e.seed = seed;
    e.states.resize(N);
    for (std::size_t i = 0; i < N; ++i)
        e.states[i] = counter_uniform(seed, 0, i, 0);
    return e;
}

ParticleEnsemble ensemble_from_density(const GridDensity& f, std::size_t N,
                                       std::uint64_t seed) {
    const int n = f.n;
    std::vector<double> cdf(n + 1, 0.0);
    for (int i = 0; i < n; ++i) cdf[i + 1] = cdf[i] + f.values[i] / n;
    for (double& c : cdf) c /= cdf[n];
    ParticleEnsemble e;
    e.seed = seed;
    e.states.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        double u = counter_uniform(seed, 0, i, 0);
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        int cell = std::clamp(static_cast<int>(it - cdf.begin()) - 1, 0, n - 1);
        double span = cdf[cell + 1] - cdf[cell];
        double frac = span > 0 ? (u - cdf[cell]) / span : 0.5;
        e.states[i] = wrap_unit((cell + frac) / n);
    }
    return e;
}

NoiseSampler::NoiseSampler(const NoiseKernel& rho, bool on_line) : on_line_(on_line) {
    if (on_line) {
        if (rho.support_radius <= 0)
            throw ConfigError("noise sampler: line sampling needs compact support");
        const int m = 4096;
        const double w = rho.support_radius;
        cdf_.assign(m + 1, 0.0);
        support_.assign(m + 1, 0.0);
        for (int i = 0; i <= m; ++i) support_[i] = -w + 2.0 * w * i / m;
        for (int i = 0; i < m; ++i) {
            double mid = 0.5 * (support_[i] + support_[i + 1]);
            cdf_[i + 1] = cdf_[i] + rho.profile(mid);
        }
        for (double& c : cdf_) c /= cdf_[m];
    } else {
        if (rho.n == 0)
            throw ConfigError("noise sampler: kernel not periodized to a grid");
        const int n = rho.n;
        cdf_.assign(n + 1, 0.0);
        support_.assign(n + 1, 0.0);
        for (int i = 0; i <= n; ++i) support_[i] = static_cast<double>(i) / n;
        for (int i = 0; i < n; ++i)
            cdf_[i + 1] = cdf_[i] + rho.periodized[i] / n;
        for (double& c : cdf_) c /= cdf_[n];
    }
}

double NoiseSampler::draw(std::uint64_t seed, std::uint64_t step,
                          std::uint64_t agent) const {
    double u = counter_uniform(seed, step, agent, 1);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    int cell = std::clamp(static_cast<int>(it - cdf_.begin()) - 1, 0,
                          static_cast<int>(cdf_.size()) - 2);
    double span = cdf_[cell + 1] - cdf_[cell];
    double frac = span > 0 ? (u - cdf_[cell]) / span : 0.5;
    return support_[cell] + frac * (support_[cell + 1] - support_[cell]);
}

double reflect_interval(double x) {
    double y = std::fmod(x, 2.0);
    if (y < 0) y += 2.0;
    return y <= 1.0 ? y : 2.0 - y;
}

void step_ensemble(ParticleEnsemble& e, const SelfConsistentModel& model,
                   std::uint64_t pair_budget) {
    model.validate();
    const std::size_t N = e.states.size();
    if (N == 0) throw ConfigError("step_ensemble: empty ensemble");
    const std::uint64_t step_id = e.step_count + 1;

    if (model.cls == SystemClass::TwoPopulation)
        throw ConfigError("step_ensemble: two-population simulation not supported");

    if (model.cls == SystemClass::ReflectingKernelInterval) {
        double mean = 0;
        for (double x : e.states) mean += x;
        mean /= static_cast<double>(N);
        double denom = 1.0 + model.delta * mean;
        if (denom <= 0.1)
            throw RegimeError("step_ensemble: effective slope denominator " +
                              std::to_string(denom));
        NoiseSampler sampler(*model.noise, /*on_line=*/true);
        const auto& T = model.base_maps[0].eval;
        for (std::size_t i = 0; i < N; ++i) {
            double y = T(e.states[i]) / denom + sampler.draw(e.seed, step_id, i);
            e.states[i] = reflect_interval(y);
        }
        e.step_count = step_id;
        return;
    }

    // circle classes: x_i <- wrap(T x_i + delta * S(T x_i) + noise)
    const CouplingKernel& h = model.couplings[0];
    const auto& T = model.base_maps[0].eval;
    std::vector<double> tx(N);
    for (std::size_t i = 0; i < N; ++i) tx[i] = wrap_unit(T(e.states[i]));

    std::vector<double> disp(N, 0.0);
    if (model.delta != 0) {
        if (!h.separable.empty()) {
            std::vector<double> moments(h.separable.size(), 0.0);
            for (std::size_t k = 0; k < h.separable.size(); ++k) {
                const auto& fy = h.separable[k].fy;
                double acc = 0;
                for (std::size_t j = 0; j < N; ++j) acc += fy(e.states[j]);
                moments[k] = acc / static_cast<double>(N);
            }
            for (std::size_t i = 0; i < N; ++i) {
                double s = 0;
                for (std::size_t k = 0; k < h.separable.size(); ++k)
                    s += h.separable[k].fx(tx[i]) * moments[k];
                disp[i] = s;
            }
        } else {
            if (N * N > pair_budget)
                throw ConfigError(
                    "step_ensemble: coupling has no separable decomposition and "
                    "N^2 exceeds the pair budget; supply a trigonometric coupling "
                    "or raise the budget");
            for (std::size_t i = 0; i < N; ++i) {
                double s = 0;
                for (std::size_t j = 0; j < N; ++j) s += h.eval(tx[i], e.states[j]);
                disp[i] = s / static_cast<double>(N);
            }
        }
    }

    const bool noisy = model.cls == SystemClass::AdditiveNoiseCircle;
    NoiseSampler sampler;
    if (noisy) sampler = NoiseSampler(*model.noise, /*on_line=*/false);
    for (std::size_t i = 0; i < N; ++i) {
        double y = tx[i] + model.delta * disp[i];
        if (noisy) y += sampler.draw(e.seed, step_id, i);
        e.states[i] = wrap_unit(y);
    }
    e.step_count = step_id;
}

GridDensity empirical_density(const ParticleEnsemble& e, int n) {
    std::vector<double> v(n, 0.0);
    const double scale = static_cast<double>(n) / e.states.size();
    for (double x : e.states) {
        int i = std::clamp(static_cast<int>(x * n), 0, n - 1);
        v[i] += scale;
    }
    return GridDensity(n, std::move(v), false);
}

GridDensity stationary_histogram(ParticleEnsemble& e,
                                 const SelfConsistentModel& model, int burn_in,
                                 int sample_steps, int n) {
    for (int k = 0; k < burn_in; ++k) step_ensemble(e, model);
    std::vector<double> acc(n, 0.0);
    for (int k = 0; k < sample_steps; ++k) {
        step_ensemble(e, model);
        GridDensity d = empirical_density(e, n);
        for (int i = 0; i < n; ++i) acc[i] += d.values[i];
    }
    for (double& x : acc) x /= sample_steps;
    return GridDensity(n, std::move(acc), false);
}

}  // namespace scto
