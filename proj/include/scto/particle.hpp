#pragma once

#include <cstdint>

#include "scto/self_consistent.hpp"

namespace scto {

// Counter-based RNG: a splitmix64-style hash of (seed, step, agent, draw).
// Stateless, so trajectories are bitwise reproducible regardless of
// scheduling or evaluation order.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t step,
                           std::uint64_t agent, std::uint64_t draw);
double counter_uniform(std::uint64_t seed, std::uint64_t step,
                       std::uint64_t agent, std::uint64_t draw);  // in [0,1)

struct ParticleEnsemble {
    std::vector<double> states;  // all in [0,1)
    std::uint64_t seed = 0;
    std::uint64_t step_count = 0;
};

ParticleEnsemble uniform_ensemble(std::size_t N, std::uint64_t seed);
// i.i.d. draws from a grid density by inverse CDF
ParticleEnsemble ensemble_from_density(const GridDensity& f, std::size_t N,
                                       std::uint64_t seed);

// Inverse-CDF sampler matched to the kernel the operators use: wrapped
// kernels sample the periodized grid distribution; supported line kernels
// sample the continuous profile on [-w, w].
class NoiseSampler {
  public:
    NoiseSampler() = default;
    NoiseSampler(const NoiseKernel& rho, bool on_line);
    double draw(std::uint64_t seed, std::uint64_t step, std::uint64_t agent) const;

  private:
    std::vector<double> cdf_;
    std::vector<double> support_;  // sample values matching cdf_ knots
    bool on_line_ = false;
};

// fold of the real line onto [0,1]: min_i |x - 2i|
double reflect_interval(double x);

// One synchronous update of all agents under the model dynamics.
// Mean-field sums use the separable decomposition of the coupling when
// present (O(N * terms)); otherwise the O(N^2) fallback runs only while
// N^2 <= pair_budget.
void step_ensemble(ParticleEnsemble& e, const SelfConsistentModel& model,
                   std::uint64_t pair_budget = 16'000'000);

GridDensity empirical_density(const ParticleEnsemble& e, int n);

// Convenience driver: burn_in steps, then average the empirical histogram
// over sample_steps further steps.
GridDensity stationary_histogram(ParticleEnsemble& e,
                                 const SelfConsistentModel& model, int burn_in,
                                 int sample_steps, int n);

}  // namespace scto
