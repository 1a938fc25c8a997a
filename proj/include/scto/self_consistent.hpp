#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "scto/transfer.hpp"

namespace scto {

enum class SystemClass {
    Expanding,
    AdditiveNoiseCircle,
    ReflectingKernelInterval,
    TwoPopulation,
};

const char* system_class_name(SystemClass c);
SystemClass parse_system_class(const std::string& name);

// Mean-field coupled system: base dynamics, coupling kernel(s), optional
// noise, coupling strength delta, grid resolution.
struct SelfConsistentModel {
    SystemClass cls = SystemClass::Expanding;
    std::vector<CircleMap> base_maps;        // 1, or 2 for TwoPopulation
    std::vector<CouplingKernel> couplings;   // 1, or 2 for TwoPopulation
    std::vector<double> mix_weights = {1.0, 1.0};  // TwoPopulation field weights
    std::optional<NoiseKernel> noise;
    double delta = 0;
    int grid_n = 0;

    void validate() const;  // throws ConfigError on structural problems
};

using DensityPair = std::pair<GridDensity, GridDensity>;

struct TraceEntry {
    int step = 0;
    double step_size = 0;  // L1 distance between consecutive iterates
    double residual = 0;   // ||op(f) - f||_1 at the pre-step iterate
    double ratio = 0;      // step_k / step_{k-1}, 0 when undefined
};

struct SolverTrace {
    std::vector<TraceEntry> iterates;
    bool converged = false;
    double final_residual = 0;
    bool damped = false;      // fell back to averaged iteration
    double outer_ratio = 0;   // last observed contraction ratio
};

// One application of the nonlinear operator: build the mean-field
// diffeomorphism (or effective kernel) from f itself, then push f through.
GridDensity apply_self_consistent(const SelfConsistentModel& model,
                                  const GridDensity& f);
DensityPair apply_self_consistent(const SelfConsistentModel& model,
                                  const DensityPair& f);

// Direct iteration f <- op(f). Throws NonContractionError after 20
// consecutive expanding steps; with allow_damping it first retries the
// averaged iteration f <- (1-alpha) f + alpha op(f).
std::pair<GridDensity, SolverTrace> picard_fixed_point(
    const SelfConsistentModel& model, const GridDensity& f0, double tol = 1e-10,
    int max_iter = 20000, bool allow_damping = false, double alpha = 0.5);
std::pair<DensityPair, SolverTrace> picard_fixed_point(
    const SelfConsistentModel& model, const DensityPair& f0, double tol = 1e-10,
    int max_iter = 20000, bool allow_damping = false, double alpha = 0.5);

// Outer iteration: freeze mu, solve the fixed density of the now-linear
// operator, replace mu, repeat. The inner solves reuse the same operator
// machinery as apply_self_consistent, so both solvers target the same
// discrete fixed point. The outer ratio estimates the mu-sensitivity of
// the frozen operator family.
std::pair<GridDensity, SolverTrace> thm_existence_iteration(
    const SelfConsistentModel& model, const GridDensity& mu0, double tol = 1e-9,
    int max_outer = 500);
std::pair<DensityPair, SolverTrace> thm_existence_iteration(
    const SelfConsistentModel& model, const DensityPair& mu0, double tol = 1e-9,
    int max_outer = 500);

// The frozen linear operator L_{delta,mu} as an applier on raw vectors
// (used by the outer iteration and by analysis/response diagnostics).
LinearApplier frozen_operator(const SelfConsistentModel& model,
                              const GridDensity& mu);

}  // namespace scto
