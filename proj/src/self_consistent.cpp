#include "scto/self_consistent.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "scto/simd.hpp"

namespace scto {

const char* system_class_name(SystemClass c) {
    switch (c) {
        case SystemClass::Expanding: return "expanding";
        case SystemClass::AdditiveNoiseCircle: return "additive-noise-circle";
        case SystemClass::ReflectingKernelInterval: return "reflecting-kernel-interval";
        case SystemClass::TwoPopulation: return "two-population";
    }
    return "?";
}

SystemClass parse_system_class(const std::string& name) {
    if (name == "expanding") return SystemClass::Expanding;
    if (name == "additive-noise-circle") return SystemClass::AdditiveNoiseCircle;
    if (name == "reflecting-kernel-interval") return SystemClass::ReflectingKernelInterval;
    if (name == "two-population") return SystemClass::TwoPopulation;
    throw ConfigError("unknown system class: " + name);
}

void SelfConsistentModel::validate() const {
    if (grid_n < 2) throw ConfigError("model: grid_n must be >= 2");
    if (delta < 0) throw ConfigError("model: delta must be >= 0");
    const bool two = cls == SystemClass::TwoPopulation;
    const std::size_t want = two ? 2 : 1;
    if (base_maps.size() != want)
        throw ConfigError("model: expected " + std::to_string(want) + " base map(s)");
    if (couplings.size() != want)
        throw ConfigError("model: expected " + std::to_string(want) + " coupling(s)");
    if (two && mix_weights.size() != 2)
        throw ConfigError("model: two-population needs 2 mixing weights");
    const bool needs_noise = cls == SystemClass::AdditiveNoiseCircle ||
                             cls == SystemClass::ReflectingKernelInterval;
    if (needs_noise && !noise)
        throw ConfigError("model: this system class requires a noise kernel");
    if (noise && noise->n != 0 && noise->n != grid_n)
        throw ConfigError("model: noise kernel resolution != grid_n");
    if (cls == SystemClass::ReflectingKernelInterval && !base_maps[0].interval_map)
        throw ConfigError("model: reflecting-kernel class needs an interval map");
}

namespace {

Displacement combined_displacement(const SelfConsistentModel& m,
                                   const GridDensity& f1, const GridDensity& f2) {
    Displacement d1 = mean_field_displacement(m.couplings[0], f1);
    Displacement d2 = mean_field_displacement(m.couplings[1], f2);
    const double w1 = m.mix_weights[0], w2 = m.mix_weights[1];
    Displacement out;
    out.S.resize(d1.S.size());
    out.Sderiv.resize(d1.Sderiv.size());
    for (std::size_t i = 0; i < d1.S.size(); ++i) {
        out.S[i] = w1 * d1.S[i] + w2 * d2.S[i];
        out.Sderiv[i] = w1 * d1.Sderiv[i] + w2 * d2.Sderiv[i];
    }
    return out;
}

// Effective tent slope 1/(1 + delta * mean); throws when the denominator
// degenerates.
std::function<double(double)> effective_interval_map(const SelfConsistentModel& m,
                                                     const GridDensity& mu) {
    const int n = mu.n;
    double mean = 0;
    for (int i = 0; i < n; ++i) mean += (i + 0.5) / n * mu.values[i];
    mean /= n;
    double denom = 1.0 + m.delta * mean;
    if (denom <= 0.1)
        throw RegimeError("reflecting-kernel map: 1 + delta*mean(mu) = " +
                          std::to_string(denom) + " is not safely positive");
    auto base = m.base_maps[0].eval;
    return [base, denom](double x) { return base(x) / denom; };
}

}  // namespace

LinearApplier frozen_operator(const SelfConsistentModel& model,
                              const GridDensity& mu) {
    model.validate();
    switch (model.cls) {
        case SystemClass::Expanding: {
            auto phi = std::make_shared<MeanFieldDiffeo>(
                model.delta, mean_field_displacement(model.couplings[0], mu));
            CircleMap T = model.base_maps[0];
            return [T, phi](const std::vector<double>& f) {
                return diffeo_pushforward(*phi, expanding_transfer_apply(T, f, false),
                                          false);
            };
        }
        case SystemClass::AdditiveNoiseCircle: {
            auto phi = std::make_shared<MeanFieldDiffeo>(
                model.delta, mean_field_displacement(model.couplings[0], mu));
            CircleMap T = model.base_maps[0];
            auto rho = std::make_shared<NoiseKernel>(*model.noise);
            return [T, phi, rho](const std::vector<double>& f) {
                return convolve(*rho, diffeo_pushforward(
                                          *phi, expanding_transfer_apply(T, f, false),
                                          false));
            };
        }
        case SystemClass::ReflectingKernelInterval: {
            auto k = std::make_shared<ReflectingKernel>(reflecting_kernel_matrix(
                effective_interval_map(model, mu), *model.noise, model.grid_n));
            return [k](const std::vector<double>& f) { return k->apply(f); };
        }
        case SystemClass::TwoPopulation:
            throw ConfigError("frozen_operator: two-population needs the pair form");
    }
    throw ConfigError("frozen_operator: bad system class");
}

GridDensity apply_self_consistent(const SelfConsistentModel& model,
                                  const GridDensity& f) {
    model.validate();
    if (f.n != model.grid_n)
        throw ConfigError("apply_self_consistent: density resolution != grid_n");
    if (model.cls == SystemClass::TwoPopulation)
        throw ConfigError("apply_self_consistent: two-population needs the pair form");
    switch (model.cls) {
        // The circle classes route through the same raw-vector pipeline as
        // frozen_operator, so the Picard and outer iterations share one
        // discrete operator bit for bit.
        case SystemClass::Expanding: {
            MeanFieldDiffeo phi(model.delta,
                                mean_field_displacement(model.couplings[0], f));
            auto v = diffeo_pushforward(
                phi, expanding_transfer_apply(model.base_maps[0], f.values, false),
                false);
            return GridDensity(f.n, std::move(v), false);
        }
        case SystemClass::AdditiveNoiseCircle: {
            MeanFieldDiffeo phi(model.delta,
                                mean_field_displacement(model.couplings[0], f));
            auto v = convolve(
                *model.noise,
                diffeo_pushforward(
                    phi, expanding_transfer_apply(model.base_maps[0], f.values, false),
                    false));
            return GridDensity(f.n, std::move(v), false);
        }
        case SystemClass::ReflectingKernelInterval: {
            auto k = reflecting_kernel_matrix(effective_interval_map(model, f),
                                              *model.noise, model.grid_n);
            return k.apply(f);
        }
        default:
            throw ConfigError("apply_self_consistent: bad system class");
    }
}

DensityPair apply_self_consistent(const SelfConsistentModel& model,
                                  const DensityPair& f) {
    model.validate();
    if (model.cls != SystemClass::TwoPopulation)
        throw ConfigError("apply_self_consistent: pair form is two-population only");
    MeanFieldDiffeo phi(model.delta,
                        combined_displacement(model, f.first, f.second));
    auto push = [&phi](const CircleMap& T, const GridDensity& g) {
        auto v = diffeo_pushforward(phi, expanding_transfer_apply(T, g.values, false),
                                    false);
        return GridDensity(g.n, std::move(v), false);
    };
    return {push(model.base_maps[0], f.first), push(model.base_maps[1], f.second)};
}

// ---------------------------------------------------------------- Picard

namespace {

double l1_gap(const std::vector<double>& a, const std::vector<double>& b) {
    return simd::active().abs_diff_sum(a.data(), b.data(), a.size()) / a.size();
}

template <class State>
using Applier = std::function<State(const State&)>;

template <class State>
std::pair<State, SolverTrace> picard_loop(const Applier<State>& op,
                                          const std::function<double(const State&, const State&)>& gap,
                                          const std::function<State(const State&, const State&, double)>& mix,
                                          State f, double tol, int max_iter,
                                          bool allow_damping, double alpha) {
    SolverTrace trace;
    double prev_step = -1;
    int expanding_run = 0;
    bool damped = false;
    for (int it = 1; it <= max_iter; ++it) {
        State g = op(f);
        double residual = gap(g, f);
        if (damped) g = mix(f, g, alpha);
        double step = gap(g, f);
        double ratio = (prev_step > 0 && step > 0) ? step / prev_step : 0.0;
        trace.iterates.push_back({it, step, residual, ratio});
        trace.outer_ratio = ratio;
        prev_step = step;
        f = std::move(g);
        if (step <= tol) {
            trace.converged = true;
            break;
        }
        if (ratio >= 1.0) {
            if (++expanding_run >= 20) {
                if (allow_damping && !damped) {
                    damped = true;
                    trace.damped = true;
                    expanding_run = 0;
                    prev_step = -1;
                } else {
                    throw NonContractionError(
                        "picard_fixed_point: 20 consecutive expanding steps "
                        "(delta likely beyond the weak-coupling regime)",
                        step);
                }
            }
        } else {
            expanding_run = 0;
        }
    }
    if (!trace.converged)
        throw NumericalError("picard_fixed_point: no convergence within max_iter",
                             prev_step);
    trace.final_residual = gap(op(f), f);
    return {std::move(f), std::move(trace)};
}

}  // namespace

std::pair<GridDensity, SolverTrace> picard_fixed_point(
    const SelfConsistentModel& model, const GridDensity& f0, double tol,
    int max_iter, bool allow_damping, double alpha) {
    Applier<GridDensity> op = [&model](const GridDensity& f) {
        return apply_self_consistent(model, f);
    };
    std::function<double(const GridDensity&, const GridDensity&)> gap =
        [](const GridDensity& a, const GridDensity& b) {
            return l1_gap(a.values, b.values);
        };
    std::function<GridDensity(const GridDensity&, const GridDensity&, double)> mix =
        [](const GridDensity& a, const GridDensity& b, double al) {
            std::vector<double> v(a.values.size());
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] = (1.0 - al) * a.values[i] + al * b.values[i];
            return GridDensity(a.n, std::move(v), false);
        };
    return picard_loop<GridDensity>(op, gap, mix, f0, tol, max_iter, allow_damping,
                                    alpha);
}

std::pair<DensityPair, SolverTrace> picard_fixed_point(
    const SelfConsistentModel& model, const DensityPair& f0, double tol,
    int max_iter, bool allow_damping, double alpha) {
    Applier<DensityPair> op = [&model](const DensityPair& f) {
        return apply_self_consistent(model, f);
    };
    std::function<double(const DensityPair&, const DensityPair&)> gap =
        [](const DensityPair& a, const DensityPair& b) {
            return l1_gap(a.first.values, b.first.values) +
                   l1_gap(a.second.values, b.second.values);
        };
    std::function<DensityPair(const DensityPair&, const DensityPair&, double)> mix =
        [](const DensityPair& a, const DensityPair& b, double al) {
            auto blend = [al](const GridDensity& x, const GridDensity& y) {
                std::vector<double> v(x.values.size());
                for (std::size_t i = 0; i < v.size(); ++i)
                    v[i] = (1.0 - al) * x.values[i] + al * y.values[i];
                return GridDensity(x.n, std::move(v), false);
            };
            return DensityPair{blend(a.first, b.first), blend(a.second, b.second)};
        };
    return picard_loop<DensityPair>(op, gap, mix, f0, tol, max_iter, allow_damping,
                                    alpha);
}

// ------------------------------------------------------- outer iteration

std::pair<GridDensity, SolverTrace> thm_existence_iteration(
    const SelfConsistentModel& model, const GridDensity& mu0, double tol,
    int max_outer) {
    model.validate();
    if (model.cls == SystemClass::TwoPopulation)
        throw ConfigError("thm_existence_iteration: two-population needs the pair form");
    GridDensity mu = mu0;
    SolverTrace trace;
    double prev_step = -1;
    int expanding_run = 0;
    const double inner_tol = tol / 10.0;
    for (int it = 1; it <= max_outer; ++it) {
        LinearApplier L = frozen_operator(model, mu);
        FixedDensityResult inner = linear_fixed_density(L, model.grid_n, inner_tol,
                                                        100000, &mu);
        double step = l1_gap(inner.density.values, mu.values);
        double ratio = (prev_step > 0 && step > 0) ? step / prev_step : 0.0;
        trace.iterates.push_back({it, step, step, ratio});
        if (ratio > 0) trace.outer_ratio = ratio;
        prev_step = step;
        mu = std::move(inner.density);
        if (model.delta == 0.0 || step <= tol) {
            trace.converged = true;
            break;
        }
        if (ratio >= 1.0) {
            if (++expanding_run >= 20)
                throw NonContractionError(
                    "thm_existence_iteration: sustained outer expansion", step);
        } else {
            expanding_run = 0;
        }
    }
    if (!trace.converged)
        throw NumericalError("thm_existence_iteration: no outer convergence",
                             prev_step);
    GridDensity img = apply_self_consistent(model, mu);
    trace.final_residual = l1_gap(img.values, mu.values);
    return {std::move(mu), std::move(trace)};
}

std::pair<DensityPair, SolverTrace> thm_existence_iteration(
    const SelfConsistentModel& model, const DensityPair& mu0, double tol,
    int max_outer) {
    model.validate();
    if (model.cls != SystemClass::TwoPopulation)
        throw ConfigError("thm_existence_iteration: pair form is two-population only");
    DensityPair mu = mu0;
    SolverTrace trace;
    double prev_step = -1;
    const double inner_tol = tol / 10.0;
    int expanding_run = 0;
    for (int it = 1; it <= max_outer; ++it) {
        auto phi = std::make_shared<MeanFieldDiffeo>(
            model.delta, combined_displacement(model, mu.first, mu.second));
        auto solve_pop = [&](const CircleMap& T, const GridDensity& start) {
            LinearApplier L = [T, phi](const std::vector<double>& f) {
                return diffeo_pushforward(*phi, expanding_transfer_apply(T, f, false),
                                          false);
            };
            return linear_fixed_density(L, model.grid_n, inner_tol, 100000, &start)
                .density;
        };
        DensityPair next{solve_pop(model.base_maps[0], mu.first),
                         solve_pop(model.base_maps[1], mu.second)};
        double step = l1_gap(next.first.values, mu.first.values) +
                      l1_gap(next.second.values, mu.second.values);
        double ratio = (prev_step > 0 && step > 0) ? step / prev_step : 0.0;
        trace.iterates.push_back({it, step, step, ratio});
        if (ratio > 0) trace.outer_ratio = ratio;
        prev_step = step;
        mu = std::move(next);
        if (model.delta == 0.0 || step <= tol) {
            trace.converged = true;
            break;
        }
        if (ratio >= 1.0 && ++expanding_run >= 20)
            throw NonContractionError(
                "thm_existence_iteration: sustained outer expansion", step);
        if (ratio < 1.0) expanding_run = 0;
    }
    if (!trace.converged)
        throw NumericalError("thm_existence_iteration: no outer convergence",
                             prev_step);
    DensityPair img = apply_self_consistent(model, mu);
    trace.final_residual = l1_gap(img.first.values, mu.first.values) +
                           l1_gap(img.second.values, mu.second.values);
    return {std::move(mu), std::move(trace)};
}

}  // namespace scto
