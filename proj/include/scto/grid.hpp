#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "scto/common.hpp"

namespace scto {

// Probability density on the circle (or interval), stored as cell
// averages on n uniform cells of width 1/n. The integral convention is
// (1/n) * sum(values).
struct GridDensity {
    int n = 0;
    std::vector<double> values;

    GridDensity() = default;
    GridDensity(int n_, std::vector<double> v, bool validate = true);
    static GridDensity uniform(int n);

    double mass() const;             // (1/n) sum
    double cell_mid(int i) const { return (i + 0.5) / n; }
    // linear interpolation between cell midpoints, cyclic
    double interp(double x) const;
};

// Signed piecewise-constant function on the same grid; the space of
// zero-mean functions is where convergence to equilibrium is measured.
struct SignedGridFunction {
    int n = 0;
    std::vector<double> values;
    bool zero_mean = false;

    SignedGridFunction() = default;
    SignedGridFunction(int n_, std::vector<double> v, bool zero_mean_flag = false);
    static SignedGridFunction from_density(const GridDensity& f);

    double mean() const;  // (1/n) sum
    double interp(double x) const;
    void project_zero_mean();
};

struct AtomicMeasure {
    std::vector<std::pair<double, double>> atoms;  // (position, weight >= 0)

    AtomicMeasure() = default;
    explicit AtomicMeasure(std::vector<std::pair<double, double>> a, bool validate = true);
    double total_weight() const;
};

enum class NormKind { L1, L2, Sup, W11, W21, DualLip };

// Cyclic linear interpolation of values attached to cell midpoints.
double interp_midpoints(const std::vector<double>& v, double x);

// Forward cyclic discrete derivative: f'_i = n * (f_{i+1} - f_i).
std::vector<double> cyclic_derivative(const std::vector<double>& v);

double norm(const std::vector<double>& values, NormKind kind);
double norm(const SignedGridFunction& f, NormKind kind);
double norm(const GridDensity& f, NormKind kind);

// Ulam projection: conditional expectation on the n-cell partition.
GridDensity ulam_project(const std::function<double(double)>& f, int n,
                         int subsamples = 32);
// exact block averaging from a finer grid (fine.n must be a multiple of n)
GridDensity ulam_project(const GridDensity& fine, int n);
SignedGridFunction ulam_project_signed(const std::function<double(double)>& f,
                                       int n, int subsamples = 32);

// Hat-function projection to atoms at grid nodes i/n, weights = integral
// of the i-th hat function.
AtomicMeasure hat_atom_project(const AtomicMeasure& mu, int n);
AtomicMeasure hat_atom_project(const GridDensity& f, int n);

// W1 distance on the circle via the optimal-rotation CDF formula.
double wasserstein1_circle(const AtomicMeasure& mu, const AtomicMeasure& nu);

GridDensity to_density(const AtomicMeasure& mu, int n);

}  // namespace scto
