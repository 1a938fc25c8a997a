#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scto/grid.hpp"
#include "scto/maps.hpp"

namespace scto {

// Discretized Markov operator acting on density vectors:
// (Mf)_i = sum_j entries[i][j] f_j, columns summing to 1.
struct TransferMatrix {
    int n = 0;
    std::vector<double> entries;  // row-major n*n

    TransferMatrix() = default;
    TransferMatrix(int n_, std::vector<double> e);
    static TransferMatrix identity(int n);

    double& at(int row, int col) { return entries[static_cast<std::size_t>(row) * n + col]; }
    double at(int row, int col) const { return entries[static_cast<std::size_t>(row) * n + col]; }

    std::vector<double> apply(const std::vector<double>& f) const;
    GridDensity apply(const GridDensity& f) const;
    SignedGridFunction apply(const SignedGridFunction& f) const;

    double max_column_defect() const;  // max_j |colsum_j - 1|
    void renormalize_columns();
    TransferMatrix transpose() const;
};

// Periodized noise kernel on the circle grid.
struct NoiseKernel {
    std::function<double(double)> profile;               // rho on R, even
    std::function<double(double)> dprofile;              // d rho / dx
    double support_radius = 0;                           // 0 => rapidly decaying (Gaussian)
    double sup_profile = 0;
    int n = 0;
    std::vector<double> periodized;  // rho~ at offsets k/n, Markov-normalized
    int truncation_terms = 0;
    double tail_bound = 0;
    std::string name;
    double param = 0;  // sigma or half-width
};

NoiseKernel make_wrapped_gaussian(double sigma, int n);
// raised-cosine bump supported on [-w, w]; Lipschitz with C1 profile
NoiseKernel make_raised_cosine(double halfwidth, int n);
NoiseKernel make_grid_delta(int n);  // all mass in the 0-offset cell

// Kernel operator with reflecting boundary on [0,1]:
// k(x,y) = sum over reflections of rho(+-x + 2m - T(y)).
struct ReflectingKernel {
    int n = 0;
    std::vector<double> entries;  // row-major, k(x_i, y_j)
    double renorm_defect = 0;     // max column defect before normalization

    double at(int row, int col) const { return entries[static_cast<std::size_t>(row) * n + col]; }
    std::vector<double> apply(const std::vector<double>& f) const;  // (1/n) K f
    GridDensity apply(const GridDensity& f) const;
    double sup_entry() const;
};

ReflectingKernel reflecting_kernel_matrix(const std::function<double(double)>& Tmap,
                                          const NoiseKernel& rho, int n,
                                          bool renormalize = true,
                                          bool use_derivative = false);

// Transfer operator of an expanding map via the preimage sum
// L f(x) = sum_branches f(inv(x)) |inv'(x)|.
std::vector<double> expanding_transfer_apply(const CircleMap& T,
                                             const std::vector<double>& f,
                                             bool renormalize_mass);
GridDensity expanding_transfer_apply(const CircleMap& T, const GridDensity& f);
SignedGridFunction expanding_transfer_apply(const CircleMap& T,
                                            const SignedGridFunction& f);

// Ulam matrix: entry (i, j) = fraction of cell j landing in cell i.
// Piecewise-linear maps take an exact interval-image path; other maps are
// subsampled with q points per cell.
TransferMatrix ulam_matrix(const CircleMap& T, int n, int subsamples = 64);
TransferMatrix ulam_matrix(const std::function<double(double)>& T, int n,
                           int subsamples = 64);

// Pushforward under the mean-field diffeomorphism:
// (Q f)(x) = f(Phi^{-1}(x)) / Phi'(Phi^{-1}(x)).
std::vector<double> diffeo_pushforward(const MeanFieldDiffeo& phi,
                                       const std::vector<double>& f,
                                       bool renormalize_mass);
GridDensity diffeo_pushforward(const MeanFieldDiffeo& phi, const GridDensity& f);
SignedGridFunction diffeo_pushforward(const MeanFieldDiffeo& phi,
                                      const SignedGridFunction& f);

// Circular convolution with the periodized kernel (mass-exact).
std::vector<double> convolve(const NoiseKernel& rho, const std::vector<double>& f);
GridDensity convolve(const NoiseKernel& rho, const GridDensity& f);
SignedGridFunction convolve(const NoiseKernel& rho, const SignedGridFunction& f);

using LinearApplier = std::function<std::vector<double>(const std::vector<double>&)>;

struct FixedDensityResult {
    GridDensity density;
    double step_ratio = 0;   // second-eigenvalue estimate
    int iterations = 0;
    bool converged = false;
    bool nonunique_warning = false;
    double residual = 0;
};

FixedDensityResult linear_fixed_density(const LinearApplier& apply, int n,
                                        double tol = 1e-12, int max_iter = 100000,
                                        const GridDensity* start = nullptr);
FixedDensityResult linear_fixed_density(const TransferMatrix& m, double tol = 1e-12,
                                        int max_iter = 100000);
FixedDensityResult linear_fixed_density(const ReflectingKernel& k, double tol = 1e-12,
                                        int max_iter = 100000);

}  // namespace scto
