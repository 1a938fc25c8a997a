#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "scto/transfer.hpp"

namespace scto {

// One-step inequality ||Lf||_s <= lambda1 ||f||_s + B ||f||_w fitted over
// random smooth test functions.
struct LYCoefficients {
    double lambda1 = 0;
    double B = 0;
    NormKind strong_norm = NormKind::W11;
    NormKind weak_norm = NormKind::L1;
    int violations = 0;        // after the 5% inflation; should be 0
    double fit_residual = 0;   // max positive violation before inflation
    bool regime_ok = true;     // lambda1 < 1 achievable
};

LYCoefficients fit_ly_coefficients(const LinearApplier& op, int n,
                                   NormKind strong, NormKind weak,
                                   int samples = 64, std::uint64_t seed = 1);

struct DecaySequence {
    std::vector<double> a;      // a_n = ||L^n g||_w / ||g||_s, n = 1..N
    double gamma = 0;           // fitted exponential rate from the tail half
    double prefactor = 0;       // fitted C in a_n ~ C e^{-gamma n}
    bool gamma_positive = false;
};

DecaySequence convergence_to_equilibrium(const LinearApplier& op,
                                         const SignedGridFunction& g, int N,
                                         NormKind strong = NormKind::W11,
                                         NormKind weak = NormKind::L1);

struct ContractionReport {
    int n1 = 0;
    std::array<std::array<double, 2>, 2> M{};
    double rho = 0;
    double a = 0, b = 0;  // leading eigenvector of M^T, a + b = 1
    bool regime_ok = false;
};

// M = [[lambda1^n1, B/(1-lambda1)], [delta Q K C + a_n1, delta Q K n1 B/(1-lambda1)]]
ContractionReport contraction_matrix(const LYCoefficients& ly, double K, double Q,
                                     double C, double a_n1, double delta, int n1);

// Smallest delta where rho crosses 1 (monotone in delta); returns +inf if
// rho stays below 1 up to the cap.
double contraction_delta_star(const LYCoefficients& ly, double K, double Q,
                              double C, double a_n1, int n1,
                              double delta_cap = 1e6);

double balanced_norm(const std::vector<double>& g, double a, double b,
                     NormKind strong, NormKind weak);

// Empirical mu-sensitivity constant of the frozen operator family:
// max over samples of ||(L_mu1 - L_mu2) f||_w / (delta ||mu1-mu2||_w ||f||_s).
// (The abstract constants K, Q, C are analytic in the source material;
// here they are either user-supplied or fitted with this helper.)
double fit_operator_sensitivity(
    const std::function<LinearApplier(const GridDensity&)>& frozen, int n,
    double delta, NormKind strong, NormKind weak, int samples = 16,
    std::uint64_t seed = 2);

// Random smooth zero-mean test function (trigonometric polynomial with
// decaying coefficients); shared by the fitting helpers and tests.
std::vector<double> random_smooth_function(int n, std::uint64_t seed,
                                           int max_mode = 8);
GridDensity random_smooth_density(int n, std::uint64_t seed, int max_mode = 8);

}  // namespace scto
