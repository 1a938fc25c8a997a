#pragma once

#include <vector>

#include "scto/response.hpp"

namespace scto {

// Tensor trigonometric perturbation basis e_{k,l}(x,y) = phi_k(x) phi_l(y)
// with phi the real Fourier basis, indices 0..2*degree in each variable.
// The coefficient space carries the weighted inner product
// <u, v> = sum_m w_m u_m v_m with Sobolev-type weights
// w_m = (1 + kfreq^2 + lfreq^2)^s.
struct PerturbationBasis {
    int degree = 8;
    double weight_exponent = 7;  // s; 7 for expanding systems, 1 for noisy ones

    int modes_per_var() const { return 2 * degree + 1; }
    int num_modes() const { return modes_per_var() * modes_per_var(); }
    // m -> (x-index, y-index) in the phi basis
    std::pair<int, int> mode_indices(int m) const;
    double weight(int m) const;
    CouplingKernel mode_kernel(int m) const;
    CouplingKernel combine(const std::vector<double>& coeffs) const;
    // h(x, y) for a coefficient vector, sampled pointwise
    double eval(const std::vector<double>& coeffs, double x, double y) const;
};

double weighted_norm(const PerturbationBasis& basis, const std::vector<double>& c);
double weighted_dot(const PerturbationBasis& basis, const std::vector<double>& u,
                    const std::vector<double>& v);
// J(hdot) = <g, coeffs> (plain, unweighted pairing)
double functional_value(const std::vector<double>& g, const std::vector<double>& c);

// g_m = integral of c against the response of mode m. The slow path does
// one resolvent solve per mode; the adjoint path does a single transposed
// solve and pairs it with each derivative term.
std::vector<double> response_gradient(const std::vector<double>& c,
                                      const SelfConsistentModel& model,
                                      const PerturbationBasis& basis,
                                      bool adjoint_fast_path = false);
std::vector<double> response_gradient(const std::vector<double>& c,
                                      const SelfConsistentModel& model,
                                      const PerturbationBasis& basis,
                                      const Resolvent& resolvent,
                                      bool adjoint_fast_path = false);

struct ConvexConstraint {
    enum class Kind { Ball, Box, BallIntersectBox };
    Kind kind = Kind::Ball;
    double radius = 0;
    std::vector<double> lo, hi;  // per-coefficient bounds for Box kinds

    static ConvexConstraint ball(double r);
    static ConvexConstraint box(std::vector<double> lo, std::vector<double> hi);
    static ConvexConstraint ball_intersect_box(double r, std::vector<double> lo,
                                               std::vector<double> hi);
    void validate(int num_modes) const;  // must contain 0
    bool contains(const PerturbationBasis& basis, const std::vector<double>& c,
                  double slack = 1e-9) const;
};

struct OptimalCoupling {
    std::vector<double> coeffs;
    double J = 0;
    bool all_feasible_optimal = false;  // g == 0: the functional vanishes on P
    int iterations = 0;
};

OptimalCoupling optimize_ball(const std::vector<double>& g,
                              const PerturbationBasis& basis, double r);
OptimalCoupling optimize_convex(const std::vector<double>& g,
                                const PerturbationBasis& basis,
                                const ConvexConstraint& P, int max_iter = 20000,
                                double tol = 1e-12);

}  // namespace scto
