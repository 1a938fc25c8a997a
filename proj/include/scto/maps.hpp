#pragma once

#include <functional>
#include <string>
#include <vector>

#include "scto/grid.hpp"

namespace scto {

// One monotone branch of a piecewise-monotone circle/interval map:
// the map restricted to [a, b) is invertible onto its image.
struct MapBranch {
    double a = 0, b = 1;
    std::function<double(double)> inverse;        // image point -> preimage in [a,b)
    std::function<double(double)> inverse_deriv;  // d/dx of the inverse
};

struct CircleMap {
    std::string name;
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    std::vector<MapBranch> branches;
    int smoothness_order = 6;
    double min_slope = 1.0;
    bool piecewise_linear = false;
    bool interval_map = false;  // acts on [0,1] rather than the circle
};

// builtin families
CircleMap make_doubling_map();
CircleMap make_perturbed_doubling_map(double eps);  // x -> 2x + eps*sin(2 pi x)
CircleMap make_tent_map();
CircleMap make_rotation_map(double alpha);
CircleMap make_identity_map();

// Coupling function h(x, y) and its x-derivative. A separable
// decomposition h = sum_k fx_k(x) fy_k(y), when available, gives the
// particle simulator an O(N * terms) mean-field sum.
struct SeparableTerm {
    std::function<double(double)> fx, dfx, fy;
};

struct CouplingKernel {
    std::string name;
    std::function<double(double, double)> eval;
    std::function<double(double, double)> dx_eval;
    double lipschitz_bound = 0;
    std::vector<SeparableTerm> separable;
};

CouplingKernel make_sine_difference_kernel();        // sin(2 pi (y - x))
CouplingKernel make_product_trig_kernel();           // (1 + cos(2 pi y)) sin(2 pi x)
CouplingKernel make_cosy_sinx_kernel();              // cos(2 pi y) sin(2 pi x)
// h(x,y) = sum_{k,l} c[k][l] * phi_k(x) phi_l(y), phi the real Fourier basis
// (phi_0 = 1, phi_{2m-1} = cos(2 pi m t), phi_{2m} = sin(2 pi m t))
CouplingKernel make_fourier_table_kernel(const std::vector<std::vector<double>>& c);
double fourier_mode(int index, double t);
double fourier_mode_deriv(int index, double t);

// The mean-field displacement S(x) = int h(x,y) psi(y) dy sampled on the
// density grid, and the diffeomorphism Phi(x) = x + delta*S(x) mod 1.
struct Displacement {
    std::vector<double> S, Sderiv;
};

Displacement mean_field_displacement(const CouplingKernel& h, const GridDensity& psi);

class MeanFieldDiffeo {
  public:
    // Throws RegimeError unless delta*max|S'| < 1 and |delta*S| < 1/2.
    MeanFieldDiffeo(double delta, Displacement disp);

    double delta() const { return delta_; }
    bool is_identity() const { return identity_; }
    double displacement(double x) const;        // interpolated S(x)
    double displacement_deriv(double x) const;  // interpolated S'(x)
    double apply(double x) const;                // Phi(x)
    double deriv(double x) const;                // Phi'(x) = 1 + delta*S'(x)
    double invert(double y) const;               // |Phi(x) - y| <= 1e-12

  private:
    double delta_ = 0;
    Displacement disp_;
    bool identity_ = false;
};

}  // namespace scto
