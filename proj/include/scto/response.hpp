#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "scto/self_consistent.hpp"

namespace scto {

// (I - L0)^{-1} on the zero-mean subspace, realized by deflating the
// eigenvalue 1: solve (I - L0 + f0 1^T / n) u = v, which is nonsingular
// under a spectral gap and agrees with the resolvent on zero-mean v.
class Resolvent {
  public:
    explicit Resolvent(const TransferMatrix& L0);
    ~Resolvent();
    Resolvent(Resolvent&&) noexcept;
    Resolvent& operator=(Resolvent&&) noexcept;

    std::vector<double> apply(const std::vector<double>& v) const;  // v zero-mean
    SignedGridFunction apply(const SignedGridFunction& v) const;
    // w = (I - L0 + f0 1^T/n)^{-T} c; then integral of c against the
    // response of any zero-mean d is (1/n) w . d (one solve for all d)
    std::vector<double> adjoint_solve(const std::vector<double>& c) const;

    double residual(const std::vector<double>& u, const std::vector<double>& v) const;
    const GridDensity& fixed_density() const { return f0_; }
    double gap_ratio() const { return gap_ratio_; }  // second-eigenvalue estimate
    int n() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    GridDensity f0_;
    double gap_ratio_ = 0;
};

struct ResponseResult {
    SignedGridFunction derivative_term;
    SignedGridFunction response;
    double resolvent_residual = 0;
    GridDensity h0;          // uncoupled invariant density used
    double gap_ratio = 0;
};

// -(h0(x) * int h(x,y) h0(y) dy)'
SignedGridFunction derivative_term_expanding(const CouplingKernel& h,
                                             const GridDensity& h0,
                                             const CircleMap& T0);
// -rho * (L_T0(h0) * S)'
SignedGridFunction derivative_term_noise(const CouplingKernel& h,
                                         const GridDensity& h0, const CircleMap& T0,
                                         const NoiseKernel& rho);
// a * int (reflected d rho/dx kernel)(x, y) T(y) f0(y) dy,  a = int t f0(t) dt
SignedGridFunction derivative_term_strange(const CircleMap& T, const GridDensity& f0,
                                           const NoiseKernel& rho);

// The uncoupled (delta = 0) transfer matrix of the model class, used as
// L0 by the resolvent.
TransferMatrix uncoupled_matrix(const SelfConsistentModel& model);

ResponseResult linear_response(const SelfConsistentModel& model);
ResponseResult linear_response(const SelfConsistentModel& model,
                               const Resolvent& resolvent);

// (1/n) sum c_i g_i
double observable_average(const std::vector<double>& c, const SignedGridFunction& g);

struct FDResponse {
    std::vector<double> deltas;
    std::vector<SignedGridFunction> quotients;  // (f_delta - f_0) / delta
    std::vector<bool> converged;
    GridDensity f0;
    SignedGridFunction richardson;  // 2 q(d/2) - q(d) from the two smallest deltas
    bool richardson_valid = false;
};

FDResponse finite_difference_response(const SelfConsistentModel& model,
                                      std::vector<double> deltas,
                                      double solver_tol = 1e-10);

}  // namespace scto
