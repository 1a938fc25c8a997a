#include "scto/response.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "scto/simd.hpp"

namespace scto {

namespace {

// centered cyclic difference; the response terms use it because the
// first-order law compares against solver finite differences, which carry
// no half-cell offset
std::vector<double> centered_derivative(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i)
        d[i] = 0.5 * n * (v[(i + 1) % n] - v[(i - 1 + n) % n]);
    return d;
}

}  // namespace

struct Resolvent::Impl {
    Eigen::MatrixXd L0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

Resolvent::Resolvent(const TransferMatrix& L0) : impl_(new Impl) {
    const int n = L0.n;
    impl_->L0.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) impl_->L0(i, j) = L0.at(i, j);
    FixedDensityResult fr = linear_fixed_density(L0);
    if (fr.nonunique_warning)
        throw NumericalError(
            "resolvent: no spectral gap detected (fixed density not unique)",
            fr.step_ratio);
    f0_ = std::move(fr.density);
    gap_ratio_ = fr.step_ratio;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - impl_->L0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) += f0_.values[i] / n;
    impl_->lu.compute(A);
    // a singular deflated system means eigenvalue 1 was not simple
    Eigen::VectorXd probe = impl_->lu.solve(Eigen::VectorXd::Ones(n));
    if (!probe.allFinite())
        throw NumericalError("resolvent: deflated system is singular", 0.0);
}

Resolvent::~Resolvent() = default;
Resolvent::Resolvent(Resolvent&&) noexcept = default;
Resolvent& Resolvent::operator=(Resolvent&&) noexcept = default;

int Resolvent::n() const { return f0_.n; }

std::vector<double> Resolvent::apply(const std::vector<double>& v) const {
    const int nn = n();
    Eigen::Map<const Eigen::VectorXd> vv(v.data(), nn);
    Eigen::VectorXd u = impl_->lu.solve(vv);
    double mean = u.sum() / nn;
    std::vector<double> out(nn);
    for (int i = 0; i < nn; ++i) out[i] = u[i] - mean;
    return out;
}

SignedGridFunction Resolvent::apply(const SignedGridFunction& v) const {
    if (std::fabs(v.mean()) > 1e-9)
        throw DomainError("resolvent: input must have zero mean");
    return SignedGridFunction(v.n, apply(v.values), true);
}

std::vector<double> Resolvent::adjoint_solve(const std::vector<double>& c) const {
    const int nn = n();
    Eigen::Map<const Eigen::VectorXd> cc(c.data(), nn);
    Eigen::VectorXd w = impl_->lu.transpose().solve(cc);
    return std::vector<double>(w.data(), w.data() + nn);
}

double Resolvent::residual(const std::vector<double>& u,
                           const std::vector<double>& v) const {
    const int nn = n();
    Eigen::Map<const Eigen::VectorXd> uu(u.data(), nn);
    Eigen::VectorXd r = uu - impl_->L0 * uu;
    double s = 0;
    for (int i = 0; i < nn; ++i) s += std::fabs(r[i] - v[i]);
    return s / nn;
}

// ------------------------------------------------------ derivative terms

SignedGridFunction derivative_term_expanding(const CouplingKernel& h,
                                             const GridDensity& h0,
                                             const CircleMap& /*T0*/) {
    Displacement d = mean_field_displacement(h, h0);
    const int n = h0.n;
    std::vector<double> prod(n);
    for (int i = 0; i < n; ++i) prod[i] = h0.values[i] * d.S[i];
    std::vector<double> term = centered_derivative(prod);
    for (double& x : term) x = -x;
    SignedGridFunction out(n, std::move(term), false);
    out.project_zero_mean();
    return out;
}

SignedGridFunction derivative_term_noise(const CouplingKernel& h,
                                         const GridDensity& h0, const CircleMap& T0,
                                         const NoiseKernel& rho) {
    Displacement d = mean_field_displacement(h, h0);
    const int n = h0.n;
    std::vector<double> Lh0 = expanding_transfer_apply(T0, h0.values, true);
    std::vector<double> prod(n);
    for (int i = 0; i < n; ++i) prod[i] = Lh0[i] * d.S[i];
    std::vector<double> term = convolve(rho, centered_derivative(prod));
    for (double& x : term) x = -x;
    SignedGridFunction out(n, std::move(term), false);
    out.project_zero_mean();
    return out;
}

SignedGridFunction derivative_term_strange(const CircleMap& T, const GridDensity& f0,
                                           const NoiseKernel& rho) {
    if (rho.support_radius <= 0)
        throw ConfigError("derivative_term_strange: kernel has no usable derivative");
    const int n = f0.n;
    ReflectingKernel kd = reflecting_kernel_matrix(T.eval, rho, n,
                                                   /*renormalize=*/false,
                                                   /*use_derivative=*/true);
    double a = 0;
    for (int i = 0; i < n; ++i) a += (i + 0.5) / n * f0.values[i];
    a /= n;
    std::vector<double> weight(n);
    for (int j = 0; j < n; ++j)
        weight[j] = a * T.eval((j + 0.5) / n) * f0.values[j];
    std::vector<double> term = kd.apply(weight);
    SignedGridFunction out(n, std::move(term), false);
    out.project_zero_mean();
    return out;
}

// --------------------------------------------------------------- driver

TransferMatrix uncoupled_matrix(const SelfConsistentModel& model) {
    model.validate();
    const int n = model.grid_n;
    switch (model.cls) {
        case SystemClass::Expanding:
            return ulam_matrix(model.base_maps[0], n);
        case SystemClass::AdditiveNoiseCircle: {
            TransferMatrix U = ulam_matrix(model.base_maps[0], n);
            TransferMatrix M(n, std::vector<double>(static_cast<std::size_t>(n) * n));
            std::vector<double> col(n);
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) col[i] = U.at(i, j);
                std::vector<double> sm = convolve(*model.noise, col);
                for (int i = 0; i < n; ++i) M.at(i, j) = sm[i];
            }
            return M;
        }
        case SystemClass::ReflectingKernelInterval: {
            ReflectingKernel k = reflecting_kernel_matrix(model.base_maps[0].eval,
                                                          *model.noise, n);
            std::vector<double> e = k.entries;
            for (double& x : e) x /= n;
            return TransferMatrix(n, std::move(e));
        }
        case SystemClass::TwoPopulation:
            throw ConfigError("uncoupled_matrix: two-population not supported here");
    }
    throw ConfigError("uncoupled_matrix: bad system class");
}

ResponseResult linear_response(const SelfConsistentModel& model) {
    Resolvent res(uncoupled_matrix(model));
    return linear_response(model, res);
}

ResponseResult linear_response(const SelfConsistentModel& model,
                               const Resolvent& resolvent) {
    model.validate();
    ResponseResult out;
    out.h0 = resolvent.fixed_density();
    out.gap_ratio = resolvent.gap_ratio();
    switch (model.cls) {
        case SystemClass::Expanding:
            out.derivative_term =
                derivative_term_expanding(model.couplings[0], out.h0, model.base_maps[0]);
            break;
        case SystemClass::AdditiveNoiseCircle:
            out.derivative_term = derivative_term_noise(
                model.couplings[0], out.h0, model.base_maps[0], *model.noise);
            break;
        case SystemClass::ReflectingKernelInterval:
            out.derivative_term =
                derivative_term_strange(model.base_maps[0], out.h0, *model.noise);
            break;
        case SystemClass::TwoPopulation:
            throw ConfigError("linear_response: two-population not supported");
    }
    out.response = resolvent.apply(out.derivative_term);
    out.resolvent_residual =
        resolvent.residual(out.response.values, out.derivative_term.values);
    return out;
}

double observable_average(const std::vector<double>& c, const SignedGridFunction& g) {
    if (c.size() != g.values.size())
        throw ConfigError("observable_average: size mismatch");
    return simd::active().dot(c.data(), g.values.data(), c.size()) / g.n;
}

FDResponse finite_difference_response(const SelfConsistentModel& model,
                                      std::vector<double> deltas,
                                      double solver_tol) {
    for (double d : deltas)
        if (d <= 0)
            throw ConfigError("finite_difference_response: deltas must be > 0");
    if (deltas.empty())
        throw ConfigError("finite_difference_response: need at least one delta");
    std::sort(deltas.rbegin(), deltas.rend());

    FDResponse out;
    out.deltas = deltas;
    const int n = model.grid_n;
    SelfConsistentModel m0 = model;
    m0.delta = 0;
    out.f0 = thm_existence_iteration(m0, GridDensity::uniform(n), solver_tol).first;

    for (double d : deltas) {
        SelfConsistentModel md = model;
        md.delta = d;
        try {
            GridDensity fd =
                thm_existence_iteration(md, out.f0, solver_tol).first;
            std::vector<double> q(n);
            for (int i = 0; i < n; ++i)
                q[i] = (fd.values[i] - out.f0.values[i]) / d;
            out.quotients.emplace_back(n, std::move(q), false);
            out.converged.push_back(true);
        } catch (const NonContractionError&) {
            out.quotients.emplace_back(n, std::vector<double>(n, 0.0), false);
            out.converged.push_back(false);
        }
    }

    // Richardson step from the smallest halving pair
    for (std::size_t i = out.deltas.size(); i-- > 1;) {
        std::size_t big = i - 1, small = i;
        if (!out.converged[big] || !out.converged[small]) continue;
        if (std::fabs(out.deltas[big] - 2.0 * out.deltas[small]) >
            1e-9 * out.deltas[big])
            continue;
        std::vector<double> r(n);
        for (int j = 0; j < n; ++j)
            r[j] = 2.0 * out.quotients[small].values[j] -
                   out.quotients[big].values[j];
        out.richardson = SignedGridFunction(n, std::move(r), false);
        out.richardson_valid = true;
        break;
    }
    if (!out.richardson_valid && out.converged.back())
        out.richardson = out.quotients.back();
    return out;
}

}  // namespace scto
