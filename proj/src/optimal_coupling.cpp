#include "scto/optimal_coupling.hpp"

#include <algorithm>
#include <cmath>

#include "scto/simd.hpp"

namespace scto {

namespace {

int freq_of_index(int i) { return i == 0 ? 0 : (i + 1) / 2; }

}  // namespace

std::pair<int, int> PerturbationBasis::mode_indices(int m) const {
    const int per = modes_per_var();
    return {m / per, m % per};
}

double PerturbationBasis::weight(int m) const {
    auto [ix, iy] = mode_indices(m);
    double k = freq_of_index(ix), l = freq_of_index(iy);
    return std::pow(1.0 + k * k + l * l, weight_exponent);
}

CouplingKernel PerturbationBasis::mode_kernel(int m) const {
    auto [ix, iy] = mode_indices(m);
    CouplingKernel k;
    k.name = "mode-" + std::to_string(ix) + "-" + std::to_string(iy);
    k.eval = [ix, iy](double x, double y) {
        return fourier_mode(ix, x) * fourier_mode(iy, y);
    };
    k.dx_eval = [ix, iy](double x, double y) {
        return fourier_mode_deriv(ix, x) * fourier_mode(iy, y);
    };
    k.lipschitz_bound = kTwoPi * freq_of_index(ix);
    SeparableTerm t;
    t.fx = [ix](double x) { return fourier_mode(ix, x); };
    t.dfx = [ix](double x) { return fourier_mode_deriv(ix, x); };
    t.fy = [iy](double y) { return fourier_mode(iy, y); };
    k.separable.push_back(std::move(t));
    return k;
}

CouplingKernel PerturbationBasis::combine(const std::vector<double>& coeffs) const {
    if (static_cast<int>(coeffs.size()) != num_modes())
        throw ConfigError("basis combine: coefficient count mismatch");
    CouplingKernel k;
    k.name = "basis-combination";
    const PerturbationBasis self = *this;
    std::vector<double> c = coeffs;
    k.eval = [self, c](double x, double y) { return self.eval(c, x, y); };
    const int per = modes_per_var();
    k.dx_eval = [per, c](double x, double y) {
        double s = 0;
        for (std::size_t m = 0; m < c.size(); ++m) {
            if (c[m] == 0) continue;
            int ix = static_cast<int>(m) / per, iy = static_cast<int>(m) % per;
            s += c[m] * fourier_mode_deriv(ix, x) * fourier_mode(iy, y);
        }
        return s;
    };
    for (std::size_t m = 0; m < c.size(); ++m) {
        if (c[m] == 0) continue;
        int ix = static_cast<int>(m) / per, iy = static_cast<int>(m) % per;
        double cm = c[m];
        SeparableTerm t;
        t.fx = [ix, cm](double x) { return cm * fourier_mode(ix, x); };
        t.dfx = [ix, cm](double x) { return cm * fourier_mode_deriv(ix, x); };
        t.fy = [iy](double y) { return fourier_mode(iy, y); };
        k.separable.push_back(std::move(t));
        k.lipschitz_bound += std::fabs(cm) * kTwoPi * freq_of_index(ix);
    }
    return k;
}

double PerturbationBasis::eval(const std::vector<double>& coeffs, double x,
                               double y) const {
    const int per = modes_per_var();
    double s = 0;
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
        if (coeffs[m] == 0) continue;
        int ix = static_cast<int>(m) / per, iy = static_cast<int>(m) % per;
        s += coeffs[m] * fourier_mode(ix, x) * fourier_mode(iy, y);
    }
    return s;
}

double weighted_norm(const PerturbationBasis& basis, const std::vector<double>& c) {
    return std::sqrt(weighted_dot(basis, c, c));
}

double weighted_dot(const PerturbationBasis& basis, const std::vector<double>& u,
                    const std::vector<double>& v) {
    double s = 0;
    for (std::size_t m = 0; m < u.size(); ++m) s += basis.weight(m) * u[m] * v[m];
    return s;
}

double functional_value(const std::vector<double>& g, const std::vector<double>& c) {
    double s = 0;
    for (std::size_t m = 0; m < g.size(); ++m) s += g[m] * c[m];
    return s;
}

std::vector<double> response_gradient(const std::vector<double>& c,
                                      const SelfConsistentModel& model,
                                      const PerturbationBasis& basis,
                                      bool adjoint_fast_path) {
    Resolvent res(uncoupled_matrix(model));
    return response_gradient(c, model, basis, res, adjoint_fast_path);
}

std::vector<double> response_gradient(const std::vector<double>& c,
                                      const SelfConsistentModel& model,
                                      const PerturbationBasis& basis,
                                      const Resolvent& resolvent,
                                      bool adjoint_fast_path) {
    model.validate();
    if (model.cls != SystemClass::Expanding &&
        model.cls != SystemClass::AdditiveNoiseCircle)
        throw ConfigError("response_gradient: supported for the circle classes only");
    const int n = model.grid_n;
    if (static_cast<int>(c.size()) != n)
        throw ConfigError("response_gradient: observable resolution mismatch");
    const GridDensity& h0 = resolvent.fixed_density();

    auto mode_term = [&](int m) {
        CouplingKernel hk = basis.mode_kernel(m);
        if (model.cls == SystemClass::Expanding)
            return derivative_term_expanding(hk, h0, model.base_maps[0]);
        return derivative_term_noise(hk, h0, model.base_maps[0], *model.noise);
    };

    std::vector<double> g(basis.num_modes(), 0.0);
    if (adjoint_fast_path) {
        std::vector<double> w = resolvent.adjoint_solve(c);
        for (int m = 0; m < basis.num_modes(); ++m) {
            SignedGridFunction t = mode_term(m);
            g[m] = simd::active().dot(w.data(), t.values.data(), t.values.size()) / n;
        }
    } else {
        for (int m = 0; m < basis.num_modes(); ++m) {
            SignedGridFunction t = mode_term(m);
            std::vector<double> u = resolvent.apply(t.values);
            g[m] = simd::active().dot(c.data(), u.data(), u.size()) / n;
        }
    }
    return g;
}

// ------------------------------------------------------------ constraints

ConvexConstraint ConvexConstraint::ball(double r) {
    ConvexConstraint p;
    p.kind = Kind::Ball;
    p.radius = r;
    return p;
}

ConvexConstraint ConvexConstraint::box(std::vector<double> lo,
                                       std::vector<double> hi) {
    ConvexConstraint p;
    p.kind = Kind::Box;
    p.lo = std::move(lo);
    p.hi = std::move(hi);
    return p;
}

ConvexConstraint ConvexConstraint::ball_intersect_box(double r,
                                                      std::vector<double> lo,
                                                      std::vector<double> hi) {
    ConvexConstraint p;
    p.kind = Kind::BallIntersectBox;
    p.radius = r;
    p.lo = std::move(lo);
    p.hi = std::move(hi);
    return p;
}

void ConvexConstraint::validate(int num_modes) const {
    if (kind != Kind::Box && radius <= 0)
        throw ConfigError("constraint: ball radius must be > 0");
    if (kind != Kind::Ball) {
        if (static_cast<int>(lo.size()) != num_modes ||
            static_cast<int>(hi.size()) != num_modes)
            throw ConfigError("constraint: box bound count mismatch");
        for (int m = 0; m < num_modes; ++m)
            if (lo[m] > 0 || hi[m] < 0 || lo[m] > hi[m])
                throw ConfigError("constraint: box must contain the zero vector");
    }
}

bool ConvexConstraint::contains(const PerturbationBasis& basis,
                                const std::vector<double>& c, double slack) const {
    if (kind != Kind::Box && weighted_norm(basis, c) > radius + slack) return false;
    if (kind != Kind::Ball)
        for (std::size_t m = 0; m < c.size(); ++m)
            if (c[m] < lo[m] - slack || c[m] > hi[m] + slack) return false;
    return true;
}

// ------------------------------------------------------------- optimizers

OptimalCoupling optimize_ball(const std::vector<double>& g,
                              const PerturbationBasis& basis, double r) {
    if (r <= 0) throw ConfigError("optimize_ball: radius must be > 0");
    OptimalCoupling out;
    out.coeffs.assign(g.size(), 0.0);
    double q = 0;  // sum g^2 / w = squared weighted norm of g-sharp
    for (std::size_t m = 0; m < g.size(); ++m) q += g[m] * g[m] / basis.weight(m);
    if (q <= 0) {
        out.all_feasible_optimal = true;
        return out;
    }
    double scale = r / std::sqrt(q);
    for (std::size_t m = 0; m < g.size(); ++m)
        out.coeffs[m] = scale * g[m] / basis.weight(m);
    out.J = functional_value(g, out.coeffs);
    return out;
}

OptimalCoupling optimize_convex(const std::vector<double>& g,
                                const PerturbationBasis& basis,
                                const ConvexConstraint& P, int max_iter,
                                double tol) {
    P.validate(static_cast<int>(g.size()));
    if (P.kind == ConvexConstraint::Kind::Ball)
        return optimize_ball(g, basis, P.radius);

    if (P.kind == ConvexConstraint::Kind::Box) {
        OptimalCoupling out;
        out.coeffs.assign(g.size(), 0.0);
        for (std::size_t m = 0; m < g.size(); ++m) {
            if (g[m] > 0) out.coeffs[m] = P.hi[m];
            else if (g[m] < 0) out.coeffs[m] = P.lo[m];
        }
        out.J = functional_value(g, out.coeffs);
        out.all_feasible_optimal = out.J == 0;
        return out;
    }

    // BallIntersectBox: projected ascent on the linear functional with the
    // metric gradient g-sharp and alternating projections
    const std::size_t M = g.size();
    std::vector<double> gs(M);
    double gsn = 0;
    for (std::size_t m = 0; m < M; ++m) {
        gs[m] = g[m] / basis.weight(m);
        gsn += basis.weight(m) * gs[m] * gs[m];
    }
    OptimalCoupling out;
    out.coeffs.assign(M, 0.0);
    if (gsn <= 0) {
        out.all_feasible_optimal = true;
        return out;
    }
    gsn = std::sqrt(gsn);
    const double eta = P.radius / gsn;
    std::vector<double> c(M, 0.0);
    auto project = [&](std::vector<double>& x) {
        for (int rep = 0; rep < 64; ++rep) {
            bool moved = false;
            for (std::size_t m = 0; m < M; ++m) {
                double cl = std::clamp(x[m], P.lo[m], P.hi[m]);
                if (cl != x[m]) { x[m] = cl; moved = true; }
            }
            double nw = weighted_norm(basis, x);
            if (nw > P.radius) {
                double s = P.radius / nw;
                for (double& v : x) v *= s;
                moved = true;
            }
            if (!moved) break;
        }
    };
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<double> next = c;
        for (std::size_t m = 0; m < M; ++m) next[m] += eta * gs[m];
        project(next);
        double step = 0;
        for (std::size_t m = 0; m < M; ++m)
            step = std::max(step, std::fabs(next[m] - c[m]));
        c = std::move(next);
        out.iterations = it;
        if (step <= tol) {
            out.coeffs = c;
            out.J = functional_value(g, c);
            return out;
        }
    }
    throw NumericalError("optimize_convex: projection ascent did not converge",
                         0.0);
}

}  // namespace scto
