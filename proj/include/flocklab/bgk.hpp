#ifndef FLOCKLAB_BGK_HPP
#define FLOCKLAB_BGK_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "flocklab/density_grid.hpp"
#include "flocklab/interaction.hpp"
#include "flocklab/observation.hpp"

namespace flocklab {

// (T_t f)(x, m) = f(x - t Phi(m), m): semi-Lagrangian back-trace with
// periodic multilinear interpolation, exact for grid-aligned shifts.
inline DensityGrid free_transport(const DensityGrid& f, double dt) {
    if (dt < 0) throw std::invalid_argument("free_transport: dt >= 0");
    if (dt == 0) return f;
    DensityGrid out = f;
    const int d = f.d();
    const int nq = f.nq();
    const auto& q = *f.quad;
    std::vector<double> slab(static_cast<std::size_t>(f.ncells()));
    for (int k = 0; k < nq; ++k) {
        Vec phi = f.manifold->velocity(q[k].point);
        // fractional back-shift in cells, per axis
        std::array<int, 3> ishift{0, 0, 0};
        std::array<double, 3> frac{0, 0, 0};
        for (int i = 0; i < d; ++i) {
            double s = dt * phi[i] / f.h;
            double fl = std::floor(s);
            ishift[i] = static_cast<int>(fl);
            frac[i] = s - fl;
        }
        for (int c = 0; c < f.ncells(); ++c) slab[static_cast<std::size_t>(c)] = f.at(c, k);
        for (int c = 0; c < f.ncells(); ++c) {
            auto ix = f.unflatten(c);
            double acc = 0;
            for (int corner = 0; corner < (1 << d); ++corner) {
                std::array<int, 3> jx = ix;
                double w = 1;
                for (int i = 0; i < d; ++i) {
                    jx[i] -= ishift[i];
                    if (corner & (1 << i)) {
                        jx[i] -= 1;
                        w *= frac[i];
                    } else {
                        w *= 1.0 - frac[i];
                    }
                }
                acc += w * slab[static_cast<std::size_t>(f.flatten(jx))];
            }
            out.at(c, k) = acc;
        }
    }
    out.t = f.t + dt;
    return out;
}

// Gain term G(x, m) = rho_f(x) M_{J(x)}(m) with J the kernel-convolved
// flux field (kernel mode) or the per-cell local flux (LOCAL mode,
// kernel == nullptr).  Has total mass equal to the mass of f exactly.
inline DensityGrid collision_term(const DensityGrid& f, const KernelSpec* kernel,
                                  const KernelStencil* stencil = nullptr) {
    DensityGrid g = f;
    std::vector<Flux> flux =
        kernel ? grid_flux_field(*kernel, f, stencil) : local_flux_field(f);
    const auto& q = *f.quad;
    const int nq = f.nq();
    for (int c = 0; c < f.ncells(); ++c) {
        const Flux& J = flux[static_cast<std::size_t>(c)];
        double rho = f.rho(c);
        double z = 0;
        // unnormalized density at the nodes, then exact normalization
        for (int k = 0; k < nq; ++k) {
            double e = std::exp(dot(J, q[k].point.embed));
            g.at(c, k) = e;
            z += q[k].weight * e;
        }
        double s = rho / z;
        for (int k = 0; k < nq; ++k) g.at(c, k) *= s;
    }
    return g;
}

struct StepLog {
    int picard_iters = 0;
    double residual = 0;
    double renorm_factor = 1;   // mass renormalization applied after the step
    double clamp_mass = 0;      // total negative mass clamped (expected 0)
};

struct PicardOptions {
    double tol = 1e-8;
    int max_iters = 50;
};

// One Duhamel step of the mild formulation: Picard iteration of
//   g -> e^{-dt} T_dt f  +  int_0^dt e^{-(dt-s)} T_{dt-s} G(g_s) ds
// with the s-integral by the trapezoid rule (endpoints s = 0 and s = dt)
// and the two trapezoid weights scaled so they sum to 1 - e^{-dt} exactly.
inline DensityGrid duhamel_step(const DensityGrid& f, double dt, const KernelSpec* kernel,
                                const PicardOptions& opts = {}, StepLog* log = nullptr,
                                const KernelStencil* stencil = nullptr) {
    DensityGrid tf = free_transport(f, dt);
    DensityGrid tg0 = free_transport(collision_term(f, kernel, stencil), dt);
    const double w0 = std::exp(-dt);
    const double wa = (1.0 - w0) * w0 / (1.0 + w0);
    const double wb = (1.0 - w0) / (1.0 + w0);

    DensityGrid g = tf;
    g.t = f.t + dt;
    StepLog lg;
    for (lg.picard_iters = 1; lg.picard_iters <= opts.max_iters; ++lg.picard_iters) {
        DensityGrid gg = collision_term(g, kernel, stencil);
        DensityGrid next = g;
        for (std::size_t i = 0; i < next.v.size(); ++i)
            next.v[i] = w0 * tf.v[i] + wa * tg0.v[i] + wb * gg.v[i];
        lg.residual = l1_distance(next, g);
        g = next;
        if (lg.residual < opts.tol) break;
    }
    if (lg.residual >= opts.tol)
        throw std::runtime_error("duhamel_step: Picard failed to contract (dt too large)");

    for (double& x : g.v)
        if (x < 0) {
            lg.clamp_mass += -x;
            x = 0;
        }
    double m = g.mass();
    lg.renorm_factor = 1.0 / m;
    g.scale(lg.renorm_factor);
    if (log) *log = lg;
    return g;
}

// Local-in-time validity horizon of the mild fixed point: the largest T with
// e^{-T} ||f0||_inf + (1 - e^{-T}) a alpha(a) <= a, i.e.
// T <= log((a alpha(a) - ||f0||_inf) / (a alpha(a) - a)) with alpha(a) = e^{2a}.
inline double local_horizon_bound(double a, double sup_f0) {
    double aa = a * std::exp(2.0 * a);
    if (sup_f0 >= a) return 0.0;
    return std::log((aa - sup_f0) / (aa - a));
}

struct SolveOptions {
    double dt = 0.02;
    double mass_tol = 1e-3;
    PicardOptions picard;
    double local_a = 0;  // LOCAL mode: positive sup-norm ball radius; 0 = kernel mode
};

struct BgkSolution {
    std::vector<DensityGrid> snapshots;  // every dt, starting at f0
    double dt = 0;
    double cumulative_renorm = 0;  // sum |renorm_factor - 1|
    double total_clamp = 0;

    const DensityGrid& at_or_before(double t) const {
        std::size_t i = static_cast<std::size_t>(std::floor(t / dt + 1e-9));
        if (i >= snapshots.size()) i = snapshots.size() - 1;
        return snapshots[i];
    }
};

// Time-stepping of BGK-K (kernel != nullptr) or BGK-delta (LOCAL mode).
// LOCAL mode enforces the local well-posedness horizon and the sup-norm
// a-ball at every step.
inline BgkSolution solve_bgk(const DensityGrid& f0, double t_end, const KernelSpec* kernel,
                             const SolveOptions& opts = {}) {
    if (!kernel && opts.local_a <= 0)
        throw std::invalid_argument("solve_bgk: LOCAL mode needs local_a > 0");
    if (!kernel) {
        if (f0.sup_value() >= opts.local_a)
            throw std::invalid_argument("solve_bgk: ||f0||_inf must be < a in LOCAL mode");
        double horizon = local_horizon_bound(opts.local_a, f0.sup_value());
        if (t_end > horizon)
            throw std::invalid_argument("solve_bgk: t_end beyond the LOCAL horizon bound");
    }
    KernelStencil stencil;
    if (kernel) stencil = make_stencil(*kernel, f0);
    BgkSolution sol;
    sol.dt = opts.dt;
    sol.snapshots.push_back(f0);
    int steps = static_cast<int>(std::round(t_end / opts.dt));
    for (int s = 0; s < steps; ++s) {
        StepLog lg;
        DensityGrid next = duhamel_step(sol.snapshots.back(), opts.dt, kernel, opts.picard,
                                        &lg, kernel ? &stencil : nullptr);
        sol.cumulative_renorm += std::abs(lg.renorm_factor - 1.0);
        sol.total_clamp += lg.clamp_mass;
        if (!kernel && next.sup_value() > opts.local_a)
            throw std::runtime_error("solve_bgk: LOCAL solution left the a-ball");
        sol.snapshots.push_back(std::move(next));
    }
    return sol;
}

// ---- space-homogeneous equation on P(M) ----

// nu as a density over the manifold quadrature nodes.
struct HomogeneousDensity {
    const Manifold* manifold = nullptr;
    std::shared_ptr<const Quadrature> quad;
    std::vector<double> rho;  // density values at the nodes
    double t = 0;

    double mass() const {
        double m = 0;
        for (std::size_t k = 0; k < rho.size(); ++k) m += (*quad)[k].weight * rho[k];
        return m;
    }

    Flux flux() const {
        Flux J(manifold->embed_dim());
        for (std::size_t k = 0; k < rho.size(); ++k) {
            double w = (*quad)[k].weight * rho[k];
            for (int i = 0; i < J.n; ++i) J[i] += w * (*quad)[k].point.embed[i];
        }
        return J;
    }
};

inline HomogeneousDensity uniform_homogeneous(const Manifold& man,
                                              std::shared_ptr<const Quadrature> quad) {
    HomogeneousDensity nu;
    nu.manifold = &man;
    nu.quad = std::move(quad);
    nu.rho.assign(nu.quad->size(), 1.0);
    return nu;
}

namespace detail {

// RHS of d/dt nu = M_{J_nu} - nu on the node values.
inline std::vector<double> homogeneous_rhs(const HomogeneousDensity& nu) {
    const auto& q = *nu.quad;
    Flux J = nu.flux();
    std::vector<double> e(q.size());
    double z = 0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        e[k] = std::exp(dot(J, q[k].point.embed));
        z += q[k].weight * e[k];
    }
    std::vector<double> out(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) out[k] = e[k] / z - nu.rho[k];
    return out;
}

}  // namespace detail

// Classical RK4 on the semi-discrete node values; the RHS integrates to
// zero so the means stay normalized up to roundoff.
inline std::vector<HomogeneousDensity> homogeneous_solve(const HomogeneousDensity& nu0,
                                                         double t_end, double dt) {
    std::vector<HomogeneousDensity> series;
    series.push_back(nu0);
    int steps = static_cast<int>(std::round(t_end / dt));
    auto axpy = [](const HomogeneousDensity& base, const std::vector<double>& k, double s) {
        HomogeneousDensity out = base;
        for (std::size_t i = 0; i < out.rho.size(); ++i) out.rho[i] += s * k[i];
        return out;
    };
    for (int s = 0; s < steps; ++s) {
        const HomogeneousDensity& nu = series.back();
        auto k1 = detail::homogeneous_rhs(nu);
        auto k2 = detail::homogeneous_rhs(axpy(nu, k1, 0.5 * dt));
        auto k3 = detail::homogeneous_rhs(axpy(nu, k2, 0.5 * dt));
        auto k4 = detail::homogeneous_rhs(axpy(nu, k3, dt));
        HomogeneousDensity next = nu;
        for (std::size_t i = 0; i < next.rho.size(); ++i)
            next.rho[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        next.t = nu.t + dt;
        series.push_back(std::move(next));
    }
    return series;
}

// Closed flux ODE of the homogeneous equation: since M_nu depends on nu
// only through J_nu, the flux solves dJ/dt = J_{M_J} - J.  Serves as the
// independent oracle for the homogeneous solvers and particle runs.
inline std::vector<Flux> flux_ode(const Manifold& man, const Quadrature& quad,
                                  const Flux& J0, double t_end, double dt) {
    std::vector<Flux> series;
    series.push_back(J0);
    auto rhs = [&](const Flux& J) {
        VonMisesLaw law = make_von_mises(man, quad, J);
        return vm_mean_flux(law) - J;
    };
    int steps = static_cast<int>(std::round(t_end / dt));
    for (int s = 0; s < steps; ++s) {
        const Flux& J = series.back();
        Flux k1 = rhs(J);
        Flux k2 = rhs(J + 0.5 * dt * k1);
        Flux k3 = rhs(J + 0.5 * dt * k2);
        Flux k4 = rhs(J + dt * k3);
        series.push_back(J + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    return series;
}

// ---- compactness-style solver diagnostics ----

struct CompactnessReport {
    // (i) translation stability, per requested integer-cell shift:
    //     sup_t L1(tau_h f_t - f_t) / L1(tau_h f0 - f0)
    std::vector<int> shift_cells;
    std::vector<double> translation_ratio;
    // (ii) tightness: mass outside radius R at the final time vs mass
    //      outside R - beta*T initially (both around the domain center)
    double outside_mass_final = 0;
    double outside_mass_initial = 0;
    // (iii) time equicontinuity: L1(f_{t+h} - f_t) for successive h
    std::vector<double> time_h;
    std::vector<double> time_gap;
};

namespace detail {

inline DensityGrid translate_cells(const DensityGrid& f, int shift) {
    DensityGrid out = f;
    const int nq = f.nq();
    for (int c = 0; c < f.ncells(); ++c) {
        auto ix = f.unflatten(c);
        ix[0] += shift;  // tau_h acts on the first spatial axis
        int c2 = f.flatten(ix);
        for (int k = 0; k < nq; ++k) out.at(c, k) = f.at(c2, k);
    }
    return out;
}

inline double outside_mass(const DensityGrid& f, double radius) {
    Vec center(f.d());
    for (int i = 0; i < f.d(); ++i) center[i] = 0.5 * f.dom.L;
    double m = 0;
    for (int c = 0; c < f.ncells(); ++c) {
        Vec x = f.cell_center(c);
        double r = 0;
        for (int i = 0; i < f.d(); ++i) r += (x[i] - center[i]) * (x[i] - center[i]);
        if (std::sqrt(r) >= radius) m += f.rho(c);
    }
    return m * f.cell_volume();
}

}  // namespace detail

inline CompactnessReport compactness_diagnostics(const BgkSolution& sol,
                                         const std::vector<int>& shifts, double radius) {
    CompactnessReport rep;
    const DensityGrid& f0 = sol.snapshots.front();
    for (int s : shifts) {
        if (s == 0) continue;  // 0/0 convention: skipped
        double denom = l1_distance(detail::translate_cells(f0, s), f0);
        double sup = 0;
        for (const auto& f : sol.snapshots)
            sup = std::max(sup, l1_distance(detail::translate_cells(f, s), f));
        rep.shift_cells.push_back(s);
        rep.translation_ratio.push_back(denom > 0 ? sup / denom : 0.0);
    }
    double t_end = sol.snapshots.back().t - f0.t;
    double beta = f0.manifold->speed_bound();
    rep.outside_mass_final = detail::outside_mass(sol.snapshots.back(), radius);
    rep.outside_mass_initial = detail::outside_mass(f0, radius - beta * t_end);
    for (std::size_t stride = sol.snapshots.size() / 2; stride >= 1; stride /= 2) {
        rep.time_h.push_back(static_cast<double>(stride) * sol.dt);
        double gap = 0;
        for (std::size_t i = 0; i + stride < sol.snapshots.size(); ++i)
            gap = std::max(gap, l1_distance(sol.snapshots[i + stride], sol.snapshots[i]));
        rep.time_gap.push_back(gap);
        if (stride == 1) break;
    }
    return rep;
}

}  // namespace flocklab

#endif
