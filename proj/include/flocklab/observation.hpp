#ifndef FLOCKLAB_OBSERVATION_HPP
#define FLOCKLAB_OBSERVATION_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "flocklab/density_grid.hpp"
#include "flocklab/interaction.hpp"
#include "flocklab/state.hpp"
#include "flocklab/vec.hpp"

namespace flocklab {

enum class KernelProfile { smooth_bump, truncated_gaussian };

inline std::string to_string(KernelProfile p) {
    return p == KernelProfile::smooth_bump ? "smooth_bump" : "truncated_gaussian";
}

inline KernelProfile kernel_profile_from_string(const std::string& s) {
    if (s == "smooth_bump") return KernelProfile::smooth_bump;
    if (s == "truncated_gaussian") return KernelProfile::truncated_gaussian;
    throw std::invalid_argument("unknown kernel profile: " + s);
}

namespace detail {

// Unnormalized radial profile on [0, 1) of the unit-radius kernel.
inline double base_profile(KernelProfile p, double s) {
    if (s >= 1.0) return 0.0;
    switch (p) {
        case KernelProfile::smooth_bump:
            return std::exp(1.0 / (s * s - 1.0));
        case KernelProfile::truncated_gaussian:
            return std::exp(-4.5 * s * s);  // sigma = r/3, truncated at r
    }
    return 0.0;
}

inline double unit_ball_surface(int d) {
    // |S^{d-1}|
    if (d == 1) return 2.0;
    if (d == 2) return 2.0 * kPi;
    if (d == 3) return 4.0 * kPi;
    throw std::invalid_argument("kernel dimension must be 1, 2 or 3");
}

}  // namespace detail

// Radial observation kernel K with compact support of radius r, numerically
// normalized to unit spatial integral, and its epsilon-rescaling
// K^eps(x) = eps^{-d} K(x/eps).
struct KernelSpec {
    KernelProfile profile = KernelProfile::smooth_bump;
    double radius = 1.0;  // support radius of the unrescaled kernel
    int dim = 2;
    double epsilon = 1.0;
    double norm_const = 1.0;     // continuum normalization of the eps=1 kernel
    double base_sup = 0.0;       // measured sup of the eps=1 kernel
    double base_lip = 0.0;       // measured Lipschitz norm of the eps=1 kernel

    double support() const { return radius * epsilon; }
    double sup_norm() const { return base_sup * std::pow(epsilon, -dim); }
    double lip_norm() const { return base_lip * std::pow(epsilon, -(dim + 1)); }

    // K^eps at radial distance rho.
    double eval_radial(double rho) const {
        double s = rho / (radius * epsilon);
        if (s >= 1.0) return 0.0;
        return norm_const * std::pow(epsilon, -dim) * detail::base_profile(profile, s);
    }

    double eval(const Vec& x) const { return eval_radial(norm(x)); }
    double eval(const Vec& x, const Vec& y, const Domain& dom) const {
        return eval_radial(dom.distance(x, y));
    }
};

inline KernelSpec make_kernel(KernelProfile profile, double radius, int dim,
                              double epsilon = 1.0) {
    if (radius <= 0 || epsilon <= 0) throw std::invalid_argument("kernel: radius, epsilon > 0");
    KernelSpec k;
    k.profile = profile;
    k.radius = radius;
    k.dim = dim;
    k.epsilon = epsilon;
    // normalize: integral over R^d of c * prof(|x|/r) = 1
    const int n = 8192;
    double integral = 0;
    double h = radius / n;
    for (int i = 0; i <= n; ++i) {
        double rho = i * h;
        double w = (i == 0 || i == n) ? 0.5 : 1.0;
        // one-sided limit at the support edge (the profile may jump to 0 there)
        double s = std::min(rho / radius, 1.0 - 1e-12);
        integral += w * std::pow(rho, dim - 1) * detail::base_profile(profile, s);
    }
    integral *= h * detail::unit_ball_surface(dim);
    k.norm_const = 1.0 / integral;
    // measured norms on a fine radial grid (eps = 1 convention)
    double sup = 0, lip = 0, prev = k.norm_const * detail::base_profile(profile, 0.0);
    sup = prev;
    for (int i = 1; i <= n; ++i) {
        double cur = k.norm_const * detail::base_profile(profile, static_cast<double>(i) / n);
        sup = std::max(sup, cur);
        lip = std::max(lip, std::abs(cur - prev) / (radius / n));
        prev = cur;
    }
    k.base_sup = sup;
    k.base_lip = lip;
    return k;
}

inline KernelSpec rescale(const KernelSpec& k, double epsilon) {
    if (epsilon <= 0) throw std::invalid_argument("rescale: epsilon > 0");
    KernelSpec r = k;
    r.epsilon = k.epsilon * epsilon;
    return r;
}

// sigma(K) = 2 theta(||K||_inf) ||K||_Lip, the coupling growth rate.
inline double kernel_sigma(const KernelSpec& k) {
    return 2.0 * RegularityConstants::from(k.sup_norm()).theta * k.lip_norm();
}

// Kernel-weighted empirical flux at x:  sum_j w_j K(x - x_j) embed(m_j).
inline Flux empirical_flux(const KernelSpec& k, const EmpiricalMeasure& mu,
                           const Vec& x, const Domain& dom) {
    if (mu.atoms.empty()) throw std::invalid_argument("empirical_flux: empty measure");
    const int ed = mu.atoms[0].m.embed.n;
    Flux J(ed);
    const double supp = k.support();
    for (std::size_t j = 0; j < mu.atoms.size(); ++j) {
        double rho = dom.distance(x, mu.atoms[j].x);
        if (rho >= supp) continue;
        double w = mu.weight(j) * k.eval_radial(rho);
        for (int i = 0; i < ed; ++i) J[i] += w * mu.atoms[j].m.embed[i];
    }
    return J;
}

// Per-cell flux moment of a density: J_f(x) = sum_q w_q embed(m_q) f(x, m_q).
// This is the purely local (BGK-delta) observation flux.
inline std::vector<Flux> local_flux_field(const DensityGrid& f) {
    const auto& q = *f.quad;
    const int nq = f.nq();
    const int ed = f.manifold->embed_dim();
    std::vector<Flux> field(static_cast<std::size_t>(f.ncells()), Flux(ed));
    for (int c = 0; c < f.ncells(); ++c) {
        Flux& J = field[static_cast<std::size_t>(c)];
        for (int k = 0; k < nq; ++k) {
            double w = q[k].weight * f.at(c, k);
            for (int i = 0; i < ed; ++i) J[i] += w * q[k].point.embed[i];
        }
    }
    return field;
}

// Precomputed convolution stencil of a kernel on a periodic lattice.  The
// discrete weights are renormalized so that sum h^d K = 1 exactly, which
// keeps under-resolved kernels mass-correct.
struct KernelStencil {
    std::vector<int> offsets;    // flattened relative multi-indices, d ints each
    std::vector<double> weights; // h^d K at the offset, renormalized
    int d = 0;
};

inline KernelStencil make_stencil(const KernelSpec& k, const DensityGrid& g) {
    if (k.support() > 0.5 * g.dom.L)
        throw std::invalid_argument("kernel support exceeds half the torus");
    KernelStencil st;
    st.d = g.d();
    const int r = static_cast<int>(std::ceil(k.support() / g.h));
    const int d = g.d();
    std::array<int, 3> off{0, 0, 0};
    double total = 0;
    auto visit = [&](auto&& self, int axis) -> void {
        if (axis == d) {
            double rho2 = 0;
            for (int i = 0; i < d; ++i) rho2 += static_cast<double>(off[i]) * off[i];
            double w = k.eval_radial(g.h * std::sqrt(rho2)) * g.cell_volume();
            if (w > 0) {
                for (int i = 0; i < d; ++i) st.offsets.push_back(off[i]);
                st.weights.push_back(w);
                total += w;
            }
            return;
        }
        for (off[axis] = -r; off[axis] <= r; ++off[axis]) self(self, axis + 1);
        off[axis] = 0;
    };
    visit(visit, 0);
    if (total <= 0) throw std::invalid_argument("kernel support below grid resolution");
    for (double& w : st.weights) w /= total;
    return st;
}

// Kernel-weighted flux field J_{K*f}(x) on the cell centers, by direct
// summation of the per-cell flux moment over the kernel stencil.
inline std::vector<Flux> grid_flux_field(const KernelSpec& k, const DensityGrid& f,
                                         const KernelStencil* stencil = nullptr) {
    KernelStencil local;
    if (!stencil) {
        local = make_stencil(k, f);
        stencil = &local;
    }
    std::vector<Flux> moment = local_flux_field(f);
    const int ed = f.manifold->embed_dim();
    const int d = f.d();
    std::vector<Flux> out(moment.size(), Flux(ed));
    const std::size_t ns = stencil->weights.size();
    for (int c = 0; c < f.ncells(); ++c) {
        auto ix = f.unflatten(c);
        Flux& J = out[static_cast<std::size_t>(c)];
        for (std::size_t s = 0; s < ns; ++s) {
            std::array<int, 3> jx = ix;
            for (int i = 0; i < d; ++i) jx[i] -= stencil->offsets[s * d + i];
            const Flux& mj = moment[static_cast<std::size_t>(f.flatten(jx))];
            double w = stencil->weights[s];
            for (int i = 0; i < ed; ++i) J[i] += w * mj[i];
        }
    }
    return out;
}

// Multilinear periodic interpolation of a flux field at position x.
inline Flux interp_flux_field(const DensityGrid& g, const std::vector<Flux>& field,
                              const Vec& x) {
    const int d = g.d();
    const int ed = field.empty() ? 0 : field[0].n;
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0, 0, 0};
    for (int i = 0; i < d; ++i) {
        double s = x[i] / g.h - 0.5;
        double fl = std::floor(s);
        base[i] = static_cast<int>(fl);
        frac[i] = s - fl;
    }
    Flux acc(ed);
    for (int corner = 0; corner < (1 << d); ++corner) {
        std::array<int, 3> ix = base;
        double w = 1;
        for (int i = 0; i < d; ++i) {
            if (corner & (1 << i)) {
                ix[i] += 1;
                w *= frac[i];
            } else {
                w *= 1.0 - frac[i];
            }
        }
        const Flux& fj = field[static_cast<std::size_t>(g.flatten(ix))];
        for (int i = 0; i < ed; ++i) acc[i] += w * fj[i];
    }
    return acc;
}

}  // namespace flocklab

#endif
