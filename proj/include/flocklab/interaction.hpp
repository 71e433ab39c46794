#ifndef FLOCKLAB_INTERACTION_HPP
#define FLOCKLAB_INTERACTION_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "flocklab/geometry.hpp"
#include "flocklab/rng.hpp"
#include "flocklab/state.hpp"
#include "flocklab/vec.hpp"

namespace flocklab {

// Order parameter of a distribution of orientations: J = integral of the
// embedded orientation against the measure.
using Flux = Vec;

inline constexpr double kZeroFluxTol = 1e-12;

// Von Mises law on a manifold: density e^{J.m} / Z under the normalized
// volume form.  The normalizer is always computed by quadrature; closed
// forms live in the test oracles only.
struct VonMisesLaw {
    const Manifold* manifold = nullptr;
    const Quadrature* quad = nullptr;
    Flux J;
    double Z = 1.0;

    double kappa() const { return norm(J); }
    bool degenerate() const { return kappa() < kZeroFluxTol; }
};

inline double vm_normalizer(const Manifold&, const Quadrature& quad, const Flux& J) {
    double z = 0;
    for (const auto& nd : quad) z += nd.weight * std::exp(dot(J, nd.point.embed));
    return z;
}

inline VonMisesLaw make_von_mises(const Manifold& manifold, const Quadrature& quad,
                                  Flux J) {
    VonMisesLaw law;
    law.manifold = &manifold;
    law.quad = &quad;
    law.J = std::move(J);
    law.Z = vm_normalizer(manifold, quad, law.J);
    return law;
}

inline double vm_density(const VonMisesLaw& law, const ManifoldPoint& m) {
    return std::exp(dot(law.J, m.embed)) / law.Z;
}

// Flux of a weighted atom set on M.
inline Flux flux_of_atoms(std::span<const ManifoldPoint> points,
                          std::span<const double> weights, int embed_dim) {
    Flux J(embed_dim);
    for (std::size_t i = 0; i < points.size(); ++i) {
        double w = weights.empty() ? 1.0 / static_cast<double>(points.size()) : weights[i];
        for (int k = 0; k < embed_dim; ++k) J[k] += w * points[i].embed[k];
    }
    return J;
}

inline Flux flux_of_points(const std::vector<ManifoldPoint>& points, int embed_dim) {
    return flux_of_atoms(points, {}, embed_dim);
}

// J_{M_nu}: flux of the law itself; collinear with J.
inline Flux vm_mean_flux(const VonMisesLaw& law) {
    Flux J(law.manifold->embed_dim());
    for (const auto& nd : *law.quad) {
        double rho = nd.weight * vm_density(law, nd.point);
        for (int k = 0; k < J.n; ++k) J[k] += rho * nd.point.embed[k];
    }
    return J;
}

// ---- sampling ----

namespace detail {

// Orthonormal pair completing a unit 3-vector.
inline void orthobasis(const Vec& e3, Vec& e1, Vec& e2) {
    Vec ref = std::abs(e3[0]) < 0.9 ? Vec(1.0, 0.0, 0.0) : Vec(0.0, 1.0, 0.0);
    e1 = normalized(cross(ref, e3));
    e2 = cross(e3, e1);
}

// Exact inverse-CDF draw of u in [-1,1] with density proportional to
// e^{kappa u}:  u = 1 + log(U + (1-U) e^{-2 kappa}) / kappa.
inline double sample_exp_cos(double kappa, RngStream& rng) {
    double u01 = rng.uniform();
    return 1.0 + std::log(u01 + (1.0 - u01) * std::exp(-2.0 * kappa)) / kappa;
}

}  // namespace detail

struct SampleStats {
    long long proposals = 0;
    long long accepts = 0;
};

// Exact sampling of M_J.  Sphere: inverse-CDF in the polar coordinate
// about J/|J| plus uniform azimuth.  Circle and SO(3): rejection against
// the uniform law with envelope e^{J.m - |J|} (acceptance >= e^{-2|J|}).
inline ManifoldPoint vm_sample(const VonMisesLaw& law, RngStream& rng,
                               SampleStats* stats = nullptr) {
    const Manifold& man = *law.manifold;
    double kappa = law.kappa();
    if (kappa < kZeroFluxTol) return man.uniform_sample(rng);

    if (man.kind() == ManifoldKind::sphere2) {
        Vec mean = normalized(law.J);
        double u = detail::sample_exp_cos(kappa, rng);
        double s = std::sqrt(std::max(0.0, 1.0 - u * u));
        double phi = rng.uniform(0.0, 2.0 * kPi);
        Vec e1, e2;
        detail::orthobasis(mean, e1, e2);
        Vec v = u * mean + s * (std::cos(phi) * e1 + std::sin(phi) * e2);
        return man.point_from_unit(v);
    }

    while (true) {
        ManifoldPoint p = man.uniform_sample(rng);
        if (stats) ++stats->proposals;
        if (rng.uniform() < std::exp(dot(law.J, p.embed) - kappa)) {
            if (stats) ++stats->accepts;
            return p;
        }
    }
}

// ---- Regularity constants and exact-inequality checks ----

struct RegularityConstants {
    double a = 0;
    double alpha = 0;  // sup-norm bound e^{2a}
    double lip = 0;    // orientation-Lipschitz bound a e^{2a}
    double theta = 0;  // flux-Lipschitz bound e^{2a} + e^{4a}

    static RegularityConstants from(double a) {
        RegularityConstants c;
        c.a = a;
        c.alpha = std::exp(2.0 * a);
        c.lip = a * std::exp(2.0 * a);
        c.theta = std::exp(2.0 * a) + std::exp(4.0 * a);
        return c;
    }
};

struct RegularityReport {
    RegularityConstants constants;
    int trials = 0;
    int violations = 0;
    double max_sup_ratio = 0;    // ||M_J||_inf / alpha(a)
    double max_lip_ratio = 0;    // |M(m1)-M(m2)| / (L(a) d(m1,m2))
    double max_theta_ratio = 0;  // ||M_J - M_J'||_inf / (theta(a) |J-J'|)
};

// Random fluxes with |J|, |J'| <= a plus random orientation pairs; checks
// the three interaction-law inequalities with the exact constants.
inline RegularityReport regularity_check(const Manifold& man, const Quadrature& quad,
                                         double a, int trials, RngStream& rng) {
    RegularityReport rep;
    rep.constants = RegularityConstants::from(a);
    rep.trials = trials;
    const int ed = man.embed_dim();
    for (int t = 0; t < trials; ++t) {
        Flux J(ed), Jp(ed);
        double r1 = a * std::pow(rng.uniform(), 1.0 / ed);
        double r2 = a * std::pow(rng.uniform(), 1.0 / ed);
        Vec g1(ed), g2(ed);
        for (int k = 0; k < ed; ++k) {
            g1[k] = rng.normal();
            g2[k] = rng.normal();
        }
        J = normalized(g1) * r1;
        Jp = normalized(g2) * r2;
        VonMisesLaw law = make_von_mises(man, quad, J);
        VonMisesLaw lawp = make_von_mises(man, quad, Jp);
        ManifoldPoint m1 = man.uniform_sample(rng);
        ManifoldPoint m2 = man.uniform_sample(rng);

        double d1 = vm_density(law, m1), d2 = vm_density(law, m2);
        double sup_ratio = std::max(d1, d2) / rep.constants.alpha;
        rep.max_sup_ratio = std::max(rep.max_sup_ratio, sup_ratio);
        if (sup_ratio > 1.0) ++rep.violations;

        double dm = man.distance(m1, m2);
        if (dm > 1e-14) {
            double lr = std::abs(d1 - d2) / (rep.constants.lip * dm);
            rep.max_lip_ratio = std::max(rep.max_lip_ratio, lr);
            if (lr > 1.0) ++rep.violations;
        }

        double dj = norm(J - Jp);
        if (dj > 1e-14) {
            double gap = std::max(std::abs(d1 - vm_density(lawp, m1)),
                                  std::abs(d2 - vm_density(lawp, m2)));
            double tr = gap / (rep.constants.theta * dj);
            rep.max_theta_ratio = std::max(rep.max_theta_ratio, tr);
            if (tr > 1.0) ++rep.violations;
        }
    }
    return rep;
}

// ---- transport map between two von Mises laws ----

namespace detail {

// Tabulated CDF of an unnormalized 1-d density on [lo, hi]; monotone
// piecewise-linear inversion.
class Cdf1d {
  public:
    template <class F>
    Cdf1d(F&& density, double lo, double hi, int n = 256) : lo_(lo), hi_(hi) {
        cdf_.resize(n + 1);
        grid_.resize(n + 1);
        double h = (hi - lo) / n;
        double prev = density(lo);
        cdf_[0] = 0;
        grid_[0] = lo;
        for (int i = 1; i <= n; ++i) {
            double xi = lo + i * h;
            double cur = density(xi);
            cdf_[i] = cdf_[i - 1] + 0.5 * h * (prev + cur);
            grid_[i] = xi;
            prev = cur;
        }
        double total = cdf_.back();
        for (auto& c : cdf_) c /= total;
    }

    double value(double x) const {
        x = std::clamp(x, lo_, hi_);
        auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
        std::size_t i = static_cast<std::size_t>(
            std::clamp<std::ptrdiff_t>(it - grid_.begin() - 1, 0,
                                       static_cast<std::ptrdiff_t>(grid_.size()) - 2));
        double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
        return cdf_[i] + t * (cdf_[i + 1] - cdf_[i]);
    }

    double inverse(double p) const {
        p = std::clamp(p, 0.0, 1.0);
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), p);
        std::size_t i = static_cast<std::size_t>(
            std::clamp<std::ptrdiff_t>(it - cdf_.begin() - 1, 0,
                                       static_cast<std::ptrdiff_t>(cdf_.size()) - 2));
        double seg = cdf_[i + 1] - cdf_[i];
        double t = seg > 0 ? (p - cdf_[i]) / seg : 0.0;
        return grid_[i] + t * (grid_[i + 1] - grid_[i]);
    }

  private:
    double lo_, hi_;
    std::vector<double> grid_, cdf_;
};

// Polar factor of a 3x3 matrix (Higham iteration).  Row-major.
inline std::array<double, 9> polar_rotation(std::array<double, 9> f) {
    auto inv_t = [](const std::array<double, 9>& m) {
        double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                     m[1] * (m[3] * m[8] - m[5] * m[6]) +
                     m[2] * (m[3] * m[7] - m[4] * m[6]);
        std::array<double, 9> adj = {
            m[4] * m[8] - m[5] * m[7], m[5] * m[6] - m[3] * m[8], m[3] * m[7] - m[4] * m[6],
            m[2] * m[7] - m[1] * m[8], m[0] * m[8] - m[2] * m[6], m[1] * m[6] - m[0] * m[7],
            m[1] * m[5] - m[2] * m[4], m[2] * m[3] - m[0] * m[5], m[0] * m[4] - m[1] * m[3]};
        // adj holds the cofactor matrix laid out so that adj/det = (m^{-1})^T
        for (auto& v : adj) v /= det;
        return adj;
    };
    for (int it = 0; it < 60; ++it) {
        auto g = inv_t(f);
        std::array<double, 9> nf{};
        double delta = 0;
        for (int i = 0; i < 9; ++i) {
            nf[i] = 0.5 * (f[i] + g[i]);
            delta = std::max(delta, std::abs(nf[i] - f[i]));
        }
        f = nf;
        if (delta < 1e-14) break;
    }
    return f;
}

// Mean rotation and effective concentration of a von Mises law on SO(3):
// J ~ c * embed(Lambda) with Lambda the polar factor of the reshaped flux.
inline void so3_mean_rotation(const Manifold& man, const Flux& J, ManifoldPoint& lambda,
                              double& c) {
    std::array<double, 9> f{};
    const double s = std::sqrt(3.0);
    for (int i = 0; i < 9; ++i) f[i] = s * J[i];
    auto r = polar_rotation(f);
    lambda = man.point_from_quat(quat_from_matrix(r));
    c = dot(J, lambda.embed);
}

inline void axis_angle_from_quat(const Vec& q, Vec& axis, double& angle) {
    double w = std::clamp(q[0], -1.0, 1.0);
    angle = 2.0 * std::acos(std::abs(w));
    Vec v(q[1], q[2], q[3]);
    if (w < 0) v *= -1.0;
    double s = norm(v);
    axis = s > 1e-14 ? v * (1.0 / s) : Vec(1.0, 0.0, 0.0);
}

}  // namespace detail

// Measurable map s with pushforward s#src = dst: rotate the source mean
// direction onto the destination one, monotone rearrangement of the
// radial coordinate (polar angle / rotation angle), identity on the fiber.
// For SO(3) with equal concentrations this is distributionally the
// group map A -> Lambda1^T A Lambda2.  On SO(3) the pushforward is exact
// when each parameter is proportional to a rotation's embedding (then the
// axis of the relative rotation is uniform given its angle); for a general
// parameter it is an approximate coupling through the nearest such law.
inline ManifoldPoint vm_transport(const VonMisesLaw& src, const VonMisesLaw& dst,
                                  const ManifoldPoint& m) {
    const Manifold& man = *src.manifold;
    const double ks = src.kappa(), kd = dst.kappa();
    if (ks < kZeroFluxTol && kd < kZeroFluxTol) return m;

    switch (man.kind()) {
        case ManifoldKind::circle: {
            double mean_s = ks < kZeroFluxTol ? std::atan2(dst.J[1], dst.J[0])
                                              : std::atan2(src.J[1], src.J[0]);
            double mean_d = kd < kZeroFluxTol ? mean_s : std::atan2(dst.J[1], dst.J[0]);
            auto dens = [](double kap) {
                return [kap](double psi) { return std::exp(kap * std::cos(psi)); };
            };
            detail::Cdf1d cs(dens(ks), -kPi, kPi);
            detail::Cdf1d cd(dens(kd), -kPi, kPi);
            double psi = std::remainder(m.coords[0] - mean_s, 2.0 * kPi);
            double psi2 = cd.inverse(cs.value(psi));
            return man.point_from_angle(mean_d + psi2);
        }
        case ManifoldKind::sphere2: {
            Vec es = ks < kZeroFluxTol ? normalized(dst.J) : normalized(src.J);
            Vec ed = kd < kZeroFluxTol ? es : normalized(dst.J);
            // closed-form CDF of u with density prop. to e^{kappa u}:
            //   F(u) = expm1(kappa (u+1)) / expm1(2 kappa)
            auto cdf = [](double kap, double u) {
                if (kap < kZeroFluxTol) return 0.5 * (u + 1.0);
                return std::expm1(kap * (u + 1.0)) / std::expm1(2.0 * kap);
            };
            double u = std::clamp(dot(m.coords, es), -1.0, 1.0);
            double p = cdf(ks, u);
            double u2;
            if (kd < kZeroFluxTol) {
                u2 = 2.0 * p - 1.0;
            } else {
                u2 = -1.0 + std::log1p(p * std::expm1(2.0 * kd)) / kd;
            }
            u2 = std::clamp(u2, -1.0, 1.0);
            // tangential component, carried through the minimal rotation es -> ed
            Vec tang = m.coords - u * es;
            double tn = norm(tang);
            Vec t2;
            if (tn < 1e-14) {
                Vec e1, e2;
                detail::orthobasis(ed, e1, e2);
                t2 = e1;
            } else {
                tang *= 1.0 / tn;
                double ce = std::clamp(dot(es, ed), -1.0, 1.0);
                if (ce > 1.0 - 1e-14) {
                    t2 = tang;
                } else if (ce < -1.0 + 1e-14) {
                    t2 = tang * -1.0;
                } else {
                    Vec axis = normalized(cross(es, ed));
                    double ang = std::acos(ce);
                    // Rodrigues rotation of the tangential direction
                    t2 = tang * std::cos(ang) + cross(axis, tang) * std::sin(ang) +
                         axis * (dot(axis, tang) * (1.0 - std::cos(ang)));
                }
            }
            double s2 = std::sqrt(std::max(0.0, 1.0 - u2 * u2));
            return man.point_from_unit(u2 * ed + s2 * t2);
        }
        case ManifoldKind::rotations3: {
            ManifoldPoint ls, ld;
            double cs_ = 0, cd_ = 0;
            if (ks < kZeroFluxTol) {
                detail::so3_mean_rotation(man, dst.J, ls, cd_);
                ld = ls;
                cs_ = 0;
            } else {
                detail::so3_mean_rotation(man, src.J, ls, cs_);
                if (kd < kZeroFluxTol) {
                    ld = ls;
                    cd_ = 0;
                } else {
                    detail::so3_mean_rotation(man, dst.J, ld, cd_);
                }
            }
            // relative rotation D = Lambda_s^T A; angular density prop. to
            // e^{(2c/3) cos(phi)} (1 - cos(phi)) on [0, pi]
            Vec d = quat_mul(quat_conj(ls.coords), m.coords);
            Vec axis;
            double ang;
            detail::axis_angle_from_quat(d, axis, ang);
            auto dens = [](double c) {
                return [c](double phi) {
                    return std::exp(2.0 * c / 3.0 * std::cos(phi)) * (1.0 - std::cos(phi));
                };
            };
            detail::Cdf1d cdf_s(dens(cs_), 0.0, kPi);
            detail::Cdf1d cdf_d(dens(cd_), 0.0, kPi);
            double ang2 = cdf_d.inverse(cdf_s.value(ang));
            Vec d2 = quat_from_axis_angle(axis, ang2);
            return man.point_from_quat(quat_mul(ld.coords, d2));
        }
    }
    return m;
}

}  // namespace flocklab

#endif
