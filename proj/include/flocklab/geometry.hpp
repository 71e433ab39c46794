#ifndef FLOCKLAB_GEOMETRY_HPP
#define FLOCKLAB_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "flocklab/rng.hpp"
#include "flocklab/vec.hpp"

namespace flocklab {

inline constexpr double kPi = std::numbers::pi;

enum class ManifoldKind { circle, sphere2, rotations3 };

inline std::string to_string(ManifoldKind k) {
    switch (k) {
        case ManifoldKind::circle: return "circle";
        case ManifoldKind::sphere2: return "sphere2";
        case ManifoldKind::rotations3: return "rotations3";
    }
    return "?";
}

inline ManifoldKind manifold_kind_from_string(const std::string& s) {
    if (s == "circle") return ManifoldKind::circle;
    if (s == "sphere2") return ManifoldKind::sphere2;
    if (s == "rotations3") return ManifoldKind::rotations3;
    throw std::invalid_argument("unknown manifold kind: " + s);
}

// Orientation with its cached embedding into the ambient inner-product
// space E.  Coordinates: angle for the circle, unit 3-vector for the
// sphere, unit quaternion (w,x,y,z; w >= 0 representative of {q,-q})
// for the rotation group.
struct ManifoldPoint {
    Vec coords;
    Vec embed;
};

struct QuadNode {
    ManifoldPoint point;
    double weight = 0;
};
using Quadrature = std::vector<QuadNode>;

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

inline double wrap_angle(double t) {
    t = std::fmod(t, 2.0 * kPi);
    if (t < 0) t += 2.0 * kPi;
    return t;
}

}  // namespace detail

// ---- quaternion helpers (SO(3) points) ----

// Canonical representative of {q, -q}.
inline Vec quat_canonical(Vec q) {
    for (int i = 0; i < 4; ++i) {
        if (q[i] > 1e-14) break;
        if (q[i] < -1e-14) {
            q *= -1.0;
            break;
        }
    }
    return q;
}

inline Vec quat_from_axis_angle(const Vec& axis, double angle) {
    Vec q(4);
    double s = std::sin(0.5 * angle);
    q[0] = std::cos(0.5 * angle);
    q[1] = s * axis[0];
    q[2] = s * axis[1];
    q[3] = s * axis[2];
    return quat_canonical(q);
}

// Row-major 3x3 rotation matrix.
inline std::array<double, 9> quat_to_matrix(const Vec& q) {
    double w = q[0], x = q[1], y = q[2], z = q[3];
    return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
            2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
            2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)};
}

inline Vec quat_from_matrix(const std::array<double, 9>& r) {
    Vec q(4);
    double tr = r[0] + r[4] + r[8];
    if (tr > 0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        q[0] = 0.25 * s;
        q[1] = (r[7] - r[5]) / s;
        q[2] = (r[2] - r[6]) / s;
        q[3] = (r[3] - r[1]) / s;
    } else if (r[0] >= r[4] && r[0] >= r[8]) {
        double s = std::sqrt(1.0 + r[0] - r[4] - r[8]) * 2.0;
        q[0] = (r[7] - r[5]) / s;
        q[1] = 0.25 * s;
        q[2] = (r[1] + r[3]) / s;
        q[3] = (r[2] + r[6]) / s;
    } else if (r[4] >= r[8]) {
        double s = std::sqrt(1.0 + r[4] - r[0] - r[8]) * 2.0;
        q[0] = (r[2] - r[6]) / s;
        q[1] = (r[1] + r[3]) / s;
        q[2] = 0.25 * s;
        q[3] = (r[5] + r[7]) / s;
    } else {
        double s = std::sqrt(1.0 + r[8] - r[0] - r[4]) * 2.0;
        q[0] = (r[3] - r[1]) / s;
        q[1] = (r[2] + r[6]) / s;
        q[2] = (r[5] + r[7]) / s;
        q[3] = 0.25 * s;
    }
    double nrm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    q *= 1.0 / nrm;
    return quat_canonical(q);
}

inline Vec quat_mul(const Vec& a, const Vec& b) {
    Vec q(4);
    q[0] = a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
    q[1] = a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2];
    q[2] = a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1];
    q[3] = a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0];
    return q;
}

inline Vec quat_conj(Vec q) {
    q[1] = -q[1];
    q[2] = -q[2];
    q[3] = -q[3];
    return q;
}

// Compact manifold of orientations with normalized volume form,
// embedded in E so that |m| <= 1 for every point.
class Manifold {
  public:
    static Manifold make(ManifoldKind kind) { return Manifold(kind); }
    static Manifold circle() { return Manifold(ManifoldKind::circle); }
    static Manifold sphere2() { return Manifold(ManifoldKind::sphere2); }
    static Manifold rotations3() { return Manifold(ManifoldKind::rotations3); }

    ManifoldKind kind() const { return kind_; }
    int intrinsic_dim() const {
        switch (kind_) {
            case ManifoldKind::circle: return 1;
            case ManifoldKind::sphere2: return 2;
            case ManifoldKind::rotations3: return 3;
        }
        return 0;
    }
    int embed_dim() const {
        switch (kind_) {
            case ManifoldKind::circle: return 2;
            case ManifoldKind::sphere2: return 3;
            case ManifoldKind::rotations3: return 9;
        }
        return 0;
    }
    // Ambient dimension of the velocity map Phi.
    int spatial_dim() const { return kind_ == ManifoldKind::circle ? 2 : 3; }

    // Largest c with chordal <= c * (raw rotation angle); d := c * angle.
    double geodesic_scale() const {
        return kind_ == ManifoldKind::rotations3 ? std::sqrt(2.0 / 3.0) : 1.0;
    }

    // |Phi(m)| <= beta.
    double speed_bound() const { return 1.0; }

    // Lipschitz constant of Phi w.r.t. the geodesic distance.  Exact for
    // the canonical injections; for SO(3), |Ae1 - Be1| <= angle(A,B) and
    // d = sqrt(2/3) * angle gives sqrt(3/2).
    double velocity_lipschitz() const {
        return kind_ == ManifoldKind::rotations3 ? std::sqrt(1.5) : 1.0;
    }

    ManifoldPoint point_from_angle(double theta) const {
        ManifoldPoint p;
        p.coords = Vec(1);
        p.coords[0] = detail::wrap_angle(theta);
        p.embed = Vec(std::cos(p.coords[0]), std::sin(p.coords[0]));
        return p;
    }

    ManifoldPoint point_from_unit(const Vec& u) const {
        ManifoldPoint p;
        p.coords = normalized(u);
        p.embed = p.coords;
        return p;
    }

    ManifoldPoint point_from_quat(const Vec& q) const {
        ManifoldPoint p;
        Vec qc = q;
        double nrm = std::sqrt(qc[0] * qc[0] + qc[1] * qc[1] + qc[2] * qc[2] + qc[3] * qc[3]);
        qc *= 1.0 / nrm;
        p.coords = quat_canonical(qc);
        auto r = quat_to_matrix(p.coords);
        p.embed = Vec(9);
        const double s = 1.0 / std::sqrt(3.0);  // scale so |embed| = 1
        for (int i = 0; i < 9; ++i) p.embed[i] = s * r[i];
        return p;
    }

    double distance(const ManifoldPoint& p1, const ManifoldPoint& p2) const {
        switch (kind_) {
            case ManifoldKind::circle: {
                double dt = std::abs(p1.coords[0] - p2.coords[0]);
                return std::min(dt, 2.0 * kPi - dt);
            }
            case ManifoldKind::sphere2: {
                double c = std::clamp(dot(p1.coords, p2.coords), -1.0, 1.0);
                return std::acos(c);
            }
            case ManifoldKind::rotations3: {
                double c = 0;
                for (int i = 0; i < 4; ++i) c += p1.coords[i] * p2.coords[i];
                c = std::clamp(std::abs(c), 0.0, 1.0);
                return geodesic_scale() * 2.0 * std::acos(c);
            }
        }
        return 0;
    }

    double diameter() const {
        switch (kind_) {
            case ManifoldKind::circle: return kPi;
            case ManifoldKind::sphere2: return kPi;
            case ManifoldKind::rotations3: return geodesic_scale() * kPi;
        }
        return 0;
    }

    Vec velocity(const ManifoldPoint& m) const {
        switch (kind_) {
            case ManifoldKind::circle:
            case ManifoldKind::sphere2:
                return m.embed;  // canonical injection
            case ManifoldKind::rotations3: {
                auto r = quat_to_matrix(m.coords);
                return Vec(r[0], r[3], r[6]);  // A e1, first column
            }
        }
        return Vec();
    }

    ManifoldPoint uniform_sample(RngStream& rng) const {
        switch (kind_) {
            case ManifoldKind::circle:
                return point_from_angle(rng.uniform(0.0, 2.0 * kPi));
            case ManifoldKind::sphere2: {
                double u = rng.uniform(-1.0, 1.0);
                double phi = rng.uniform(0.0, 2.0 * kPi);
                double s = std::sqrt(std::max(0.0, 1.0 - u * u));
                return point_from_unit(Vec(s * std::cos(phi), s * std::sin(phi), u));
            }
            case ManifoldKind::rotations3: {
                Vec q(4);
                double nrm = 0;
                do {
                    for (int i = 0; i < 4; ++i) q[i] = rng.normal();
                    nrm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
                } while (nrm < 1e-12);
                q *= 1.0 / nrm;
                return point_from_quat(q);
            }
        }
        return ManifoldPoint{};
    }

    // Nodes and weights of a positive quadrature with total weight 1.
    // Circle: uniform angles (trapezoid, spectrally exact).
    // Sphere: Gauss-Legendre in cos(theta) x uniform azimuth.
    // SO(3): Gauss-Legendre in the rotation angle against the Haar
    // angular density (1-cos)/pi x sphere quadrature for the axis.
    Quadrature quadrature(int order) const {
        Quadrature quad;
        switch (kind_) {
            case ManifoldKind::circle: {
                if (order < 4) throw std::invalid_argument("circle quadrature: order >= 4");
                quad.reserve(order);
                for (int k = 0; k < order; ++k)
                    quad.push_back({point_from_angle(2.0 * kPi * k / order), 1.0 / order});
                break;
            }
            case ManifoldKind::sphere2: {
                if (order < 2) throw std::invalid_argument("sphere quadrature: order >= 2");
                int naz = 2 * order;
                std::vector<double> u, w;
                detail::gauss_legendre(order, u, w);
                quad.reserve(static_cast<std::size_t>(order) * naz);
                for (int i = 0; i < order; ++i) {
                    double s = std::sqrt(std::max(0.0, 1.0 - u[i] * u[i]));
                    for (int j = 0; j < naz; ++j) {
                        double phi = 2.0 * kPi * (j + 0.5) / naz;
                        quad.push_back({point_from_unit(Vec(s * std::cos(phi),
                                                            s * std::sin(phi), u[i])),
                                        0.5 * w[i] / naz});
                    }
                }
                break;
            }
            case ManifoldKind::rotations3: {
                if (order < 2) throw std::invalid_argument("SO(3) quadrature: order >= 2");
                std::vector<double> x, w;
                detail::gauss_legendre(order, x, w);
                Manifold sph = Manifold::sphere2();
                Quadrature axis = sph.quadrature(order);
                quad.reserve(x.size() * axis.size());
                for (int i = 0; i < order; ++i) {
                    double ang = 0.5 * kPi * (x[i] + 1.0);  // [0, pi]
                    double wang = 0.5 * kPi * w[i] * (1.0 - std::cos(ang)) / kPi;
                    for (const auto& ax : axis) {
                        quad.push_back({point_from_quat(quat_from_axis_angle(ax.point.coords, ang)),
                                        wang * ax.weight});
                    }
                }
                break;
            }
        }
        return quad;
    }

  private:
    explicit Manifold(ManifoldKind k) : kind_(k) {}
    ManifoldKind kind_;
};

}  // namespace flocklab

#endif
