#ifndef FLOCKLAB_DENSITY_GRID_HPP
#define FLOCKLAB_DENSITY_GRID_HPP

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "flocklab/geometry.hpp"
#include "flocklab/state.hpp"
#include "flocklab/vec.hpp"

namespace flocklab {

// Discretized probability density f(x, m) on a periodic spatial lattice
// [0,L)^d (n cells per axis) times the manifold quadrature nodes.
// Values are cell-major: v[cell * nq + node].
struct DensityGrid {
    Domain dom;                                  // d, L
    int n = 0;                                   // cells per axis
    double h = 0;                                // cell width L/n
    const Manifold* manifold = nullptr;
    std::shared_ptr<const Quadrature> quad;
    std::vector<double> v;
    double t = 0;

    int d() const { return dom.d; }
    int nq() const { return static_cast<int>(quad->size()); }
    int ncells() const {
        int c = 1;
        for (int i = 0; i < d(); ++i) c *= n;
        return c;
    }
    double cell_volume() const { return std::pow(h, d()); }

    double& at(int cell, int node) { return v[static_cast<std::size_t>(cell) * nq() + node]; }
    double at(int cell, int node) const {
        return v[static_cast<std::size_t>(cell) * nq() + node];
    }

    std::array<int, 3> unflatten(int cell) const {
        std::array<int, 3> ix{0, 0, 0};
        for (int i = d() - 1; i >= 0; --i) {
            ix[i] = cell % n;
            cell /= n;
        }
        return ix;
    }
    int flatten(const std::array<int, 3>& ix) const {
        int cell = 0;
        for (int i = 0; i < d(); ++i) cell = cell * n + ((ix[i] % n + n) % n);
        return cell;
    }

    Vec cell_center(int cell) const {
        auto ix = unflatten(cell);
        Vec x(d());
        for (int i = 0; i < d(); ++i) x[i] = (ix[i] + 0.5) * h;
        return x;
    }

    // Spatial marginal in one cell.
    double rho(int cell) const {
        double r = 0;
        const auto& q = *quad;
        for (int k = 0; k < nq(); ++k) r += q[k].weight * at(cell, k);
        return r;
    }

    double mass() const {
        double m = 0;
        for (int c = 0; c < ncells(); ++c) m += rho(c);
        return m * cell_volume();
    }

    double sup_value() const {
        double s = 0;
        for (double x : v) s = std::max(s, x);
        return s;
    }

    void scale(double f) {
        for (double& x : v) x *= f;
    }
};

inline DensityGrid make_density_grid(const Manifold& manifold,
                                     std::shared_ptr<const Quadrature> quad, int d,
                                     int n, double L) {
    if (n < 2 || L <= 0) throw std::invalid_argument("density grid: n >= 2, L > 0");
    DensityGrid g;
    g.dom.d = d;
    g.dom.L = L;
    g.n = n;
    g.h = L / n;
    g.manifold = &manifold;
    g.quad = std::move(quad);
    g.v.assign(static_cast<std::size_t>(g.ncells()) * g.nq(), 0.0);
    return g;
}

inline DensityGrid uniform_density(const Manifold& manifold,
                                   std::shared_ptr<const Quadrature> quad, int d, int n,
                                   double L) {
    DensityGrid g = make_density_grid(manifold, std::move(quad), d, n, L);
    // total mass L^d * 1 * value = 1
    double val = 1.0 / std::pow(L, d);
    g.v.assign(g.v.size(), val);
    return g;
}

// Discrete L1 distance (equals the total variation for probability grids).
inline double l1_distance(const DensityGrid& f, const DensityGrid& g) {
    if (f.v.size() != g.v.size() || f.n != g.n || f.d() != g.d())
        throw std::invalid_argument("l1_distance: grid mismatch");
    const auto& q = *f.quad;
    const int nq = f.nq();
    double s = 0;
    for (int c = 0; c < f.ncells(); ++c)
        for (int k = 0; k < nq; ++k) s += q[k].weight * std::abs(f.at(c, k) - g.at(c, k));
    return s * f.cell_volume();
}

// Multilinear periodic interpolation of a per-cell scalar field at x.
inline double interp_cell_field(const DensityGrid& g, const std::vector<double>& field,
                                const Vec& x) {
    const int d = g.d();
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0, 0, 0};
    for (int i = 0; i < d; ++i) {
        double s = x[i] / g.h - 0.5;
        double fl = std::floor(s);
        base[i] = static_cast<int>(fl);
        frac[i] = s - fl;
    }
    double acc = 0;
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
        acc += w * field[static_cast<std::size_t>(g.flatten(ix))];
    }
    return acc;
}

}  // namespace flocklab

#endif
