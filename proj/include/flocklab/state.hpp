#ifndef FLOCKLAB_STATE_HPP
#define FLOCKLAB_STATE_HPP

#include <cmath>
#include <vector>

#include "flocklab/geometry.hpp"
#include "flocklab/vec.hpp"

namespace flocklab {

// Spatial domain: periodic torus [0,L)^d when L > 0, free space otherwise.
struct Domain {
    int d = 2;
    double L = 0;

    bool periodic() const { return L > 0; }

    double wrap1(double x) const {
        if (!periodic()) return x;
        x = std::fmod(x, L);
        if (x < 0) x += L;
        return x;
    }

    Vec wrap(Vec x) const {
        if (!periodic()) return x;
        for (int i = 0; i < x.n; ++i) x[i] = wrap1(x[i]);
        return x;
    }

    // Minimal-image component difference x - y.
    double diff1(double x, double y) const {
        double dxy = x - y;
        if (periodic()) {
            dxy = std::remainder(dxy, L);
        }
        return dxy;
    }

    Vec diff(const Vec& x, const Vec& y) const {
        Vec r(x.n);
        for (int i = 0; i < x.n; ++i) r[i] = diff1(x[i], y[i]);
        return r;
    }

    double distance(const Vec& x, const Vec& y) const { return norm(diff(x, y)); }
};

struct AgentState {
    Vec x;
    ManifoldPoint m;
};

// d~((x1,m1),(x2,m2)) = |x1-x2| + d(m1,m2); wrap-around position gap on the torus.
inline double product_distance(const Manifold& manifold, const Domain& dom,
                               const AgentState& a, const AgentState& b) {
    return dom.distance(a.x, b.x) + manifold.distance(a.m, b.m);
}

// N weighted atoms on R^d x M (positions may be empty for the
// space-homogeneous case).  Empty weights mean uniform 1/N.
struct EmpiricalMeasure {
    std::vector<AgentState> atoms;
    std::vector<double> weights;

    double weight(std::size_t i) const {
        return weights.empty() ? 1.0 / static_cast<double>(atoms.size()) : weights[i];
    }
};

}  // namespace flocklab

#endif
