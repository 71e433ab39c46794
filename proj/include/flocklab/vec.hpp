#ifndef FLOCKLAB_VEC_HPP
#define FLOCKLAB_VEC_HPP

#include <array>
#include <cmath>
#include <cassert>
#include <cstddef>

namespace flocklab {

// Small fixed-capacity vector. Largest ambient space in play is the
// embedding of SO(3) into 3x3 matrices (9 components).
struct Vec {
    static constexpr int kMaxDim = 9;

    std::array<double, kMaxDim> a{};
    int n = 0;

    Vec() = default;
    explicit Vec(int dim) : n(dim) { assert(dim >= 0 && dim <= kMaxDim); }
    Vec(double x, double y) : n(2) { a[0] = x; a[1] = y; }
    Vec(double x, double y, double z) : n(3) { a[0] = x; a[1] = y; a[2] = z; }

    double& operator[](int i) { return a[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return a[static_cast<std::size_t>(i)]; }
    int size() const { return n; }

    Vec& operator+=(const Vec& o) {
        assert(n == o.n);
        for (int i = 0; i < n; ++i) a[i] += o.a[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        assert(n == o.n);
        for (int i = 0; i < n; ++i) a[i] -= o.a[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) a[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec l, const Vec& r) { return l += r; }
    friend Vec operator-(Vec l, const Vec& r) { return l -= r; }
    friend Vec operator*(Vec l, double s) { return l *= s; }
    friend Vec operator*(double s, Vec r) { return r *= s; }
};

inline double dot(const Vec& x, const Vec& y) {
    assert(x.n == y.n);
    double s = 0;
    for (int i = 0; i < x.n; ++i) s += x.a[i] * y.a[i];
    return s;
}

inline double norm2(const Vec& x) { return dot(x, x); }
inline double norm(const Vec& x) { return std::sqrt(norm2(x)); }

inline Vec zero_vec(int dim) { return Vec(dim); }

inline Vec normalized(const Vec& x) {
    double r = norm(x);
    assert(r > 0);
    Vec y = x;
    y *= 1.0 / r;
    return y;
}

// Cross product, 3-d only.
inline Vec cross(const Vec& x, const Vec& y) {
    assert(x.n == 3 && y.n == 3);
    return Vec(x[1] * y[2] - x[2] * y[1],
               x[2] * y[0] - x[0] * y[2],
               x[0] * y[1] - x[1] * y[0]);
}

}  // namespace flocklab

#endif
