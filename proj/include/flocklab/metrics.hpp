#ifndef FLOCKLAB_METRICS_HPP
#define FLOCKLAB_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "flocklab/density_grid.hpp"
#include "flocklab/rng.hpp"
#include "flocklab/state.hpp"

namespace flocklab {

struct AssignmentResult {
    double cost = 0;                 // sum of matched distances
    std::vector<int> matching;       // row i matched to column matching[i]
};

// Exact min-cost perfect matching via shortest augmenting paths
// (Jonker-Volgenant style dual update), O(n^3).
inline AssignmentResult solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1), v(static_cast<std::size_t>(n) + 1);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            int i0 = p[static_cast<std::size_t>(j0)], j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                             u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    AssignmentResult res;
    res.matching.assign(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<std::size_t>(j)] > 0)
            res.matching[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    for (int i = 0; i < n; ++i)
        res.cost += cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(res.matching[static_cast<std::size_t>(i)])];
    return res;
}

// W1 between two equally weighted empirical measures on the product
// space, with the additive distance |x - x'| + d_M(m, m').  Returns the
// mean matched distance (atoms carry weight 1/N).
inline AssignmentResult w1_empirical(const Manifold& man, const Domain& dom,
                                     const std::vector<AgentState>& a,
                                     const std::vector<AgentState>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("w1_empirical: equal nonzero sizes required");
    const int n = static_cast<int>(a.size());
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                product_distance(man, dom, a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]);
    AssignmentResult res = solve_assignment(cost);
    res.cost /= n;
    return res;
}

// Brute-force oracle for small n (n <= 9): minimum over all permutations.
inline double w1_bruteforce(const Manifold& man, const Domain& dom,
                            const std::vector<AgentState>& a,
                            const std::vector<AgentState>& b) {
    const int n = static_cast<int>(a.size());
    if (n > 9) throw std::invalid_argument("w1_bruteforce: n too large");
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0;
        for (int i = 0; i < n; ++i)
            c += product_distance(man, dom, a[static_cast<std::size_t>(i)],
                                  b[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / n;
}

// Draw n_samples product-space points from a kinetic density: pick a
// (cell, node) pair by its mass, jitter the position uniformly in the
// cell and keep the quadrature node orientation.
inline std::vector<AgentState> sample_from_density(const DensityGrid& f, int n_samples,
                                                   RngStream& rng) {
    const int nq = f.nq();
    std::vector<double> cum;
    cum.reserve(f.v.size());
    double total = 0;
    for (int c = 0; c < f.ncells(); ++c)
        for (int k = 0; k < nq; ++k) {
            total += f.cell_volume() * (*f.quad)[static_cast<std::size_t>(k)].weight * f.at(c, k);
            cum.push_back(total);
        }
    std::vector<AgentState> out(static_cast<std::size_t>(n_samples));
    for (auto& s : out) {
        double u = rng.uniform() * total;
        std::size_t idx = static_cast<std::size_t>(
            std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        if (idx >= cum.size()) idx = cum.size() - 1;
        int c = static_cast<int>(idx) / nq;
        int k = static_cast<int>(idx) % nq;
        Vec x = f.cell_center(c);
        for (int i = 0; i < f.d(); ++i) x[i] = f.dom.wrap1(x[i] + (rng.uniform() - 0.5) * f.h);
        s.x = x;
        s.m = (*f.quad)[static_cast<std::size_t>(k)].point;
    }
    return out;
}

// W1 between a particle cloud and a kinetic density, by resampling the
// density into an equal-size cloud and matching exactly.
inline double w1_vs_density(const std::vector<AgentState>& cloud, const DensityGrid& f,
                            RngStream& rng) {
    auto ref = sample_from_density(f, static_cast<int>(cloud.size()), rng);
    return w1_empirical(*f.manifold, f.dom, cloud, ref).cost;
}

// Chaoticity statistic: empirical covariance of phi(Z^1), psi(Z^2) across
// replicas, using the unbiased pair U-statistic within each replica.
//   cov = E[ mean_{i != j} phi_i psi_j ] - E[mean phi] E[mean psi]
struct ChaoticityStat {
    double cov = 0;
    double stderr_cov = 0;
};

inline ChaoticityStat chaoticity_covariance(const std::vector<std::vector<double>>& phi_vals,
                                            const std::vector<std::vector<double>>& psi_vals) {
    const std::size_t R = phi_vals.size();
    if (R < 2 || psi_vals.size() != R)
        throw std::invalid_argument("chaoticity_covariance: need >= 2 matching replicas");
    std::vector<double> pair_term(R), mean_phi(R), mean_psi(R);
    for (std::size_t r = 0; r < R; ++r) {
        const auto& p = phi_vals[r];
        const auto& q = psi_vals[r];
        const double n = static_cast<double>(p.size());
        double sp = std::accumulate(p.begin(), p.end(), 0.0);
        double sq = std::accumulate(q.begin(), q.end(), 0.0);
        double spq = 0;
        for (std::size_t i = 0; i < p.size(); ++i) spq += p[i] * q[i];
        pair_term[r] = (sp * sq - spq) / (n * (n - 1.0));
        mean_phi[r] = sp / n;
        mean_psi[r] = sq / n;
    }
    double mp = std::accumulate(mean_phi.begin(), mean_phi.end(), 0.0) / static_cast<double>(R);
    double mq = std::accumulate(mean_psi.begin(), mean_psi.end(), 0.0) / static_cast<double>(R);
    std::vector<double> contrib(R);
    for (std::size_t r = 0; r < R; ++r) contrib[r] = pair_term[r] - mean_phi[r] * mq - mp * mean_psi[r] + mp * mq;
    ChaoticityStat st;
    for (double c : contrib) st.cov += c;
    st.cov /= static_cast<double>(R);
    double var = 0;
    for (double c : contrib) var += (c - st.cov) * (c - st.cov);
    st.stderr_cov = std::sqrt(var / (static_cast<double>(R) * (static_cast<double>(R) - 1.0)));
    return st;
}

inline double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double stderr_of(const std::vector<double>& v) {
    double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (static_cast<double>(v.size()) * (static_cast<double>(v.size()) - 1.0)));
}

// Least-squares slope of y against x (both already transformed, e.g. logs).
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = mean_of(x), my = mean_of(y), num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

}  // namespace flocklab

#endif
