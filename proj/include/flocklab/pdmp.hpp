#ifndef FLOCKLAB_PDMP_HPP
#define FLOCKLAB_PDMP_HPP

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "flocklab/bgk.hpp"
#include "flocklab/interaction.hpp"
#include "flocklab/observation.hpp"
#include "flocklab/rng.hpp"
#include "flocklab/state.hpp"

namespace flocklab {

struct JumpEvent {
    double t = 0;
    int agent = -1;
    ManifoldPoint m_old;
    ManifoldPoint m_new;
    Flux flux_pre;  // empirical flux seen by the jumping agent, pre-jump
};

// ---- interacting N-agent system ----

struct IbmOptions {
    double t_end = 1.0;
    int quad_order = 24;
    bool keep_log = false;
    double sample_dt = 0;  // >0: record agent snapshots on this grid
};

struct IbmResult {
    std::vector<AgentState> agents;            // state at t_end
    std::vector<JumpEvent> events;             // if keep_log
    std::vector<double> sample_times;
    std::vector<std::vector<AgentState>> samples;
    long long n_jumps = 0;
};

namespace detail {

inline Vec position_at(const AgentState& a, const Manifold& man, const Domain& dom,
                       double anchor_t, double t) {
    Vec phi = man.velocity(a.m);
    Vec x = a.x;
    for (int i = 0; i < x.n; ++i) x[i] += (t - anchor_t) * phi[i];
    return dom.wrap(x);
}

}  // namespace detail

// Piecewise-deterministic dynamics: merged exponential clock of rate N,
// uniformly chosen agent, orientation resampled from the von Mises law of
// the kernel-weighted empirical flux at the agent's position.  Positions
// are advanced lazily (each agent keeps its own anchor time).
inline IbmResult simulate_ibm(const Manifold& man, const Domain& dom, const KernelSpec& kernel,
                              std::vector<AgentState> agents, const IbmOptions& opts,
                              RngStream& rng) {
    const int N = static_cast<int>(agents.size());
    auto quad = std::make_shared<Quadrature>(man.quadrature(opts.quad_order));
    std::vector<double> anchor(static_cast<std::size_t>(N), 0.0);
    IbmResult res;
    double t = 0;
    double next_sample = opts.sample_dt > 0 ? 0.0 : std::numeric_limits<double>::infinity();

    auto record_sample = [&](double ts) {
        std::vector<AgentState> snap(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j) {
            snap[static_cast<std::size_t>(j)].x = detail::position_at(
                agents[static_cast<std::size_t>(j)], man, dom, anchor[static_cast<std::size_t>(j)], ts);
            snap[static_cast<std::size_t>(j)].m = agents[static_cast<std::size_t>(j)].m;
        }
        res.sample_times.push_back(ts);
        res.samples.push_back(std::move(snap));
    };

    while (true) {
        double dt = rng.exponential(static_cast<double>(N));
        double t_next = t + dt;
        while (next_sample <= std::min(t_next, opts.t_end)) {
            record_sample(next_sample);
            next_sample += opts.sample_dt;
        }
        if (t_next > opts.t_end) break;
        t = t_next;
        int i = rng.uniform_int(N);
        Vec xi = detail::position_at(agents[static_cast<std::size_t>(i)], man, dom,
                                     anchor[static_cast<std::size_t>(i)], t);
        Flux J(man.embed_dim());
        for (int j = 0; j < N; ++j) {
            Vec xj = detail::position_at(agents[static_cast<std::size_t>(j)], man, dom,
                                         anchor[static_cast<std::size_t>(j)], t);
            double w = kernel.eval(xi, xj, dom) / N;
            if (w == 0) continue;
            const Vec& e = agents[static_cast<std::size_t>(j)].m.embed;
            for (int k = 0; k < J.n; ++k) J[k] += w * e[k];
        }
        VonMisesLaw law = make_von_mises(man, *quad, J);
        ManifoldPoint m_new = vm_sample(law, rng);
        if (opts.keep_log) {
            JumpEvent ev;
            ev.t = t;
            ev.agent = i;
            ev.m_old = agents[static_cast<std::size_t>(i)].m;
            ev.m_new = m_new;
            ev.flux_pre = J;
            res.events.push_back(std::move(ev));
        }
        agents[static_cast<std::size_t>(i)].x = xi;
        anchor[static_cast<std::size_t>(i)] = t;
        agents[static_cast<std::size_t>(i)].m = m_new;
        ++res.n_jumps;
    }
    for (int j = 0; j < N; ++j) {
        agents[static_cast<std::size_t>(j)].x = detail::position_at(
            agents[static_cast<std::size_t>(j)], man, dom, anchor[static_cast<std::size_t>(j)],
            opts.t_end);
    }
    res.agents = std::move(agents);
    return res;
}

// ---- space-homogeneous measure-valued system ----

struct HomogeneousRunOptions {
    double t_end = 1.0;
    int quad_order = 24;
    bool keep_log = true;
};

struct HomogeneousRun {
    std::vector<ManifoldPoint> initial;
    std::vector<ManifoldPoint> final_state;
    std::vector<JumpEvent> events;  // pre-jump flux is the running empirical flux
    long long n_jumps = 0;
};

// Same merged clock on orientations alone; jump law is the von Mises law
// of the instantaneous empirical flux.  The flux sum is maintained
// incrementally, so each jump costs O(1) plus the sampling.
inline HomogeneousRun simulate_homogeneous(const Manifold& man,
                                           std::vector<ManifoldPoint> state,
                                           const HomogeneousRunOptions& opts, RngStream& rng) {
    const int N = static_cast<int>(state.size());
    auto quad = std::make_shared<Quadrature>(man.quadrature(opts.quad_order));
    HomogeneousRun run;
    run.initial = state;
    Vec S(man.embed_dim());
    for (const auto& m : state)
        for (int k = 0; k < S.n; ++k) S[k] += m.embed[k];
    double t = 0;
    while (true) {
        t += rng.exponential(static_cast<double>(N));
        if (t > opts.t_end) break;
        int i = rng.uniform_int(N);
        Flux J = (1.0 / N) * S;
        VonMisesLaw law = make_von_mises(man, *quad, J);
        ManifoldPoint m_new = vm_sample(law, rng);
        if (opts.keep_log) {
            JumpEvent ev;
            ev.t = t;
            ev.agent = i;
            ev.m_old = state[static_cast<std::size_t>(i)];
            ev.m_new = m_new;
            ev.flux_pre = J;
            run.events.push_back(ev);
        }
        for (int k = 0; k < S.n; ++k)
            S[k] += m_new.embed[k] - state[static_cast<std::size_t>(i)].embed[k];
        state[static_cast<std::size_t>(i)] = m_new;
        ++run.n_jumps;
    }
    run.final_state = std::move(state);
    return run;
}

// ---- martingale reconstruction from a homogeneous jump log ----
//
// For a bounded phi on M, with mu_t the empirical orientation measure,
//   M_t = <mu_t, phi> - <mu_0, phi> - int_0^t ( E_{M(J_s)}[phi] - <mu_s, phi> ) ds
// is a martingale, and M_t^2 minus
//   (1/N) int_0^t ( E_{M(J_s)}[phi^2] - 2 <mu_s,phi> E_{M(J_s)}[phi] + <mu_s, phi^2> ) ds
// is one too.  Both integrands are constant between jumps, so the
// reconstruction below is exact up to quadrature error in E_{M(J)}[.].
struct MartingalePath {
    std::vector<double> times;        // jump times plus t_end
    std::vector<double> m1;           // M_t just after each time
    std::vector<double> m2_centered;  // M_t^2 - compensator_t
    double sup_sq_m1 = 0;             // sup over the path of M_t^2
    std::vector<double> sampled_m1;   // M at the requested sample times
    std::vector<double> sampled_m2c;
};

template <typename Phi>
MartingalePath martingale_path(const Manifold& man, const Quadrature& quad,
                               const HomogeneousRun& run, double t_end, Phi&& phi,
                               const std::vector<double>& sample_times = {}) {
    const double N = static_cast<double>(run.initial.size());
    MartingalePath path;
    double mu_phi = 0, mu_phi2 = 0;
    for (const auto& m : run.initial) {
        double p = phi(m);
        mu_phi += p / N;
        mu_phi2 += p * p / N;
    }
    double M = 0, comp1 = 0, comp2 = 0, t_prev = 0;
    std::size_t si = 0;

    auto law_moments = [&](const Flux& J, double& e_phi, double& e_phi2) {
        VonMisesLaw law = make_von_mises(man, quad, J);
        e_phi = 0;
        e_phi2 = 0;
        for (const auto& node : quad) {
            double dens = vm_density(law, node.point);
            double p = phi(node.point);
            e_phi += node.weight * dens * p;
            e_phi2 += node.weight * dens * p * p;
        }
    };

    // advance the compensators across the constant piece [t_prev, tau]
    auto advance = [&](double tau, double e_phi, double e_phi2) {
        while (si < sample_times.size() && sample_times[si] <= tau + 1e-15) {
            double dt = sample_times[si] - t_prev;
            double c1 = comp1 + dt * (e_phi - mu_phi);
            double c2 = comp2 + dt / N * (e_phi2 - 2.0 * mu_phi * e_phi + mu_phi2);
            path.sampled_m1.push_back(M - c1);
            path.sampled_m2c.push_back((M - c1) * (M - c1) - c2);
            ++si;
        }
        double dt = tau - t_prev;
        comp1 += dt * (e_phi - mu_phi);
        comp2 += dt / N * (e_phi2 - 2.0 * mu_phi * e_phi + mu_phi2);
        t_prev = tau;
    };

    for (const auto& ev : run.events) {
        double e_phi, e_phi2;
        law_moments(ev.flux_pre, e_phi, e_phi2);
        advance(ev.t, e_phi, e_phi2);
        // pre-jump value of the martingale (end of the drift piece)
        path.sup_sq_m1 = std::max(path.sup_sq_m1, (M - comp1) * (M - comp1));
        double po = phi(ev.m_old), pn = phi(ev.m_new);
        mu_phi += (pn - po) / N;
        mu_phi2 += (pn * pn - po * po) / N;
        M += (pn - po) / N;  // M accumulates <mu_t,phi> - <mu_0,phi>
        path.times.push_back(ev.t);
        path.m1.push_back(M - comp1);
        path.m2_centered.push_back((M - comp1) * (M - comp1) - comp2);
        path.sup_sq_m1 = std::max(path.sup_sq_m1, (M - comp1) * (M - comp1));
    }
    // close the last piece: flux after the final jump
    if (t_end > t_prev) {
        Flux J(man.embed_dim());
        for (const auto& m : run.final_state)
            for (int k = 0; k < J.n; ++k) J[k] += m.embed[k] / N;
        double e_phi, e_phi2;
        law_moments(J, e_phi, e_phi2);
        advance(t_end, e_phi, e_phi2);
        path.times.push_back(t_end);
        path.m1.push_back(M - comp1);
        path.m2_centered.push_back((M - comp1) * (M - comp1) - comp2);
        path.sup_sq_m1 = std::max(path.sup_sq_m1, (M - comp1) * (M - comp1));
    }
    return path;
}

// ---- synchronous coupling with the McKean process ----

struct CoupledOptions {
    double t_end = 1.0;
    int quad_order = 24;
    double sample_dt = 0.1;  // Y / e recording grid
};

struct CoupledResult {
    std::vector<double> sample_times;
    std::vector<double> y_over_n;     // (1/N) sum_i d~(Z_i, Zbar_i)
    std::vector<double> e_term;       // |J_{K*mubar}(Xbar_i) - J_{K*f}(Xbar_i)| at jumps,
                                      // averaged within each sample window
    double final_y_over_n = 0;
    double mean_e = 0;
    long long n_jumps = 0;
};

// Flux fields of a BGK solution, cached per snapshot.
class SolutionFluxCache {
  public:
    SolutionFluxCache(const BgkSolution& sol, const KernelSpec& kernel)
        : sol_(&sol), kernel_(&kernel),
          stencil_(make_stencil(kernel, sol.snapshots.front())),
          fields_(sol.snapshots.size()) {}

    Flux flux_at(double t, const Vec& x) const {
        std::size_t i = static_cast<std::size_t>(std::floor(t / sol_->dt + 1e-9));
        if (i >= sol_->snapshots.size()) i = sol_->snapshots.size() - 1;
        if (fields_[i].empty())
            fields_[i] = grid_flux_field(*kernel_, sol_->snapshots[i], &stencil_);
        return interp_flux_field(sol_->snapshots[i], fields_[i], x);
    }

  private:
    const BgkSolution* sol_;
    const KernelSpec* kernel_;
    KernelStencil stencil_;
    mutable std::vector<std::vector<Flux>> fields_;
};

// Particle system and N i.i.d. McKean copies driven by the same clock,
// the same index choices, and coupled jump draws: the McKean orientation
// is drawn from its own law and pushed through the monotone transport map
// onto the particle law.
inline CoupledResult simulate_coupled(const Manifold& man, const Domain& dom,
                                      const KernelSpec& kernel,
                                      std::vector<AgentState> part,
                                      std::vector<AgentState> mck,
                                      const SolutionFluxCache& flux_f,
                                      const CoupledOptions& opts, RngStream& rng) {
    const int N = static_cast<int>(part.size());
    if (static_cast<int>(mck.size()) != N)
        throw std::invalid_argument("simulate_coupled: size mismatch");
    auto quad = std::make_shared<Quadrature>(man.quadrature(opts.quad_order));
    std::vector<double> anchor_p(static_cast<std::size_t>(N), 0.0);
    std::vector<double> anchor_m(static_cast<std::size_t>(N), 0.0);
    CoupledResult res;
    double t = 0;
    double next_sample = opts.sample_dt;
    double e_acc = 0, e_acc_total = 0;
    long long e_cnt = 0, e_cnt_total = 0;

    auto y_at = [&](double ts) {
        double y = 0;
        for (int j = 0; j < N; ++j) {
            AgentState a, b;
            a.x = detail::position_at(part[static_cast<std::size_t>(j)], man, dom,
                                      anchor_p[static_cast<std::size_t>(j)], ts);
            a.m = part[static_cast<std::size_t>(j)].m;
            b.x = detail::position_at(mck[static_cast<std::size_t>(j)], man, dom,
                                      anchor_m[static_cast<std::size_t>(j)], ts);
            b.m = mck[static_cast<std::size_t>(j)].m;
            y += product_distance(man, dom, a, b);
        }
        return y / N;
    };

    while (true) {
        double t_next = t + rng.exponential(static_cast<double>(N));
        while (next_sample <= std::min(t_next, opts.t_end) + 1e-12) {
            res.sample_times.push_back(next_sample);
            res.y_over_n.push_back(y_at(next_sample));
            res.e_term.push_back(e_cnt ? e_acc / static_cast<double>(e_cnt) : 0.0);
            e_acc = 0;
            e_cnt = 0;
            next_sample += opts.sample_dt;
        }
        if (t_next > opts.t_end) break;
        t = t_next;
        int i = rng.uniform_int(N);

        // particle-side flux from the particle empirical measure
        Vec xi_p = detail::position_at(part[static_cast<std::size_t>(i)], man, dom,
                                       anchor_p[static_cast<std::size_t>(i)], t);
        Flux J_p(man.embed_dim());
        for (int j = 0; j < N; ++j) {
            Vec xj = detail::position_at(part[static_cast<std::size_t>(j)], man, dom,
                                         anchor_p[static_cast<std::size_t>(j)], t);
            double w = kernel.eval(xi_p, xj, dom) / N;
            if (w == 0) continue;
            const Vec& e = part[static_cast<std::size_t>(j)].m.embed;
            for (int k = 0; k < J_p.n; ++k) J_p[k] += w * e[k];
        }

        // McKean-side flux from the kinetic solution at the copy's position
        Vec xi_m = detail::position_at(mck[static_cast<std::size_t>(i)], man, dom,
                                       anchor_m[static_cast<std::size_t>(i)], t);
        Flux J_m = flux_f.flux_at(t, xi_m);

        // fluctuation term: the McKean empirical flux against the kinetic
        // flux, both evaluated at the McKean copy's position
        Flux J_me(man.embed_dim());
        for (int j = 0; j < N; ++j) {
            Vec xj = detail::position_at(mck[static_cast<std::size_t>(j)], man, dom,
                                         anchor_m[static_cast<std::size_t>(j)], t);
            double w = kernel.eval(xi_m, xj, dom) / N;
            if (w == 0) continue;
            const Vec& e = mck[static_cast<std::size_t>(j)].m.embed;
            for (int k = 0; k < J_me.n; ++k) J_me[k] += w * e[k];
        }
        double e_val = norm(J_me - J_m);
        e_acc += e_val;
        ++e_cnt;
        e_acc_total += e_val;
        ++e_cnt_total;

        VonMisesLaw law_p = make_von_mises(man, *quad, J_p);
        VonMisesLaw law_m = make_von_mises(man, *quad, J_m);
        ManifoldPoint mbar = vm_sample(law_m, rng);
        ManifoldPoint mpart = vm_transport(law_m, law_p, mbar);

        part[static_cast<std::size_t>(i)].x = xi_p;
        anchor_p[static_cast<std::size_t>(i)] = t;
        part[static_cast<std::size_t>(i)].m = mpart;
        mck[static_cast<std::size_t>(i)].x = xi_m;
        anchor_m[static_cast<std::size_t>(i)] = t;
        mck[static_cast<std::size_t>(i)].m = mbar;
        ++res.n_jumps;
    }
    res.final_y_over_n = y_at(opts.t_end);
    res.mean_e = e_cnt_total ? e_acc_total / static_cast<double>(e_cnt_total) : 0.0;
    return res;
}

}  // namespace flocklab

#endif
