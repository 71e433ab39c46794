// Acceptance suite: one self-contained check per criterion, each printing a
// single [PASS]/[FAIL] line.  Exit code is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <functional>
#include <string>
#include <vector>

#include "flocklab/harness.hpp"
#include "flocklab/metrics.hpp"
#include "flocklab/pdmp.hpp"

using namespace flocklab;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("[%s] C%02d %-34s %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void run_criterion(int id, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        auto [p, d] = fn();
        pass = p;
        detail = d;
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, name, pass, detail, secs);
}

double bessel_i(int n, double x) {
    double sum = 0, term = std::pow(0.5 * x, n);
    for (int k = 1; k <= n; ++k) term /= k;
    for (int k = 0; k < 200; ++k) {
        sum += term;
        term *= 0.25 * x * x / ((k + 1.0) * (k + 1.0 + n));
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

char buf_[256];
std::string fmt(const char* f, ...) {
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf_, sizeof buf_, f, ap);
    va_end(ap);
    return buf_;
}

// ---- C1: interaction-law regularity with the exact constants ----
std::pair<bool, std::string> c01_regularity() {
    RngStream rng(1001);
    int violations = 0, total = 0;
    double worst = 0;
    for (ManifoldKind kind : {ManifoldKind::circle, ManifoldKind::sphere2, ManifoldKind::rotations3}) {
        Manifold man = Manifold::make(kind);
        Quadrature quad = man.quadrature(kind == ManifoldKind::circle ? 64
                                         : kind == ManifoldKind::sphere2 ? 16 : 6);
        for (double a : {0.5, 1.0, 2.0}) {
            RegularityReport rep = regularity_check(man, quad, a, 10000, rng);
            violations += rep.violations;
            total += rep.trials;
            worst = std::max({worst, rep.max_sup_ratio, rep.max_lip_ratio, rep.max_theta_ratio});
        }
    }
    return {violations == 0,
            fmt("%d trials, %d violations, worst ratio %.3f", total, violations, worst)};
}

// ---- C2: normalizer quadrature vs closed forms ----
std::pair<bool, std::string> c02_normalizer() {
    Manifold sph = Manifold::sphere2(), cir = Manifold::circle();
    Quadrature qs = sph.quadrature(24), qc = cir.quadrature(64);
    double worst = 0;
    for (double kappa : {0.5, 1.0, 2.0, 5.0}) {
        Flux js(3), jc(2);
        js[0] = kappa;
        jc[0] = kappa;
        double zs = vm_normalizer(sph, qs, js);
        double zc = vm_normalizer(cir, qc, jc);
        worst = std::max(worst, std::abs(zs - std::sinh(kappa) / kappa) / (std::sinh(kappa) / kappa));
        worst = std::max(worst, std::abs(zc - bessel_i(0, kappa)) / bessel_i(0, kappa));
    }
    return {worst < 1e-6, fmt("max relative error %.2e (tol 1e-6)", worst)};
}

// ---- C3: sampler moments and uniform two-sample test ----
std::pair<bool, std::string> c03_sampler() {
    Manifold sph = Manifold::sphere2();
    Quadrature quad = sph.quadrature(24);
    Flux J(3);
    J[0] = 2.0;
    VonMisesLaw law = make_von_mises(sph, quad, J);
    RngStream rng(1003);
    const int n = 100000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        double u = vm_sample(law, rng).embed[0];
        sum += u;
        sum2 += u * u;
    }
    double mean = sum / n;
    double se = std::sqrt((sum2 / n - mean * mean) / n);
    double oracle = 1.0 / std::tanh(2.0) - 0.5;  // 0.53731...
    bool moments_ok = std::abs(mean - oracle) < 3.0 * se;

    // two-sample Kolmogorov-Smirnov on the z-coordinate: degenerate law vs
    // uniform_sample (z is uniform on [-1,1] under the uniform law)
    const int m = 20000;
    std::vector<double> a(m), b(m);
    VonMisesLaw unif = make_von_mises(sph, quad, Flux(3));
    for (int i = 0; i < m; ++i) {
        a[static_cast<std::size_t>(i)] = vm_sample(unif, rng).embed[2];
        b[static_cast<std::size_t>(i)] = sph.uniform_sample(rng).embed[2];
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double ks = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i;
        else ++j;
        ks = std::max(ks, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / m));
    }
    double ks_crit = 1.95 * std::sqrt(2.0 / m);  // alpha ~ 0.001
    bool ks_ok = ks < ks_crit;
    return {moments_ok && ks_ok,
            fmt("resultant %.5f vs %.5f (3se %.5f); KS %.4f < %.4f", mean, oracle, 3.0 * se,
                ks, ks_crit)};
}

// ---- C4: exact assignment equals permutation brute force ----
std::pair<bool, std::string> c04_w1_exact() {
    RngStream rng(1004);
    Manifold cir = Manifold::circle();
    Domain dom{2, 1.0};
    int bad = 0;
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + rng.uniform_int(6);  // N in {2..7}
        std::vector<AgentState> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            a[static_cast<std::size_t>(k)].x = Vec(rng.uniform(), rng.uniform());
            a[static_cast<std::size_t>(k)].m = cir.uniform_sample(rng);
            b[static_cast<std::size_t>(k)].x = Vec(rng.uniform(), rng.uniform());
            b[static_cast<std::size_t>(k)].m = cir.uniform_sample(rng);
        }
        double exact = w1_empirical(cir, dom, a, b).cost;
        double brute = w1_bruteforce(cir, dom, a, b);
        worst = std::max(worst, std::abs(exact - brute));
        if (std::abs(exact - brute) > 1e-10) ++bad;
    }
    return {bad == 0, fmt("200 instances, max |gap| %.2e", worst)};
}

namespace cfg5 {
// shared kinetic test fixture: torus L=8, circle orientations
DensityGrid make_f0(const Manifold& man, std::shared_ptr<const Quadrature> quad, int n,
                    double L, double kappa, double bump) {
    DensityGrid f = uniform_density(man, quad, 2, n, L);
    for (int c = 0; c < f.ncells(); ++c) {
        Vec x = f.cell_center(c);
        double spatial = 1.0 + bump * std::sin(2.0 * kPi * x[0] / L);
        for (int k = 0; k < f.nq(); ++k)
            f.at(c, k) *= spatial *
                          std::exp(kappa * (*f.quad)[static_cast<std::size_t>(k)].point.embed[0]);
    }
    f.scale(1.0 / f.mass());
    return f;
}
}  // namespace cfg5

// ---- C5: stationarity and mass conservation over T = 1 ----
std::pair<bool, std::string> c05_solver_mass() {
    Manifold cir = Manifold::circle();
    auto quad = std::make_shared<Quadrature>(cir.quadrature(32));
    KernelSpec k = make_kernel(KernelProfile::smooth_bump, 0.5, 2);

    DensityGrid uni = uniform_density(cir, quad, 2, 32, 8.0);
    StepLog lg;
    double stat_kernel = l1_distance(uni, duhamel_step(uni, 0.02, &k, {}, &lg));
    double stat_local = l1_distance(uni, duhamel_step(uni, 0.02, nullptr, {}, &lg));

    DensityGrid f0 = cfg5::make_f0(cir, quad, 32, 8.0, 0.25, 0.25);
    SolveOptions so;
    so.dt = 0.02;
    BgkSolution kernel_sol = solve_bgk(f0, 1.0, &k, so);
    SolveOptions lo = so;
    lo.local_a = 0.2;
    BgkSolution local_sol = solve_bgk(f0, 1.0, nullptr, lo);
    bool pass = stat_kernel < 1e-10 && stat_local < 1e-10 &&
                kernel_sol.cumulative_renorm < 1e-3 && local_sol.cumulative_renorm < 1e-3;
    return {pass, fmt("stationarity %.1e/%.1e (tol 1e-10); renorm drift %.1e/%.1e (tol 1e-3)",
                      stat_kernel, stat_local, kernel_sol.cumulative_renorm,
                      local_sol.cumulative_renorm)};
}

// ---- C6: one-step Picard map Lipschitz ratio vs (alpha(b)+b theta(b)) dt ----
std::pair<bool, std::string> c06_contraction() {
    Manifold cir = Manifold::circle();
    auto quad = std::make_shared<Quadrature>(cir.quadrature(32));
    DensityGrid f0 = cfg5::make_f0(cir, quad, 16, 8.0, 0.25, 0.25);
    const double dt = 0.01;
    // fixed pieces of the one-step map T(g) = w0 Tf + wa TG(f0) + wb G(g)
    DensityGrid tf = free_transport(f0, dt);
    DensityGrid tg0 = free_transport(collision_term(f0, nullptr), dt);
    const double w0 = std::exp(-dt);
    const double wb = (1.0 - w0) / (1.0 + w0);
    RngStream rng(1006);
    double max_ratio = 0, b = 0;
    for (int trial = 0; trial < 20; ++trial) {
        DensityGrid g1 = f0, g2 = f0;
        for (std::size_t i = 0; i < g1.v.size(); ++i) {
            g1.v[i] *= 1.0 + 0.2 * rng.uniform(-1.0, 1.0);
            g2.v[i] *= 1.0 + 0.2 * rng.uniform(-1.0, 1.0);
        }
        b = std::max({b, g1.sup_value(), g2.sup_value()});
        DensityGrid t1 = collision_term(g1, nullptr);
        DensityGrid t2 = collision_term(g2, nullptr);
        for (std::size_t i = 0; i < t1.v.size(); ++i) {
            t1.v[i] = w0 * tf.v[i] + wb * t1.v[i];
            t2.v[i] = w0 * tf.v[i] + wb * t2.v[i];
        }
        max_ratio = std::max(max_ratio, l1_distance(t1, t2) / l1_distance(g1, g2));
    }
    double bound = (std::exp(2.0 * b) + b * (std::exp(2.0 * b) + std::exp(4.0 * b))) * dt;
    bool pass = max_ratio <= 1.1 * bound;
    return {pass, fmt("max ratio %.4e <= 1.1 x bound %.4e (b=%.3f)", max_ratio, bound, b)};
}

// ---- C7: triple cross-validation of the homogeneous dynamics ----
std::pair<bool, std::string> c07_cross_validation() {
    Manifold sph = Manifold::sphere2();
    Quadrature quad = sph.quadrature(16);
    auto quad_ptr = std::make_shared<Quadrature>(quad);
    Flux J0(3);
    J0[0] = 0.8;
    const double t_end = 2.0, dt = 0.01;
    auto ode = flux_ode(sph, quad, J0, t_end, dt);

    HomogeneousDensity nu = uniform_homogeneous(sph, quad_ptr);
    for (std::size_t k = 0; k < nu.rho.size(); ++k)
        nu.rho[k] = std::exp(dot(J0, quad[k].point.embed));
    double z = nu.mass();
    for (auto& r : nu.rho) r /= z;
    // match the ODE's initial flux exactly (quadrature-consistent init)
    Flux j_init = nu.flux();
    auto ode_b = flux_ode(sph, quad, j_init, t_end, dt);
    auto series = homogeneous_solve(nu, t_end, dt);

    // homogeneous-in-x kinetic solve (kernel mode on a tiny grid)
    DensityGrid f0 = uniform_density(sph, quad_ptr, 3, 4, 1.0);
    for (int c = 0; c < f0.ncells(); ++c)
        for (int k = 0; k < f0.nq(); ++k)
            f0.at(c, k) *= std::exp(dot(J0, quad[static_cast<std::size_t>(k)].point.embed));
    f0.scale(1.0 / f0.mass());
    KernelSpec kern = make_kernel(KernelProfile::smooth_bump, 0.25, 3);
    SolveOptions so;
    so.dt = 0.02;
    BgkSolution sol = solve_bgk(f0, t_end, &kern, so);

    double gap_b = 0, gap_c = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        double ja = norm(ode_b[i]);
        gap_b = std::max(gap_b, std::abs(norm(series[i].flux()) - ja));
    }
    for (std::size_t i = 0; i < sol.snapshots.size(); ++i) {
        const DensityGrid& f = sol.snapshots[i];
        Flux J(3);
        auto field = local_flux_field(f);
        for (std::size_t c = 0; c < field.size(); ++c) J += field[c];
        J *= f.cell_volume();
        std::size_t oi = static_cast<std::size_t>(std::llround(f.t / dt));
        gap_c = std::max(gap_c, std::abs(norm(J) - norm(ode_b[oi])));
    }

    // particle system replicas, each against the ODE from its realized flux
    const int N = 2000, reps = 24;
    std::vector<double> deltas;
    HomogeneousRunOptions ho;
    ho.t_end = t_end;
    ho.keep_log = false;
    VonMisesLaw init_law = make_von_mises(sph, quad, J0);
    for (int r = 0; r < reps; ++r) {
        RngStream rng(derive_seed(1007, static_cast<std::uint64_t>(r)));
        std::vector<ManifoldPoint> init(N);
        for (auto& m : init) m = vm_sample(init_law, rng);
        Flux jr = flux_of_points(init, 3);
        HomogeneousRun run = simulate_homogeneous(sph, init, ho, rng);
        Flux jf = flux_of_points(run.final_state, 3);
        auto oder = flux_ode(sph, quad, jr, t_end, 0.02);
        deltas.push_back(norm(jf) - norm(oder.back()));
    }
    double md = mean_of(deltas), se = stderr_of(deltas);
    bool pass = gap_b < 1e-2 && gap_c < 1e-2 && std::abs(md) < 3.0 * se;
    return {pass, fmt("sup gaps: solve %.1e, kinetic %.1e (tol 1e-2); particles %.4f +- %.4f",
                      gap_b, gap_c, md, se)};
}

// ---- C8: coupling decay over N ----
std::pair<bool, std::string> c08_coupling() {
    Manifold cir = Manifold::circle();
    Domain dom{2, 2.0};
    auto quad = std::make_shared<Quadrature>(cir.quadrature(32));
    KernelSpec kern = make_kernel(KernelProfile::smooth_bump, 0.25, 2);
    Flux J0(2);
    J0[0] = 0.8;
    VonMisesLaw init_law = make_von_mises(cir, *quad, J0);

    DensityGrid f0 = uniform_density(cir, quad, 2, 16, 2.0);
    for (int c = 0; c < f0.ncells(); ++c)
        for (int k = 0; k < f0.nq(); ++k)
            f0.at(c, k) *= std::exp(dot(J0, (*quad)[static_cast<std::size_t>(k)].point.embed));
    f0.scale(1.0 / f0.mass());
    SolveOptions so;
    so.dt = 0.02;
    BgkSolution sol = solve_bgk(f0, 1.0, &kern, so);
    SolutionFluxCache cache(sol, kern);

    const std::vector<int> ns = {100, 200, 400, 800, 1600};
    const int reps = 100;
    std::vector<double> log_n, log_y, log_e, ys_mean, es_mean;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        int N = ns[ni];
        std::vector<double> ys, es;
        for (int r = 0; r < reps; ++r) {
            RngStream rng(derive_seed(1008, ni, static_cast<std::uint64_t>(r)));
            std::vector<AgentState> part(static_cast<std::size_t>(N));
            for (auto& a : part) {
                a.x = Vec(rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0));
                a.m = vm_sample(init_law, rng);
            }
            CoupledOptions co;
            co.t_end = 1.0;
            co.sample_dt = 0.5;
            CoupledResult cr = simulate_coupled(cir, dom, kern, part, part, cache, co, rng);
            ys.push_back(cr.final_y_over_n);
            es.push_back(cr.mean_e);
        }
        log_n.push_back(std::log(static_cast<double>(N)));
        log_y.push_back(std::log(mean_of(ys)));
        log_e.push_back(std::log(mean_of(es)));
        ys_mean.push_back(mean_of(ys));
        es_mean.push_back(mean_of(es));
    }
    double slope_y = fit_slope(log_n, log_y);
    double slope_e = fit_slope(log_n, log_e);

    // envelope with a single fitted C (log scale; the prefactor is huge, so
    // the fit reports how far below the bound the data sits)
    double lambda = cir.velocity_lipschitz();
    double sigma = kernel_sigma(kern);
    double ksup = kern.sup_norm();
    double theta = RegularityConstants::from(ksup).theta;
    double log_c = -std::numeric_limits<double>::infinity();
    double max_log_growth = 0;
    std::vector<double> log_env(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        double N = static_cast<double>(ns[i]);
        // growth = N expm1(sigma/N) overflows for this kernel, so keep its log
        double x = sigma / N;
        double log_growth = std::log(N) + (x > 30.0 ? x : std::log(std::expm1(x)));
        max_log_growth = std::max(max_log_growth, log_growth);
        // log of: theta sqrt(ksup)/sqrt(N) e^{(2 lambda + sigma/N) t} / growth * e^{growth t};
        // the last term, exp(log_growth)*t, may legitimately be +inf in double
        log_env[i] = std::log(theta) + 0.5 * std::log(ksup) - 0.5 * std::log(N) +
                     (2.0 * lambda + x) * 1.0 - log_growth +
                     std::exp(std::min(log_growth, 1e300)) * 1.0;
        log_c = std::max(log_c, std::log(ys_mean[i]) - log_env[i]);
    }
    bool below = true;
    for (std::size_t i = 0; i < ns.size(); ++i)
        below = below && (std::log(ys_mean[i]) - log_env[i] <= log_c + 1e-9);
    // The envelope prefactor is astronomically larger than the data at these
    // sizes (its exponent alone overflows a double), so "below the envelope"
    // is structural; the slope windows are the checks with teeth.
    bool pass = slope_y > -0.7 && slope_y < -0.3 && slope_e > -0.65 && slope_e < -0.35 && below;
    return {pass,
            fmt("slope Y/N %.3f (in [-0.7,-0.3]); slope e %.3f (in [-0.65,-0.35]); "
                "log C %.3g (envelope exponent ~ e^%.2e)",
                slope_y, slope_e, log_c, max_log_growth)};
}

// ---- C9: chaoticity over N ----
std::pair<bool, std::string> c09_chaoticity() {
    Manifold cir = Manifold::circle();
    Domain dom{2, 1.0};
    KernelSpec kern = make_kernel(KernelProfile::smooth_bump, 0.25, 2);
    Flux J0(2);
    J0[0] = 0.8;
    Quadrature quad = cir.quadrature(32);
    VonMisesLaw init_law = make_von_mises(cir, quad, J0);
    const std::vector<int> ns = {50, 100, 200};
    const int reps = 400;
    std::vector<double> covs, ses;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        int N = ns[ni];
        std::vector<std::vector<double>> phi(reps), psi(reps);
        for (int r = 0; r < reps; ++r) {
            RngStream rng(derive_seed(1009, ni, static_cast<std::uint64_t>(r)));
            std::vector<AgentState> agents(static_cast<std::size_t>(N));
            for (auto& a : agents) {
                a.x = Vec(rng.uniform(), rng.uniform());
                a.m = vm_sample(init_law, rng);
            }
            IbmOptions opts;
            opts.t_end = 1.0;
            IbmResult res = simulate_ibm(cir, dom, kern, agents, opts, rng);
            auto& p = phi[static_cast<std::size_t>(r)];
            auto& q = psi[static_cast<std::size_t>(r)];
            p.reserve(static_cast<std::size_t>(N));
            q.reserve(static_cast<std::size_t>(N));
            for (const auto& a : res.agents) {
                p.push_back(a.m.embed[0]);
                q.push_back(a.m.embed[1]);
            }
        }
        ChaoticityStat st = chaoticity_covariance(phi, psi);
        covs.push_back(std::abs(st.cov));
        ses.push_back(st.stderr_cov);
    }
    bool pass = true;
    for (std::size_t i = 0; i + 1 < covs.size(); ++i) {
        bool decreasing = covs[i] > covs[i + 1] &&
                          std::abs(covs[i] - covs[i + 1]) > ses[i + 1];
        bool noise_floor = covs[i] < 2.0 * ses[i] && covs[i + 1] < 2.0 * ses[i + 1];
        pass = pass && (decreasing || noise_floor);
    }
    return {pass, fmt("|cov| = %.2e, %.2e, %.2e (se %.1e, %.1e, %.1e)", covs[0], covs[1],
                      covs[2], ses[0], ses[1], ses[2])};
}

// ---- C10: kernel-to-local solver limit ----
std::pair<bool, std::string> c10_kernel_to_local() {
    Manifold cir = Manifold::circle();
    auto quad = std::make_shared<Quadrature>(cir.quadrature(32));
    const double L = 4.0, t_end = 0.5;
    const int n = 128;
    DensityGrid f0 = uniform_density(cir, quad, 2, n, L);
    for (int c = 0; c < f0.ncells(); ++c) {
        Vec x = f0.cell_center(c);
        double spatial = 1.0 + 0.3 * std::sin(2.0 * kPi * x[0] / L) *
                                   std::cos(2.0 * kPi * x[1] / L);
        for (int k = 0; k < f0.nq(); ++k)
            f0.at(c, k) *= spatial *
                           std::exp(0.3 * (*quad)[static_cast<std::size_t>(k)].point.embed[0]);
    }
    f0.scale(1.0 / f0.mass());

    SolveOptions lo;
    lo.dt = 0.02;
    lo.local_a = 0.3;
    BgkSolution local_sol = solve_bgk(f0, t_end, nullptr, lo);
    const DensityGrid& f_local = local_sol.snapshots.back();

    KernelSpec base = make_kernel(KernelProfile::smooth_bump, 1.0, 2);
    std::vector<double> dists;
    for (double eps : {0.4, 0.2, 0.1}) {
        KernelSpec kern = rescale(base, eps);
        SolveOptions so;
        so.dt = 0.02;
        BgkSolution sol = solve_bgk(f0, t_end, &kern, so);
        dists.push_back(l1_distance(sol.snapshots.back(), f_local));
    }
    bool pass = dists[0] > dists[1] && dists[1] > dists[2];
    return {pass, fmt("L1 gaps %.4e > %.4e > %.4e", dists[0], dists[1], dists[2])};
}

// ---- C11: martingale suite ----
std::pair<bool, std::string> c11_martingales() {
    Manifold cir = Manifold::circle();
    Quadrature quad = cir.quadrature(32);
    Flux J0(2);
    J0[0] = 0.8;
    VonMisesLaw init_law = make_von_mises(cir, quad, J0);
    const int N = 200, reps = 500;
    const double t_end = 1.0;
    const std::vector<double> sample_times = {0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<std::vector<double>> m1(sample_times.size());
    std::vector<double> m2c, sups;
    auto phi = [](const ManifoldPoint& m) { return m.embed[0]; };
    for (int r = 0; r < reps; ++r) {
        RngStream rng(derive_seed(1011, static_cast<std::uint64_t>(r)));
        std::vector<ManifoldPoint> init(N);
        for (auto& m : init) m = vm_sample(init_law, rng);
        HomogeneousRunOptions ho;
        ho.t_end = t_end;
        HomogeneousRun run = simulate_homogeneous(cir, init, ho, rng);
        MartingalePath path = martingale_path(cir, quad, run, t_end, phi, sample_times);
        for (std::size_t i = 0; i < sample_times.size(); ++i)
            m1[i].push_back(path.sampled_m1[i]);
        m2c.push_back(path.sampled_m2c.back());
        sups.push_back(path.sup_sq_m1);
    }
    bool centered = true;
    double worst_z = 0;
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        double z = std::abs(mean_of(m1[i])) / stderr_of(m1[i]);
        worst_z = std::max(worst_z, z);
        centered = centered && z < 3.0;
    }
    double z2 = std::abs(mean_of(m2c)) / stderr_of(m2c);
    double sup_mean = mean_of(sups);
    double doob = 16.0 * 1.0 * t_end / N;  // ||phi||_inf = 1
    bool pass = centered && z2 < 3.0 && sup_mean <= doob;
    return {pass, fmt("max |mean M|/se %.2f; |mean Q|/se %.2f; E[sup M^2] %.2e <= %.2e",
                      worst_z, z2, sup_mean, doob)};
}

// ---- C12: homogeneous particle convergence in W1 ----
std::pair<bool, std::string> c12_w1_convergence() {
    Manifold sph = Manifold::sphere2();
    Quadrature quad = sph.quadrature(32);
    auto quad_ptr = std::make_shared<Quadrature>(quad);
    Flux J0(3);
    J0[0] = 0.8;
    HomogeneousDensity nu = uniform_homogeneous(sph, quad_ptr);
    for (std::size_t k = 0; k < nu.rho.size(); ++k)
        nu.rho[k] = std::exp(dot(J0, quad[k].point.embed));
    double z = nu.mass();
    for (auto& r : nu.rho) r /= z;
    auto series = homogeneous_solve(nu, 1.0, 0.01);
    const HomogeneousDensity& nu_t = series.back();
    // categorical sampler over the quadrature nodes of nu_t
    std::vector<double> cum(nu_t.rho.size());
    double tot = 0;
    for (std::size_t k = 0; k < nu_t.rho.size(); ++k) {
        tot += quad[k].weight * nu_t.rho[k];
        cum[k] = tot;
    }
    VonMisesLaw init_law = make_von_mises(sph, quad, J0);
    Domain dom0{0, 0.0};  // orientation-only distance
    const std::vector<int> ns = {100, 400, 1600};
    std::vector<double> w1s;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        int N = ns[ni];
        int reps = N >= 1600 ? 4 : 8;
        std::vector<double> vals;
        for (int r = 0; r < reps; ++r) {
            RngStream rng(derive_seed(1012, ni, static_cast<std::uint64_t>(r)));
            std::vector<ManifoldPoint> init(static_cast<std::size_t>(N));
            for (auto& m : init) m = vm_sample(init_law, rng);
            HomogeneousRunOptions ho;
            ho.t_end = 1.0;
            ho.keep_log = false;
            HomogeneousRun run = simulate_homogeneous(sph, init, ho, rng);
            std::vector<AgentState> a(static_cast<std::size_t>(N)), b(static_cast<std::size_t>(N));
            for (int i = 0; i < N; ++i) {
                a[static_cast<std::size_t>(i)].x = Vec(0);
                a[static_cast<std::size_t>(i)].m = run.final_state[static_cast<std::size_t>(i)];
                double u = rng.uniform() * tot;
                std::size_t k = static_cast<std::size_t>(
                    std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
                if (k >= quad.size()) k = quad.size() - 1;
                b[static_cast<std::size_t>(i)].x = Vec(0);
                b[static_cast<std::size_t>(i)].m = quad[k].point;
            }
            vals.push_back(w1_empirical(sph, dom0, a, b).cost);
        }
        w1s.push_back(mean_of(vals));
    }
    bool pass = w1s[0] > w1s[1] && w1s[1] > w1s[2];
    return {pass, fmt("W1 = %.4f > %.4f > %.4f over N = 100, 400, 1600", w1s[0], w1s[1], w1s[2])};
}

// ---- C13: determinism of harness artifacts ----
std::pair<bool, std::string> c13_determinism() {
    json j = {
        {"experiment", "homog"},
        {"manifold", "circle"},
        {"d", 2},
        {"L", 1.0},
        {"kernel", {{"profile", "smooth_bump"}, {"r", 0.2}}},
        {"N_list", {60}},
        {"replicas", 4},
        {"t_end", 0.5},
        {"solver", {{"quad_order", 24}, {"dt", 0.02}}},
        {"seed", 20240817},
    };
    ExperimentConfig c = parse_config(j);
    namespace fs = std::filesystem;
    fs::path base = fs::temp_directory_path() / "flocklab_acceptance_det";
    fs::remove_all(base);
    std::uint64_t h1 = 0, h2 = 0;
    for (int run = 0; run < 2; ++run) {
        fs::path dir = base / ("run" + std::to_string(run));
        fs::create_directories(dir);
        c.out_dir = dir.string();
        std::string err;
        if (run_experiment(c, &err) != 0) return {false, "run failed: " + err};
        std::uint64_t h = hash_string(read_file((dir / "homog_aggregate.csv").string()));
        (run == 0 ? h1 : h2) = h;
    }
    fs::remove_all(base);
    return {h1 == h2, fmt("aggregate CSV hashes %016llx vs %016llx",
                          static_cast<unsigned long long>(h1),
                          static_cast<unsigned long long>(h2))};
}

}  // namespace

int main() {
    run_criterion(1, "interaction-law regularity", c01_regularity);
    run_criterion(2, "normalizer oracles", c02_normalizer);
    run_criterion(3, "sampler moments", c03_sampler);
    run_criterion(4, "W1 exactness", c04_w1_exact);
    run_criterion(5, "solver stationarity and mass", c05_solver_mass);
    run_criterion(6, "contraction constant", c06_contraction);
    run_criterion(7, "homogeneous cross-validation", c07_cross_validation);
    run_criterion(8, "coupling decay", c08_coupling);
    run_criterion(9, "chaoticity", c09_chaoticity);
    run_criterion(10, "kernel-to-local limit", c10_kernel_to_local);
    run_criterion(11, "martingale suite", c11_martingales);
    run_criterion(12, "homogeneous W1 convergence", c12_w1_convergence);
    run_criterion(13, "determinism", c13_determinism);
    std::printf("%d of 13 criteria passed\n", 13 - g_failures);
    return g_failures;
}
