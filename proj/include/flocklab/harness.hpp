#ifndef FLOCKLAB_HARNESS_HPP
#define FLOCKLAB_HARNESS_HPP

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "flocklab/bgk.hpp"
#include "flocklab/io.hpp"
#include "flocklab/metrics.hpp"
#include "flocklab/pdmp.hpp"

namespace flocklab {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { poc, couple, moderate, homog, solve };

inline ExperimentKind experiment_from_string(const std::string& s) {
    if (s == "poc") return ExperimentKind::poc;
    if (s == "couple") return ExperimentKind::couple;
    if (s == "moderate") return ExperimentKind::moderate;
    if (s == "homog") return ExperimentKind::homog;
    if (s == "solve") return ExperimentKind::solve;
    throw ConfigError("experiment: unknown value '" + s + "'");
}

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::solve;
    ManifoldKind manifold = ManifoldKind::circle;
    int d = 2;
    double L = 1.0;
    // kernel
    KernelProfile profile = KernelProfile::smooth_bump;
    double radius = 0.25;
    double epsilon = 1.0;
    std::vector<double> epsilon_list;  // moderate only
    // sweep / statistics
    std::vector<int> n_list{100};
    int replicas = 10;
    double t_end = 1.0;
    double sample_dt = 0.1;
    double init_flux = 1.0;  // |J| of the i.i.d. initial orientation law
    // solver
    int grid_n = 16;
    int quad_order = 16;
    double dt = 0.02;
    double local_a = 0;  // >0 selects LOCAL mode for `solve`
    double picard_tol = 1e-8;

    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int threads = 1;
    double budget_seconds = 0;  // 0 = unlimited
};

namespace detail {

template <typename T>
T require(const json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("missing required field: " + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

template <typename T>
T optional_field(const json& j, const std::string& key, T def) {
    if (!j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

inline void check_positive(double v, const std::string& key) {
    if (!(v > 0)) throw ConfigError("field '" + key + "' must be positive");
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    ExperimentConfig c;
    c.experiment = experiment_from_string(detail::require<std::string>(j, "experiment"));
    c.manifold = manifold_kind_from_string(detail::require<std::string>(j, "manifold"));
    c.d = detail::optional_field(j, "d", Manifold::make(c.manifold).spatial_dim());
    if (c.d < 1 || c.d > 3) throw ConfigError("field 'd' must be in {1,2,3}");
    c.L = detail::require<double>(j, "L");
    detail::check_positive(c.L, "L");
    if (j.contains("kernel")) {
        const json& k = j.at("kernel");
        c.profile = kernel_profile_from_string(detail::optional_field<std::string>(k, "profile", "smooth_bump"));
        c.radius = detail::require<double>(k, "r");
        detail::check_positive(c.radius, "kernel.r");
        c.epsilon = detail::optional_field(k, "epsilon", 1.0);
        detail::check_positive(c.epsilon, "kernel.epsilon");
        if (k.contains("epsilon_list"))
            c.epsilon_list = k.at("epsilon_list").get<std::vector<double>>();
    }
    if (c.experiment == ExperimentKind::moderate && c.epsilon_list.empty())
        throw ConfigError("field 'kernel.epsilon_list' is required for the moderate experiment");
    if (c.experiment != ExperimentKind::moderate && !c.epsilon_list.empty())
        throw ConfigError("field 'kernel.epsilon_list' is only valid for the moderate experiment");
    for (double e : c.epsilon_list) detail::check_positive(e, "kernel.epsilon_list");
    c.n_list = detail::optional_field(j, "N_list", c.n_list);
    for (int n : c.n_list)
        if (n < 2) throw ConfigError("field 'N_list' entries must be >= 2");
    c.replicas = detail::optional_field(j, "replicas", c.replicas);
    if (c.replicas < 1) throw ConfigError("field 'replicas' must be >= 1");
    c.t_end = detail::require<double>(j, "t_end");
    detail::check_positive(c.t_end, "t_end");
    c.sample_dt = detail::optional_field(j, "sample_dt", c.sample_dt);
    detail::check_positive(c.sample_dt, "sample_dt");
    c.init_flux = detail::optional_field(j, "init_flux", c.init_flux);
    if (c.init_flux < 0) throw ConfigError("field 'init_flux' must be >= 0");
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        c.grid_n = detail::optional_field(s, "grid_n", c.grid_n);
        c.quad_order = detail::optional_field(s, "quad_order", c.quad_order);
        c.dt = detail::optional_field(s, "dt", c.dt);
        c.local_a = detail::optional_field(s, "local_a", c.local_a);
        c.picard_tol = detail::optional_field(s, "picard_tol", c.picard_tol);
        if (c.grid_n < 2) throw ConfigError("field 'solver.grid_n' must be >= 2");
        if (c.quad_order < 2) throw ConfigError("field 'solver.quad_order' must be >= 2");
        detail::check_positive(c.dt, "solver.dt");
        detail::check_positive(c.picard_tol, "solver.picard_tol");
    }
    c.seed = detail::optional_field<std::uint64_t>(j, "seed", 1);
    c.out_dir = detail::optional_field<std::string>(j, "out_dir", "out");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
    return parse_config(j);
}

// sigma(K) = 2 theta(||K||_inf) ||K||_Lip with theta(a) = e^{2a} + e^{4a}.
inline double kernel_sigma_of(const KernelSpec& k) { return kernel_sigma(k); }

// log of the moderate-interaction admissibility diagnostic
// exp(2 T theta(eps^{-d}) eps^{-(d+1)}) / sqrt(N); returned in log form
// because the raw value overflows for any interesting epsilon.
inline double log_moderate_diagnostic(double T, double eps, int d, int N) {
    double a = std::pow(eps, -static_cast<double>(d));
    double theta = std::exp(2.0 * a) + std::exp(4.0 * a);
    return 2.0 * T * theta * std::pow(eps, -(static_cast<double>(d) + 1.0)) -
           0.5 * std::log(static_cast<double>(N));
}

inline std::vector<std::string> validate_config(const ExperimentConfig& c) {
    std::vector<std::string> diags;
    Manifold man = Manifold::make(c.manifold);
    if (man.spatial_dim() != c.d && c.experiment != ExperimentKind::homog)
        diags.push_back("d=" + std::to_string(c.d) + " does not match the manifold velocity dimension " +
                        std::to_string(man.spatial_dim()));
    double eps_min = c.epsilon;
    for (double e : c.epsilon_list) eps_min = std::min(eps_min, e);
    if (c.radius * eps_min > 0.5 * c.L)
        diags.push_back("kernel support " + std::to_string(c.radius * eps_min) +
                        " exceeds half the torus length " + std::to_string(0.5 * c.L));
    if (c.local_a > 0) {
        double sup_f0 = std::pow(c.L, -c.d) * std::exp(2.0 * c.init_flux);  // crude init bound
        if (sup_f0 >= c.local_a) {
            diags.push_back("LOCAL mode: initial sup-norm bound " + std::to_string(sup_f0) +
                            " is not below a = " + std::to_string(c.local_a));
        } else {
            double horizon = local_horizon_bound(c.local_a, sup_f0);
            if (c.t_end > horizon)
                diags.push_back("LOCAL mode: t_end = " + std::to_string(c.t_end) +
                                " exceeds the local well-posedness horizon " + std::to_string(horizon));
        }
    }
    if (c.experiment == ExperimentKind::moderate) {
        for (double e : c.epsilon_list)
            for (int n : c.n_list)
                diags.push_back("moderate-limit diagnostic (log scale) at eps=" + std::to_string(e) +
                                ", N=" + std::to_string(n) + ": " +
                                std::to_string(log_moderate_diagnostic(c.t_end, e, c.d, n)) +
                                " (informational; >> 0 means the joint-limit bound is vacuous here)");
    }
    return diags;
}

// ---- job pool ----

// Runs fn(i) for i in [0, n) on `threads` workers.  Results must be
// written to pre-sized slots so the output order is deterministic.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errs[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

class Budget {
  public:
    explicit Budget(double seconds)
        : deadline_(seconds > 0
                        ? std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds))
                        : std::chrono::steady_clock::time_point::max()) {}
    void check() const {
        if (std::chrono::steady_clock::now() > deadline_)
            throw BudgetExceeded("time budget exceeded");
    }

  private:
    std::chrono::steady_clock::time_point deadline_;
};

// ---- shared setup helpers ----

struct Setup {
    Manifold man;
    Domain dom;
    std::shared_ptr<const Quadrature> quad;
    KernelSpec kernel;
    Flux j0;
};

inline Setup make_setup(const ExperimentConfig& c, double eps) {
    Setup s{Manifold::make(c.manifold), Domain{c.d, c.L},
            std::make_shared<Quadrature>(Manifold::make(c.manifold).quadrature(c.quad_order)),
            make_kernel(c.profile, c.radius, c.d), Flux()};
    if (eps != 1.0) s.kernel = rescale(s.kernel, eps);
    s.j0 = Flux(s.man.embed_dim());
    s.j0[0] = c.init_flux;
    return s;
}

// i.i.d. initial data: uniform positions, orientations from M_{j0}.
inline std::vector<AgentState> initial_agents(const Setup& s, int n, RngStream& rng) {
    std::vector<AgentState> out(static_cast<std::size_t>(n));
    VonMisesLaw law = make_von_mises(s.man, *s.quad, s.j0);
    for (auto& a : out) {
        a.x = Vec(s.dom.d);
        for (int i = 0; i < s.dom.d; ++i) a.x[i] = rng.uniform(0, s.dom.L);
        a.m = vm_sample(law, rng);
    }
    return out;
}

// Product initial density f0(x, m) = L^{-d} M_{j0}(m) on the grid.
inline DensityGrid initial_density(const ExperimentConfig& c, const Setup& s) {
    DensityGrid f = make_density_grid(s.man, s.quad, c.d, c.grid_n, c.L);
    VonMisesLaw law = make_von_mises(s.man, *s.quad, s.j0);
    double inv_vol = std::pow(c.L, -c.d);
    for (int cell = 0; cell < f.ncells(); ++cell)
        for (int k = 0; k < f.nq(); ++k)
            f.at(cell, k) = inv_vol * vm_density(law, (*s.quad)[static_cast<std::size_t>(k)].point);
    // exact unit mass regardless of quadrature error in the law normalizer
    f.scale(1.0 / f.mass());
    return f;
}

// ---- experiments ----

struct RunResult {
    std::vector<std::pair<std::string, std::string>> files;  // name -> content
    json summary;
};

namespace detail {

inline void emit(RunResult& res, const std::string& name, const CsvWriter& csv) {
    res.files.emplace_back(name, csv.str());
}

}  // namespace detail

// poc: coupling sweep over N; per-replica coupled runs against the same
// kinetic solution; aggregate has mean Y/N, mean e, and log-log slopes.
inline RunResult run_poc(const ExperimentConfig& c, const Budget& budget) {
    RunResult res;
    Setup s = make_setup(c, c.epsilon);
    DensityGrid f0 = initial_density(c, s);
    SolveOptions so;
    so.dt = c.dt;
    so.picard.tol = c.picard_tol;
    BgkSolution sol = solve_bgk(f0, c.t_end, &s.kernel, so);
    SolutionFluxCache cache(sol, s.kernel);

    CsvWriter per({"N", "epsilon", "t", "seed", "replica", "y_over_n", "mean_e"});
    CsvWriter agg({"N", "epsilon", "t", "seed", "mean_y_over_n", "stderr_y", "mean_e", "stderr_e"});
    std::vector<double> log_n, log_y, log_e;
    for (std::size_t ni = 0; ni < c.n_list.size(); ++ni) {
        int N = c.n_list[ni];
        std::vector<double> ys(static_cast<std::size_t>(c.replicas));
        std::vector<double> es(static_cast<std::size_t>(c.replicas));
        parallel_for(c.replicas, c.threads, [&](int r) {
            budget.check();
            RngStream rng(derive_seed(c.seed, static_cast<std::uint64_t>(ni), static_cast<std::uint64_t>(r)));
            auto part = initial_agents(s, N, rng);
            CoupledOptions co;
            co.t_end = c.t_end;
            co.quad_order = c.quad_order;
            co.sample_dt = c.sample_dt;
            CoupledResult cr = simulate_coupled(s.man, s.dom, s.kernel, part, part, cache, co, rng);
            ys[static_cast<std::size_t>(r)] = cr.final_y_over_n;
            es[static_cast<std::size_t>(r)] = cr.mean_e;
        });
        for (int r = 0; r < c.replicas; ++r)
            per.row({static_cast<double>(N), c.epsilon, c.t_end, static_cast<double>(c.seed),
                     static_cast<double>(r), ys[static_cast<std::size_t>(r)], es[static_cast<std::size_t>(r)]});
        agg.row({static_cast<double>(N), c.epsilon, c.t_end, static_cast<double>(c.seed),
                 mean_of(ys), stderr_of(ys), mean_of(es), stderr_of(es)});
        log_n.push_back(std::log(static_cast<double>(N)));
        log_y.push_back(std::log(mean_of(ys)));
        log_e.push_back(std::log(mean_of(es)));
    }
    detail::emit(res, "poc_replicas.csv", per);
    detail::emit(res, "poc_aggregate.csv", agg);
    res.summary["slope_y"] = c.n_list.size() >= 2 ? fit_slope(log_n, log_y) : 0.0;
    res.summary["slope_e"] = c.n_list.size() >= 2 ? fit_slope(log_n, log_e) : 0.0;
    return res;
}

// couple: time-resolved coupled runs at the N-list values; emits the Y/N
// and e time series for envelope checks downstream.
inline RunResult run_couple(const ExperimentConfig& c, const Budget& budget) {
    RunResult res;
    Setup s = make_setup(c, c.epsilon);
    DensityGrid f0 = initial_density(c, s);
    SolveOptions so;
    so.dt = c.dt;
    so.picard.tol = c.picard_tol;
    BgkSolution sol = solve_bgk(f0, c.t_end, &s.kernel, so);
    SolutionFluxCache cache(sol, s.kernel);

    CsvWriter agg({"N", "epsilon", "t", "seed", "mean_y_over_n", "stderr_y", "mean_e"});
    for (std::size_t ni = 0; ni < c.n_list.size(); ++ni) {
        int N = c.n_list[ni];
        std::vector<std::vector<double>> ys(static_cast<std::size_t>(c.replicas));
        std::vector<std::vector<double>> es(static_cast<std::size_t>(c.replicas));
        std::vector<double> times;
        parallel_for(c.replicas, c.threads, [&](int r) {
            budget.check();
            RngStream rng(derive_seed(c.seed, static_cast<std::uint64_t>(ni), static_cast<std::uint64_t>(r)));
            auto part = initial_agents(s, N, rng);
            CoupledOptions co;
            co.t_end = c.t_end;
            co.quad_order = c.quad_order;
            co.sample_dt = c.sample_dt;
            CoupledResult cr = simulate_coupled(s.man, s.dom, s.kernel, part, part, cache, co, rng);
            ys[static_cast<std::size_t>(r)] = cr.y_over_n;
            es[static_cast<std::size_t>(r)] = cr.e_term;
            if (r == 0) times = cr.sample_times;
        });
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            std::vector<double> yt, et;
            for (int r = 0; r < c.replicas; ++r) {
                yt.push_back(ys[static_cast<std::size_t>(r)][ti]);
                et.push_back(es[static_cast<std::size_t>(r)][ti]);
            }
            agg.row({static_cast<double>(N), c.epsilon, times[ti], static_cast<double>(c.seed),
                     mean_of(yt), stderr_of(yt), mean_of(et)});
        }
    }
    detail::emit(res, "couple_aggregate.csv", agg);
    return res;
}

// moderate: the two separate limits, plus the (informational) joint-limit
// diagnostic.  (a) needs no new runs beyond the solver sweep here: the
// kernel->local solver distance at t_end per epsilon; the joint-limit
// column reports the log-scale bound value per (N, epsilon).
inline RunResult run_moderate(const ExperimentConfig& c, const Budget& budget) {
    RunResult res;
    CsvWriter agg({"N", "epsilon", "t", "seed", "l1_kernel_vs_local", "log_moderate_diag"});
    Setup s0 = make_setup(c, 1.0);
    DensityGrid f0 = initial_density(c, s0);
    // break spatial homogeneity: for a spatially uniform density the
    // convolved and local fluxes coincide exactly and the comparison is empty
    for (int cell = 0; cell < f0.ncells(); ++cell) {
        Vec x = f0.cell_center(cell);
        double tilt = 1.0;
        for (int k = 0; k < c.d; ++k) tilt *= 1.0 + 0.3 * std::sin(2.0 * kPi * x[k] / c.L);
        for (int q = 0; q < f0.nq(); ++q) f0.at(cell, q) *= tilt;
    }
    f0.scale(1.0 / f0.mass());
    double a = std::max(2.0 * f0.sup_value(), 1.0);
    SolveOptions lo;
    lo.dt = c.dt;
    lo.picard.tol = c.picard_tol;
    lo.local_a = a;
    double horizon = local_horizon_bound(a, f0.sup_value());
    double t_end = std::min(c.t_end, 0.9 * horizon);
    BgkSolution local_sol = solve_bgk(f0, t_end, nullptr, lo);
    const DensityGrid& f_local = local_sol.snapshots.back();
    for (double eps : c.epsilon_list) {
        budget.check();
        Setup s = make_setup(c, eps);
        SolveOptions so;
        so.dt = c.dt;
        so.picard.tol = c.picard_tol;
        BgkSolution sol = solve_bgk(f0, t_end, &s.kernel, so);
        double dist = l1_distance(sol.snapshots.back(), f_local);
        for (int N : c.n_list)
            agg.row({static_cast<double>(N), eps, t_end, static_cast<double>(c.seed), dist,
                     log_moderate_diagnostic(t_end, eps, c.d, N)});
    }
    detail::emit(res, "moderate_aggregate.csv", agg);
    return res;
}

// homog: homogeneous particle study — flux trajectories vs the flux ODE,
// and the martingale statistics.
inline RunResult run_homog(const ExperimentConfig& c, const Budget& budget) {
    RunResult res;
    Manifold man = Manifold::make(c.manifold);
    auto quad = std::make_shared<Quadrature>(man.quadrature(c.quad_order));
    Flux j0(man.embed_dim());
    j0[0] = c.init_flux;
    // the i.i.d. initial orientations follow M_{j0}, whose mean flux is the
    // true initial condition of the flux ODE (not the parameter j0 itself)
    Flux ode_init = vm_mean_flux(make_von_mises(man, *quad, j0));
    std::vector<Flux> ode = flux_ode(man, *quad, ode_init, c.t_end, c.dt);

    CsvWriter agg({"N", "epsilon", "t", "seed", "mean_flux_norm", "stderr_flux_norm", "ode_flux_norm",
                   "mean_m1", "stderr_m1", "mean_m2c", "stderr_m2c"});
    VonMisesLaw init_law = make_von_mises(man, *quad, j0);
    auto phi = [](const ManifoldPoint& m) { return m.embed[0]; };
    for (std::size_t ni = 0; ni < c.n_list.size(); ++ni) {
        int N = c.n_list[ni];
        std::vector<double> fluxn(static_cast<std::size_t>(c.replicas));
        std::vector<double> m1(static_cast<std::size_t>(c.replicas));
        std::vector<double> m2c(static_cast<std::size_t>(c.replicas));
        parallel_for(c.replicas, c.threads, [&](int r) {
            budget.check();
            RngStream rng(derive_seed(c.seed, static_cast<std::uint64_t>(ni), static_cast<std::uint64_t>(r)));
            std::vector<ManifoldPoint> init(static_cast<std::size_t>(N));
            for (auto& m : init) m = vm_sample(init_law, rng);
            HomogeneousRunOptions ho;
            ho.t_end = c.t_end;
            ho.quad_order = c.quad_order;
            HomogeneousRun run = simulate_homogeneous(man, init, ho, rng);
            Flux J(man.embed_dim());
            for (const auto& m : run.final_state)
                for (int k = 0; k < J.n; ++k) J[k] += m.embed[k] / N;
            fluxn[static_cast<std::size_t>(r)] = norm(J);
            MartingalePath path = martingale_path(man, *quad, run, c.t_end, phi);
            m1[static_cast<std::size_t>(r)] = path.m1.back();
            m2c[static_cast<std::size_t>(r)] = path.m2_centered.back();
        });
        agg.row({static_cast<double>(N), c.epsilon, c.t_end, static_cast<double>(c.seed),
                 mean_of(fluxn), stderr_of(fluxn), norm(ode.back()), mean_of(m1), stderr_of(m1),
                 mean_of(m2c), stderr_of(m2c)});
    }
    detail::emit(res, "homog_aggregate.csv", agg);
    return res;
}

// solve: one kinetic solve; snapshots as CSV plus solver diagnostics.
inline RunResult run_solve(const ExperimentConfig& c, const Budget& budget) {
    RunResult res;
    Setup s = make_setup(c, c.epsilon);
    DensityGrid f0 = initial_density(c, s);
    SolveOptions so;
    so.dt = c.dt;
    so.picard.tol = c.picard_tol;
    so.local_a = c.local_a;
    budget.check();
    BgkSolution sol = solve_bgk(f0, c.t_end, c.local_a > 0 ? nullptr : &s.kernel, so);
    budget.check();

    CsvWriter agg({"N", "epsilon", "t", "seed", "mass", "sup", "flux_norm_mean_cell"});
    for (const auto& f : sol.snapshots) {
        auto flux = local_flux_field(f);
        double mean_flux = 0;
        for (const auto& J : flux) mean_flux += norm(J);
        mean_flux /= static_cast<double>(flux.size());
        agg.row({0.0, c.epsilon, f.t, static_cast<double>(c.seed), f.mass(), f.sup_value(), mean_flux});
    }
    detail::emit(res, "solve_aggregate.csv", agg);

    CsvWriter snap({"t", "cell", "node", "value"});
    const DensityGrid& fT = sol.snapshots.back();
    for (int cell = 0; cell < fT.ncells(); ++cell)
        for (int k = 0; k < fT.nq(); ++k)
            snap.row({fT.t, static_cast<double>(cell), static_cast<double>(k), fT.at(cell, k)});
    detail::emit(res, "solve_final_density.csv", snap);
    res.summary["cumulative_renorm"] = sol.cumulative_renorm;
    return res;
}

inline json config_echo(const ExperimentConfig& c) {
    json j;
    const char* names[] = {"poc", "couple", "moderate", "homog", "solve"};
    j["experiment"] = names[static_cast<int>(c.experiment)];
    j["manifold"] = to_string(c.manifold);
    j["d"] = c.d;
    j["L"] = c.L;
    j["kernel"] = {{"profile", to_string(c.profile)}, {"r", c.radius}, {"epsilon", c.epsilon}};
    if (!c.epsilon_list.empty()) j["kernel"]["epsilon_list"] = c.epsilon_list;
    j["N_list"] = c.n_list;
    j["replicas"] = c.replicas;
    j["t_end"] = c.t_end;
    j["sample_dt"] = c.sample_dt;
    j["init_flux"] = c.init_flux;
    j["solver"] = {{"grid_n", c.grid_n}, {"quad_order", c.quad_order}, {"dt", c.dt},
                   {"local_a", c.local_a}, {"picard_tol", c.picard_tol}};
    j["seed"] = c.seed;
    return j;
}

// Runs the configured experiment and writes all artifacts plus a manifest
// carrying the config echo and per-file content hashes.  Returns the CLI
// exit code.
inline int run_experiment(const ExperimentConfig& c, std::string* err = nullptr) {
    try {
        Budget budget(c.budget_seconds);
        RunResult res;
        switch (c.experiment) {
            case ExperimentKind::poc: res = run_poc(c, budget); break;
            case ExperimentKind::couple: res = run_couple(c, budget); break;
            case ExperimentKind::moderate: res = run_moderate(c, budget); break;
            case ExperimentKind::homog: res = run_homog(c, budget); break;
            case ExperimentKind::solve: res = run_solve(c, budget); break;
        }
        std::filesystem::create_directories(c.out_dir);
        json manifest;
        manifest["config"] = config_echo(c);
        manifest["tolerances"] = {{"picard_tol", c.picard_tol}};
        manifest["summary"] = res.summary;
        for (const auto& [name, content] : res.files) {
            write_file(c.out_dir + "/" + name, content);
            manifest["files"][name] = hash_hex(hash_string(content));
        }
        write_file(c.out_dir + "/manifest.json", manifest.dump(2) + "\n");
        return 0;
    } catch (const BudgetExceeded& e) {
        if (err) *err = e.what();
        return 3;
    } catch (const ConfigError& e) {
        if (err) *err = e.what();
        return 2;
    } catch (const std::exception& e) {
        if (err) *err = e.what();
        return 1;
    }
}

}  // namespace flocklab

#endif
