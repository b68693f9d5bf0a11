#include "simdm/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>

#include "simdm/analysis.hpp"
#include "simdm/io.hpp"
#include "simdm/parallel.hpp"

namespace simdm {

namespace {

int log_level_cached() {
    static const int level = [] {
        const char* env = std::getenv("SIMDM_LOG");
        if (env == nullptr) return 0;
        const std::string v(env);
        if (v == "debug" || v == "2") return 2;
        if (v == "info" || v == "1") return 1;
        return 0;
    }();
    return level;
}

}  // namespace

bool log_enabled(int level) { return log_level_cached() >= level; }

void log_line(int level, const std::string& msg) {
    if (log_enabled(level)) std::cerr << "[simdm] " << msg << '\n';
}

std::string csv_header() {
    return "seed,method,link,n,m,sigma,C_s,C_s_prime,N_inv,N_samp,t_star,nfe,cosine,rel_l2,"
           "psnr,wall_ms";
}

std::string csv_line(const ResultRow& row) {
    std::ostringstream ss;
    ss << row.seed << ',' << to_string(row.method) << ',' << to_string(row.link) << ',' << row.n
       << ',' << row.m << ',' << format_sig(row.sigma, 9) << ',' << format_sig(row.C_s, 9) << ','
       << format_sig(row.C_s_prime, 9) << ',' << row.N_inv << ',' << row.N_samp << ','
       << format_sig(row.t_star, 9) << ',' << row.nfe << ',' << format_sig(row.cosine, 9) << ','
       << format_sig(row.rel_l2, 9) << ',' << format_sig(row.psnr, 9) << ','
       << format_sig(row.wall_ms, 9);
    return ss.str();
}

namespace {

struct RunContext {
    NoiseSchedule sched;
    LinkSpec link;
    std::unique_ptr<DataPredictor> pred;
    VectorXd x_star;  // empty: draw from the predictor's prior per trial
};

RunContext build_context(const ExperimentConfig& cfg) {
    RunContext ctx{build_schedule(cfg), build_link(cfg), nullptr, {}};
    ctx.pred = build_predictor(cfg, ctx.sched);
    if (ctx.pred->dim() != cfg.n)
        throw ConfigError("run.n", "does not match the predictor dimension");
    if (!cfg.x_star_file.empty()) {
        ctx.x_star = read_vector_file(cfg.x_star_file);
        if (ctx.x_star.size() != cfg.n)
            throw ConfigError("run.x_star_file", "length does not match run.n");
    }
    return ctx;
}

void check_constants_present(const ExperimentConfig& cfg, bool lists_allowed) {
    for (RecoveryMethod method : cfg.methods) {
        if (method == RecoveryMethod::sim_dmfis) continue;
        const bool has_cs = !std::isnan(cfg.C_s) || (lists_allowed && !cfg.C_s_list.empty());
        const bool has_cp =
            !std::isnan(cfg.C_s_prime) || (lists_allowed && !cfg.C_s_prime_list.empty());
        if (!has_cs)
            throw ConfigError("recovery.C_s", "required for " + to_string(method) +
                                                  " (no default; set a value or sweep a list)");
        if (!has_cp)
            throw ConfigError("recovery.C_s_prime", "required for " + to_string(method) +
                                                        " (no default; set a value or a list)");
    }
}

// Like SweepCell but owning everything one trial needs.
ResultRow run_one(const ExperimentConfig& cfg, const RunContext& ctx,
                  const std::map<int, TimeGrid>& grids, const SweepCell& cell,
                  std::uint64_t seed, VectorXd* x_hat_out) {
    const XStarSource source = ctx.x_star.size() > 0
                                   ? XStarSource::explicit_vector(ctx.x_star)
                                   : XStarSource::prior_draw(*ctx.pred);
    const SimInstance inst = make_instance(cfg.n, cell.m, ctx.link, source, seed);

    RecoveryConfig rc;
    rc.method = cell.method;
    rc.C_s = cell.C_s;
    rc.C_s_prime = cell.C_s_prime;
    rc.sampler = SamplerSpec{cfg.sampler, grids.at(cell.N_samp), ctx.pred.get()};
    rc.inverter = InverterSpec{cfg.inverter, grids.at(cell.N_inv), ctx.pred.get()};

    const auto t0 = std::chrono::steady_clock::now();
    const RecoveryResult res = recover(rc, inst.A, inst.y);
    const auto t1 = std::chrono::steady_clock::now();

    const Metrics met = compute_metrics(res.x_hat, inst.x_star);
    if (x_hat_out) *x_hat_out = res.x_hat;

    ResultRow row;
    row.seed = seed;
    row.method = cell.method;
    row.link = ctx.link.kind;
    row.n = cfg.n;
    row.m = cell.m;
    row.sigma = ctx.link.noise_sigma;
    row.C_s = cell.C_s;
    row.C_s_prime = cell.C_s_prime;
    row.N_inv = cell.N_inv;
    row.N_samp = cell.N_samp;
    row.t_star = res.t_star;
    row.nfe = res.nfe;
    row.cosine = met.cosine;
    row.rel_l2 = met.rel_l2;
    row.psnr = met.psnr;
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return row;
}

std::map<int, TimeGrid> build_grids(const ExperimentConfig& cfg, const NoiseSchedule& sched,
                                    const std::vector<int>& n_samp, const std::vector<int>& n_inv) {
    std::map<int, TimeGrid> grids;
    for (int N : n_samp)
        if (!grids.count(N)) grids.emplace(N, make_grid(sched, N, cfg.spacing));
    for (int N : n_inv)
        if (!grids.count(N)) grids.emplace(N, make_grid(sched, N, cfg.spacing));
    return grids;
}

std::vector<ResultRow> run_cells(const ExperimentConfig& cfg, const RunContext& ctx,
                                 const std::vector<SweepCell>& cells, int jobs,
                                 std::vector<VectorXd>* x_hats) {
    std::vector<int> ns, ni;
    for (const auto& c : cells) {
        ns.push_back(c.N_samp);
        ni.push_back(c.N_inv);
    }
    const auto grids = build_grids(cfg, ctx.sched, ns, ni);

    const int trials = cfg.trials;
    const int tasks = static_cast<int>(cells.size()) * trials;
    std::vector<ResultRow> rows(tasks);
    if (x_hats) x_hats->assign(tasks, VectorXd());
    parallel_for(jobs, tasks, [&](int task) {
        const int ci = task / trials;
        const int ti = task % trials;
        const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(ti);
        rows[task] =
            run_one(cfg, ctx, grids, cells[ci], seed, x_hats ? &(*x_hats)[task] : nullptr);
        log_line(2, "cell " + std::to_string(ci) + " trial " + std::to_string(ti) + " done");
    });
    return rows;
}

std::vector<SweepCell> recover_cells(const ExperimentConfig& cfg) {
    std::vector<SweepCell> cells;
    for (RecoveryMethod method : cfg.methods)
        for (int m : cfg.m_list)
            cells.push_back(
                SweepCell{method, cfg.C_s, cfg.C_s_prime, cfg.N_samp, cfg.N_inv, m});
    return cells;
}

double median_cosine(const std::vector<ResultRow>& rows, int begin, int count) {
    std::vector<double> v;
    v.reserve(count);
    for (int i = 0; i < count; ++i) v.push_back(rows[begin + i].cosine);
    std::sort(v.begin(), v.end());
    const size_t k = v.size();
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace

std::vector<ResultRow> recover_rows(const ExperimentConfig& cfg, int jobs) {
    check_constants_present(cfg, false);
    const RunContext ctx = build_context(cfg);
    return run_cells(cfg, ctx, recover_cells(cfg), jobs, nullptr);
}

SweepOutcome sweep_rows(const ExperimentConfig& cfg, int jobs) {
    check_constants_present(cfg, true);
    const RunContext ctx = build_context(cfg);

    const std::vector<double> cs_list =
        cfg.C_s_list.empty() ? std::vector<double>{cfg.C_s} : cfg.C_s_list;
    const std::vector<double> cp_list =
        cfg.C_s_prime_list.empty() ? std::vector<double>{cfg.C_s_prime} : cfg.C_s_prime_list;
    const std::vector<int> ns_list =
        cfg.N_samp_list.empty() ? std::vector<int>{cfg.N_samp} : cfg.N_samp_list;
    const std::vector<int> ni_list =
        cfg.N_inv_list.empty() ? std::vector<int>{cfg.N_inv} : cfg.N_inv_list;

    std::vector<SweepCell> cells;
    for (RecoveryMethod method : cfg.methods)
        for (double cs : cs_list)
            for (double cp : cp_list)
                for (int ns : ns_list)
                    for (int ni : ni_list)
                        for (int m : cfg.m_list)
                            cells.push_back(SweepCell{method, cs, cp, ns, ni, m});

    SweepOutcome out;
    out.rows = run_cells(cfg, ctx, cells, jobs, nullptr);

    int best_ci = 0;
    double best_med = -2.0;
    for (int ci = 0; ci < static_cast<int>(cells.size()); ++ci) {
        const double med = median_cosine(out.rows, ci * cfg.trials, cfg.trials);
        if (med > best_med) {
            best_med = med;
            best_ci = ci;
        }
    }
    out.best = cells[best_ci];
    out.best_median_cosine = best_med;

    auto at_edge = [](const auto& list, const auto& value) {
        return list.size() > 1 && (value == list.front() || value == list.back());
    };
    out.best_on_boundary = at_edge(cs_list, out.best.C_s) ||
                           at_edge(cp_list, out.best.C_s_prime) ||
                           at_edge(ns_list, out.best.N_samp) || at_edge(ni_list, out.best.N_inv);
    return out;
}

int cmd_recover(const ExperimentConfig& cfg, int jobs, std::ostream& out) {
    log_line(1, "recover: " + std::to_string(cfg.methods.size()) + " method(s), " +
                    std::to_string(cfg.m_list.size()) + " m value(s), " +
                    std::to_string(cfg.trials) + " trial(s)");
    check_constants_present(cfg, false);
    const RunContext ctx = build_context(cfg);
    const auto cells = recover_cells(cfg);
    std::vector<VectorXd> x_hats;
    const auto rows =
        run_cells(cfg, ctx, cells, jobs, cfg.x_hat_prefix.empty() ? nullptr : &x_hats);

    out << csv_header() << '\n';
    for (const auto& row : rows) out << csv_line(row) << '\n';

    if (!cfg.x_hat_prefix.empty()) {
        for (size_t i = 0; i < rows.size(); ++i) {
            const auto& row = rows[i];
            std::ostringstream name;
            name << cfg.x_hat_prefix << to_string(row.method) << "_m" << row.m << "_seed"
                 << row.seed << ".txt";
            write_vector_file(name.str(), x_hats[i]);
        }
    }
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, int jobs, std::ostream& out) {
    log_line(1, "sweep over C_s x C_s_prime x N_samp x N_inv");
    const SweepOutcome res = sweep_rows(cfg, jobs);
    out << csv_header() << '\n';
    for (const auto& row : res.rows) out << csv_line(row) << '\n';
    out << "# sweep_best method=" << to_string(res.best.method) << " C_s="
        << format_sig(res.best.C_s, 9) << " C_s_prime=" << format_sig(res.best.C_s_prime, 9)
        << " N_samp=" << res.best.N_samp << " N_inv=" << res.best.N_inv << " m=" << res.best.m
        << " median_cosine=" << format_sig(res.best_median_cosine, 9)
        << " boundary=" << (res.best_on_boundary ? "yes" : "no") << '\n';
    return 0;
}

namespace {

int report_failures(const std::vector<std::string>& failures) {
    for (const auto& f : failures) std::cerr << "FAIL: " << f << '\n';
    return failures.empty() ? 0 : 1;
}

std::string ineq(double lhs, const char* rel, double rhs) {
    return format_sig(lhs, 9) + std::string(" ") + rel + " " + format_sig(rhs, 9);
}

int verify_lemma1_cmd(const ExperimentConfig& cfg, int jobs, std::ostream& out) {
    const auto rep =
        verify_lemma1(cfg.n, cfg.verify_C, cfg.verify_trials_lemma1, cfg.base_seed, jobs);
    out << "n,C,trials,successes,success_rate,bound,q50,q90,q99\n"
        << cfg.n << ',' << format_sig(rep.constant, 9) << ',' << rep.trials << ','
        << rep.successes << ',' << format_sig(rep.success_rate(), 9) << ','
        << format_sig(rep.bound, 9) << ',' << format_sig(rep.q50, 9) << ','
        << format_sig(rep.q90, 9) << ',' << format_sig(rep.q99, 9) << '\n';
    std::vector<std::string> failures;
    if (!(rep.success_rate() >= 0.99))
        failures.push_back("lemma1 success rate: " + ineq(rep.success_rate(), ">=", 0.99) +
                           " violated for " + rep.inequality);
    return report_failures(failures);
}

int verify_lemma2_cmd(const ExperimentConfig& cfg, int jobs, std::ostream& out) {
    const LinkSpec link = build_link(cfg);
    const auto curve = verify_lemma2(cfg.n, cfg.verify_m_list, link, cfg.verify_C_prime,
                                     cfg.verify_trials_lemma2, cfg.base_seed, jobs);
    out << "m,median_err,bound,success_rate,e1_rate\n";
    for (size_t i = 0; i < curve.m_list.size(); ++i)
        out << curve.m_list[i] << ',' << format_sig(curve.median_err[i], 9) << ','
            << format_sig(curve.bound[i], 9) << ',' << format_sig(curve.success_rate[i], 9) << ','
            << format_sig(curve.e1_rate[i], 9) << '\n';
    out << "# slope=" << format_sig(curve.slope, 9) << " mu=" << format_sig(curve.mu, 9)
        << " C_prime=" << format_sig(cfg.verify_C_prime, 9) << '\n';
    std::vector<std::string> failures;
    if (!(curve.slope >= -0.65 && curve.slope <= -0.35))
        failures.push_back("lemma2 slope: " + format_sig(curve.slope, 9) +
                           " outside [-0.65, -0.35]");
    for (size_t i = 0; i < curve.m_list.size(); ++i)
        if (!(curve.success_rate[i] >= 0.99))
            failures.push_back("lemma2 success rate at m=" + std::to_string(curve.m_list[i]) +
                               ": " + ineq(curve.success_rate[i], ">=", 0.99) + " violated for " +
                               curve.check.inequality);
    return report_failures(failures);
}

int verify_lipschitz_cmd(const ExperimentConfig& cfg, int jobs, std::ostream& out) {
    const RunContext ctx = build_context(cfg);
    const TimeGrid grid = make_grid(ctx.sched, cfg.N_samp, cfg.spacing);
    std::vector<std::string> failures;
    out << "method,N,L,max_pair_ratio,pairs\n";

    std::vector<SamplerMethod> methods{SamplerMethod::ddim};
    if (cfg.N_samp >= 2) methods.push_back(SamplerMethod::dm2m);
    for (SamplerMethod method : methods) {
        const LipschitzReport rep = method == SamplerMethod::ddim
                                        ? lipschitz_ddim(grid, *ctx.pred)
                                        : lipschitz_dm2m(grid, *ctx.pred);
        SamplerSpec spec{method, grid, ctx.pred.get()};
        std::vector<double> ratio(cfg.lipschitz_pairs);
        parallel_for(jobs, cfg.lipschitz_pairs, [&](int p) {
            Rng rng(cfg.base_seed + static_cast<std::uint64_t>(p));
            const VectorXd x1 = rng.normal_vec(cfg.n);
            const VectorXd x2 = rng.normal_vec(cfg.n);
            const double d = (x1 - x2).norm();
            ratio[p] = d > 0.0 ? (sample_full(spec, x1) - sample_full(spec, x2)).norm() / d : 0.0;
        });
        const double worst = *std::max_element(ratio.begin(), ratio.end());
        out << to_string(method) << ',' << grid.steps() << ',' << format_sig(rep.L, 9) << ','
            << format_sig(worst, 9) << ',' << cfg.lipschitz_pairs << '\n';
        if (!(worst <= rep.L * (1.0 + 1e-9)))
            failures.push_back("lipschitz " + to_string(method) + ": empirical ratio " +
                               ineq(worst, "<=", rep.L * (1.0 + 1e-9)) + " violated");
    }
    return report_failures(failures);
}

int verify_theorem1_cmd(const ExperimentConfig& cfg, std::ostream& out) {
    const RunContext ctx = build_context(cfg);
    const int k1 = cfg.inverter == InverterMethod::second_order ? 2 : 1;
    const int k2 = cfg.sampler == SamplerMethod::dm2m ? 2 : 1;
    const auto curve = theorem1_curve(*ctx.pred, cfg.verify_grid_sizes, cfg.verify_t, k1, k2,
                                      cfg.base_seed, cfg.spacing, cfg.verify_ref_steps);
    out << "h_max,error\n";
    for (const auto& [h, err] : curve.points)
        out << format_sig(h, 9) << ',' << format_sig(err, 9) << '\n';
    out << "# order=" << format_sig(curve.order, 9) << " t_start="
        << format_sig(curve.t_start, 9) << " k1=" << k1 << " k2=" << k2 << '\n';

    std::vector<std::string> failures;
    if (ctx.pred->kind() == "constant") {
        for (const auto& [h, err] : curve.points)
            if (!(err <= 1e-10))
                failures.push_back("theorem1 constant-predictor error at h_max=" +
                                   format_sig(h, 9) + ": " + ineq(err, "<=", 1e-10) +
                                   " violated");
    } else {
        const double expect = std::min(k1, k2) - 0.3;
        if (!(curve.order >= expect))
            failures.push_back("theorem1 fitted order: " + ineq(curve.order, ">=", expect) +
                               " violated");
    }
    return report_failures(failures);
}

int verify_roundtrip_cmd(const ExperimentConfig& cfg, std::ostream& out) {
    const RunContext ctx = build_context(cfg);
    out << "N,rel_err\n";
    std::vector<double> errs;
    for (int N : cfg.verify_roundtrip_sizes) {
        const double e =
            roundtrip_error(*ctx.pred, cfg.sampler, cfg.inverter, N, cfg.spacing, cfg.base_seed);
        errs.push_back(e);
        out << N << ',' << format_sig(e, 9) << '\n';
    }
    std::vector<std::string> failures;
    if (ctx.pred->kind() == "constant") {
        for (size_t i = 0; i < errs.size(); ++i)
            if (!(errs[i] <= 1e-10))
                failures.push_back("roundtrip constant-predictor error at N=" +
                                   std::to_string(cfg.verify_roundtrip_sizes[i]) + ": " +
                                   ineq(errs[i], "<=", 1e-10) + " violated");
    } else if (errs.size() >= 2) {
        for (size_t i = 1; i < errs.size(); ++i)
            if (!(errs[i] <= errs[i - 1] * 1.05))
                failures.push_back("roundtrip error not shrinking: N=" +
                                   std::to_string(cfg.verify_roundtrip_sizes[i]) + " gives " +
                                   ineq(errs[i], "<=", errs[i - 1] * 1.05) + " violated");
        if (!(errs.back() < errs.front()))
            failures.push_back("roundtrip error did not decrease overall: " +
                               ineq(errs.back(), "<", errs.front()) + " violated");
    }
    return report_failures(failures);
}

}  // namespace

int cmd_verify(const ExperimentConfig& cfg, const std::string& which, int jobs,
               std::ostream& out) {
    log_line(1, "verify " + which);
    if (which == "lemma1") return verify_lemma1_cmd(cfg, jobs, out);
    if (which == "lemma2") return verify_lemma2_cmd(cfg, jobs, out);
    if (which == "lipschitz") return verify_lipschitz_cmd(cfg, jobs, out);
    if (which == "theorem1") return verify_theorem1_cmd(cfg, out);
    if (which == "roundtrip") return verify_roundtrip_cmd(cfg, out);
    throw ConfigError("verify", "unknown verifier '" + which +
                                    "' (expected lemma1, lemma2, lipschitz, theorem1, roundtrip)");
}

}  // namespace simdm
