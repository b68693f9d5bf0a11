#include "simdm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "simdm/parallel.hpp"

namespace simdm {

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t k = v.size();
    if (k == 0) return 0.0;
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

double quantile_of(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * (sorted.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - lo;
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

}  // namespace

Metrics compute_metrics(const VectorXd& x_hat, const VectorXd& x_star, double peak) {
    if (x_star.size() < 1 || x_star.norm() == 0.0)
        throw std::invalid_argument("metrics: x_star must be nonzero");
    if (x_hat.size() != x_star.size())
        throw std::invalid_argument("metrics: dimension mismatch");

    Metrics out;
    const double hn = x_hat.norm();
    if (hn == 0.0) {
        out.zero_estimate = true;
        out.cosine = 0.0;
        out.rel_l2 = std::numeric_limits<double>::quiet_NaN();
        out.psnr = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const double sn = x_star.norm();
    const VectorXd xh = x_hat / hn;
    out.cosine = xh.dot(x_star) / sn;
    const VectorXd diff = xh - x_star;
    out.rel_l2 = diff.norm() / sn;
    const double mse = diff.squaredNorm() / static_cast<double>(x_star.size());
    if (mse == 0.0) {
        out.psnr = std::numeric_limits<double>::infinity();
    } else {
        if (std::isnan(peak)) peak = x_star.maxCoeff() - x_star.minCoeff();
        out.psnr = peak > 0.0 ? 10.0 * std::log10(peak * peak / mse)
                              : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

LipschitzReport lipschitz_ddim(const TimeGrid& grid, const DataPredictor& pred) {
    LipschitzReport rep;
    rep.method = SamplerMethod::ddim;
    const int N = grid.steps();
    rep.per_step.reserve(N);
    for (int i = 1; i <= N; ++i) {
        const double carry = grid.sg[i] / grid.sg[i - 1];
        const double gain = grid.al[i] - carry * grid.al[i - 1];  // alpha_i (1 - e^{-h})
        const double f = carry + gain * pred.lipschitz_at(grid.t[i - 1]);
        rep.per_step.push_back(f);
        rep.L *= f;
    }
    return rep;
}

LipschitzReport lipschitz_dm2m(const TimeGrid& grid, const DataPredictor& pred) {
    const int N = grid.steps();
    if (N < 2) throw std::invalid_argument("lipschitz_dm2m: need at least 2 steps");
    LipschitzReport rep;
    rep.method = SamplerMethod::dm2m;
    rep.per_step.assign(N + 1, 0.0);
    rep.per_step[0] = 1.0;
    {
        const double carry = grid.sg[1] / grid.sg[0];
        const double gain = grid.al[1] - carry * grid.al[0];
        rep.per_step[1] = carry + gain * pred.lipschitz_at(grid.t[0]);
    }
    for (int i = 2; i <= N; ++i) {
        const double carry = grid.sg[i] / grid.sg[i - 1];
        const double gain = grid.al[i] * (-std::expm1(-grid.h(i)));
        const double w = 0.5 * grid.h(i) / grid.h(i - 1);  // 1/(2 r_i)
        const double a = carry + gain * (1.0 + w) * pred.lipschitz_at(grid.t[i - 1]);
        const double b = gain * w * pred.lipschitz_at(grid.t[i - 2]);
        rep.per_step[i] = a * rep.per_step[i - 1] + b * rep.per_step[i - 2];
    }
    rep.L = rep.per_step[N];
    return rep;
}

BoundCheckReport verify_lemma1(int n, double C, int trials, std::uint64_t seed, int jobs) {
    if (n < 1) throw std::invalid_argument("verify_lemma1: n must be >= 1");
    if (C < 0.0) throw std::invalid_argument("verify_lemma1: C must be >= 0");
    if (trials < 100) throw std::invalid_argument("verify_lemma1: need at least 100 trials");

    std::vector<double> stat(trials);
    parallel_for(jobs, trials, [&](int ti) {
        Rng rng(seed + static_cast<std::uint64_t>(ti));
        stat[ti] = rng.normal_vec(n).cwiseAbs().maxCoeff();
    });

    BoundCheckReport rep;
    rep.inequality = "max|eps_i| <= C*sqrt(log(2n))";
    rep.trials = trials;
    rep.constant = C;
    rep.bound = C * std::sqrt(std::log(2.0 * n));
    for (double s : stat)
        if (s <= rep.bound) ++rep.successes;
    std::sort(stat.begin(), stat.end());
    rep.q50 = quantile_of(stat, 0.50);
    rep.q90 = quantile_of(stat, 0.90);
    rep.q99 = quantile_of(stat, 0.99);
    return rep;
}

BackProjCurve verify_lemma2(int n, const std::vector<int>& m_list, const LinkSpec& link,
                            double C_prime, int trials, std::uint64_t seed, int jobs) {
    if (n < 1) throw std::invalid_argument("verify_lemma2: n must be >= 1");
    if (m_list.size() < 2) throw std::invalid_argument("verify_lemma2: need at least 2 m values");
    for (int m : m_list)
        if (m < 1) throw std::invalid_argument("verify_lemma2: m values must be >= 1");
    if (!(C_prime > 0.0)) throw std::invalid_argument("verify_lemma2: C_prime must be > 0");
    if (trials < 1) throw std::invalid_argument("verify_lemma2: trials must be >= 1");

    BackProjCurve out;
    out.m_list = m_list;
    out.mu = estimate_mu(link, 1000000, seed + 1000003);
    const double M2 = estimate_m2_m4(link, 1000000, seed + 2000003).m2;
    const double logterm = std::sqrt(std::log(2.0 * n));

    const int M = static_cast<int>(m_list.size());
    std::vector<std::vector<double>> errs(M, std::vector<double>(trials));
    std::vector<std::vector<char>> e1(M, std::vector<char>(trials));
    parallel_for(jobs, M * trials, [&](int task) {
        const int mi = task / trials;
        const int ti = task % trials;
        const std::uint64_t s = seed + static_cast<std::uint64_t>(task);
        Rng rx(s ^ 0x9e3779b97f4a7c15ULL);
        const VectorXd xs = rx.normal_vec(n);
        const auto inst =
            make_instance(n, m_list[mi], link, XStarSource::explicit_vector(xs), s);
        const VectorXd b = back_project(inst);
        errs[mi][ti] = (b - out.mu * inst.x_star).cwiseAbs().maxCoeff();
        e1[mi][ti] = inst.y.squaredNorm() / inst.y.size() <= 2.0 * M2 ? 1 : 0;
    });

    std::vector<double> ratios;
    ratios.reserve(static_cast<size_t>(M) * trials);
    std::vector<std::pair<double, double>> pts;
    for (int mi = 0; mi < M; ++mi) {
        const double m = m_list[mi];
        const double bnd = C_prime * logterm / std::sqrt(m);
        int succ = 0, e1c = 0;
        for (int ti = 0; ti < trials; ++ti) {
            if (errs[mi][ti] <= bnd) ++succ;
            e1c += e1[mi][ti];
            ratios.push_back(errs[mi][ti] * std::sqrt(m) / logterm);
        }
        out.median_err.push_back(median_of(errs[mi]));
        out.bound.push_back(bnd);
        out.success_rate.push_back(double(succ) / trials);
        out.e1_rate.push_back(double(e1c) / trials);
        out.check.successes += succ;
        pts.emplace_back(m, out.median_err.back());
    }
    out.check.inequality = "max|(1/m)A^T y - mu*x*| <= C'*sqrt(log(2n))/sqrt(m)";
    out.check.trials = M * trials;
    out.check.constant = C_prime;
    out.check.bound = C_prime;  // for the normalized statistic err*sqrt(m)/sqrt(log 2n)
    std::sort(ratios.begin(), ratios.end());
    out.check.q50 = quantile_of(ratios, 0.50);
    out.check.q90 = quantile_of(ratios, 0.90);
    out.check.q99 = quantile_of(ratios, 0.99);

    // log-log fit of median error against m; two m values suffice here.
    double sx = 0, sy = 0;
    for (const auto& [m, err] : pts) {
        if (!(err > 0.0)) {
            out.slope = std::numeric_limits<double>::quiet_NaN();
            return out;
        }
        sx += std::log(m);
        sy += std::log(err);
    }
    const double mx = sx / pts.size(), my = sy / pts.size();
    double num = 0, den = 0;
    for (const auto& [m, err] : pts) {
        const double dx = std::log(m) - mx;
        num += dx * (std::log(err) - my);
        den += dx * dx;
    }
    out.slope = num / den;
    return out;
}

OrderCurve theorem1_curve(const DataPredictor& pred, const std::vector<int>& grid_sizes, double t,
                          int k1, int k2, std::uint64_t seed, Spacing spacing, int ref_steps) {
    if (grid_sizes.size() < 3)
        throw std::invalid_argument("theorem1_curve: need at least 3 grid sizes");
    for (size_t i = 0; i < grid_sizes.size(); ++i) {
        if (grid_sizes[i] < 2) throw std::invalid_argument("theorem1_curve: grid sizes must be >= 2");
        if (i > 0 && grid_sizes[i] <= grid_sizes[i - 1])
            throw std::invalid_argument("theorem1_curve: grid sizes must increase");
    }
    if ((k1 != 1 && k1 != 2) || (k2 != 1 && k2 != 2))
        throw std::invalid_argument("theorem1_curve: k1 and k2 must be 1 or 2");
    if (ref_steps < 1) throw std::invalid_argument("theorem1_curve: ref_steps must be >= 1");

    const NoiseSchedule& sched = pred.schedule();
    const TimeGrid coarse = make_grid(sched, grid_sizes.front(), spacing);

    // Snap t to the nearest coarse node (lambda metric); nested sizes keep it
    // a shared node, so every run starts from the same state.
    const double lt = sched.lambda(t);
    int best = 0;
    double bestd = std::abs(coarse.lam[0] - lt);
    for (int i = 1; i <= coarse.steps(); ++i) {
        const double d = std::abs(coarse.lam[i] - lt);
        if (d < bestd) {
            bestd = d;
            best = i;
        }
    }
    OrderCurve out;
    out.t_start = coarse.t[best];

    Rng rng(seed);
    const VectorXd x_bar = pred.sample_marginal(out.t_start, rng);
    const VectorXd ref = reference_solve(sched, pred, x_bar, out.t_start, sched.eps, ref_steps);

    bool all_positive = true;
    for (int N : grid_sizes) {
        const TimeGrid grid = make_grid(sched, N, spacing);
        InverterSpec inv;
        inv.method = k1 == 1 ? InverterMethod::first_order : InverterMethod::second_order;
        inv.grid = grid;
        inv.predictor = &pred;
        SamplerSpec smp;
        smp.method = k2 == 1 ? SamplerMethod::ddim : SamplerMethod::dm2m;
        smp.grid = grid;
        smp.predictor = &pred;
        const VectorXd x_T = invert_partial(inv, x_bar, out.t_start);
        const VectorXd x_eps = sample_full(smp, x_T);
        const double err = (x_eps - ref).norm();
        if (!(err > 0.0)) all_positive = false;
        out.points.emplace_back(grid.h_max(), err);
    }
    out.order = all_positive ? estimate_order(out.points)
                             : std::numeric_limits<double>::quiet_NaN();
    return out;
}

double roundtrip_error(const DataPredictor& pred, SamplerMethod sampler, InverterMethod inverter,
                       int N, Spacing spacing, std::uint64_t seed) {
    const NoiseSchedule& sched = pred.schedule();
    const TimeGrid grid = make_grid(sched, N, spacing);
    Rng rng(seed);
    const VectorXd x = pred.sample_marginal(sched.eps, rng);
    InverterSpec inv{inverter, grid, &pred};
    SamplerSpec smp{sampler, grid, &pred};
    const VectorXd x_T = invert_full(inv, x);
    const VectorXd back = sample_full(smp, x_T);
    return (back - x).norm() / x.norm();
}

}  // namespace simdm
