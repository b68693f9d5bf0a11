#include "simdm/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace simdm {

namespace {

// Bisection for a strictly monotone f on [lo, hi]; runs to floating-point
// exhaustion, which is well inside the 1e-12 tolerance promised by the API.
template <typename F>
double bisect(F&& f, double lo, double hi, double target, bool increasing) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const bool below = f(mid) < target;
        if (below == increasing)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

NoiseSchedule::NoiseSchedule(double bmin, double bmax, double T_, double eps_)
    : beta_min(bmin), beta_max(bmax), T(T_), eps(eps_) {
    if (!(beta_min > 0.0) || !(beta_max >= beta_min))
        throw std::invalid_argument("schedule: need 0 < beta_min <= beta_max");
    if (!(eps > 0.0) || !(eps < T))
        throw std::invalid_argument("schedule: need 0 < eps < T");
}

void NoiseSchedule::check_time(double t, double lo) const {
    if (!(t >= lo) || !(t <= T))
        throw std::domain_error("schedule: t=" + std::to_string(t) + " outside [" +
                                std::to_string(lo) + ", " + std::to_string(T) + "]");
}

double NoiseSchedule::log_alpha(double t) const {
    return -0.25 * t * t * (beta_max - beta_min) - 0.5 * t * beta_min;
}

double NoiseSchedule::alpha(double t) const {
    check_time(t, 0.0);
    return std::exp(log_alpha(t));
}

double NoiseSchedule::sigma(double t) const {
    check_time(t, 0.0);
    // 1 - alpha^2 via expm1 keeps precision near t = 0.
    return std::sqrt(-std::expm1(2.0 * log_alpha(t)));
}

double NoiseSchedule::lambda(double t) const {
    check_time(t, 0.0);
    if (t <= 0.0) throw std::domain_error("schedule: lambda undefined at t = 0");
    const double la = log_alpha(t);
    return la - 0.5 * std::log(-std::expm1(2.0 * la));
}

double NoiseSchedule::t_of_lambda(double lam) const {
    const double lam_hi = lambda(eps), lam_lo = lambda(T);
    const double slack = 1e-9 * std::max(1.0, std::max(std::abs(lam_hi), std::abs(lam_lo)));
    if (lam > lam_hi + slack || lam < lam_lo - slack)
        throw std::domain_error("schedule: lambda=" + std::to_string(lam) +
                                " outside [lambda(T), lambda(eps)]");
    if (lam >= lam_hi) return eps;
    if (lam <= lam_lo) return T;
    // lambda decreases in t.
    return bisect([this](double t) { return lambda(t); }, eps, T, lam, false);
}

double NoiseSchedule::beta(double t) const { return beta_min + t * (beta_max - beta_min); }

double NoiseSchedule::drift(double t) const {
    check_time(t, 0.0);
    return -0.5 * beta(t);
}

double NoiseSchedule::diffusion2(double t) const {
    check_time(t, 0.0);
    return beta(t);
}

double NoiseSchedule::ratio(double t) const {
    check_time(t, 0.0);
    if (t <= 0.0) return 0.0;
    // exp(-lambda) is monotone increasing in t and avoids sigma/alpha rounding.
    return std::exp(-lambda(t));
}

double NoiseSchedule::solve_t_star(double C_s, double m) const {
    if (!(C_s > 0.0)) throw std::invalid_argument("solve_t_star: C_s must be > 0");
    if (!(m >= 1.0)) throw std::invalid_argument("solve_t_star: m must be >= 1");
    const double target = C_s / std::sqrt(m);
    if (target > ratio(T)) return T;
    if (target < ratio(eps)) return eps;
    return bisect([this](double t) { return ratio(t); }, eps, T, target, true);
}

double TimeGrid::h_max() const {
    double hm = 0.0;
    for (int i = 1; i <= steps(); ++i) hm = std::max(hm, h(i));
    return hm;
}

TimeGrid make_grid(const NoiseSchedule& sched, int N, Spacing spacing) {
    if (N < 1) throw std::invalid_argument("make_grid: N must be >= 1");
    TimeGrid g;
    g.spacing = spacing;
    g.t.resize(N + 1);
    g.t[0] = sched.T;
    g.t[N] = sched.eps;
    if (spacing == Spacing::uniform_t) {
        const double dt = (sched.T - sched.eps) / N;
        for (int i = 1; i < N; ++i) g.t[i] = sched.T - i * dt;
    } else {
        const double l0 = sched.lambda(sched.T), l1 = sched.lambda(sched.eps);
        const double dl = (l1 - l0) / N;
        for (int i = 1; i < N; ++i) g.t[i] = sched.t_of_lambda(l0 + i * dl);
    }
    g.lam.resize(N + 1);
    g.al.resize(N + 1);
    g.sg.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
        g.lam[i] = sched.lambda(g.t[i]);
        g.al[i] = sched.alpha(g.t[i]);
        g.sg[i] = sched.sigma(g.t[i]);
    }
    return g;
}

}  // namespace simdm
