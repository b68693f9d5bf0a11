#include "simdm/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace simdm {

namespace {

// Tolerance for "t sits on a grid node" decisions; node times are exact
// endpoints or bisection fixed points, so anything larger than a few ulp works.
constexpr double kNodeSlack = 1e-12;

void check_spec(const SamplerSpec& spec) {
    if (spec.predictor == nullptr) throw std::invalid_argument("sampler: predictor is null");
    if (spec.grid.steps() < 1) throw std::invalid_argument("sampler: empty grid");
}

void check_state(const SamplerSpec& spec, const VectorXd& x) {
    if (x.size() != spec.predictor->dim())
        throw std::invalid_argument("sampler: state dimension does not match predictor");
}

}  // namespace

VectorXd ddim_update(double a_from, double s_from, double a_to, double s_to, const VectorXd& x,
                     const VectorXd& model) {
    const double carry = s_to / s_from;
    return carry * x + (a_to - carry * a_from) * model;
}

VectorXd dm2m_update(double a_from, double s_from, double a_to, double s_to, double h, double r,
                     const VectorXd& x, const VectorXd& model, const VectorXd& model_prev) {
    const double carry = s_to / s_from;
    const double gain = a_to * (-std::expm1(-h));
    const double w = 0.5 / r;
    (void)a_from;
    return carry * x + gain * ((1.0 + w) * model - w * model_prev);
}

VectorXd ddim_step(const SamplerSpec& spec, const VectorXd& x, int i, long* nfe) {
    check_spec(spec);
    check_state(spec, x);
    const TimeGrid& g = spec.grid;
    if (i < 1 || i > g.steps()) throw std::invalid_argument("ddim_step: step index out of range");
    const VectorXd model = spec.predictor->predict(x, g.t[i - 1]);
    if (nfe) ++*nfe;
    return ddim_update(g.al[i - 1], g.sg[i - 1], g.al[i], g.sg[i], x, model);
}

VectorXd dm2m_step(const SamplerSpec& spec, const VectorXd& x_im1, const VectorXd& x_im2, int i,
                   long* nfe) {
    check_spec(spec);
    check_state(spec, x_im1);
    check_state(spec, x_im2);
    const TimeGrid& g = spec.grid;
    if (i < 2 || i > g.steps())
        throw std::invalid_argument("dm2m_step: step index needs one grid point of history");
    const double h = g.h(i);
    const double r = g.h(i - 1) / h;
    const VectorXd model = spec.predictor->predict(x_im1, g.t[i - 1]);
    const VectorXd model_prev = spec.predictor->predict(x_im2, g.t[i - 2]);
    if (nfe) *nfe += 2;
    return dm2m_update(g.al[i - 1], g.sg[i - 1], g.al[i], g.sg[i], h, r, x_im1, model, model_prev);
}

int sampling_entry_index(const TimeGrid& grid, double t) {
    if (!(t > 0.0)) throw std::domain_error("sample_partial: t must be positive");
    const int N = grid.steps();
    for (int i = N; i >= 1; --i) {
        if (grid.t[i - 1] >= t - kNodeSlack) return i;
    }
    return 1;  // t above the top node: run the full composition
}

namespace {

// Shared loop for full/partial sampling. dm2m reuses the predictor value from
// the previous applied step, so the whole run costs one call per step.
VectorXd run_sampler(const SamplerSpec& spec, VectorXd x, int i_start, long* nfe) {
    const TimeGrid& g = spec.grid;
    const DataPredictor& pred = *spec.predictor;
    VectorXd model_prev;
    for (int i = i_start; i <= g.steps(); ++i) {
        const VectorXd model = pred.predict(x, g.t[i - 1]);
        if (nfe) ++*nfe;
        if (spec.method == SamplerMethod::ddim || i == i_start) {
            x = ddim_update(g.al[i - 1], g.sg[i - 1], g.al[i], g.sg[i], x, model);
        } else {
            const double h = g.h(i);
            const double r = g.h(i - 1) / h;
            x = dm2m_update(g.al[i - 1], g.sg[i - 1], g.al[i], g.sg[i], h, r, x, model,
                            model_prev);
        }
        model_prev = model;
    }
    return x;
}

}  // namespace

VectorXd sample_full(const SamplerSpec& spec, const VectorXd& x_T, long* nfe) {
    check_spec(spec);
    check_state(spec, x_T);
    return run_sampler(spec, x_T, 1, nfe);
}

VectorXd sample_partial(const SamplerSpec& spec, const VectorXd& x, double t, long* nfe) {
    check_spec(spec);
    check_state(spec, x);
    const int i0 = sampling_entry_index(spec.grid, t);
    return run_sampler(spec, x, i0, nfe);
}

VectorXd reference_solve(const NoiseSchedule& sched, const DataPredictor& pred, const VectorXd& x,
                         double t_from, double t_to, int steps) {
    if (steps < 1) throw std::invalid_argument("reference_solve: steps must be >= 1");
    if (x.size() != pred.dim())
        throw std::invalid_argument("reference_solve: state dimension does not match predictor");
    if (t_from == t_to) return x;

    const double l0 = sched.lambda(t_from);
    const double l1 = sched.lambda(t_to);
    const double h = (l1 - l0) / steps;

    // Stage times at half-step resolution, solved once up front.
    std::vector<double> ts(2 * steps + 1);
    for (int j = 1; j < 2 * steps; ++j) ts[j] = sched.t_of_lambda(l0 + 0.5 * h * j);
    ts[0] = t_from;
    ts[2 * steps] = t_to;

    // u = x / sigma obeys du/dlambda = exp(lambda) * model(sigma * u, t).
    auto slope = [&](double lam, const VectorXd& u, double t) -> VectorXd {
        return std::exp(lam) * pred.predict(sched.sigma(t) * u, t);
    };

    VectorXd u = x / sched.sigma(t_from);
    for (int j = 0; j < steps; ++j) {
        const double lam = l0 + h * j;
        const double t0 = ts[2 * j], tm = ts[2 * j + 1], t1 = ts[2 * j + 2];
        const VectorXd k1 = slope(lam, u, t0);
        const VectorXd k2 = slope(lam + 0.5 * h, u + (0.5 * h) * k1, tm);
        const VectorXd k3 = slope(lam + 0.5 * h, u + (0.5 * h) * k2, tm);
        const VectorXd k4 = slope(lam + h, u + h * k3, t1);
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return sched.sigma(t_to) * u;
}

double estimate_order(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 3) throw std::invalid_argument("estimate_order: need at least 3 points");
    double sx = 0, sy = 0;
    for (const auto& [hval, err] : pts) {
        if (!(hval > 0.0) || !(err > 0.0))
            throw std::invalid_argument("estimate_order: points must be positive");
        sx += std::log(hval);
        sy += std::log(err);
    }
    const double mx = sx / pts.size(), my = sy / pts.size();
    double num = 0, den = 0;
    for (const auto& [hval, err] : pts) {
        const double dx = std::log(hval) - mx;
        num += dx * (std::log(err) - my);
        den += dx * dx;
    }
    if (den == 0.0) throw std::invalid_argument("estimate_order: degenerate abscissae");
    return num / den;
}

}  // namespace simdm
