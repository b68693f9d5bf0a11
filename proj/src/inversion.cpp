#include "simdm/inversion.hpp"

#include <stdexcept>

#include "simdm/solver.hpp"

namespace simdm {

namespace {

constexpr double kNodeSlack = 1e-12;

void check_spec(const InverterSpec& spec) {
    if (spec.predictor == nullptr) throw std::invalid_argument("inverter: predictor is null");
    if (spec.grid.steps() < 1) throw std::invalid_argument("inverter: empty grid");
}

void check_state(const InverterSpec& spec, const VectorXd& x) {
    if (x.size() != spec.predictor->dim())
        throw std::invalid_argument("inverter: state dimension does not match predictor");
}

void check_index(const InverterSpec& spec, int j) {
    if (j < 1 || j > spec.grid.steps())
        throw std::invalid_argument("inversion step: index out of range");
}

VectorXd one_step(const InverterSpec& spec, const VectorXd& x, int j, double t_eval, long* nfe) {
    const TimeGrid& g = spec.grid;
    const VectorXd model = spec.predictor->predict(x, t_eval);
    if (nfe) ++*nfe;
    return ddim_update(g.al[j], g.sg[j], g.al[j - 1], g.sg[j - 1], x, model);
}

}  // namespace

VectorXd naive_inv_step(const InverterSpec& spec, const VectorXd& x, int j, long* nfe) {
    check_spec(spec);
    check_state(spec, x);
    check_index(spec, j);
    return one_step(spec, x, j, spec.grid.t[j - 1], nfe);
}

VectorXd first_order_inv_step(const InverterSpec& spec, const VectorXd& x, int j, long* nfe) {
    check_spec(spec);
    check_state(spec, x);
    check_index(spec, j);
    return one_step(spec, x, j, spec.grid.t[j], nfe);
}

VectorXd second_order_inv_step(const InverterSpec& spec, const VectorXd& x, const VectorXd& x_next,
                               int j, long* nfe) {
    check_spec(spec);
    check_state(spec, x);
    check_state(spec, x_next);
    check_index(spec, j);
    const TimeGrid& g = spec.grid;
    if (j > g.steps() - 1)
        throw std::invalid_argument("second-order inversion step: no history at the first step");
    const double h = g.lam[j - 1] - g.lam[j];        // negative of the sampling step
    const double r = (g.lam[j] - g.lam[j + 1]) / h;  // previous applied step / this one
    const VectorXd model = spec.predictor->predict(x, g.t[j]);
    const VectorXd model_prev = spec.predictor->predict(x_next, g.t[j + 1]);
    if (nfe) *nfe += 2;
    return dm2m_update(g.al[j], g.sg[j], g.al[j - 1], g.sg[j - 1], h, r, x, model, model_prev);
}

int inversion_entry_index(const TimeGrid& grid, double t) {
    if (!(t > 0.0)) throw std::domain_error("invert_partial: t must be positive");
    const int N = grid.steps();
    if (t < grid.t[N] - kNodeSlack)
        throw std::domain_error("invert_partial: t below the bottom grid node");
    if (t >= grid.t[0] - kNodeSlack) return 0;  // already at the top: zero steps
    for (int j = 1; j <= N; ++j) {
        if (grid.t[j] <= t + kNodeSlack) return j;
    }
    return N;
}

namespace {

// Shared loop: run steps j_start, j_start-1, ..., 1. second_order reuses the
// previous step's predictor value, spending one call per step overall.
VectorXd run_inverter(const InverterSpec& spec, VectorXd x, int j_start, long* nfe) {
    const TimeGrid& g = spec.grid;
    const DataPredictor& pred = *spec.predictor;
    VectorXd model_prev;
    for (int j = j_start; j >= 1; --j) {
        const bool warmup = (j == j_start);
        const double t_eval =
            (spec.method == InverterMethod::naive_ddim) ? g.t[j - 1] : g.t[j];
        const VectorXd model = pred.predict(x, t_eval);
        if (nfe) ++*nfe;
        if (spec.method == InverterMethod::second_order && !warmup) {
            const double h = g.lam[j - 1] - g.lam[j];
            const double r = (g.lam[j] - g.lam[j + 1]) / h;
            x = dm2m_update(g.al[j], g.sg[j], g.al[j - 1], g.sg[j - 1], h, r, x, model,
                            model_prev);
        } else {
            x = ddim_update(g.al[j], g.sg[j], g.al[j - 1], g.sg[j - 1], x, model);
        }
        model_prev = model;
    }
    return x;
}

}  // namespace

VectorXd invert_full(const InverterSpec& spec, const VectorXd& x_eps, long* nfe) {
    check_spec(spec);
    check_state(spec, x_eps);
    return run_inverter(spec, x_eps, spec.grid.steps(), nfe);
}

VectorXd invert_partial(const InverterSpec& spec, const VectorXd& x, double t, long* nfe) {
    check_spec(spec);
    check_state(spec, x);
    const int j0 = inversion_entry_index(spec.grid, t);
    if (j0 == 0) return x;
    return run_inverter(spec, x, j0, nfe);
}

}  // namespace simdm
