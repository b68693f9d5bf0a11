#include "simdm/recovery.hpp"

#include <cmath>
#include <stdexcept>

#include "simdm/errors.hpp"

namespace simdm {

std::string to_string(RecoveryMethod method) {
    switch (method) {
        case RecoveryMethod::sim_dms: return "sim_dms";
        case RecoveryMethod::sim_dmis: return "sim_dmis";
        case RecoveryMethod::sim_dmfis: return "sim_dmfis";
    }
    return "?";
}

RecoveryMethod recovery_method_from_string(const std::string& name) {
    if (name == "sim_dms") return RecoveryMethod::sim_dms;
    if (name == "sim_dmis") return RecoveryMethod::sim_dmis;
    if (name == "sim_dmfis") return RecoveryMethod::sim_dmfis;
    throw std::invalid_argument("unknown recovery method: " + name);
}

namespace {

void check_constants(const RecoveryConfig& cfg) {
    if (!(cfg.C_s > 0.0) || !std::isfinite(cfg.C_s))
        throw std::invalid_argument("recovery.C_s: must be a finite positive value");
    if (!(cfg.C_s_prime > 0.0) || !std::isfinite(cfg.C_s_prime))
        throw std::invalid_argument("recovery.C_s_prime: must be a finite positive value");
}

}  // namespace

RecoveryResult recover(const RecoveryConfig& cfg, const MatrixXd& A, const VectorXd& y) {
    const DataPredictor* pred = cfg.sampler.predictor;
    if (pred == nullptr) throw std::invalid_argument("recovery: sampler predictor is null");
    if (A.cols() != pred->dim())
        throw std::invalid_argument("recovery: A columns do not match predictor dimension");
    const bool needs_inverter = cfg.method != RecoveryMethod::sim_dms;
    if (needs_inverter && cfg.inverter.predictor == nullptr)
        throw std::invalid_argument("recovery: inverter predictor is null");

    const NoiseSchedule& sched = pred->schedule();
    const VectorXd b = back_project(A, y);
    const int m = static_cast<int>(A.rows());

    RecoveryResult res;
    switch (cfg.method) {
        case RecoveryMethod::sim_dmfis: {
            res.t_star = sched.eps;
            const VectorXd x_T = invert_full(cfg.inverter, b, &res.nfe);
            res.x_hat = sample_full(cfg.sampler, x_T, &res.nfe);
            break;
        }
        case RecoveryMethod::sim_dms: {
            check_constants(cfg);
            res.t_star = sched.solve_t_star(cfg.C_s, m);
            const VectorXd x_init = sched.alpha(res.t_star) * cfg.C_s_prime * b;
            res.x_hat = sample_partial(cfg.sampler, x_init, res.t_star, &res.nfe);
            break;
        }
        case RecoveryMethod::sim_dmis: {
            check_constants(cfg);
            res.t_star = sched.solve_t_star(cfg.C_s, m);
            const VectorXd x_init = sched.alpha(res.t_star) * cfg.C_s_prime * b;
            const VectorXd x_T = invert_partial(cfg.inverter, x_init, res.t_star, &res.nfe);
            res.x_hat = sample_full(cfg.sampler, x_T, &res.nfe);
            break;
        }
    }
    if (!res.x_hat.allFinite()) throw NumericError("recovery: estimate is not finite");
    return res;
}

}  // namespace simdm
