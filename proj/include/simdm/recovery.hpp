#pragma once

#include <limits>
#include <string>

#include "simdm/inversion.hpp"
#include "simdm/measurement.hpp"
#include "simdm/solver.hpp"

namespace simdm {

enum class RecoveryMethod { sim_dms, sim_dmis, sim_dmfis };

std::string to_string(RecoveryMethod method);
RecoveryMethod recovery_method_from_string(const std::string& name);

// Estimator wiring. C_s picks the intermediate time via sigma/alpha = C_s/sqrt(m);
// C_s_prime rescales the back-projection before it enters the flow. Neither has
// a default: sim_dms and sim_dmis refuse to run until both are set.
struct RecoveryConfig {
    RecoveryMethod method = RecoveryMethod::sim_dmis;
    double C_s = std::numeric_limits<double>::quiet_NaN();
    double C_s_prime = std::numeric_limits<double>::quiet_NaN();
    SamplerSpec sampler;
    InverterSpec inverter;
};

struct RecoveryResult {
    VectorXd x_hat;       // raw estimate, not normalized
    double t_star = 0.0;  // selected intermediate time (eps for sim_dmfis)
    long nfe = 0;         // predictor evaluations spent
};

// Link agnostic: only A and y go in. sim_dmfis runs invert-then-sample from
// the raw back-projection; sim_dms starts the sampler at t_star from the
// rescaled back-projection; sim_dmis additionally inverts from t_star first.
RecoveryResult recover(const RecoveryConfig& cfg, const MatrixXd& A, const VectorXd& y);

}  // namespace simdm
