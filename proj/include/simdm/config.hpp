#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "simdm/errors.hpp"
#include "simdm/inversion.hpp"
#include "simdm/measurement.hpp"
#include "simdm/predictor.hpp"
#include "simdm/recovery.hpp"
#include "simdm/schedule.hpp"
#include "simdm/solver.hpp"

namespace simdm {

// Parsed run description. The file uses [block] headers with key = value
// lines; bare dotted keys (block.key = value) are accepted as a fallback.
struct ExperimentConfig {
    // [schedule]
    double beta_min = 0.1;
    double beta_max = 20.0;
    double T = 1.0;
    double eps = 1e-3;

    // [grid]
    int N_samp = 100;
    int N_inv = 50;
    Spacing spacing = Spacing::uniform_t;

    // [predictor]
    std::string predictor_kind = "gmm";
    double constant_value = 0.0;
    std::string constant_file;
    double gaussian_mean = 0.0;
    std::string gaussian_mean_file;
    double gaussian_var = 1.0;
    int gmm_modes = 4;
    double gmm_var = 0.01;
    std::uint64_t gmm_mode_seed = 7;
    std::string gmm_means_file;
    std::vector<double> gmm_weights;  // uniform when empty

    // [link]
    LinkKind link_kind = LinkKind::sign;
    double link_sigma = 0.05;
    std::string noise_position;  // "", "pre", "post"

    // [recovery]
    std::vector<RecoveryMethod> methods{RecoveryMethod::sim_dmis};
    double C_s = std::numeric_limits<double>::quiet_NaN();
    double C_s_prime = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> C_s_list;
    std::vector<double> C_s_prime_list;
    std::vector<int> N_samp_list;
    std::vector<int> N_inv_list;
    SamplerMethod sampler = SamplerMethod::ddim;
    InverterMethod inverter = InverterMethod::second_order;

    // [run]
    int n = 32;
    std::vector<int> m_list{256};
    int trials = 1;
    std::uint64_t base_seed = 0;
    std::string out_path;
    std::string x_star_file;
    std::string x_hat_prefix;

    // [verify]
    double verify_C = 3.0;
    double verify_C_prime = 10.0;
    int verify_trials_lemma1 = 100;
    int verify_trials_lemma2 = 50;
    double verify_t = 0.5;
    std::vector<int> verify_grid_sizes{16, 32, 64, 128};
    int verify_ref_steps = 4096;
    std::vector<int> verify_m_list{256, 1024, 4096, 16384};
    std::vector<int> verify_roundtrip_sizes{25, 50, 100};
    int lipschitz_pairs = 200;
};

// Parse + range validation; every error is a ConfigError carrying the dotted
// field path of the offending key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

NoiseSchedule build_schedule(const ExperimentConfig& cfg);
LinkSpec build_link(const ExperimentConfig& cfg);
// Predictor dimension must agree with run.n.
std::unique_ptr<DataPredictor> build_predictor(const ExperimentConfig& cfg,
                                               const NoiseSchedule& sched);

std::string to_string(Spacing spacing);
std::string to_string(SamplerMethod method);
std::string to_string(InverterMethod method);

}  // namespace simdm
