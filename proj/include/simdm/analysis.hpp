#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "simdm/inversion.hpp"
#include "simdm/measurement.hpp"
#include "simdm/solver.hpp"

namespace simdm {

struct Metrics {
    double cosine = 0.0;
    double rel_l2 = 0.0;
    double psnr = 0.0;
    bool zero_estimate = false;  // x_hat was exactly zero; only cosine is defined
};

// All quality numbers compare x_hat / ||x_hat|| against x_star (the model
// identifies direction only). psnr peak defaults to max(x*) - min(x*); an
// exact match reports +inf.
Metrics compute_metrics(const VectorXd& x_hat, const VectorXd& x_star,
                        double peak = std::numeric_limits<double>::quiet_NaN());

struct LipschitzReport {
    SamplerMethod method = SamplerMethod::ddim;
    // ddim: the N per-step factors whose product is L.
    // dm2m: the running constants from step 0 (so N+1 entries, last one = L).
    std::vector<double> per_step;
    double L = 1.0;
};

LipschitzReport lipschitz_ddim(const TimeGrid& grid, const DataPredictor& pred);
LipschitzReport lipschitz_dm2m(const TimeGrid& grid, const DataPredictor& pred);

struct BoundCheckReport {
    std::string inequality;  // exact statement of the tested bound
    int trials = 0;
    int successes = 0;
    double constant = 0.0;  // C or C'
    double bound = 0.0;     // right-hand side the statistic is held against
    // Observed quantiles of the tested statistic.
    double q50 = 0.0, q90 = 0.0, q99 = 0.0;
    double success_rate() const { return trials > 0 ? double(successes) / trials : 0.0; }
};

// Draws eps ~ N(0, I_n) and counts max|eps_i| <= C * sqrt(log(2n)).
BoundCheckReport verify_lemma1(int n, double C, int trials, std::uint64_t seed, int jobs = 0);

struct BackProjCurve {
    BoundCheckReport check;  // aggregate over every (m, trial) pair
    std::vector<int> m_list;
    std::vector<double> median_err;    // per m: median of max|b - mu x*|
    std::vector<double> bound;         // per m: C' sqrt(log 2n) / sqrt(m)
    std::vector<double> success_rate;  // per m
    std::vector<double> e1_rate;       // per m: freq of (1/m) sum y^2 <= 2 M2
    double slope = 0.0;                // log-log fit of median_err vs m
    double mu = 0.0;
};

// Back-projection concentration: per-m statistics of max|(1/m)A^T y - mu x*|
// with mu and M2 estimated by Monte Carlo (1e6 draws).
BackProjCurve verify_lemma2(int n, const std::vector<int>& m_list, const LinkSpec& link,
                            double C_prime, int trials, std::uint64_t seed, int jobs = 0);

struct OrderCurve {
    std::vector<std::pair<double, double>> points;  // (h_max, error), coarse to fine
    double order = 0.0;                             // nan when any error is exactly 0
    double t_start = 0.0;                           // t snapped to the coarsest grid node
};

// Invert from t up to T, sample back down, and compare against the reference
// flow endpoint. k1 picks the inverter order (1 or 2), k2 the sampler order.
// t is snapped to the nearest node of the coarsest grid, so nested sizes
// (doubling) keep it a node of every grid.
OrderCurve theorem1_curve(const DataPredictor& pred, const std::vector<int>& grid_sizes, double t,
                          int k1, int k2, std::uint64_t seed,
                          Spacing spacing = Spacing::uniform_lambda, int ref_steps = 4096);

// ||G(Ginv(x)) - x|| / ||x|| for one x ~ q_eps.
double roundtrip_error(const DataPredictor& pred, SamplerMethod sampler, InverterMethod inverter,
                       int N, Spacing spacing, std::uint64_t seed);

}  // namespace simdm
