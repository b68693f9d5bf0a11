#pragma once

#include <utility>
#include <vector>

#include "simdm/predictor.hpp"
#include "simdm/schedule.hpp"

namespace simdm {

enum class SamplerMethod { ddim, dm2m };

struct SamplerSpec {
    SamplerMethod method = SamplerMethod::ddim;
    TimeGrid grid;
    const DataPredictor* predictor = nullptr;
};

// Shared one-step exponential-integrator kernels. Both run between arbitrary
// times (sampling or inversion direction); h = lambda(to) - lambda(from) and
// r = h_prev / h, where h_prev belongs to the step taken just before this one.
VectorXd ddim_update(double a_from, double s_from, double a_to, double s_to, const VectorXd& x,
                     const VectorXd& model);
VectorXd dm2m_update(double a_from, double s_from, double a_to, double s_to, double h, double r,
                     const VectorXd& x, const VectorXd& model, const VectorXd& model_prev);

// Step i moves t[i-1] -> t[i]. dm2m_step additionally takes the iterate that
// was current at t[i-2]; it evaluates the predictor at both iterates.
VectorXd ddim_step(const SamplerSpec& spec, const VectorXd& x, int i, long* nfe = nullptr);
VectorXd dm2m_step(const SamplerSpec& spec, const VectorXd& x_im1, const VectorXd& x_im2, int i,
                   long* nfe = nullptr);

// Full composition over the grid; dm2m caches the previous predictor value,
// so either method spends exactly N predictor calls.
VectorXd sample_full(const SamplerSpec& spec, const VectorXd& x_T, long* nfe = nullptr);

// Partial composition starting at step i_t = max{ i : t[i-1] >= t }; t above
// t[0] clamps to full sampling.
VectorXd sample_partial(const SamplerSpec& spec, const VectorXd& x, double t, long* nfe = nullptr);
int sampling_entry_index(const TimeGrid& grid, double t);

// High-accuracy oracle: classical RK4 in lambda on u = x / sigma, direction
// agnostic. steps >= 1024 recommended when used as a reference.
VectorXd reference_solve(const NoiseSchedule& sched, const DataPredictor& pred, const VectorXd& x,
                         double t_from, double t_to, int steps);

// Least-squares slope of log(error) against log(h_max); needs >= 3 points.
double estimate_order(const std::vector<std::pair<double, double>>& pts);

}  // namespace simdm
