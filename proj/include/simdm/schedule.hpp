#pragma once

#include <vector>

namespace simdm {

enum class Spacing { uniform_t, uniform_lambda };

// Variance-preserving noise schedule on [eps, T]:
//   log alpha_t = -t^2 (beta_max - beta_min)/4 - t beta_min/2,
//   sigma_t = sqrt(1 - alpha_t^2),  lambda_t = log(alpha_t / sigma_t).
// lambda is strictly decreasing on [eps, T]; its inverse is found by bisection.
struct NoiseSchedule {
    double beta_min = 0.1;
    double beta_max = 20.0;
    double T = 1.0;
    double eps = 1e-3;

    NoiseSchedule() = default;
    NoiseSchedule(double bmin, double bmax, double T_, double eps_);

    double log_alpha(double t) const;
    double alpha(double t) const;
    double sigma(double t) const;
    double lambda(double t) const;
    double t_of_lambda(double lam) const;  // |t - t_exact| <= 1e-12
    double beta(double t) const;
    double drift(double t) const;       // f(t) = -beta(t)/2
    double diffusion2(double t) const;  // g^2(t) = beta(t)
    double ratio(double t) const;       // sigma_t / alpha_t, strictly increasing

    // Smallest-noise time with sigma_t/alpha_t = C_s/sqrt(m), clipped to [eps, T].
    double solve_t_star(double C_s, double m) const;

private:
    void check_time(double t, double lo) const;
};

// t[0] = T > t[1] > ... > t[N] = eps with cached lambda/alpha/sigma values.
struct TimeGrid {
    std::vector<double> t;
    std::vector<double> lam;
    std::vector<double> al;
    std::vector<double> sg;
    Spacing spacing = Spacing::uniform_t;

    int steps() const { return static_cast<int>(t.size()) - 1; }
    double h(int i) const { return lam[i] - lam[i - 1]; }  // > 0 for i in [1, N]
    double h_max() const;
};

TimeGrid make_grid(const NoiseSchedule& sched, int N, Spacing spacing);

}  // namespace simdm
