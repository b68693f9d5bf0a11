#pragma once

#include <memory>
#include <string>

#include <Eigen/Dense>

#include "simdm/rng.hpp"
#include "simdm/schedule.hpp"

namespace simdm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Analytic data-prediction models: predict(x, t) is the exact posterior mean
// E[x0 | x_t = x] for a tractable prior, so solvers run with no learned parts.
class DataPredictor {
public:
    virtual ~DataPredictor() = default;

    virtual int dim() const = 0;
    virtual VectorXd predict(const VectorXd& x, double t) const = 0;
    // Certified bound on ||predict(x1,t) - predict(x2,t)|| / ||x1 - x2||.
    virtual double lipschitz_at(double t) const = 0;
    virtual VectorXd sample_prior(Rng& rng) const = 0;
    virtual std::string kind() const = 0;

    // (x - alpha_t * predict) / sigma_t
    VectorXd noise_from_data(const VectorXd& x, double t) const;
    // alpha_t * x0 + sigma_t * z for x0 from the prior, z standard normal.
    VectorXd sample_marginal(double t, Rng& rng) const;

    const NoiseSchedule& schedule() const { return sched_; }

protected:
    explicit DataPredictor(const NoiseSchedule& sched) : sched_(sched) {}
    void check_input(const VectorXd& x, double t) const;
    NoiseSchedule sched_;
};

// Point mass at c: predict == c, Lipschitz 0. Exactness oracle for the solvers.
class ConstantPredictor final : public DataPredictor {
public:
    ConstantPredictor(const NoiseSchedule& sched, VectorXd c);
    int dim() const override { return static_cast<int>(c_.size()); }
    VectorXd predict(const VectorXd& x, double t) const override;
    double lipschitz_at(double t) const override;
    VectorXd sample_prior(Rng& rng) const override;
    std::string kind() const override { return "constant"; }

private:
    VectorXd c_;
};

// N(m0, diag(s2)) prior; predict is the coordinate-wise posterior mean.
class GaussianPredictor final : public DataPredictor {
public:
    GaussianPredictor(const NoiseSchedule& sched, VectorXd m0, VectorXd s2);
    int dim() const override { return static_cast<int>(m0_.size()); }
    VectorXd predict(const VectorXd& x, double t) const override;
    double lipschitz_at(double t) const override;
    VectorXd sample_prior(Rng& rng) const override;
    std::string kind() const override { return "gaussian"; }

private:
    VectorXd m0_, s2_;
};

// Mixture of diagonal Gaussians. predict combines per-component posterior
// means with log-sum-exp stabilized responsibilities.
class GmmPredictor final : public DataPredictor {
public:
    // weights: K, means: K x n, vars: K x n (per-component diagonal variances).
    GmmPredictor(const NoiseSchedule& sched, VectorXd weights, MatrixXd means, MatrixXd vars);
    int dim() const override { return static_cast<int>(mu_.cols()); }
    VectorXd predict(const VectorXd& x, double t) const override;
    // Certified for a variance vector shared by all components (the mixtures
    // this library constructs); throws otherwise.
    double lipschitz_at(double t) const override;
    VectorXd sample_prior(Rng& rng) const override;
    std::string kind() const override { return "gmm"; }

    VectorXd responsibilities(const VectorXd& x, double t) const;
    int components() const { return static_cast<int>(w_.size()); }

private:
    VectorXd w_;
    MatrixXd mu_, s2_;
    bool shared_var_ = true;
};

// K orthonormal rows obtained by Gram-Schmidt on seeded normal draws.
MatrixXd orthonormal_modes(int K, int n, std::uint64_t seed);

}  // namespace simdm
