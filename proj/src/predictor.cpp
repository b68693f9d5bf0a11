#include "simdm/predictor.hpp"

#include <cmath>
#include <stdexcept>

namespace simdm {

void DataPredictor::check_input(const VectorXd& x, double t) const {
    if (x.size() != dim()) throw std::invalid_argument("predictor: input dimension mismatch");
    if (!x.allFinite()) throw std::invalid_argument("predictor: non-finite input");
    if (!(t > 0.0) || !(t <= sched_.T)) throw std::domain_error("predictor: t outside (0, T]");
}

VectorXd DataPredictor::noise_from_data(const VectorXd& x, double t) const {
    const double s = sched_.sigma(t);
    if (!(s > 0.0)) throw std::domain_error("noise_from_data: sigma_t = 0");
    return (x - sched_.alpha(t) * predict(x, t)) / s;
}

VectorXd DataPredictor::sample_marginal(double t, Rng& rng) const {
    const VectorXd x0 = sample_prior(rng);
    return sched_.alpha(t) * x0 + sched_.sigma(t) * rng.normal_vec(x0.size());
}

ConstantPredictor::ConstantPredictor(const NoiseSchedule& sched, VectorXd c)
    : DataPredictor(sched), c_(std::move(c)) {
    if (c_.size() == 0) throw std::invalid_argument("constant predictor: empty vector");
}

VectorXd ConstantPredictor::predict(const VectorXd& x, double t) const {
    check_input(x, t);
    return c_;
}

double ConstantPredictor::lipschitz_at(double) const { return 0.0; }

VectorXd ConstantPredictor::sample_prior(Rng&) const { return c_; }

GaussianPredictor::GaussianPredictor(const NoiseSchedule& sched, VectorXd m0, VectorXd s2)
    : DataPredictor(sched), m0_(std::move(m0)), s2_(std::move(s2)) {
    if (m0_.size() == 0 || m0_.size() != s2_.size())
        throw std::invalid_argument("gaussian predictor: mean/variance size mismatch");
    if ((s2_.array() <= 0.0).any())
        throw std::invalid_argument("gaussian predictor: variances must be positive");
}

VectorXd GaussianPredictor::predict(const VectorXd& x, double t) const {
    check_input(x, t);
    const double a = sched_.alpha(t), s2t = 1.0 - a * a;
    VectorXd out(dim());
    for (int j = 0; j < dim(); ++j) {
        const double v = a * a * s2_[j] + s2t;
        out[j] = (a * s2_[j] * x[j] + s2t * m0_[j]) / v;
    }
    return out;
}

double GaussianPredictor::lipschitz_at(double t) const {
    const double a = sched_.alpha(t), s2t = 1.0 - a * a;
    double L = 0.0;
    for (int j = 0; j < dim(); ++j) L = std::max(L, a * s2_[j] / (a * a * s2_[j] + s2t));
    return L;
}

VectorXd GaussianPredictor::sample_prior(Rng& rng) const {
    return m0_ + s2_.cwiseSqrt().cwiseProduct(rng.normal_vec(dim()));
}

GmmPredictor::GmmPredictor(const NoiseSchedule& sched, VectorXd weights, MatrixXd means,
                           MatrixXd vars)
    : DataPredictor(sched), w_(std::move(weights)), mu_(std::move(means)), s2_(std::move(vars)) {
    const int K = static_cast<int>(w_.size());
    if (K < 1) throw std::invalid_argument("gmm predictor: need at least one component");
    if (mu_.rows() != K || s2_.rows() != K || mu_.cols() != s2_.cols() || mu_.cols() < 1)
        throw std::invalid_argument("gmm predictor: weights/means/vars shape mismatch");
    if ((w_.array() <= 0.0).any() || std::abs(w_.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("gmm predictor: weights must be positive and sum to 1");
    if ((s2_.array() <= 0.0).any())
        throw std::invalid_argument("gmm predictor: variances must be positive");
    for (int k = 1; k < K && shared_var_; ++k)
        if ((s2_.row(k) - s2_.row(0)).cwiseAbs().maxCoeff() > 0.0) shared_var_ = false;
}

VectorXd GmmPredictor::responsibilities(const VectorXd& x, double t) const {
    check_input(x, t);
    const double a = sched_.alpha(t), s2t = 1.0 - a * a;
    const int K = components(), n = dim();
    VectorXd ll(K);
    for (int k = 0; k < K; ++k) {
        double q = 0.0, logdet = 0.0;
        for (int j = 0; j < n; ++j) {
            const double v = a * a * s2_(k, j) + s2t;
            const double d = x[j] - a * mu_(k, j);
            q += d * d / v;
            logdet += std::log(v);
        }
        ll[k] = std::log(w_[k]) - 0.5 * (q + logdet);
    }
    const double top = ll.maxCoeff();
    VectorXd rho = (ll.array() - top).exp();
    rho /= rho.sum();
    return rho;
}

VectorXd GmmPredictor::predict(const VectorXd& x, double t) const {
    const VectorXd rho = responsibilities(x, t);
    const double a = sched_.alpha(t), s2t = 1.0 - a * a;
    const int K = components(), n = dim();
    VectorXd out = VectorXd::Zero(n);
    for (int k = 0; k < K; ++k) {
        if (rho[k] == 0.0) continue;
        for (int j = 0; j < n; ++j) {
            const double v = a * a * s2_(k, j) + s2t;
            out[j] += rho[k] * (a * s2_(k, j) * x[j] + s2t * mu_(k, j)) / v;
        }
    }
    return out;
}

double GmmPredictor::lipschitz_at(double t) const {
    if (!shared_var_)
        throw std::domain_error(
            "gmm predictor: certified Lipschitz bound requires a shared variance vector");
    const double a = sched_.alpha(t), s2t = 1.0 - a * a;
    const int n = dim();
    // d predict / dx = (alpha/sigma^2) Cov[x0|x_t]; the posterior covariance is
    // the within-component part plus the spread of the component posterior
    // means, which for shared variances is sigma^4 (mu_j - mu_k) / v and of
    // operator norm at most the squared half-diameter.
    double base = 0.0;
    VectorXd vinv(n);
    for (int j = 0; j < n; ++j) {
        const double v = a * a * s2_(0, j) + s2t;
        base = std::max(base, a * s2_(0, j) / v);
        vinv[j] = 1.0 / v;
    }
    double diam2 = 0.0;
    for (int k = 0; k < components(); ++k)
        for (int l = k + 1; l < components(); ++l) {
            const VectorXd d = (mu_.row(k) - mu_.row(l)).transpose().cwiseProduct(vinv);
            diam2 = std::max(diam2, d.squaredNorm());
        }
    return base + 0.25 * a * s2t * diam2;
}

VectorXd GmmPredictor::sample_prior(Rng& rng) const {
    const double u = rng.uniform();
    int k = 0;
    double acc = w_[0];
    while (u >= acc && k + 1 < components()) acc += w_[++k];
    return mu_.row(k).transpose() +
           s2_.row(k).transpose().cwiseSqrt().cwiseProduct(rng.normal_vec(dim()));
}

MatrixXd orthonormal_modes(int K, int n, std::uint64_t seed) {
    if (K < 1 || n < K) throw std::invalid_argument("orthonormal_modes: need 1 <= K <= n");
    Rng rng(seed);
    MatrixXd M(K, n);
    for (int k = 0; k < K; ++k) {
        VectorXd v = rng.normal_vec(n);
        for (int j = 0; j < k; ++j) v -= M.row(j).dot(v) * M.row(j).transpose();
        const double nrm = v.norm();
        if (nrm < 1e-8) throw std::runtime_error("orthonormal_modes: degenerate draw");
        M.row(k) = v.transpose() / nrm;
    }
    return M;
}

}  // namespace simdm
