#include "simdm/measurement.hpp"

#include <cmath>
#include <stdexcept>

#include "simdm/errors.hpp"

namespace simdm {

std::string to_string(LinkKind kind) {
    switch (kind) {
        case LinkKind::linear: return "linear";
        case LinkKind::sign: return "sign";
        case LinkKind::cubic: return "cubic";
    }
    return "?";
}

LinkKind link_kind_from_string(const std::string& name) {
    if (name == "linear") return LinkKind::linear;
    if (name == "sign") return LinkKind::sign;
    if (name == "cubic") return LinkKind::cubic;
    throw std::invalid_argument("unknown link kind: " + name);
}

double link_scalar(LinkKind kind, double z) {
    switch (kind) {
        case LinkKind::linear: return z;
        case LinkKind::sign: return z >= 0.0 ? 1.0 : -1.0;
        case LinkKind::cubic: return z * z * z;
    }
    return 0.0;
}

VectorXd apply_link(const LinkSpec& link, const VectorXd& z, Rng& rng) {
    VectorXd y(z.size());
    const bool noisy = link.noise_sigma > 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        double zi = z[i];
        double add = 0.0;
        if (noisy) {
            const double e = link.noise_sigma * rng.normal();
            if (link.position == NoisePosition::pre_link)
                zi += e;
            else
                add = e;
        }
        y[i] = link_scalar(link.kind, zi) + add;
    }
    return y;
}

XStarSource XStarSource::explicit_vector(VectorXd v) {
    if (v.size() < 1) throw std::invalid_argument("x_star: empty vector");
    if (!v.allFinite() || v.norm() == 0.0)
        throw std::invalid_argument("x_star: vector must be finite and nonzero");
    XStarSource s;
    s.v_ = std::move(v);
    return s;
}

XStarSource XStarSource::prior_draw(const DataPredictor& pred) {
    XStarSource s;
    s.pred_ = &pred;
    return s;
}

VectorXd XStarSource::realize(int n, Rng& rng) const {
    VectorXd v;
    if (pred_ != nullptr) {
        if (pred_->dim() != n)
            throw std::invalid_argument("x_star: prior dimension does not match n");
        v = pred_->sample_prior(rng);
    } else {
        if (v_.size() != n)
            throw std::invalid_argument("x_star: vector length does not match n");
        v = v_;
    }
    const double nrm = v.norm();
    if (nrm == 0.0) throw NumericError("x_star: drew a zero vector");
    return v / nrm;
}

SimInstance make_instance(int n, int m, const LinkSpec& link, const XStarSource& source,
                          std::uint64_t seed) {
    if (n < 1 || m < 1) throw std::invalid_argument("make_instance: need n >= 1 and m >= 1");
    if (link.noise_sigma < 0.0 || !std::isfinite(link.noise_sigma))
        throw std::invalid_argument("make_instance: noise_sigma must be finite and >= 0");
    Rng rng(seed);
    SimInstance inst;
    inst.link = link;
    inst.seed = seed;
    inst.x_star = source.realize(n, rng);
    inst.A.resize(m, n);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) inst.A(r, c) = rng.normal();
    inst.y = apply_link(link, inst.A * inst.x_star, rng);
    return inst;
}

VectorXd back_project(const MatrixXd& A, const VectorXd& y) {
    if (A.rows() != y.size()) throw std::invalid_argument("back_project: A and y disagree on m");
    if (A.rows() < 1) throw std::invalid_argument("back_project: empty system");
    return (A.transpose() * y) / static_cast<double>(A.rows());
}

VectorXd back_project(const SimInstance& inst) { return back_project(inst.A, inst.y); }

namespace {

// One scalar output of the link fed with a standard normal, noise included.
double draw_link_output(const LinkSpec& link, Rng& rng) {
    const double g = rng.normal();
    double z = g, add = 0.0;
    if (link.noise_sigma > 0.0) {
        const double e = link.noise_sigma * rng.normal();
        if (link.position == NoisePosition::pre_link)
            z += e;
        else
            add = e;
    }
    return link_scalar(link.kind, z) + add;
}

}  // namespace

double estimate_mu(const LinkSpec& link, long samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("estimate_mu: samples must be >= 1");
    Rng rng(seed);
    double acc = 0.0;
    for (long s = 0; s < samples; ++s) {
        const double g = rng.normal();
        double z = g, add = 0.0;
        if (link.noise_sigma > 0.0) {
            const double e = link.noise_sigma * rng.normal();
            if (link.position == NoisePosition::pre_link)
                z += e;
            else
                add = e;
        }
        acc += g * (link_scalar(link.kind, z) + add);
    }
    return acc / static_cast<double>(samples);
}

LinkMoments estimate_m2_m4(const LinkSpec& link, long samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("estimate_m2_m4: samples must be >= 1");
    Rng rng(seed);
    double s2 = 0.0, s4 = 0.0;
    for (long s = 0; s < samples; ++s) {
        const double f = draw_link_output(link, rng);
        const double f2 = f * f;
        s2 += f2;
        s4 += f2 * f2;
    }
    return {s2 / static_cast<double>(samples), s4 / static_cast<double>(samples)};
}

}  // namespace simdm
