#pragma once

#include <cstdint>
#include <string>

#include "simdm/predictor.hpp"
#include "simdm/rng.hpp"

namespace simdm {

enum class LinkKind { linear, sign, cubic };

enum class NoisePosition { pre_link, post_link };

std::string to_string(LinkKind kind);
LinkKind link_kind_from_string(const std::string& name);

// sign(0) := +1 so the sign link maps into {-1, +1} exactly.
double link_scalar(LinkKind kind, double z);

struct LinkSpec {
    LinkKind kind = LinkKind::sign;
    double noise_sigma = 0.0;
    NoisePosition position = NoisePosition::pre_link;

    LinkSpec() = default;
    // Default noise placement: inside the sign link, additive otherwise.
    LinkSpec(LinkKind k, double sigma)
        : kind(k),
          noise_sigma(sigma),
          position(k == LinkKind::sign ? NoisePosition::pre_link : NoisePosition::post_link) {}
    LinkSpec(LinkKind k, double sigma, NoisePosition pos)
        : kind(k), noise_sigma(sigma), position(pos) {}
};

// Applies the link entrywise, drawing one noise variate per entry when
// noise_sigma > 0 and none otherwise.
VectorXd apply_link(const LinkSpec& link, const VectorXd& z, Rng& rng);

// Where the planted signal comes from: a fixed vector or a prior draw.
// Either way the realized signal is normalized to unit length.
class XStarSource {
public:
    static XStarSource explicit_vector(VectorXd v);
    static XStarSource prior_draw(const DataPredictor& pred);
    VectorXd realize(int n, Rng& rng) const;

private:
    XStarSource() = default;
    VectorXd v_;
    const DataPredictor* pred_ = nullptr;
};

struct SimInstance {
    MatrixXd A;       // m x n, iid standard normal
    VectorXd x_star;  // unit norm
    VectorXd y;       // link outputs
    LinkSpec link;
    std::uint64_t seed = 0;
};

// Single seeded stream, drawn in the order x_star, A (row by row), noise.
SimInstance make_instance(int n, int m, const LinkSpec& link, const XStarSource& source,
                          std::uint64_t seed);

// b = (1/m) A^T y.
VectorXd back_project(const MatrixXd& A, const VectorXd& y);
VectorXd back_project(const SimInstance& inst);

// Monte Carlo moments of the link under a standard normal input, noise
// placed per the LinkSpec: mu = E[g f(g)], m2 = E[f^2], m4 = E[f^4].
double estimate_mu(const LinkSpec& link, long samples, std::uint64_t seed);

struct LinkMoments {
    double m2 = 0.0;
    double m4 = 0.0;
};
LinkMoments estimate_m2_m4(const LinkSpec& link, long samples, std::uint64_t seed);

}  // namespace simdm
