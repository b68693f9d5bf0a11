#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "simdm/errors.hpp"
#include "simdm/measurement.hpp"

using namespace simdm;

namespace {
const double kSqrt2OverPi = std::sqrt(2.0 / M_PI);
}

TEST_CASE("link scalars and name round trips") {
    CHECK(link_scalar(LinkKind::linear, -1.3) == -1.3);
    CHECK(link_scalar(LinkKind::sign, 0.7) == 1.0);
    CHECK(link_scalar(LinkKind::sign, -0.2) == -1.0);
    CHECK(link_scalar(LinkKind::sign, 0.0) == 1.0);
    CHECK(link_scalar(LinkKind::cubic, -2.0) == -8.0);
    for (LinkKind k : {LinkKind::linear, LinkKind::sign, LinkKind::cubic})
        CHECK(link_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(link_kind_from_string("quadratic"), std::invalid_argument);
}

TEST_CASE("default noise placement is inside the sign link only") {
    CHECK(LinkSpec(LinkKind::sign, 0.1).position == NoisePosition::pre_link);
    CHECK(LinkSpec(LinkKind::linear, 0.1).position == NoisePosition::post_link);
    CHECK(LinkSpec(LinkKind::cubic, 0.1).position == NoisePosition::post_link);
}

TEST_CASE("apply_link output ranges and noise placement") {
    Rng rng(1);
    const VectorXd z = rng.normal_vec(200);

    Rng r0(2);
    const VectorXd y_sign = apply_link(LinkSpec(LinkKind::sign, 0.3), z, r0);
    for (int i = 0; i < y_sign.size(); ++i) CHECK(std::abs(y_sign[i]) == 1.0);

    // forcing the noise outside the sign link leaves {-1,+1} + noise
    Rng r1(2);
    const VectorXd y_post =
        apply_link(LinkSpec(LinkKind::sign, 0.3, NoisePosition::post_link), z, r1);
    int off_lattice = 0;
    for (int i = 0; i < y_post.size(); ++i)
        if (std::abs(std::abs(y_post[i]) - 1.0) > 1e-12) ++off_lattice;
    CHECK(off_lattice == 200);

    Rng r2(3);
    const VectorXd y_lin = apply_link(LinkSpec(LinkKind::linear, 0.0), z, r2);
    CHECK((y_lin - z).norm() == 0.0);

    // sigma = 0 must consume no random draws
    Rng r3(7);
    Rng r4(7);
    apply_link(LinkSpec(LinkKind::cubic, 0.0), z, r3);
    CHECK(r3.normal() == r4.normal());
}

TEST_CASE("sign link is invariant to positive rescaling of the input") {
    Rng rng(4);
    const VectorXd u = rng.normal_vec(50);
    Rng ra(5), rb(5);
    const LinkSpec link(LinkKind::sign, 0.0);
    const VectorXd y1 = apply_link(link, u, ra);
    const VectorXd y2 = apply_link(link, 3.0 * u, rb);
    CHECK((y1 - y2).norm() == 0.0);
}

TEST_CASE("make_instance is deterministic and normalizes the planted signal") {
    const LinkSpec link(LinkKind::sign, 0.05);
    VectorXd v = VectorXd::LinSpaced(6, 1.0, -2.0);
    const XStarSource src = XStarSource::explicit_vector(v);
    const SimInstance a = make_instance(6, 40, link, src, 99);
    const SimInstance b = make_instance(6, 40, link, src, 99);
    CHECK((a.A - b.A).norm() == 0.0);
    CHECK((a.y - b.y).norm() == 0.0);
    CHECK((a.x_star - b.x_star).norm() == 0.0);
    CHECK(a.x_star.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((a.x_star - v / v.norm()).norm() <= 1e-15);
    CHECK(a.A.rows() == 40);
    CHECK(a.A.cols() == 6);

    const SimInstance c = make_instance(6, 40, link, src, 100);
    CHECK((a.A - c.A).norm() > 0.0);

    CHECK_THROWS_AS(XStarSource::explicit_vector(VectorXd::Zero(6)), std::invalid_argument);
    CHECK_THROWS_AS(make_instance(5, 40, link, src, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_instance(6, 0, link, src, 1), std::invalid_argument);
}

TEST_CASE("noiseless linear instance reproduces y = A x_star") {
    Rng rng(6);
    VectorXd v = rng.normal_vec(5);
    const SimInstance inst =
        make_instance(5, 30, LinkSpec(LinkKind::linear, 0.0), XStarSource::explicit_vector(v), 7);
    CHECK((inst.y - inst.A * inst.x_star).norm() <= 1e-14);
}

TEST_CASE("back projection concentrates around mu x_star") {
    Rng rng(8);
    VectorXd v = rng.normal_vec(8);
    const XStarSource src = XStarSource::explicit_vector(v);

    // linear link: mu = 1
    {
        const SimInstance inst =
            make_instance(8, 100000, LinkSpec(LinkKind::linear, 0.0), src, 21);
        const VectorXd b = back_project(inst);
        CHECK((b - inst.x_star).norm() <= 0.05);
    }
    // sign link: mu = sqrt(2/pi)
    {
        const SimInstance inst = make_instance(8, 1000000, LinkSpec(LinkKind::sign, 0.0), src, 22);
        const VectorXd b = back_project(inst);
        CHECK((b - kSqrt2OverPi * inst.x_star).norm() <= 0.01);
    }
}

TEST_CASE("back projection of y = 0 is the zero vector") {
    MatrixXd A = MatrixXd::Random(10, 3);
    CHECK(back_project(A, VectorXd::Zero(10)).norm() == 0.0);
    CHECK_THROWS_AS(back_project(A, VectorXd::Zero(9)), std::invalid_argument);
}

TEST_CASE("estimate_mu hits the closed-form link coefficients") {
    const long S = 1000000;
    CHECK(estimate_mu(LinkSpec(LinkKind::linear, 0.0), S, 31) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(estimate_mu(LinkSpec(LinkKind::sign, 0.0), S, 32) ==
          doctest::Approx(kSqrt2OverPi).epsilon(0.01));
    // noise inside the sign link shrinks mu by 1/sqrt(1 + sigma^2)
    const double sigma = 0.05;
    CHECK(estimate_mu(LinkSpec(LinkKind::sign, sigma), S, 33) ==
          doctest::Approx(kSqrt2OverPi / std::sqrt(1.0 + sigma * sigma)).epsilon(0.01));
    // cubic: E[g^4] = 3
    CHECK(estimate_mu(LinkSpec(LinkKind::cubic, 0.0), S, 34) == doctest::Approx(3.0).epsilon(0.05));
    // additive noise is mean-zero and independent, so mu is unchanged
    CHECK(estimate_mu(LinkSpec(LinkKind::linear, 0.5), S, 35) ==
          doctest::Approx(1.0).epsilon(0.02));
    CHECK(estimate_mu(LinkSpec(LinkKind::sign, 0.0), S, 31) ==
          estimate_mu(LinkSpec(LinkKind::sign, 0.0), S, 31));  // seeded determinism
    CHECK_THROWS_AS(estimate_mu(LinkSpec(LinkKind::sign, 0.0), 0, 1), std::invalid_argument);
}

TEST_CASE("estimate_m2_m4 hits the gaussian moment oracles") {
    const long S = 1000000;
    const LinkMoments sm = estimate_m2_m4(LinkSpec(LinkKind::sign, 0.0), S, 41);
    CHECK(sm.m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sm.m4 == doctest::Approx(1.0).epsilon(1e-12));

    // cubic: E[g^6] = 15, E[g^12] = 10395
    const LinkMoments cm = estimate_m2_m4(LinkSpec(LinkKind::cubic, 0.0), S, 42);
    CHECK(cm.m2 == doctest::Approx(15.0).epsilon(0.05));
    CHECK(cm.m4 == doctest::Approx(10395.0).epsilon(0.10));

    const LinkMoments lm = estimate_m2_m4(LinkSpec(LinkKind::linear, 0.0), S, 43);
    CHECK(lm.m2 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(lm.m4 == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("prior_draw source realizes a unit vector from the predictor prior") {
    NoiseSchedule sched;
    GaussianPredictor pred(sched, VectorXd::Constant(4, 2.0), VectorXd::Constant(4, 0.01));
    const XStarSource src = XStarSource::prior_draw(pred);
    Rng rng(50);
    const VectorXd x = src.realize(4, rng);
    CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // tight prior around 2*ones: normalized draw stays near ones/2
    CHECK((x - VectorXd::Constant(4, 0.5)).norm() <= 0.1);
    CHECK_THROWS_AS(src.realize(5, rng), std::invalid_argument);
}
