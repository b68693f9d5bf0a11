#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "simdm/schedule.hpp"

using namespace simdm;

// High-precision closed-form evaluations frozen as literals (defaults
// beta_min=0.1, beta_max=20, T=1, eps=0.001).
namespace {
constexpr double kAlphaAtT = 0.0065715864949296150;   // exp(-5.025)
constexpr double kLambdaEps = 4.5577149327298977;
constexpr double kLambdaT = -5.0249784066592042;
constexpr double kRatioEps = 0.010485992786702986;    // sigma/alpha at eps
constexpr double kRatioT = 152.16697028394647;
constexpr double kLambdaZeroT = 0.25896026243279659;  // t with alpha = sigma
constexpr double kTStar25_256 = 0.044466824966815437;
}  // namespace

TEST_CASE("construction validates parameters") {
    CHECK_NOTHROW(NoiseSchedule());
    CHECK_NOTHROW(NoiseSchedule(0.1, 20.0, 1.0, 1e-3));
    CHECK_THROWS_AS(NoiseSchedule(0.0, 20.0, 1.0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSchedule(-1.0, 20.0, 1.0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSchedule(5.0, 1.0, 1.0, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSchedule(0.1, 20.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSchedule(0.1, 20.0, 0.5, 0.6), std::invalid_argument);
}

TEST_CASE("alpha and sigma closed forms") {
    NoiseSchedule s;
    CHECK(s.alpha(0.0) == 1.0);
    CHECK(s.sigma(0.0) == 0.0);
    CHECK(s.log_alpha(1.0) == doctest::Approx(-5.025).epsilon(1e-14));
    CHECK(s.alpha(1.0) == doctest::Approx(kAlphaAtT).epsilon(1e-13));
    for (double t : {1e-3, 0.05, 0.25, 0.37, 0.5, 0.75, 1.0}) {
        const double a = s.alpha(t), g = s.sigma(t);
        CHECK(a * a + g * g == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(s.sigma(1e-3) > 0.0);
    CHECK_THROWS_AS(s.alpha(-0.1), std::domain_error);
    CHECK_THROWS_AS(s.alpha(1.1), std::domain_error);
    CHECK_THROWS_AS(s.sigma(2.0), std::domain_error);
}

TEST_CASE("monotonicity of alpha, sigma, lambda") {
    NoiseSchedule s;
    double prev_a = s.alpha(s.eps), prev_g = s.sigma(s.eps), prev_l = s.lambda(s.eps);
    for (int i = 1; i <= 40; ++i) {
        const double t = s.eps + (s.T - s.eps) * i / 40.0;
        const double a = s.alpha(t), g = s.sigma(t), l = s.lambda(t);
        CHECK(a < prev_a);
        CHECK(g > prev_g);
        CHECK(l < prev_l);
        prev_a = a;
        prev_g = g;
        prev_l = l;
    }
}

TEST_CASE("lambda endpoints and the zero crossing") {
    NoiseSchedule s;
    CHECK(s.lambda(s.eps) == doctest::Approx(kLambdaEps).epsilon(1e-12));
    CHECK(s.lambda(s.T) == doctest::Approx(kLambdaT).epsilon(1e-12));
    CHECK(s.lambda(s.eps) > s.lambda(s.T));
    const double t0 = s.t_of_lambda(0.0);
    CHECK(t0 == doctest::Approx(kLambdaZeroT).epsilon(1e-10));
    CHECK(s.alpha(t0) == doctest::Approx(s.sigma(t0)).epsilon(1e-10));
    CHECK_THROWS_AS(s.lambda(0.0), std::domain_error);
}

TEST_CASE("t_of_lambda inverts lambda") {
    NoiseSchedule s;
    CHECK(s.t_of_lambda(s.lambda(0.37)) == doctest::Approx(0.37).epsilon(1e-10));
    for (double t : {1e-3, 0.01, 0.1, 0.37, 0.6, 0.9, 1.0})
        CHECK(std::abs(s.t_of_lambda(s.lambda(t)) - t) <= 1e-10);
    CHECK_THROWS_AS(s.t_of_lambda(kLambdaEps + 1.0), std::domain_error);
    CHECK_THROWS_AS(s.t_of_lambda(kLambdaT - 1.0), std::domain_error);
}

TEST_CASE("drift and diffusion match the linear beta family") {
    NoiseSchedule s;
    CHECK(s.beta(0.37) == doctest::Approx(7.463).epsilon(1e-13));
    CHECK(s.drift(0.0) == doctest::Approx(-0.05).epsilon(1e-13));
    CHECK(s.diffusion2(0.0) == doctest::Approx(0.1).epsilon(1e-13));
    for (double t : {0.2, 0.37, 0.8, 1.0}) {
        CHECK(s.drift(t) == doctest::Approx(-0.5 * s.beta(t)).epsilon(1e-13));
        CHECK(s.diffusion2(t) == doctest::Approx(s.beta(t)).epsilon(1e-13));
        CHECK(s.diffusion2(t) >= 0.0);
    }
}

TEST_CASE("drift agrees with a central difference of log alpha") {
    NoiseSchedule s;
    const double dt = 1e-6;
    for (double t : {0.1, 0.37, 0.5, 0.9}) {
        const double fd = (s.log_alpha(t + dt) - s.log_alpha(t - dt)) / (2.0 * dt);
        CHECK(std::abs(s.drift(t) - fd) <= 1e-6);
    }
}

TEST_CASE("grids have exact endpoints and positive lambda steps") {
    NoiseSchedule s;
    for (Spacing sp : {Spacing::uniform_t, Spacing::uniform_lambda}) {
        for (int N : {1, 2, 7, 50}) {
            const TimeGrid g = make_grid(s, N, sp);
            REQUIRE(g.steps() == N);
            CHECK(g.t[0] == s.T);
            CHECK(g.t[N] == s.eps);
            for (int i = 1; i <= N; ++i) {
                CHECK(g.t[i] < g.t[i - 1]);
                CHECK(g.h(i) > 0.0);
            }
        }
    }
    CHECK_THROWS_AS(make_grid(s, 0, Spacing::uniform_t), std::invalid_argument);
}

TEST_CASE("grid spacing families") {
    NoiseSchedule s;
    const TimeGrid gt = make_grid(s, 50, Spacing::uniform_t);
    CHECK(gt.t[1] == doctest::Approx(1.0 - 0.999 / 50.0).epsilon(1e-14));
    for (int i = 1; i <= 50; ++i)
        CHECK(gt.t[i - 1] - gt.t[i] == doctest::Approx(0.999 / 50.0).epsilon(1e-10));

    const TimeGrid gl = make_grid(s, 50, Spacing::uniform_lambda);
    const double h1 = gl.h(1);
    for (int i = 2; i <= 50; ++i) CHECK(gl.h(i) == doctest::Approx(h1).epsilon(1e-9));

    const TimeGrid tiny = make_grid(s, 1, Spacing::uniform_t);
    CHECK(tiny.t.size() == 2);
    CHECK(tiny.t[0] == s.T);
    CHECK(tiny.t[1] == s.eps);
}

TEST_CASE("doubling N shrinks h_max") {
    NoiseSchedule s;
    for (Spacing sp : {Spacing::uniform_t, Spacing::uniform_lambda}) {
        double prev = make_grid(s, 10, sp).h_max();
        for (int N : {20, 40, 80}) {
            const double cur = make_grid(s, N, sp).h_max();
            CHECK(cur < prev);
            if (sp == Spacing::uniform_lambda) CHECK(cur == doctest::Approx(prev / 2).epsilon(0.1));
            prev = cur;
        }
    }
}

TEST_CASE("ratio is strictly decreasing and spans the frozen endpoints") {
    NoiseSchedule s;
    CHECK(s.ratio(s.eps) == doctest::Approx(kRatioEps).epsilon(1e-12));
    CHECK(s.ratio(s.T) == doctest::Approx(kRatioT).epsilon(1e-12));
    double prev = s.ratio(s.eps);
    for (int i = 1; i <= 30; ++i) {
        const double t = s.eps + (s.T - s.eps) * i / 30.0;
        CHECK(s.ratio(t) > prev);
        prev = s.ratio(t);
    }
}

TEST_CASE("solve_t_star hits the target ratio") {
    NoiseSchedule s;
    const double ts = s.solve_t_star(2.5, 256);
    CHECK(ts == doctest::Approx(kTStar25_256).epsilon(1e-10));
    CHECK(std::abs(s.ratio(ts) - 2.5 / 16.0) <= 1e-10);

    // alpha^2 = 1 / (1 + C_s^2 / m) at the solution
    for (auto [C, m] : {std::pair{1.0, 100}, {2.5, 256}, {0.5, 64}}) {
        const double t = s.solve_t_star(C, m);
        const double a = s.alpha(t);
        CHECK(a * a == doctest::Approx(1.0 / (1.0 + C * C / m)).epsilon(1e-9));
    }
}

TEST_CASE("solve_t_star clips at both ends") {
    NoiseSchedule s;
    CHECK(s.solve_t_star(1e-4, 1000000) == s.eps);  // target below sigma_eps/alpha_eps
    CHECK(s.solve_t_star(200.0, 1) == s.T);         // target above sigma_T/alpha_T
    CHECK_THROWS_AS(s.solve_t_star(0.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(s.solve_t_star(-1.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(s.solve_t_star(1.0, 0), std::invalid_argument);
}

TEST_CASE("solve_t_star is monotone in C_s and m") {
    NoiseSchedule s;
    double prev = 0.0;
    for (double C : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        const double t = s.solve_t_star(C, 256);
        CHECK(t >= prev);
        prev = t;
    }
    prev = s.T;
    for (int m : {1, 4, 16, 64, 256, 4096}) {
        const double t = s.solve_t_star(1.0, m);
        CHECK(t <= prev);
        prev = t;
    }
}
