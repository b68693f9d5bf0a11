#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "simdm/config.hpp"
#include "simdm/io.hpp"

using namespace simdm;

namespace {

std::string temp_path(const std::string& stem) {
    return "/tmp/simdm_test_" + stem + "_" + std::to_string(::getpid()) + ".txt";
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& stem, const std::string& content = "")
        : path(temp_path(stem)) {
        if (!content.empty()) {
            std::ofstream f(path);
            f << content;
        }
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("an empty config yields the documented defaults") {
    const ExperimentConfig cfg = parse_config_text("");
    CHECK(cfg.beta_min == 0.1);
    CHECK(cfg.beta_max == 20.0);
    CHECK(cfg.T == 1.0);
    CHECK(cfg.eps == 1e-3);
    CHECK(cfg.N_samp == 100);
    CHECK(cfg.N_inv == 50);
    CHECK(cfg.spacing == Spacing::uniform_t);
    CHECK(cfg.predictor_kind == "gmm");
    CHECK(cfg.link_kind == LinkKind::sign);
    CHECK(cfg.link_sigma == 0.05);
    CHECK(cfg.methods.size() == 1);
    CHECK(cfg.methods[0] == RecoveryMethod::sim_dmis);
    CHECK(std::isnan(cfg.C_s));
    CHECK(std::isnan(cfg.C_s_prime));
    CHECK(cfg.n == 32);
    CHECK(cfg.m_list == std::vector<int>{256});
    CHECK(cfg.trials == 1);
    CHECK(cfg.sampler == SamplerMethod::ddim);
    CHECK(cfg.inverter == InverterMethod::second_order);
}

TEST_CASE("block syntax, comments and lists parse") {
    const char* text = R"(# run description
[schedule]
beta_min = 0.2
beta_max = 15
T = 1.0
eps = 0.002

[grid]
N_samp = 40
N_inv = 20
spacing = uniform_lambda

[predictor]
kind = gaussian
mean = 0.5
var = 0.25

[link]
kind = cubic
sigma = 0.1
noise_position = pre

; alternate comment style
[recovery]
method = sim_dms, sim_dmfis
C_s = 2.5
C_s_prime = 1.25
sampler = dm2m
inverter = first_order

[run]
n = 8
m_list = 64, 128, 256
trials = 5
base_seed = 42
)";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.beta_min == 0.2);
    CHECK(cfg.beta_max == 15.0);
    CHECK(cfg.eps == 0.002);
    CHECK(cfg.N_samp == 40);
    CHECK(cfg.spacing == Spacing::uniform_lambda);
    CHECK(cfg.predictor_kind == "gaussian");
    CHECK(cfg.gaussian_mean == 0.5);
    CHECK(cfg.gaussian_var == 0.25);
    CHECK(cfg.link_kind == LinkKind::cubic);
    CHECK(cfg.link_sigma == 0.1);
    CHECK(cfg.noise_position == "pre");
    REQUIRE(cfg.methods.size() == 2);
    CHECK(cfg.methods[0] == RecoveryMethod::sim_dms);
    CHECK(cfg.methods[1] == RecoveryMethod::sim_dmfis);
    CHECK(cfg.C_s == 2.5);
    CHECK(cfg.sampler == SamplerMethod::dm2m);
    CHECK(cfg.inverter == InverterMethod::first_order);
    CHECK(cfg.n == 8);
    CHECK(cfg.m_list == std::vector<int>{64, 128, 256});
    CHECK(cfg.trials == 5);
    CHECK(cfg.base_seed == 42);
}

TEST_CASE("bare dotted keys work without block headers") {
    const ExperimentConfig cfg = parse_config_text(
        "schedule.beta_min = 0.3\n"
        "run.n = 12\n"
        "recovery.method = sim_dmfis\n");
    CHECK(cfg.beta_min == 0.3);
    CHECK(cfg.n == 12);
    CHECK(cfg.methods[0] == RecoveryMethod::sim_dmfis);
}

TEST_CASE("malformed configs raise ConfigError with the offending field") {
    auto field_of = [](const std::string& text) {
        try {
            parse_config_text(text);
        } catch (const ConfigError& e) {
            return std::string(e.field());
        }
        return std::string("<no error>");
    };
    CHECK(field_of("[schedule]\nbeta_mni = 0.1\n") == "schedule.beta_mni");
    CHECK(field_of("[scheduel]\nbeta_min = 0.1\n") == "scheduel");
    CHECK(field_of("[run]\nn = 4\nn = 5\n") == "run.n");
    CHECK(field_of("[run]\nn = four\n") == "run.n");
    CHECK(field_of("n = 4\n") == "n");  // bare key outside any block
    CHECK(field_of("[run]\nn 4\n") == "line 2");  // no '=' to split on
    CHECK(field_of("[schedule]\nbeta_max = 0.05\n") == "schedule.beta_max");  // <= beta_min
    CHECK(field_of("[schedule]\neps = 2\n") == "schedule.eps");              // >= T
    CHECK(field_of("[grid]\nN_samp = 0\n") == "grid.N_samp");
    CHECK(field_of("[grid]\nspacing = log\n") == "grid.spacing");
    CHECK(field_of("[run]\nn = 0\n") == "run.n");
    CHECK(field_of("[run]\ntrials = 0\n") == "run.trials");
    CHECK(field_of("[run]\nm_list = 64, -2\n") == "run.m_list");
    CHECK(field_of("[run]\nm_list = 64.5\n") == "run.m_list");
    CHECK(field_of("[recovery]\nC_s = -1\n") == "recovery.C_s");
    CHECK(field_of("[recovery]\nmethod = sim_x\n") == "recovery.method");
    CHECK(field_of("[recovery]\nsampler = euler\n") == "recovery.sampler");
    CHECK(field_of("[recovery]\ninverter = exact\n") == "recovery.inverter");
    CHECK(field_of("[link]\nkind = tanh\n") == "link.kind");
    CHECK(field_of("[link]\nsigma = -0.1\n") == "link.sigma");
    CHECK(field_of("[link]\nnoise_position = inside\n") == "link.noise_position");
    CHECK(field_of("[predictor]\nkind = vae\n") == "predictor.kind");
    CHECK(field_of("[predictor]\nvar = 0\n") == "predictor.var");
    CHECK(field_of("[verify]\ntrials_lemma1 = 50\n") == "verify.trials_lemma1");
}

TEST_CASE("run.m is accepted as a single-entry alias for m_list") {
    const ExperimentConfig cfg = parse_config_text("[run]\nm = 512\n");
    CHECK(cfg.m_list == std::vector<int>{512});
    CHECK(parse_config_text("[run]\nm_list = 1, 2\n").m_list == std::vector<int>{1, 2});
}

TEST_CASE("builders assemble schedule, link and predictors") {
    ExperimentConfig cfg = parse_config_text(
        "[schedule]\nbeta_min = 0.2\nbeta_max = 10\n"
        "[link]\nkind = sign\nsigma = 0.3\nnoise_position = post\n");
    const NoiseSchedule sched = build_schedule(cfg);
    CHECK(sched.beta_min == 0.2);
    CHECK(sched.beta_max == 10.0);
    const LinkSpec link = build_link(cfg);
    CHECK(link.kind == LinkKind::sign);
    CHECK(link.noise_sigma == 0.3);
    CHECK(link.position == NoisePosition::post_link);
    // default placement comes back when the override is absent
    cfg.noise_position.clear();
    CHECK(build_link(cfg).position == NoisePosition::pre_link);

    ExperimentConfig g = parse_config_text(
        "[run]\nn = 6\n[predictor]\nkind = gmm\nmodes = 3\nvar = 0.04\nmode_seed = 11\n");
    const auto pred = build_predictor(g, build_schedule(g));
    CHECK(pred->dim() == 6);
    CHECK(pred->kind() == "gmm");

    ExperimentConfig c = parse_config_text("[run]\nn = 4\n[predictor]\nkind = constant\nvalue = 0.7\n");
    const auto cpred = build_predictor(c, build_schedule(c));
    Rng rng(1);
    CHECK((cpred->sample_prior(rng) - VectorXd::Constant(4, 0.7)).norm() == 0.0);
}

TEST_CASE("file-backed predictor parameters load and validate") {
    VectorXd mean(3);
    mean << 0.1, -0.2, 0.3;
    std::ostringstream ms;
    write_vector(ms, mean);
    TempFile mf("mean", ms.str());
    ExperimentConfig cfg = parse_config_text(
        "[run]\nn = 3\n[predictor]\nkind = gaussian\nmean_file = " + mf.path + "\nvar = 0.5\n");
    const auto pred = build_predictor(cfg, build_schedule(cfg));
    const double t = 0.4;
    Rng rng(2);
    const VectorXd x = rng.normal_vec(3);
    // posterior mean interpolates input and prior mean coordinatewise
    const NoiseSchedule sched = build_schedule(cfg);
    const double a = sched.alpha(t), s2 = sched.sigma(t) * sched.sigma(t);
    const VectorXd want = (0.5 * a * x + s2 * mean) / (a * a * 0.5 + s2);
    CHECK((pred->predict(x, t) - want).norm() <= 1e-12);

    // dimension mismatch against run.n
    ExperimentConfig bad = parse_config_text(
        "[run]\nn = 4\n[predictor]\nkind = gaussian\nmean_file = " + mf.path + "\n");
    CHECK_THROWS_AS(build_predictor(bad, build_schedule(bad)), ConfigError);

    MatrixXd means(2, 3);
    means << 1, 0, 0, 0, 1, 0;
    std::ostringstream cs;
    write_matrix(cs, means);
    TempFile cf("modes", cs.str());
    ExperimentConfig gm = parse_config_text(
        "[run]\nn = 3\n[predictor]\nkind = gmm\nmeans_file = " + cf.path +
        "\nvar = 0.01\nweights = 3, 1\n");
    const auto gpred = build_predictor(gm, build_schedule(gm));
    CHECK(gpred->dim() == 3);
    // weights normalize to 3/4, 1/4: prior draws concentrate on the first mode
    Rng prng(3);
    int first = 0;
    for (int i = 0; i < 400; ++i) {
        const VectorXd v = gpred->sample_prior(prng);
        if ((v - means.row(0).transpose()).norm() < (v - means.row(1).transpose()).norm()) ++first;
    }
    CHECK(first > 240);
    CHECK(first < 360);

    ExperimentConfig wbad = parse_config_text(
        "[run]\nn = 3\n[predictor]\nkind = gmm\nmeans_file = " + cf.path + "\nweights = 1\n");
    CHECK_THROWS_AS(build_predictor(wbad, build_schedule(wbad)), ConfigError);
}

TEST_CASE("vector and matrix text round trips are bit exact") {
    Rng rng(4);
    const VectorXd v = rng.normal_vec(7);
    std::ostringstream os;
    write_vector(os, v);
    std::istringstream is(os.str());
    const VectorXd back = read_vector(is);
    CHECK((back - v).norm() == 0.0);

    MatrixXd m(3, 4);
    for (int r = 0; r < 3; ++r) m.row(r) = rng.normal_vec(4).transpose();
    std::ostringstream os2;
    write_matrix(os2, m);
    std::istringstream is2(os2.str());
    CHECK((read_matrix(is2) - m).norm() == 0.0);

    TempFile tf("vec");
    write_vector_file(tf.path, v);
    CHECK((read_vector_file(tf.path) - v).norm() == 0.0);

    std::istringstream bad("3\n1.0 2.0\n");
    CHECK_THROWS(read_vector(bad));
    std::istringstream neg("-2\n");
    CHECK_THROWS(read_vector(neg));
    CHECK_THROWS(read_vector_file("/nonexistent/simdm.txt"));
}

TEST_CASE("format_sig controls significant digits") {
    CHECK(format_sig(0.0001234567890123, 9) == "0.000123456789");
    CHECK(format_sig(1.0, 9) == "1");
    CHECK(format_sig(152.16697028394647, 9) == "152.16697");
    const double x = 0.1 + 0.2;  // 0.30000000000000004
    CHECK(std::stod(format_sig(x, 17)) == x);
}

TEST_CASE("spacing and scheme names round trip through to_string") {
    CHECK(to_string(Spacing::uniform_t) == "uniform_t");
    CHECK(to_string(Spacing::uniform_lambda) == "uniform_lambda");
    CHECK(to_string(SamplerMethod::ddim) == "ddim");
    CHECK(to_string(SamplerMethod::dm2m) == "dm2m");
    CHECK(to_string(InverterMethod::naive_ddim) == "naive");
    CHECK(to_string(InverterMethod::first_order) == "first_order");
    CHECK(to_string(InverterMethod::second_order) == "second_order");
}

TEST_CASE("load_config reads from disk and reports missing files") {
    TempFile cf("conf", "[run]\nn = 5\n");
    CHECK(load_config(cf.path).n == 5);
    CHECK_THROWS_AS(load_config("/nonexistent/simdm.ini"), ConfigError);
}
