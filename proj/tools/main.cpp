#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "simdm/config.hpp"
#include "simdm/runner.hpp"

namespace {

// Exit codes: 0 ok, 1 verify tolerance failure, 2 bad config or usage,
// 3 runtime numerical failure.
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-index model recovery with diffusion flows"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string x_star_file;
    std::string which;
    std::uint64_t seed = 0;
    int jobs = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--seed", seed, "override run.base_seed");
        sub->add_option("--jobs", jobs, "worker threads (0 = hardware count)");
        sub->add_option("--out", out_path, "output path (default run.out, else stdout)");
    };

    CLI::App* rec = app.add_subcommand("recover", "run recovery trials, emit CSV rows");
    add_common(rec);
    rec->add_option("--x-star-file", x_star_file, "planted signal (vector file)");

    CLI::App* swp = app.add_subcommand("sweep", "full-factorial C_s/C_s_prime/NFE sweep");
    add_common(swp);
    swp->add_option("--x-star-file", x_star_file, "planted signal (vector file)");

    CLI::App* ver = app.add_subcommand("verify", "statistical and exactness checks");
    add_common(ver);
    ver->add_option("which", which, "one of lemma1, lemma2, lipschitz, theorem1, roundtrip")
        ->required()
        ->check(CLI::IsMember({"lemma1", "lemma2", "lipschitz", "theorem1", "roundtrip"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        simdm::ExperimentConfig cfg = simdm::load_config(config_path);
        CLI::App* active = app.get_subcommands().front();
        if (active->count("--seed") > 0) cfg.base_seed = seed;
        if (!x_star_file.empty()) cfg.x_star_file = x_star_file;

        const std::string target = !out_path.empty() ? out_path : cfg.out_path;
        std::ofstream file;
        std::ostream* os = &std::cout;
        if (!target.empty()) {
            file.open(target);
            if (!file) throw simdm::ConfigError("run.out", "cannot open for writing: " + target);
            os = &file;
        }

        int code = 0;
        if (active == rec)
            code = simdm::cmd_recover(cfg, jobs, *os);
        else if (active == swp)
            code = simdm::cmd_sweep(cfg, jobs, *os);
        else
            code = simdm::cmd_verify(cfg, which, jobs, *os);
        os->flush();
        if (file.is_open() && !file) {
            std::cerr << "error: write failed: " << target << '\n';
            return kExitRuntime;
        }
        return code;
    } catch (const simdm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
