#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "simdm/config.hpp"

namespace simdm {

struct ResultRow {
    std::uint64_t seed = 0;
    RecoveryMethod method = RecoveryMethod::sim_dmis;
    LinkKind link = LinkKind::sign;
    int n = 0;
    int m = 0;
    double sigma = 0.0;
    double C_s = 0.0;
    double C_s_prime = 0.0;
    int N_inv = 0;
    int N_samp = 0;
    double t_star = 0.0;
    long nfe = 0;
    double cosine = 0.0;
    double rel_l2 = 0.0;
    double psnr = 0.0;
    double wall_ms = 0.0;
};

std::string csv_header();
// Floats carry 9 significant digits; every field except wall_ms is
// deterministic for a fixed config + base_seed.
std::string csv_line(const ResultRow& row);

// One trial per (method, m, trial index); trial t uses seed base_seed + t, so
// every method and every m sees the same instance stream.
std::vector<ResultRow> recover_rows(const ExperimentConfig& cfg, int jobs);

struct SweepCell {
    RecoveryMethod method = RecoveryMethod::sim_dmis;
    double C_s = 0.0;
    double C_s_prime = 0.0;
    int N_samp = 0;
    int N_inv = 0;
    int m = 0;
};

struct SweepOutcome {
    std::vector<ResultRow> rows;
    SweepCell best;
    double best_median_cosine = 0.0;
    bool best_on_boundary = false;  // best cell touches a swept list's end
};

// Full factorial over method x C_s x C_s_prime x N_samp x N_inv x m; scalar
// config values act as singleton lists.
SweepOutcome sweep_rows(const ExperimentConfig& cfg, int jobs);

// CLI entry points; they write CSV to `out` and return the process exit code
// (verify returns 1 when an asserted tolerance fails, printing the failing
// inequality to stderr). Config/runtime problems propagate as exceptions.
int cmd_recover(const ExperimentConfig& cfg, int jobs, std::ostream& out);
int cmd_sweep(const ExperimentConfig& cfg, int jobs, std::ostream& out);
int cmd_verify(const ExperimentConfig& cfg, const std::string& which, int jobs,
               std::ostream& out);

// SIMDM_LOG=info|debug enables progress notes on stderr.
bool log_enabled(int level);  // 1 = info, 2 = debug
void log_line(int level, const std::string& msg);

}  // namespace simdm
