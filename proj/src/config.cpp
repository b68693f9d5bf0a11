#include "simdm/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "simdm/io.hpp"

namespace simdm {

std::string to_string(Spacing spacing) {
    return spacing == Spacing::uniform_t ? "uniform_t" : "uniform_lambda";
}

std::string to_string(SamplerMethod method) {
    return method == SamplerMethod::ddim ? "ddim" : "dm2m";
}

std::string to_string(InverterMethod method) {
    switch (method) {
        case InverterMethod::naive_ddim: return "naive";
        case InverterMethod::first_order: return "first_order";
        case InverterMethod::second_order: return "second_order";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

const std::set<std::string> kBlocks = {"schedule", "grid",     "predictor", "link",
                                       "recovery", "run",      "verify"};

// Raw key/value store with consumption tracking so unknown keys are caught.
class KeyMap {
public:
    void insert(const std::string& key, const std::string& value, int line) {
        if (kv_.count(key)) throw ConfigError(key, "duplicate key");
        kv_[key] = value;
        (void)line;
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        used_.insert(key);
        return it->second;
    }

    double number(const std::string& key, double fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        used_.insert(key);
        return parse_number(key, it->second);
    }

    long integer(const std::string& key, long fallback) {
        const double v = number(key, static_cast<double>(fallback));
        const long r = static_cast<long>(v);
        if (static_cast<double>(r) != v) throw ConfigError(key, "expected an integer");
        return r;
    }

    std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        used_.insert(key);
        try {
            size_t pos = 0;
            const std::uint64_t v = std::stoull(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError(key, "expected an unsigned integer, got '" + it->second + "'");
        }
    }

    std::vector<double> number_list(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return {};
        used_.insert(key);
        std::vector<double> out;
        std::string item;
        std::istringstream ss(it->second);
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) throw ConfigError(key, "empty list element");
            out.push_back(parse_number(key, item));
        }
        if (out.empty()) throw ConfigError(key, "empty list");
        return out;
    }

    std::vector<int> int_list(const std::string& key) {
        std::vector<int> out;
        for (double v : number_list(key)) {
            const int r = static_cast<int>(v);
            if (static_cast<double>(r) != v) throw ConfigError(key, "expected integers");
            out.push_back(r);
        }
        return out;
    }

    void finish() const {
        for (const auto& [key, value] : kv_)
            if (!used_.count(key)) throw ConfigError(key, "unknown key");
    }

private:
    static double parse_number(const std::string& key, const std::string& s) {
        try {
            size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError(key, "expected a number, got '" + s + "'");
        }
    }

    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> used_;
};

KeyMap tokenize(const std::string& text) {
    KeyMap map;
    std::istringstream ss(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no), "malformed block header");
            section = trim(line.substr(1, line.size() - 2));
            if (!kBlocks.count(section))
                throw ConfigError(section, "unknown block");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no), "expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
        if (key.find('.') == std::string::npos) {
            if (section.empty())
                throw ConfigError(key, "key outside any block (use block.key or a [block])");
            key = section + "." + key;
        }
        const std::string block = key.substr(0, key.find('.'));
        if (!kBlocks.count(block)) throw ConfigError(key, "unknown block");
        map.insert(key, value, line_no);
    }
    return map;
}

Spacing parse_spacing(const std::string& key, const std::string& s) {
    if (s == "uniform_t") return Spacing::uniform_t;
    if (s == "uniform_lambda") return Spacing::uniform_lambda;
    throw ConfigError(key, "expected uniform_t or uniform_lambda, got '" + s + "'");
}

SamplerMethod parse_sampler(const std::string& key, const std::string& s) {
    if (s == "ddim") return SamplerMethod::ddim;
    if (s == "dm2m") return SamplerMethod::dm2m;
    throw ConfigError(key, "expected ddim or dm2m, got '" + s + "'");
}

InverterMethod parse_inverter(const std::string& key, const std::string& s) {
    if (s == "naive") return InverterMethod::naive_ddim;
    if (s == "first_order") return InverterMethod::first_order;
    if (s == "second_order") return InverterMethod::second_order;
    throw ConfigError(key, "expected naive, first_order or second_order, got '" + s + "'");
}

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    KeyMap map = tokenize(text);
    ExperimentConfig cfg;

    cfg.beta_min = map.number("schedule.beta_min", cfg.beta_min);
    cfg.beta_max = map.number("schedule.beta_max", cfg.beta_max);
    cfg.T = map.number("schedule.T", cfg.T);
    cfg.eps = map.number("schedule.eps", cfg.eps);
    require(cfg.beta_min > 0.0, "schedule.beta_min", "must be > 0");
    require(cfg.beta_max >= cfg.beta_min, "schedule.beta_max", "must be >= beta_min");
    require(cfg.eps > 0.0, "schedule.eps", "must be > 0");
    require(cfg.eps < cfg.T, "schedule.eps", "must be < T");

    cfg.N_samp = static_cast<int>(map.integer("grid.N_samp", cfg.N_samp));
    cfg.N_inv = static_cast<int>(map.integer("grid.N_inv", cfg.N_inv));
    require(cfg.N_samp >= 1, "grid.N_samp", "must be >= 1");
    require(cfg.N_inv >= 1, "grid.N_inv", "must be >= 1");
    cfg.spacing = parse_spacing("grid.spacing",
                                map.str("grid.spacing", to_string(cfg.spacing)));

    cfg.predictor_kind = map.str("predictor.kind", cfg.predictor_kind);
    require(cfg.predictor_kind == "constant" || cfg.predictor_kind == "gaussian" ||
                cfg.predictor_kind == "gmm",
            "predictor.kind", "expected constant, gaussian or gmm");
    cfg.constant_value = map.number("predictor.value", cfg.constant_value);
    cfg.constant_file = map.str("predictor.value_file", cfg.constant_file);
    cfg.gaussian_mean = map.number("predictor.mean", cfg.gaussian_mean);
    cfg.gaussian_mean_file = map.str("predictor.mean_file", cfg.gaussian_mean_file);
    cfg.gaussian_var = map.number("predictor.var", cfg.gaussian_var);
    if (cfg.predictor_kind == "gmm") cfg.gmm_var = map.number("predictor.var", cfg.gmm_var);
    require(cfg.gaussian_var > 0.0 && cfg.gmm_var > 0.0, "predictor.var", "must be > 0");
    cfg.gmm_modes = static_cast<int>(map.integer("predictor.modes", cfg.gmm_modes));
    require(cfg.gmm_modes >= 1, "predictor.modes", "must be >= 1");
    cfg.gmm_mode_seed = map.unsigned64("predictor.mode_seed", cfg.gmm_mode_seed);
    cfg.gmm_means_file = map.str("predictor.means_file", cfg.gmm_means_file);
    if (map.has("predictor.weights")) {
        cfg.gmm_weights = map.number_list("predictor.weights");
        double sum = 0.0;
        for (double w : cfg.gmm_weights) {
            require(w >= 0.0, "predictor.weights", "must be >= 0");
            sum += w;
        }
        require(sum > 0.0, "predictor.weights", "must not all be zero");
    }

    cfg.link_kind = [&] {
        const std::string s = map.str("link.kind", to_string(cfg.link_kind));
        try {
            return link_kind_from_string(s);
        } catch (const std::invalid_argument&) {
            throw ConfigError("link.kind", "expected linear, sign or cubic, got '" + s + "'");
        }
    }();
    cfg.link_sigma = map.number("link.sigma", cfg.link_sigma);
    require(cfg.link_sigma >= 0.0 && std::isfinite(cfg.link_sigma), "link.sigma",
            "must be finite and >= 0");
    cfg.noise_position = map.str("link.noise_position", cfg.noise_position);
    require(cfg.noise_position.empty() || cfg.noise_position == "pre" ||
                cfg.noise_position == "post",
            "link.noise_position", "expected pre or post");

    if (map.has("recovery.method")) {
        cfg.methods.clear();
        std::string item;
        std::istringstream ss(map.str("recovery.method", ""));
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            try {
                cfg.methods.push_back(recovery_method_from_string(item));
            } catch (const std::invalid_argument&) {
                throw ConfigError("recovery.method",
                                  "expected sim_dms, sim_dmis or sim_dmfis, got '" + item + "'");
            }
        }
        require(!cfg.methods.empty(), "recovery.method", "empty method list");
    }
    cfg.C_s = map.number("recovery.C_s", cfg.C_s);
    cfg.C_s_prime = map.number("recovery.C_s_prime", cfg.C_s_prime);
    if (!std::isnan(cfg.C_s)) require(cfg.C_s > 0.0, "recovery.C_s", "must be > 0");
    if (!std::isnan(cfg.C_s_prime))
        require(cfg.C_s_prime > 0.0, "recovery.C_s_prime", "must be > 0");
    cfg.C_s_list = map.number_list("recovery.C_s_list");
    cfg.C_s_prime_list = map.number_list("recovery.C_s_prime_list");
    for (double v : cfg.C_s_list) require(v > 0.0, "recovery.C_s_list", "must be > 0");
    for (double v : cfg.C_s_prime_list)
        require(v > 0.0, "recovery.C_s_prime_list", "must be > 0");
    cfg.N_samp_list = map.int_list("recovery.N_samp_list");
    cfg.N_inv_list = map.int_list("recovery.N_inv_list");
    for (int v : cfg.N_samp_list) require(v >= 1, "recovery.N_samp_list", "must be >= 1");
    for (int v : cfg.N_inv_list) require(v >= 1, "recovery.N_inv_list", "must be >= 1");
    cfg.sampler = parse_sampler("recovery.sampler",
                                map.str("recovery.sampler", to_string(cfg.sampler)));
    cfg.inverter = parse_inverter("recovery.inverter",
                                  map.str("recovery.inverter", to_string(cfg.inverter)));

    cfg.n = static_cast<int>(map.integer("run.n", cfg.n));
    require(cfg.n >= 1, "run.n", "must be >= 1");
    const char* m_field = "run.m";
    if (map.has("run.m_list")) {
        cfg.m_list = map.int_list("run.m_list");
        m_field = "run.m_list";
    } else if (map.has("run.m")) {
        cfg.m_list = {static_cast<int>(map.integer("run.m", 0))};
    }
    for (int m : cfg.m_list) require(m >= 1, m_field, "must be >= 1");
    cfg.trials = static_cast<int>(map.integer("run.trials", cfg.trials));
    require(cfg.trials >= 1, "run.trials", "must be >= 1");
    cfg.base_seed = map.unsigned64("run.base_seed", cfg.base_seed);
    cfg.out_path = map.str("run.out", cfg.out_path);
    cfg.x_star_file = map.str("run.x_star_file", cfg.x_star_file);
    cfg.x_hat_prefix = map.str("run.x_hat_prefix", cfg.x_hat_prefix);

    cfg.verify_C = map.number("verify.C", cfg.verify_C);
    cfg.verify_C_prime = map.number("verify.C_prime", cfg.verify_C_prime);
    require(cfg.verify_C >= 0.0, "verify.C", "must be >= 0");
    require(cfg.verify_C_prime > 0.0, "verify.C_prime", "must be > 0");
    cfg.verify_trials_lemma1 =
        static_cast<int>(map.integer("verify.trials_lemma1", cfg.verify_trials_lemma1));
    require(cfg.verify_trials_lemma1 >= 100, "verify.trials_lemma1", "must be >= 100");
    cfg.verify_trials_lemma2 =
        static_cast<int>(map.integer("verify.trials_lemma2", cfg.verify_trials_lemma2));
    require(cfg.verify_trials_lemma2 >= 1, "verify.trials_lemma2", "must be >= 1");
    cfg.verify_t = map.number("verify.t", cfg.verify_t);
    require(cfg.verify_t >= cfg.eps && cfg.verify_t <= cfg.T, "verify.t",
            "must lie in [eps, T]");
    if (map.has("verify.grid_sizes")) cfg.verify_grid_sizes = map.int_list("verify.grid_sizes");
    require(cfg.verify_grid_sizes.size() >= 3, "verify.grid_sizes", "need at least 3 sizes");
    cfg.verify_ref_steps = static_cast<int>(map.integer("verify.ref_steps", cfg.verify_ref_steps));
    require(cfg.verify_ref_steps >= 1, "verify.ref_steps", "must be >= 1");
    if (map.has("verify.m_list")) cfg.verify_m_list = map.int_list("verify.m_list");
    require(cfg.verify_m_list.size() >= 2, "verify.m_list", "need at least 2 m values");
    if (map.has("verify.roundtrip_sizes"))
        cfg.verify_roundtrip_sizes = map.int_list("verify.roundtrip_sizes");
    require(!cfg.verify_roundtrip_sizes.empty(), "verify.roundtrip_sizes", "must not be empty");
    cfg.lipschitz_pairs = static_cast<int>(map.integer("verify.lipschitz_pairs", cfg.lipschitz_pairs));
    require(cfg.lipschitz_pairs >= 1, "verify.lipschitz_pairs", "must be >= 1");

    map.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("config", e.what());
    }
    return parse_config_text(text);
}

NoiseSchedule build_schedule(const ExperimentConfig& cfg) {
    return NoiseSchedule(cfg.beta_min, cfg.beta_max, cfg.T, cfg.eps);
}

LinkSpec build_link(const ExperimentConfig& cfg) {
    if (cfg.noise_position.empty()) return LinkSpec(cfg.link_kind, cfg.link_sigma);
    const NoisePosition pos =
        cfg.noise_position == "pre" ? NoisePosition::pre_link : NoisePosition::post_link;
    return LinkSpec(cfg.link_kind, cfg.link_sigma, pos);
}

std::unique_ptr<DataPredictor> build_predictor(const ExperimentConfig& cfg,
                                               const NoiseSchedule& sched) {
    const int n = cfg.n;
    if (cfg.predictor_kind == "constant") {
        VectorXd c = cfg.constant_file.empty() ? VectorXd::Constant(n, cfg.constant_value)
                                               : read_vector_file(cfg.constant_file);
        if (c.size() != n) throw ConfigError("predictor.value_file", "length does not match run.n");
        return std::make_unique<ConstantPredictor>(sched, std::move(c));
    }
    if (cfg.predictor_kind == "gaussian") {
        VectorXd m0 = cfg.gaussian_mean_file.empty()
                          ? VectorXd::Constant(n, cfg.gaussian_mean)
                          : read_vector_file(cfg.gaussian_mean_file);
        if (m0.size() != n) throw ConfigError("predictor.mean_file", "length does not match run.n");
        return std::make_unique<GaussianPredictor>(sched, std::move(m0),
                                                   VectorXd::Constant(n, cfg.gaussian_var));
    }
    MatrixXd means = cfg.gmm_means_file.empty()
                         ? orthonormal_modes(cfg.gmm_modes, n, cfg.gmm_mode_seed)
                         : read_matrix_file(cfg.gmm_means_file);
    if (means.cols() != n) throw ConfigError("predictor.means_file", "columns do not match run.n");
    const int K = static_cast<int>(means.rows());
    VectorXd w;
    if (cfg.gmm_weights.empty()) {
        w = VectorXd::Constant(K, 1.0 / K);
    } else {
        if (static_cast<int>(cfg.gmm_weights.size()) != K)
            throw ConfigError("predictor.weights", "length does not match the mode count");
        w = Eigen::Map<const VectorXd>(cfg.gmm_weights.data(), K);
        w /= w.sum();
    }
    return std::make_unique<GmmPredictor>(sched, std::move(w), std::move(means),
                                          MatrixXd::Constant(K, n, cfg.gmm_var));
}

}  // namespace simdm
