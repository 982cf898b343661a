#ifndef WGMQED_CONFIG_HPP
#define WGMQED_CONFIG_HPP

// Run configuration. Physical rates are given as ordinary frequencies in MHz
// (converted with omega = 2 pi nu) and times in ns.

#include "wgmqed/errors.hpp"
#include "wgmqed/polarization.hpp"
#include "wgmqed/qops.hpp"
#include "wgmqed/transmission.hpp"
#include "wgmqed/twophoton.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace wgmqed {

using json = nlohmann::ordered_json;

struct SystemConfig {
    double g_mean_mhz = 13.5;
    double g_sigma_mhz = 4.0;
    double kappa_i_mhz = 8.4;
    double gamma_mhz = 3.0;
    int n_max = default_n_max;
};

struct SweepConfig {
    double delta_al_mhz = 2.2;
    double delta_rl_mhz = 0.0;
    std::optional<double> delta_ar_mhz;
    double kf_over_ki_min = 0.5;
    double kf_over_ki_max = 6.0;
    int points = 200;
    int coupling_nodes = default_coupling_nodes;
};

struct TwoPhotonConfig {
    double kf_over_ki = 2.8;
    double delta_al_mhz = 0.0;
    double delta_rl_mhz = 0.0;
    double input_amplitude = default_input_amplitude;
    bool atom = true;
    bool average_coupling = true;
    int coupling_nodes = default_two_photon_coupling_nodes;
    double bin_width_ns = 1.0;
    double half_range_ns = 60.0;
    std::vector<std::string> settings;  // empty: the 19 canonical settings
    double sample_pairs = 0.0;          // > 0: also write Poisson-sampled counts
};

struct TomographyConfig {
    std::string data;  // coincidence CSV; empty: simulate rates from two_photon
    std::vector<double> mean_delays_ns{-40, -30, -20, -15, -10, -8, -6, -4, -2, 0, 2, 4, 6, 8, 10, 15, 20, 30, 40, 50};
    std::vector<double> windows_ns{1, 3, 5, 9, 15, 25};
    double headline_window_ns = 3.0;
    double headline_delay_ns = 0.0;
    int mle_restarts = 5;
};

struct BootstrapConfig {
    int replicates = 100;
    bool all_windows = false;  // otherwise only the headline window
};

struct RunConfig {
    SystemConfig system;
    SweepConfig sweep;
    TwoPhotonConfig two_photon;
    TomographyConfig tomography;
    BootstrapConfig bootstrap;
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "out";

    /// Shared rates with the sweep's detunings; kappa_f is set per grid point.
    SystemParams sweep_params() const {
        SystemParams p = base_params();
        p.delta_al = angular(sweep.delta_al_mhz);
        p.delta_rl = angular(sweep.delta_rl_mhz);
        if (sweep.delta_ar_mhz) p.delta_ar = angular(*sweep.delta_ar_mhz);
        p.validate();
        return p;
    }

    /// Two-photon working point.
    SystemParams two_photon_params() const {
        SystemParams p = base_params();
        p.kappa_f = two_photon.kf_over_ki * p.kappa_i;
        p.delta_al = angular(two_photon.delta_al_mhz);
        p.delta_rl = angular(two_photon.delta_rl_mhz);
        if (!two_photon.atom) {
            p.g = 0.0;
            p.g_mean = 0.0;
            p.g_sigma = 0.0;
        }
        p.validate();
        return p;
    }

    TwoPhotonOptions two_photon_options() const {
        TwoPhotonOptions o;
        o.n_max = system.n_max;
        o.average_coupling = two_photon.average_coupling && two_photon.atom;
        o.coupling_nodes = two_photon.coupling_nodes;
        o.threads = threads;
        return o;
    }

    std::vector<DetectorSetting> detector_settings() const {
        if (two_photon.settings.empty()) return canonical_settings();
        std::vector<DetectorSetting> out;
        for (const auto& s : two_photon.settings) out.push_back(DetectorSetting::parse(s));
        return out;
    }

    std::vector<double> sweep_grid() const {
        return linear_grid(sweep.kf_over_ki_min, sweep.kf_over_ki_max, sweep.points);
    }

    void validate() const {
        auto require = [](bool ok, const std::string& what) {
            if (!ok) throw ConfigError(what);
        };
        require(system.g_mean_mhz >= 0.0, "/system/g_mean_mhz must be >= 0");
        require(system.g_sigma_mhz >= 0.0, "/system/g_sigma_mhz must be >= 0");
        require(system.kappa_i_mhz > 0.0, "/system/kappa_i_mhz must be > 0");
        require(system.gamma_mhz > 0.0, "/system/gamma_mhz must be > 0");
        require(system.n_max >= 2, "/system/n_max must be >= 2");
        require(sweep.points >= 1, "/sweep/points must be >= 1");
        require(sweep.kf_over_ki_min > 0.0, "/sweep/kf_over_ki_min must be > 0");
        require(sweep.points == 1 || sweep.kf_over_ki_max > sweep.kf_over_ki_min,
                "/sweep/kf_over_ki_max must exceed kf_over_ki_min");
        require(sweep.coupling_nodes >= 1, "/sweep/coupling_nodes must be >= 1");
        require(two_photon.kf_over_ki >= 0.0, "/two_photon/kf_over_ki must be >= 0");
        require(two_photon.input_amplitude > 0.0, "/two_photon/input_amplitude must be > 0");
        require(two_photon.coupling_nodes >= 1, "/two_photon/coupling_nodes must be >= 1");
        require(two_photon.bin_width_ns > 0.0, "/two_photon/bin_width_ns must be > 0");
        require(two_photon.half_range_ns >= 0.0, "/two_photon/half_range_ns must be >= 0");
        require(two_photon.sample_pairs >= 0.0, "/two_photon/sample_pairs must be >= 0");
        require(!tomography.mean_delays_ns.empty(), "/tomography/mean_delays_ns must not be empty");
        require(!tomography.windows_ns.empty(), "/tomography/windows_ns must not be empty");
        for (double w : tomography.windows_ns) require(w > 0.0, "/tomography/windows_ns entries must be > 0");
        require(tomography.headline_window_ns > 0.0, "/tomography/headline_window_ns must be > 0");
        require(tomography.mle_restarts >= 1, "/tomography/mle_restarts must be >= 1");
        require(bootstrap.replicates >= 1, "/bootstrap/replicates must be >= 1");
        require(threads >= 1, "/threads must be >= 1");
        try {
            detector_settings();
            sweep_params();
            two_photon_params();
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }

private:
    SystemParams base_params() const {
        SystemParams p;
        p.g_mean = angular(system.g_mean_mhz);
        p.g_sigma = angular(system.g_sigma_mhz);
        p.g = p.g_mean;
        p.kappa_i = angular(system.kappa_i_mhz);
        p.gamma = angular(system.gamma_mhz);
        return p;
    }
};

namespace detail {

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) known = known || it.key() == k;
        if (!known) throw ConfigError("unknown key '" + it.key() + "' at " + (path.empty() ? "/" : path));
    }
}

template <typename T>
void read_field(const json& j, const std::string& path, const char* key, T& target) {
    if (!j.contains(key)) return;
    try {
        target = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(path + "/" + key + ": wrong type");
    }
}

inline void read_field(const json& j, const std::string& path, const char* key, std::optional<double>& target) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        target.reset();
        return;
    }
    if (!j.at(key).is_number()) throw ConfigError(path + "/" + key + ": wrong type");
    target = j.at(key).get<double>();
}

}  // namespace detail

inline RunConfig config_from_json(const json& j) {
    using detail::read_field;
    using detail::reject_unknown;
    RunConfig c;
    reject_unknown(j, "", {"system", "sweep", "two_photon", "tomography", "bootstrap", "seed", "threads", "out"});
    if (j.contains("system")) {
        const json& s = j.at("system");
        reject_unknown(s, "/system", {"g_mean_mhz", "g_sigma_mhz", "kappa_i_mhz", "gamma_mhz", "n_max"});
        read_field(s, "/system", "g_mean_mhz", c.system.g_mean_mhz);
        read_field(s, "/system", "g_sigma_mhz", c.system.g_sigma_mhz);
        read_field(s, "/system", "kappa_i_mhz", c.system.kappa_i_mhz);
        read_field(s, "/system", "gamma_mhz", c.system.gamma_mhz);
        read_field(s, "/system", "n_max", c.system.n_max);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        reject_unknown(s, "/sweep", {"delta_al_mhz", "delta_rl_mhz", "delta_ar_mhz", "kf_over_ki_min", "kf_over_ki_max",
                                     "points", "coupling_nodes"});
        read_field(s, "/sweep", "delta_al_mhz", c.sweep.delta_al_mhz);
        read_field(s, "/sweep", "delta_rl_mhz", c.sweep.delta_rl_mhz);
        read_field(s, "/sweep", "delta_ar_mhz", c.sweep.delta_ar_mhz);
        read_field(s, "/sweep", "kf_over_ki_min", c.sweep.kf_over_ki_min);
        read_field(s, "/sweep", "kf_over_ki_max", c.sweep.kf_over_ki_max);
        read_field(s, "/sweep", "points", c.sweep.points);
        read_field(s, "/sweep", "coupling_nodes", c.sweep.coupling_nodes);
    }
    if (j.contains("two_photon")) {
        const json& s = j.at("two_photon");
        reject_unknown(s, "/two_photon", {"kf_over_ki", "delta_al_mhz", "delta_rl_mhz", "input_amplitude", "atom",
                                          "average_coupling", "coupling_nodes", "bin_width_ns", "half_range_ns",
                                          "settings", "sample_pairs"});
        read_field(s, "/two_photon", "kf_over_ki", c.two_photon.kf_over_ki);
        read_field(s, "/two_photon", "delta_al_mhz", c.two_photon.delta_al_mhz);
        read_field(s, "/two_photon", "delta_rl_mhz", c.two_photon.delta_rl_mhz);
        read_field(s, "/two_photon", "input_amplitude", c.two_photon.input_amplitude);
        read_field(s, "/two_photon", "atom", c.two_photon.atom);
        read_field(s, "/two_photon", "average_coupling", c.two_photon.average_coupling);
        read_field(s, "/two_photon", "coupling_nodes", c.two_photon.coupling_nodes);
        read_field(s, "/two_photon", "bin_width_ns", c.two_photon.bin_width_ns);
        read_field(s, "/two_photon", "half_range_ns", c.two_photon.half_range_ns);
        read_field(s, "/two_photon", "settings", c.two_photon.settings);
        read_field(s, "/two_photon", "sample_pairs", c.two_photon.sample_pairs);
    }
    if (j.contains("tomography")) {
        const json& s = j.at("tomography");
        reject_unknown(s, "/tomography", {"data", "mean_delays_ns", "windows_ns", "headline_window_ns",
                                          "headline_delay_ns", "mle_restarts"});
        read_field(s, "/tomography", "data", c.tomography.data);
        read_field(s, "/tomography", "mean_delays_ns", c.tomography.mean_delays_ns);
        read_field(s, "/tomography", "windows_ns", c.tomography.windows_ns);
        read_field(s, "/tomography", "headline_window_ns", c.tomography.headline_window_ns);
        read_field(s, "/tomography", "headline_delay_ns", c.tomography.headline_delay_ns);
        read_field(s, "/tomography", "mle_restarts", c.tomography.mle_restarts);
    }
    if (j.contains("bootstrap")) {
        const json& s = j.at("bootstrap");
        reject_unknown(s, "/bootstrap", {"replicates", "all_windows"});
        read_field(s, "/bootstrap", "replicates", c.bootstrap.replicates);
        read_field(s, "/bootstrap", "all_windows", c.bootstrap.all_windows);
    }
    read_field(j, "", "seed", c.seed);
    read_field(j, "", "threads", c.threads);
    read_field(j, "", "out", c.out);
    c.validate();
    return c;
}

inline json config_to_json(const RunConfig& c) {
    json j;
    j["system"] = {{"g_mean_mhz", c.system.g_mean_mhz},
                   {"g_sigma_mhz", c.system.g_sigma_mhz},
                   {"kappa_i_mhz", c.system.kappa_i_mhz},
                   {"gamma_mhz", c.system.gamma_mhz},
                   {"n_max", c.system.n_max}};
    j["sweep"] = {{"delta_al_mhz", c.sweep.delta_al_mhz},
                  {"delta_rl_mhz", c.sweep.delta_rl_mhz},
                  {"delta_ar_mhz", c.sweep.delta_ar_mhz ? json(*c.sweep.delta_ar_mhz) : json(nullptr)},
                  {"kf_over_ki_min", c.sweep.kf_over_ki_min},
                  {"kf_over_ki_max", c.sweep.kf_over_ki_max},
                  {"points", c.sweep.points},
                  {"coupling_nodes", c.sweep.coupling_nodes}};
    j["two_photon"] = {{"kf_over_ki", c.two_photon.kf_over_ki},
                       {"delta_al_mhz", c.two_photon.delta_al_mhz},
                       {"delta_rl_mhz", c.two_photon.delta_rl_mhz},
                       {"input_amplitude", c.two_photon.input_amplitude},
                       {"atom", c.two_photon.atom},
                       {"average_coupling", c.two_photon.average_coupling},
                       {"coupling_nodes", c.two_photon.coupling_nodes},
                       {"bin_width_ns", c.two_photon.bin_width_ns},
                       {"half_range_ns", c.two_photon.half_range_ns},
                       {"settings", c.two_photon.settings},
                       {"sample_pairs", c.two_photon.sample_pairs}};
    j["tomography"] = {{"data", c.tomography.data},
                       {"mean_delays_ns", c.tomography.mean_delays_ns},
                       {"windows_ns", c.tomography.windows_ns},
                       {"headline_window_ns", c.tomography.headline_window_ns},
                       {"headline_delay_ns", c.tomography.headline_delay_ns},
                       {"mle_restarts", c.tomography.mle_restarts}};
    j["bootstrap"] = {{"replicates", c.bootstrap.replicates}, {"all_windows", c.bootstrap.all_windows}};
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["out"] = c.out;
    return j;
}

inline RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace wgmqed

#endif
