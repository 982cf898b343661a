#ifndef WGMQED_IO_HPP
#define WGMQED_IO_HPP

// Plain-text persistence: coincidence tables (CSV + JSON sidecar), density
// matrices, metric reports and run manifests.

#include "wgmqed/bootstrap.hpp"
#include "wgmqed/config.hpp"
#include "wgmqed/errors.hpp"
#include "wgmqed/metrics.hpp"
#include "wgmqed/polarization.hpp"
#include "wgmqed/states.hpp"
#include "wgmqed/twophoton.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace wgmqed {

inline constexpr std::string_view library_version = "0.1.0";

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) return out;
        start = comma + 1;
    }
}

inline double parse_number(std::string_view field, std::size_t line, const char* what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw ParseError(std::string("invalid ") + what + " '" + std::string(field) + "'", line);
    }
    return v;
}

}  // namespace detail

inline void write_coincidence_csv(std::ostream& os, const CoincidenceTable& table) {
    table.validate();
    os << "setting,delay_ns,value\n" << std::setprecision(15);
    for (std::size_t s = 0; s < table.settings.size(); ++s)
        for (std::size_t b = 0; b < table.bins(); ++b)
            os << table.settings[s].name() << ',' << table.delays_ns[b] << ',' << table.values[s][b] << '\n';
}

inline json coincidence_sidecar(const CoincidenceTable& table) {
    json j;
    j["mode"] = table.mode == TableMode::rate ? "rate" : "count";
    j["bin_width_ns"] = table.bin_width_ns;
    j["seed"] = table.seed ? json(*table.seed) : json(nullptr);
    j["total_pairs"] = table.total_pairs;
    j["circular_convention"] = std::string(circular_convention);
    json singles = json::object();
    for (std::size_t s = 0; s < table.singles_product.size(); ++s) singles[table.settings[s].name()] = table.singles_product[s];
    j["singles_product"] = singles;
    return j;
}

/// Reads the three-column CSV. Settings appear in first-seen order; every setting
/// must list the same delays. Without a sidecar the bin width is taken from the
/// delay spacing and the mode from whether all values are integers.
inline CoincidenceTable read_coincidence_csv(std::istream& in, const json* sidecar = nullptr) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty coincidence file", 1);
    ++line_no;
    {
        const auto head = detail::split_csv(line);
        if (head.size() != 3 || head[0] != "setting" || head[1] != "delay_ns" || head[2] != "value") {
            throw ParseError("expected header 'setting,delay_ns,value'", line_no);
        }
    }
    std::vector<DetectorSetting> settings;
    std::vector<std::vector<std::pair<double, double>>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 3) throw ParseError("expected 3 fields, got " + std::to_string(f.size()), line_no);
        std::optional<DetectorSetting> s;
        try {
            s = DetectorSetting::parse(f[0]);
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), line_no);
        }
        const double delay = detail::parse_number(f[1], line_no, "delay");
        const double value = detail::parse_number(f[2], line_no, "value");
        if (value < 0.0) throw ParseError("negative value", line_no);
        std::size_t idx = settings.size();
        for (std::size_t k = 0; k < settings.size(); ++k)
            if (settings[k] == *s) idx = k;
        if (idx == settings.size()) {
            settings.push_back(*s);
            rows.emplace_back();
        }
        if (!rows[idx].empty() && !(delay > rows[idx].back().first)) {
            throw ParseError("delays must be strictly ascending within a setting", line_no);
        }
        rows[idx].emplace_back(delay, value);
    }
    if (settings.empty()) throw ParseError("no data rows", line_no);

    CoincidenceTable t;
    t.settings = settings;
    for (const auto& [d, v] : rows[0]) t.delays_ns.push_back(d);
    for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s].size() != t.delays_ns.size()) throw ParseError("bin grid differs for setting " + settings[s].name(), 0);
        std::vector<double> vals;
        for (std::size_t b = 0; b < rows[s].size(); ++b) {
            if (std::abs(rows[s][b].first - t.delays_ns[b]) > 1e-9) {
                throw ParseError("bin grid differs for setting " + settings[s].name(), 0);
            }
            vals.push_back(rows[s][b].second);
        }
        t.values.push_back(std::move(vals));
    }

    bool integral = true;
    for (const auto& r : t.values)
        for (double v : r) integral = integral && v == std::floor(v);
    if (sidecar) {
        try {
            const std::string mode = sidecar->at("mode").get<std::string>();
            if (mode != "rate" && mode != "count") throw ParseError("sidecar mode must be 'rate' or 'count'", 0);
            t.mode = mode == "rate" ? TableMode::rate : TableMode::count;
            t.bin_width_ns = sidecar->at("bin_width_ns").get<double>();
            if (sidecar->contains("seed") && !sidecar->at("seed").is_null()) t.seed = sidecar->at("seed").get<std::uint64_t>();
            if (sidecar->contains("total_pairs")) t.total_pairs = sidecar->at("total_pairs").get<double>();
            if (sidecar->contains("singles_product") && !sidecar->at("singles_product").empty()) {
                for (const auto& s : t.settings) t.singles_product.push_back(sidecar->at("singles_product").at(s.name()).get<double>());
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("sidecar: ") + e.what(), 0);
        }
    } else {
        t.mode = integral ? TableMode::count : TableMode::rate;
        t.bin_width_ns = t.delays_ns.size() > 1 ? t.delays_ns[1] - t.delays_ns[0] : 1.0;
    }
    try {
        t.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), 0);
    }
    return t;
}

inline std::string sidecar_path(const std::string& csv_path) { return csv_path + ".json"; }

inline CoincidenceTable load_coincidence_table(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw ConfigError("cannot open coincidence file '" + csv_path + "'");
    const std::string side = sidecar_path(csv_path);
    if (std::filesystem::exists(side)) {
        std::ifstream sj(side);
        json j;
        try {
            j = json::parse(sj);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("sidecar: ") + e.what(), 0);
        }
        return read_coincidence_csv(in, &j);
    }
    return read_coincidence_csv(in);
}

inline void save_coincidence_table(const std::string& csv_path, const CoincidenceTable& table, const json& extra = {}) {
    std::ofstream out(csv_path);
    write_coincidence_csv(out, table);
    json side = coincidence_sidecar(table);
    for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
    std::ofstream(sidecar_path(csv_path)) << side.dump(2) << '\n';
}

/// Rows i, columns j, re and im: one line per element.
template <typename Derived>
void write_matrix_csv(std::ostream& os, const Eigen::MatrixBase<Derived>& m, const std::vector<std::string>& labels) {
    os << "row,col,re,im\n" << std::setprecision(15);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            os << labels[i] << ',' << labels[j] << ',' << m(i, j).real() << ',' << m(i, j).imag() << '\n';
}

inline const std::vector<std::string>& symmetric_labels() {
    static const std::vector<std::string> l{"HH", "S", "VV"};
    return l;
}

inline const std::vector<std::string>& product_labels() {
    static const std::vector<std::string> l{"HH", "HV", "VH", "VV"};
    return l;
}

template <typename Derived>
json matrix_json(const Eigen::MatrixBase<Derived>& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rr = json::array(), ri = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rr.push_back(m(i, j).real());
            ri.push_back(m(i, j).imag());
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    return {{"re", re}, {"im", im}};
}

inline json metrics_json(const MetricsReport& r) {
    return {{"mean_delay_ns", r.mean_delay_ns},
            {"window_ns", r.window_ns},
            {"overlap", r.overlap},
            {"concurrence", r.concurrence},
            {"phase_rad", r.phase ? json(*r.phase) : json(nullptr)},
            {"phase_pi", r.phase ? json(phase_display_units(*r.phase)) : json(nullptr)}};
}

inline json bootstrap_json(const BootstrapReport& b) {
    auto summary = [](const MetricSummary& s) { return json{{"mean", s.mean}, {"std", s.stddev}, {"samples", s.samples}}; };
    return {{"replicates", b.replicates},  {"failed", b.failed},
            {"seed", b.seed},              {"unreliable", b.unreliable},
            {"degenerate", b.degenerate},  {"overlap", summary(b.overlap)},
            {"concurrence", summary(b.concurrence)}, {"phase_rad", summary(b.phase)}};
}

/// Everything needed to reproduce a run's artifacts.
inline json make_manifest(const std::string& command, const RunConfig& cfg) {
    return {{"command", command},
            {"version", std::string(library_version)},
            {"config", config_to_json(cfg)},
            {"seed", cfg.seed},
            {"threads", cfg.threads},
            {"gamma_assumption", "gamma = 2pi x " + std::to_string(cfg.system.gamma_mhz) +
                                     " MHz atomic amplitude decay rate (not given by the source data)"},
            {"circular_convention", std::string(circular_convention)},
            {"windowing", "sliding window; bins counted only when fully inside the window"}};
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace wgmqed

#endif
