#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qme/dynamics.hpp"
#include "qme/model.hpp"
#include "qme/theory.hpp"

namespace qme::cli {

// Invalid configuration document. what() lists every problem found, one per line.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AnglePair {
    double theta_s;
    double theta_b;
};

struct RunConfig {
    ModelParams model{1.0, 0.2, 15};
    int qos_first = 7;
    int qos_last = 9;

    std::vector<double> theta_s;
    std::vector<double> theta_b;

    double t_max = 20.0;
    int n_points = 201;

    EnsembleSpec ensemble;

    double fit_floor = kDefaultFitFloor;
    int delta_omega_bins = 200;
    std::string n_tilde = "pair";  // "pair" or "level"
    double dos_window = 1.0;

    std::string output_dir = "out";
    bool emit_svg = false;

    AnglePair qme_first{};
    AnglePair qme_second{};

    QosElement spectra_element{};

    QosElement theory_element{};
    AnglePair theory_angles{};
    double theory_truncation = 0.0;

    int krylov_max_depth = 60;
    double krylov_t_max = 10.0;
    int krylov_n_points = 201;

    unsigned threads = 1;

    Geometry geometry() const { return Geometry(model.L, qos_first, qos_last); }
    std::vector<double> time_grid() const { return make_time_grid(t_max, n_points); }
};

// Defaults mirror the reference setup: L = 15, J = 1, h = 0.2, QOS on sites
// 7..9, 100 thermalisation samples.
RunConfig default_config();

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

// Fully expanded configuration (every default filled in).
nlohmann::json to_json(const RunConfig& cfg);

// FNV-1a 64 of the compact dump of to_json(cfg), as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// "duu" -> QOS configuration with site 1 down, sites 2 and 3 up.
SpinConfiguration parse_arrows(const std::string& arrows, int qos_sites);
std::string format_arrows(SpinConfiguration c, int qos_sites);

}  // namespace qme::cli
