#include "qme/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include "qme/errors.hpp"

namespace qme::cli {

namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

// Collects every problem instead of stopping at the first one.
class Reader {
public:
    explicit Reader(const json& doc) : doc_(doc) {}

    const json* section(const char* name) {
        if (!doc_.contains(name)) return nullptr;
        const json& s = doc_.at(name);
        if (!s.is_object()) {
            fail(std::string(name) + ": expected an object");
            return nullptr;
        }
        return &s;
    }

    template <class Fn>
    void field(const json* sec, const std::string& path, const char* key, Fn&& apply) {
        if (sec == nullptr || !sec->contains(key)) return;
        try {
            apply(sec->at(key));
        } catch (const std::exception& e) {
            fail(path + "." + key + ": " + e.what());
        }
    }

    void fail(std::string message) { errors_.push_back(std::move(message)); }
    void check(bool ok, std::string message) {
        if (!ok) fail(std::move(message));
    }
    const std::vector<std::string>& errors() const { return errors_; }

private:
    const json& doc_;
    std::vector<std::string> errors_;
};

double as_number(const json& v) {
    if (!v.is_number()) throw std::invalid_argument("expected a number");
    return v.get<double>();
}

long long as_integer(const json& v) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) throw std::invalid_argument("expected an integer");
    return v.get<long long>();
}

bool as_bool(const json& v) {
    if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v) {
    if (!v.is_string()) throw std::invalid_argument("expected a string");
    return v.get<std::string>();
}

// Accepts plain numbers and strings such as "pi/4", "3pi/4", "3*pi/4", "0.5".
double as_angle(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (!v.is_string()) throw std::invalid_argument("expected an angle (number or string like \"3pi/4\")");
    const std::string s = v.get<std::string>();
    static const std::regex pi_form(R"(^\s*([0-9]*\.?[0-9]*)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$)");
    std::smatch m;
    if (std::regex_match(s, m, pi_form)) {
        const double k = m[1].length() > 0 ? std::stod(m[1].str()) : 1.0;
        const double d = m[2].matched ? std::stod(m[2].str()) : 1.0;
        if (d == 0.0) throw std::invalid_argument("division by zero in angle \"" + s + "\"");
        return k * kPi / d;
    }
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || s.find_first_not_of(" \t", used) != std::string::npos) {
        throw std::invalid_argument("cannot parse angle \"" + s + "\"");
    }
    return x;
}

std::vector<double> as_angle_list(const json& v) {
    if (!v.is_array() || v.empty()) throw std::invalid_argument("expected a non-empty array of angles");
    std::vector<double> out;
    for (const auto& a : v) out.push_back(as_angle(a));
    return out;
}

AnglePair as_angle_pair(const json& v) {
    if (!v.is_object() || !v.contains("theta_s") || !v.contains("theta_b")) {
        throw std::invalid_argument("expected {\"theta_s\": ..., \"theta_b\": ...}");
    }
    return {as_angle(v.at("theta_s")), as_angle(v.at("theta_b"))};
}

struct RawElement {
    std::string row;
    std::string col;
};

RawElement as_element(const json& v) {
    if (!v.is_object() || !v.contains("row") || !v.contains("col")) {
        throw std::invalid_argument("expected {\"row\": \"duu\", \"col\": \"ddu\"}");
    }
    return {as_string(v.at("row")), as_string(v.at("col"))};
}

json element_json(QosElement e, int qos_sites) {
    return {{"row", format_arrows(e.row, qos_sites)}, {"col", format_arrows(e.col, qos_sites)}};
}

}  // namespace

SpinConfiguration parse_arrows(const std::string& arrows, int qos_sites) {
    if (static_cast<int>(arrows.size()) != qos_sites) {
        throw ParameterError("configuration \"" + arrows + "\" must have one letter per QOS site (" +
                             std::to_string(qos_sites) + ")");
    }
    std::uint32_t bits = 0;
    for (int k = 0; k < qos_sites; ++k) {
        const char ch = arrows[static_cast<std::size_t>(k)];
        if (ch == 'u' || ch == 'U') {
            bits |= 1U << k;
        } else if (ch != 'd' && ch != 'D') {
            throw ParameterError("configuration \"" + arrows + "\" may only contain 'u' and 'd'");
        }
    }
    return {bits};
}

std::string format_arrows(SpinConfiguration c, int qos_sites) {
    std::string out;
    for (int k = 0; k < qos_sites; ++k) out.push_back(((c.bits >> k) & 1U) != 0 ? 'u' : 'd');
    return out;
}

RunConfig default_config() {
    RunConfig c;
    c.theta_s = {kPi / 2};
    c.theta_b = {kPi / 4, kPi / 2, 3 * kPi / 4};
    c.qme_first = {kPi / 2, kPi / 4};
    c.qme_second = {kPi / 4, 3 * kPi / 4};
    c.spectra_element = {parse_arrows("duu", 3), parse_arrows("ddu", 3)};
    c.theory_element = {parse_arrows("udd", 3), parse_arrows("ddd", 3)};
    c.theory_angles = {kPi / 2, kPi / 2};
    return c;
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");

    static const std::vector<std::string> known = {"model", "geometry", "init",   "time",   "ensemble",
                                                   "analysis", "output", "qme", "spectra", "theory",
                                                   "krylov", "threads"};
    RunConfig c = default_config();
    Reader r(doc);
    for (const auto& [key, value] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) r.fail("config: unknown key \"" + key + "\"");
    }

    const json* model = r.section("model");
    r.field(model, "model", "L", [&](const json& v) { c.model.L = static_cast<int>(as_integer(v)); });
    r.field(model, "model", "J", [&](const json& v) { c.model.J = as_number(v); });
    r.field(model, "model", "h", [&](const json& v) { c.model.h = as_number(v); });
    r.check(c.model.L >= 2 && c.model.L <= kMaxSites, "model.L: must lie in [2, " + std::to_string(kMaxSites) + "]");
    r.check(std::isfinite(c.model.J) && std::isfinite(c.model.h), "model: J and h must be finite");

    // Without an explicit geometry, keep a three-site QOS at the chain centre.
    bool geometry_given = false;
    const json* geometry = r.section("geometry");
    r.field(geometry, "geometry", "qos_sites", [&](const json& v) {
        if (!v.is_array() || v.size() != 2) throw std::invalid_argument("expected [first, last]");
        c.qos_first = static_cast<int>(as_integer(v[0]));
        c.qos_last = static_cast<int>(as_integer(v[1]));
        geometry_given = true;
    });
    if (!geometry_given && c.model.L >= 4 && c.model.L <= kMaxSites) {
        const auto g = Geometry::centered(c.model.L, 3);
        c.qos_first = g.qos_first();
        c.qos_last = g.qos_last();
    }
    const bool geometry_ok = c.qos_first >= 1 && c.qos_first <= c.qos_last && c.qos_last <= c.model.L &&
                             c.qos_last - c.qos_first + 1 < c.model.L;
    r.check(geometry_ok, "geometry.qos_sites: need 1 <= first <= last <= L with at least one bath site");
    const int qos_size = geometry_ok ? c.qos_last - c.qos_first + 1 : 3;

    const json* init = r.section("init");
    r.field(init, "init", "theta_s", [&](const json& v) { c.theta_s = as_angle_list(v); });
    r.field(init, "init", "theta_b", [&](const json& v) { c.theta_b = as_angle_list(v); });

    const json* time = r.section("time");
    r.field(time, "time", "t_max", [&](const json& v) { c.t_max = as_number(v); });
    r.field(time, "time", "n_points", [&](const json& v) { c.n_points = static_cast<int>(as_integer(v)); });
    r.check(c.t_max > 0.0 && std::isfinite(c.t_max), "time.t_max: must be positive");
    r.check(c.n_points >= 2, "time.n_points: must be at least 2");

    const json* ens = r.section("ensemble");
    r.field(ens, "ensemble", "n_samples", [&](const json& v) { c.ensemble.n_samples = static_cast<int>(as_integer(v)); });
    r.field(ens, "ensemble", "dt_min", [&](const json& v) { c.ensemble.dt_min = as_number(v); });
    r.field(ens, "ensemble", "dt_max", [&](const json& v) { c.ensemble.dt_max = as_number(v); });
    r.field(ens, "ensemble", "seed", [&](const json& v) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw std::invalid_argument("expected a non-negative integer");
        }
        c.ensemble.seed = v.get<std::uint64_t>();
    });
    r.check(c.ensemble.n_samples >= 1, "ensemble.n_samples: must be at least 1");
    r.check(c.ensemble.dt_min >= 0.0 && c.ensemble.dt_min <= c.ensemble.dt_max && std::isfinite(c.ensemble.dt_max),
            "ensemble: need 0 <= dt_min <= dt_max");

    const json* analysis = r.section("analysis");
    r.field(analysis, "analysis", "fit_floor", [&](const json& v) { c.fit_floor = as_number(v); });
    r.field(analysis, "analysis", "delta_omega_bins",
            [&](const json& v) { c.delta_omega_bins = static_cast<int>(as_integer(v)); });
    r.field(analysis, "analysis", "n_tilde", [&](const json& v) { c.n_tilde = as_string(v); });
    r.field(analysis, "analysis", "dos_window", [&](const json& v) { c.dos_window = as_number(v); });
    r.check(c.fit_floor > 0.0 && c.fit_floor < 1.0, "analysis.fit_floor: must lie in (0, 1)");
    r.check(c.delta_omega_bins >= 1, "analysis.delta_omega_bins: must be at least 1");
    r.check(c.n_tilde == "pair" || c.n_tilde == "level", "analysis.n_tilde: must be \"pair\" or \"level\"");
    r.check(c.dos_window > 0.0, "analysis.dos_window: must be positive");

    const json* output = r.section("output");
    r.field(output, "output", "directory", [&](const json& v) { c.output_dir = as_string(v); });
    r.field(output, "output", "emit_svg", [&](const json& v) { c.emit_svg = as_bool(v); });

    const json* qme = r.section("qme");
    r.field(qme, "qme", "first", [&](const json& v) { c.qme_first = as_angle_pair(v); });
    r.field(qme, "qme", "second", [&](const json& v) { c.qme_second = as_angle_pair(v); });

    auto element_field = [&](const json* sec, const std::string& path, QosElement& target) {
        r.field(sec, path, "element", [&](const json& v) {
            const RawElement raw = as_element(v);
            target = {parse_arrows(raw.row, qos_size), parse_arrows(raw.col, qos_size)};
        });
    };
    if (qos_size != 3) {
        // The built-in elements are three-letter words; pad them with down spins.
        c.spectra_element = {{c.spectra_element.row.bits & ((1U << qos_size) - 1)},
                             {c.spectra_element.col.bits & ((1U << qos_size) - 1)}};
        c.theory_element = {{c.theory_element.row.bits & ((1U << qos_size) - 1)},
                            {c.theory_element.col.bits & ((1U << qos_size) - 1)}};
    }
    const json* spectra = r.section("spectra");
    element_field(spectra, "spectra", c.spectra_element);

    const json* theory = r.section("theory");
    element_field(theory, "theory", c.theory_element);
    r.field(theory, "theory", "theta_s", [&](const json& v) { c.theory_angles.theta_s = as_angle(v); });
    r.field(theory, "theory", "theta_b", [&](const json& v) { c.theory_angles.theta_b = as_angle(v); });
    r.field(theory, "theory", "truncation", [&](const json& v) { c.theory_truncation = as_number(v); });
    r.check(c.theory_truncation >= 0.0 && c.theory_truncation < 1.0, "theory.truncation: must lie in [0, 1)");

    const json* krylov = r.section("krylov");
    r.field(krylov, "krylov", "max_depth", [&](const json& v) { c.krylov_max_depth = static_cast<int>(as_integer(v)); });
    r.field(krylov, "krylov", "t_max", [&](const json& v) { c.krylov_t_max = as_number(v); });
    r.field(krylov, "krylov", "n_points", [&](const json& v) { c.krylov_n_points = static_cast<int>(as_integer(v)); });
    r.check(c.krylov_max_depth >= 1, "krylov.max_depth: must be at least 1");
    r.check(c.krylov_t_max > 0.0, "krylov.t_max: must be positive");
    r.check(c.krylov_n_points >= 2, "krylov.n_points: must be at least 2");

    if (doc.contains("threads")) {
        try {
            const long long t = as_integer(doc.at("threads"));
            if (t < 1 || t > 256) throw std::invalid_argument("must lie in [1, 256]");
            c.threads = static_cast<unsigned>(t);
        } catch (const std::exception& e) {
            r.fail(std::string("threads: ") + e.what());
        }
    }

    if (!r.errors().empty()) {
        std::string message;
        for (const auto& e : r.errors()) message += e + "\n";
        message.pop_back();
        throw ConfigError(message);
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& c) {
    const int qs = c.qos_last - c.qos_first + 1;
    return {
        {"model", {{"L", c.model.L}, {"J", c.model.J}, {"h", c.model.h}}},
        {"geometry", {{"qos_sites", {c.qos_first, c.qos_last}}}},
        {"init", {{"theta_s", c.theta_s}, {"theta_b", c.theta_b}}},
        {"time", {{"t_max", c.t_max}, {"n_points", c.n_points}}},
        {"ensemble",
         {{"n_samples", c.ensemble.n_samples},
          {"dt_min", c.ensemble.dt_min},
          {"dt_max", c.ensemble.dt_max},
          {"seed", c.ensemble.seed}}},
        {"analysis",
         {{"fit_floor", c.fit_floor},
          {"delta_omega_bins", c.delta_omega_bins},
          {"n_tilde", c.n_tilde},
          {"dos_window", c.dos_window}}},
        {"output", {{"directory", c.output_dir}, {"emit_svg", c.emit_svg}}},
        {"qme",
         {{"first", {{"theta_s", c.qme_first.theta_s}, {"theta_b", c.qme_first.theta_b}}},
          {"second", {{"theta_s", c.qme_second.theta_s}, {"theta_b", c.qme_second.theta_b}}}}},
        {"spectra", {{"element", element_json(c.spectra_element, qs)}}},
        {"theory",
         {{"element", element_json(c.theory_element, qs)},
          {"theta_s", c.theory_angles.theta_s},
          {"theta_b", c.theory_angles.theta_b},
          {"truncation", c.theory_truncation}}},
        {"krylov", {{"max_depth", c.krylov_max_depth}, {"t_max", c.krylov_t_max}, {"n_points", c.krylov_n_points}}},
        {"threads", c.threads},
    };
}

std::string config_hash(const RunConfig& cfg) {
    // Neither the thread count nor the output location changes any result.
    json doc = to_json(cfg);
    doc.erase("threads");
    doc["output"].erase("directory");
    const std::string text = doc.dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qme::cli
