#include "qme/cli/commands.hpp"

#include <cmath>
#include <ostream>

#include "qme/asymmetry.hpp"
#include "qme/cli/output.hpp"
#include "qme/dynamics.hpp"
#include "qme/errors.hpp"
#include "qme/krylov.hpp"
#include "qme/spectra.hpp"
#include "qme/theory.hpp"

namespace qme::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDensityTolerance = 1e-8;

void check_densities(std::span<const DensityMatrix> rhos, const std::string& what) {
    for (std::size_t k = 0; k < rhos.size(); ++k) {
        const auto d = diagnose(rhos[k]);
        if (d.hermiticity > kDensityTolerance || d.trace_error > kDensityTolerance ||
            d.min_eigenvalue < -kDensityTolerance) {
            throw NumericalError(what + ": reduced density matrix at grid point " + std::to_string(k) +
                                 " is not a valid state (hermiticity " + format_double(d.hermiticity) +
                                 ", trace error " + format_double(d.trace_error) + ", min eigenvalue " +
                                 format_double(d.min_eigenvalue) + ")");
        }
    }
}

json fit_json(const GaussianFit& fit, std::span<const double> times) {
    json j;
    j["excluded"] = !fit.ok;
    if (fit.ok) {
        j["A"] = fit.A;
        j["t0"] = fit.t0;
        j["residual"] = fit.residual;
        j["window"] = {times[fit.window_begin], times[fit.window_end - 1]};
        j["window_indices"] = {fit.window_begin, fit.window_end};
    } else {
        j["A"] = nullptr;
        j["t0"] = nullptr;
        j["residual"] = nullptr;
        j["window"] = nullptr;
        j["reason"] = fit.failure;
    }
    return j;
}

json angles_json(AnglePair a) { return {{"theta_s", a.theta_s}, {"theta_b", a.theta_b}}; }

AsymmetryCurve relaxation_curve(const EvolutionEngine& engine, const RunConfig& cfg, AnglePair a,
                                std::span<const double> times) {
    const auto rhos = ensemble_reduced(engine, a.theta_s, a.theta_b, cfg.ensemble, times, cfg.threads);
    check_densities(rhos, "relaxation run");
    return asymmetry_curve(times, rhos, "theta_s=" + angle_tag(a.theta_s) + ", theta_b=" + angle_tag(a.theta_b));
}

std::vector<std::string> angle_notes(AnglePair a) {
    return {"theta_s = " + format_double(a.theta_s), "theta_b = " + format_double(a.theta_b)};
}

}  // namespace

CommandResult cmd_relax(const RunConfig& cfg, const fs::path& out_dir) {
    const EvolutionEngine engine(cfg.model, cfg.geometry(), cfg.threads);
    const auto times = cfg.time_grid();

    CommandResult result;
    json runs = json::array();
    std::vector<PlotSeries> series;
    for (double ts : cfg.theta_s) {
        for (double tb : cfg.theta_b) {
            const AnglePair a{ts, tb};
            const auto curve = relaxation_curve(engine, cfg, a, times);
            const std::string stem = "relax_" + angle_tag(ts) + "_" + angle_tag(tb);

            {
                CsvWriter csv(out_dir / (stem + ".csv"), "relax", cfg, {"t", "delta_s"}, angle_notes(a));
                for (std::size_t k = 0; k < times.size(); ++k) {
                    csv << times[k] << curve.values[k];
                    csv.end_row();
                }
            }
            json fit = fit_json(fit_gaussian_decay(curve, cfg.fit_floor), times);
            fit["theta_s"] = ts;
            fit["theta_b"] = tb;
            fit["delta_s0"] = curve.values.front();
            write_json(out_dir / (stem + "_fit.json"), "relax", cfg, fit);
            result.files.push_back(out_dir / (stem + ".csv"));
            result.files.push_back(out_dir / (stem + "_fit.json"));
            fit["csv"] = stem + ".csv";
            runs.push_back(fit);
            series.push_back({curve.label, curve.values.empty() ? std::vector<double>{} : times, curve.values});
        }
    }

    result.summary = {{"runs", runs}};
    write_json(out_dir / "relax_summary.json", "relax", cfg, result.summary);
    result.files.push_back(out_dir / "relax_summary.json");
    if (cfg.emit_svg) {
        write_svg(out_dir / "relax.svg", cfg, {"Entanglement asymmetry relaxation", "t", "delta S", false, false},
                  series);
        result.files.push_back(out_dir / "relax.svg");
    }
    return result;
}

CommandResult cmd_qme(const RunConfig& cfg, const fs::path& out_dir) {
    const EvolutionEngine engine(cfg.model, cfg.geometry(), cfg.threads);
    const auto times = cfg.time_grid();
    const auto c1 = relaxation_curve(engine, cfg, cfg.qme_first, times);
    const auto c2 = relaxation_curve(engine, cfg, cfg.qme_second, times);
    const auto verdict = detect_mpemba(c1, c2);

    CommandResult result;
    {
        CsvWriter csv(out_dir / "qme_curves.csv", "qme", cfg, {"t", "delta_s_first", "delta_s_second"},
                      {"first: " + c1.label, "second: " + c2.label});
        for (std::size_t k = 0; k < times.size(); ++k) {
            csv << times[k] << c1.values[k] << c2.values[k];
            csv.end_row();
        }
    }
    result.files.push_back(out_dir / "qme_curves.csv");

    json first = angles_json(cfg.qme_first);
    first["delta_s0"] = c1.values.front();
    first["fit"] = fit_json(fit_gaussian_decay(c1, cfg.fit_floor), times);
    json second = angles_json(cfg.qme_second);
    second["delta_s0"] = c2.values.front();
    second["fit"] = fit_json(fit_gaussian_decay(c2, cfg.fit_floor), times);

    result.summary = {
        {"occurs", verdict.occurs},
        {"t_mpemba", verdict.t_mpemba ? json(*verdict.t_mpemba) : json(nullptr)},
        {"margin", verdict.margin ? json(*verdict.margin) : json(nullptr)},
        {"initially_larger", verdict.initially_larger == 1   ? json("first")
                             : verdict.initially_larger == 2 ? json("second")
                                                             : json(nullptr)},
        {"strictness", kMpembaStrictness},
        {"first", first},
        {"second", second},
    };
    write_json(out_dir / "qme_verdict.json", "qme", cfg, result.summary);
    result.files.push_back(out_dir / "qme_verdict.json");
    if (cfg.emit_svg) {
        write_svg(out_dir / "qme.svg", cfg, {"Mpemba comparison", "t", "delta S", false, false},
                  {{"first: " + c1.label, times, c1.values}, {"second: " + c2.label, times, c2.values}});
        result.files.push_back(out_dir / "qme.svg");
    }
    return result;
}

CommandResult cmd_spectra(const RunConfig& cfg, const fs::path& out_dir) {
    const EvolutionEngine engine(cfg.model, cfg.geometry(), cfg.threads);
    const Geometry& g = engine.geometry();
    CommandResult result;

    {
        CsvWriter csv(out_dir / "sector_variance.csv", "spectra", cfg,
                      {"n_up", "charge", "dimension", "energy_mean", "energy_variance", "dos_entropy"},
                      {"dos_entropy = ln(level count within +-dos_window/2 of the sector mean energy)"});
        for (const auto& sp : engine.spectra()) {
            const double mean = sp.eigenvalues.mean();
            const auto s = dos_entropy(sp, {mean - cfg.dos_window / 2, mean + cfg.dos_window / 2});
            csv << sp.sector.n_up() << sp.sector.charge() << sp.dimension() << mean << sector_energy_variance(sp)
                << (s ? *s : std::nan(""));
            csv.end_row();
        }
    }
    result.files.push_back(out_dir / "sector_variance.csv");

    const QosElement el = cfg.spectra_element;
    const int u1 = up_count(el.row), u2 = up_count(el.col);
    const bool per_level = cfg.n_tilde == "level";
    json per_m = json::array();
    for (int m = 0; m <= g.bath_size(); ++m) {
        const auto& a = engine.spectrum(u1 + m);
        const auto& b = engine.spectrum(u2 + m);
        const Eigen::MatrixXd w = transition_weights(engine, el, m);
        const double width = default_bin_width(a, b, cfg.delta_omega_bins);
        const auto hist = gap_histogram(a, b, width, &w);
        const std::string name = "gaps_m" + std::to_string(m) + ".csv";
        {
            CsvWriter csv(out_dir / name, "spectra", cfg, {"omega", "count", "n_tilde", "m_avg", "nm_product"},
                          {"element <" + format_arrows(el.row, g.qos_size()) + "|rho|" +
                               format_arrows(el.col, g.qos_size()) + ">, bath sector m = " + std::to_string(m),
                           std::string("n_tilde normalised per ") + (per_level ? "level" : "pair"),
                           "bin_width = " + format_double(width)});
            for (std::size_t k = 0; k < hist.centers.size(); ++k) {
                csv << hist.centers[k] << hist.count[k] << (per_level ? hist.n_per_level[k] : hist.n_per_pair[k])
                    << (*hist.m_avg)[k] << (*hist.nm_product)[k];
                csv.end_row();
            }
        }
        result.files.push_back(out_dir / name);
        per_m.push_back({{"m", m},
                         {"row_sector_dimension", a.dimension()},
                         {"col_sector_dimension", b.dimension()},
                         {"bin_width", width},
                         {"gap_variance", gap_variance(a, b)},
                         {"total_weight", w.sum()},
                         {"csv", name}});
        if (cfg.emit_svg) {
            std::vector<double> n(hist.centers.size()), nm(hist.centers.size());
            for (std::size_t k = 0; k < n.size(); ++k) {
                n[k] = per_level ? hist.n_per_level[k] : hist.n_per_pair[k];
                nm[k] = (*hist.nm_product)[k];
            }
            const std::string svg = "gaps_m" + std::to_string(m) + ".svg";
            write_svg(out_dir / svg, cfg,
                      {"Gap density, bath sector m = " + std::to_string(m), "omega", "weight", false, true},
                      {{"n_tilde", hist.centers, n}, {"N*M", hist.centers, nm}});
            result.files.push_back(out_dir / svg);
        }
    }
    result.summary = {{"element",
                       {{"row", format_arrows(el.row, g.qos_size())}, {"col", format_arrows(el.col, g.qos_size())}}},
                      {"n_tilde", cfg.n_tilde},
                      {"per_m", per_m}};
    write_json(out_dir / "spectra_summary.json", "spectra", cfg, result.summary);
    result.files.push_back(out_dir / "spectra_summary.json");
    return result;
}

CommandResult cmd_krylov(const RunConfig& cfg, const fs::path& out_dir) {
    const Geometry g = cfg.geometry();
    if (cfg.model.L > kMaxDenseOperatorSites) {
        throw ParameterError("krylov: model.L must not exceed " + std::to_string(kMaxDenseOperatorSites));
    }
    if (g.qos_size() < 3) throw ParameterError("krylov: the operator pairs need at least three QOS sites");
    const auto times = make_time_grid(cfg.krylov_t_max, cfg.krylov_n_points);
    const std::vector<int> qprimes = {0, 1, 2};
    LanczosOptions options;
    options.max_depth = cfg.krylov_max_depth;
    const auto report = suppression_study(cfg.model, g, qprimes, times, options, cfg.threads);

    CommandResult result;
    json entries = json::array();
    CsvWriter corr(out_dir / "krylov_correlation.csv", "krylov", cfg,
                   {"t", "re_direct", "im_direct", "re_krylov", "im_krylov", "qprime"});
    std::vector<PlotSeries> series;
    for (const auto& e : report.entries) {
        const auto phi = phi_evolve(e.chain, times);
        const auto ck = correlation_krylov(e.chain, phi);
        const std::string name = "krylov_chain_q" + std::to_string(e.qprime) + ".csv";
        {
            CsvWriter csv(out_dir / name, "krylov", cfg, {"n", "a_n", "b_n", "re_c", "im_c"},
                          {"qprime = " + std::to_string(e.qprime), "seed_norm = " + format_double(e.chain.seed_norm)});
            for (std::size_t n = 0; n < e.chain.depth(); ++n) {
                csv << n << e.chain.a[n] << e.chain.b[n] << e.chain.overlaps[n].real() << e.chain.overlaps[n].imag();
                csv.end_row();
            }
        }
        result.files.push_back(out_dir / name);

        double max_mismatch = 0.0;
        std::vector<double> mag(times.size());
        for (std::size_t k = 0; k < times.size(); ++k) {
            corr << times[k] << e.correlation[k].real() << e.correlation[k].imag() << ck[k].real() << ck[k].imag()
                 << e.qprime;
            corr.end_row();
            max_mismatch = std::max(max_mismatch, std::abs(e.correlation[k] - ck[k]));
            mag[k] = std::abs(e.correlation[k]);
        }
        series.push_back({"q' = " + std::to_string(e.qprime), times, mag});
        entries.push_back({{"qprime", e.qprime},
                           {"max_abs_correlation", e.max_abs_correlation},
                           {"minimal_depth", e.minimal_depth >= 0 ? json(e.minimal_depth) : json(nullptr)},
                           {"chain_depth", e.chain.depth()},
                           {"terminated", e.chain.terminated},
                           {"max_reconstruction_error", max_mismatch},
                           {"phi_norm_error", phi.max_norm_error},
                           {"rk4_step", phi.step},
                           {"csv", name}});
    }
    result.files.push_back(out_dir / "krylov_correlation.csv");

    result.summary = {{"overlap_threshold", kOverlapThreshold}, {"max_depth", cfg.krylov_max_depth}, {"entries", entries}};
    write_json(out_dir / "krylov_suppression.json", "krylov", cfg, result.summary);
    result.files.push_back(out_dir / "krylov_suppression.json");
    if (cfg.emit_svg) {
        write_svg(out_dir / "krylov.svg", cfg, {"|C(t)| for the mismatch operators", "t", "|C(t)|", false, false},
                  series);
        result.files.push_back(out_dir / "krylov.svg");
    }
    return result;
}

CommandResult cmd_theory(const RunConfig& cfg, const fs::path& out_dir) {
    const EvolutionEngine engine(cfg.model, cfg.geometry(), cfg.threads);
    const Geometry& g = engine.geometry();
    const auto times = cfg.time_grid();
    const AnglePair a = cfg.theory_angles;
    const QosElement el = cfg.theory_element;

    const Eigen::VectorXcd qos = qos_initial_state(a.theta_s, g.qos_size()).to_dense();
    const DephasedBath bath = dephased_bath(bath_initial_state(a.theta_b, g.bath_size()));
    PredictionOptions options;
    options.truncation = cfg.theory_truncation;
    options.threads = cfg.threads;
    const auto prediction = predict_offdiagonal(engine, qos, bath, el, times, options);

    const auto rhos = ensemble_reduced(engine, a.theta_s, a.theta_b, cfg.ensemble, times, cfg.threads);
    check_densities(rhos, "theory comparison");

    CommandResult result;
    const std::string label = "<" + format_arrows(el.row, g.qos_size()) + "|rho|" +
                              format_arrows(el.col, g.qos_size()) + ">";
    auto notes = angle_notes(a);
    notes.push_back("element " + label);
    {
        CsvWriter csv(out_dir / "theory_per_m.csv", "theory", cfg, {"t", "m", "re", "im", "abs"}, notes);
        for (std::size_t k = 0; k < prediction.m_values.size(); ++k) {
            for (std::size_t j = 0; j < times.size(); ++j) {
                const auto z = prediction.per_m[k][j];
                csv << times[j] << prediction.m_values[k] << z.real() << z.imag() << std::abs(z);
                csv.end_row();
            }
        }
    }
    result.files.push_back(out_dir / "theory_per_m.csv");

    double max_diff = 0.0;
    std::vector<double> pred_abs(times.size()), sim_abs(times.size());
    {
        CsvWriter csv(out_dir / "theory_compare.csv", "theory", cfg,
                      {"t", "re_predicted", "im_predicted", "re_simulated", "im_simulated", "abs_difference"}, notes);
        for (std::size_t j = 0; j < times.size(); ++j) {
            const auto p = prediction.total[j];
            const auto s = rhos[j].entries(el.row.bits, el.col.bits);
            const double d = std::abs(p - s);
            max_diff = std::max(max_diff, d);
            pred_abs[j] = std::abs(p);
            sim_abs[j] = std::abs(s);
            csv << times[j] << p.real() << p.imag() << s.real() << s.imag() << d;
            csv.end_row();
        }
    }
    result.files.push_back(out_dir / "theory_compare.csv");

    const int u1 = up_count(el.row), u2 = up_count(el.col);
    json scales = json::array();
    std::vector<PlotSeries> series{{"predicted", times, pred_abs}, {"simulated", times, sim_abs}};
    for (const auto& ts : per_m_timescale(prediction, cfg.fit_floor)) {
        const double centre = 0.5 * (u1 + u2) + ts.m;
        json e = {{"m", ts.m},
                  {"occupation", bath.occupations[static_cast<std::size_t>(ts.m)]},
                  {"filling", centre},
                  {"distance_from_half_filling", std::abs(centre - 0.5 * g.num_sites())}};
        if (ts.fit) {
            e["fit"] = fit_json(*ts.fit, times);
        } else {
            e["fit"] = nullptr;
        }
        scales.push_back(e);
    }
    result.summary = {{"element", {{"row", format_arrows(el.row, g.qos_size())}, {"col", format_arrows(el.col, g.qos_size())}}},
                      {"theta_s", a.theta_s},
                      {"theta_b", a.theta_b},
                      {"max_abs_difference", max_diff},
                      {"per_m", scales}};
    write_json(out_dir / "theory_summary.json", "theory", cfg, result.summary);
    result.files.push_back(out_dir / "theory_summary.json");
    if (cfg.emit_svg) {
        write_svg(out_dir / "theory.svg", cfg, {"|" + label + "|", "t", "magnitude", false, false}, series);
        result.files.push_back(out_dir / "theory.svg");
    }
    return result;
}

int run_command(const std::string& command, const fs::path& config_path, const fs::path& out_dir,
                std::ostream& log, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        cfg.model.validate();
        cfg.ensemble.validate();
        (void)cfg.geometry();
    } catch (const ConfigError& e) {
        err << "config error:\n" << e.what() << '\n';
        return kExitConfigError;
    } catch (const ParameterError& e) {
        err << "config error:\n" << e.what() << '\n';
        return kExitConfigError;
    }
    const fs::path dir = out_dir.empty() ? fs::path(cfg.output_dir) : out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "error: cannot create output directory " << dir.string() << ": " << ec.message() << '\n';
        return kExitIoError;
    }

    try {
        CommandResult r;
        if (command == "relax") {
            r = cmd_relax(cfg, dir);
        } else if (command == "qme") {
            r = cmd_qme(cfg, dir);
        } else if (command == "spectra") {
            r = cmd_spectra(cfg, dir);
        } else if (command == "krylov") {
            r = cmd_krylov(cfg, dir);
        } else if (command == "theory") {
            r = cmd_theory(cfg, dir);
        } else {
            err << "unknown command " << command << '\n';
            return kExitConfigError;
        }
        for (const auto& f : r.files) log << f.string() << '\n';
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumericalFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitIoError;
    }
    return kExitSuccess;
}

}  // namespace qme::cli
