#include "qme/cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "qme/errors.hpp"

namespace qme::cli {

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string fixed(double x, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

std::string tick_label(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string angle_tag(double theta) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", theta);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& command, const RunConfig& cfg,
                     std::initializer_list<std::string> columns, const std::vector<std::string>& notes)
    : out_(open_for_writing(path)), path_(path), columns_(columns.size()) {
    out_ << "# qme " << command << "\n";
    out_ << "# config_hash: " << config_hash(cfg) << "\n";
    for (const auto& n : notes) out_ << "# " << n << "\n";
    bool first = true;
    for (const auto& c : columns) {
        if (!first) out_ << ',';
        out_ << c;
        first = false;
    }
    out_ << '\n';
}

void CsvWriter::separator() {
    if (filled_ == columns_) throw std::logic_error("too many fields for " + path_.string());
    if (filled_ > 0) out_ << ',';
    ++filled_;
}

CsvWriter& CsvWriter::operator<<(double x) {
    separator();
    out_ << format_double(x);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long x) {
    separator();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
    separator();
    out_ << s;
    return *this;
}

void CsvWriter::end_row() {
    if (filled_ != columns_) throw std::logic_error("incomplete row in " + path_.string());
    out_ << '\n';
    filled_ = 0;
    if (!out_) throw std::runtime_error("write failed for " + path_.string());
}

void write_json(const std::filesystem::path& path, const std::string& command, const RunConfig& cfg,
                nlohmann::json body) {
    body["command"] = command;
    body["config_hash"] = config_hash(cfg);
    auto out = open_for_writing(path);
    out << body.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_svg(const std::filesystem::path& path, const RunConfig& cfg, const PlotSpec& spec,
               const std::vector<PlotSeries>& series) {
    constexpr double width = 720, height = 440;
    constexpr double left = 70, right = 170, top = 40, bottom = 55;
    const double pw = width - left - right, ph = height - top - bottom;

    auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
            if (spec.log_y && !(s.y[k] > 0)) continue;
            x0 = std::min(x0, s.x[k]);
            x1 = std::max(x1, s.x[k]);
            y0 = std::min(y0, ty(s.y[k]));
            y1 = std::max(y1, ty(s.y[k]));
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (spec.bars) y0 = std::min(y0, 0.0);
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= spec.bars ? 0.0 : pad;
    y1 += pad;

    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<!-- config_hash: " << config_hash(cfg) << " -->\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << xml_escape(spec.title) << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int k = 0; k <= 5; ++k) {
        const double xv = x0 + (x1 - x0) * k / 5.0;
        const double yv = y0 + (y1 - y0) * k / 5.0;
        const double xp = left + pw * k / 5.0;
        const double yp = top + ph * (1.0 - k / 5.0);
        svg << "<line x1=\"" << fixed(xp) << "\" y1=\"" << top + ph << "\" x2=\"" << fixed(xp) << "\" y2=\""
            << top + ph + 5 << "\" stroke=\"black\"/>";
        svg << "<text x=\"" << fixed(xp) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
            << tick_label(xv) << "</text>\n";
        svg << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(yp) << "\" x2=\"" << left << "\" y2=\"" << fixed(yp)
            << "\" stroke=\"black\"/>";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << fixed(yp + 4) << "\" text-anchor=\"end\">"
            << tick_label(spec.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
        << xml_escape(spec.x_label) << "</text>\n";
    svg << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << xml_escape(spec.y_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        const char* colour = palette[s % std::size(palette)];
        if (spec.bars && s == 0 && ser.x.size() > 1) {
            const double w = std::abs(px(ser.x[1]) - px(ser.x[0]));
            for (std::size_t k = 0; k < ser.x.size(); ++k) {
                const double yb = py(std::max(ser.y[k], spec.log_y ? std::pow(10.0, y0) : y0));
                const double base = top + ph;
                svg << "<rect x=\"" << fixed(px(ser.x[k]) - w / 2) << "\" y=\"" << fixed(yb) << "\" width=\""
                    << fixed(w) << "\" height=\"" << fixed(std::max(0.0, base - yb)) << "\" fill=\"" << colour
                    << "\" fill-opacity=\"0.6\"/>\n";
            }
        } else {
            svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t k = 0; k < ser.x.size() && k < ser.y.size(); ++k) {
                if (!std::isfinite(ser.y[k]) || (spec.log_y && !(ser.y[k] > 0))) continue;
                svg << fixed(px(ser.x[k])) << ',' << fixed(py(ser.y[k])) << ' ';
            }
            svg << "\"/>\n";
        }
        const double ly = top + 14 + 18.0 * static_cast<double>(s);
        svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 32 << "\" y2=\""
            << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>";
        svg << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\">" << xml_escape(ser.name) << "</text>\n";
    }
    svg << "</svg>\n";

    auto out = open_for_writing(path);
    out << svg.str();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace qme::cli
