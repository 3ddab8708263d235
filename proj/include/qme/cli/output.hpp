#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "qme/cli/config.hpp"

namespace qme::cli {

// Shortest-exact rendering: printf "%.17g", with "nan"/"inf" spelled out.
std::string format_double(double x);

// Comma-separated writer. The file opens with '#' comment lines naming the
// command and the config hash, followed by one header row.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& command, const RunConfig& cfg,
              std::initializer_list<std::string> columns, const std::vector<std::string>& notes = {});

    CsvWriter& operator<<(double x);
    CsvWriter& operator<<(long long x);
    CsvWriter& operator<<(int x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(std::size_t x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(const std::string& s);
    void end_row();

private:
    void separator();

    std::ofstream out_;
    std::filesystem::path path_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

// Pretty-printed JSON with "command" and "config_hash" fields merged in.
void write_json(const std::filesystem::path& path, const std::string& command, const RunConfig& cfg,
                nlohmann::json body);

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    bool bars = false;  // draw the first series as a histogram
};

// Static line chart. A comment carrying the config hash is embedded.
void write_svg(const std::filesystem::path& path, const RunConfig& cfg, const PlotSpec& spec,
               const std::vector<PlotSeries>& series);

// "1.5708" style tag used in file names.
std::string angle_tag(double theta);

}  // namespace qme::cli
