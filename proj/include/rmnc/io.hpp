#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rmnc/analysis.hpp"
#include "rmnc/dynamics.hpp"
#include "rmnc/simulate.hpp"

namespace rmnc {

/// printf("%.17g").
[[nodiscard]] std::string fmt(double x);

/// Writes bytes verbatim (LF line endings are kept as is). Creates parent directories.
void write_file(const std::filesystem::path& path, const std::string& content);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

/// bin_lo,bin_hi,count,density_estimate
[[nodiscard]] std::string histogram_csv(const Histogram& h);
/// Inverse of histogram_csv; under/overflow are not part of the CSV and are passed in.
[[nodiscard]] Histogram parse_histogram_csv(const std::string& text, std::uint64_t under = 0, std::uint64_t over = 0);

/// level,t_lo,t_hi,signed_crossings,rate
[[nodiscard]] std::string flux_csv(const std::vector<FluxRecord>& flux);

/// x,rho
[[nodiscard]] std::string density_csv(const std::vector<double>& x, const std::vector<double>& rho);

/// t,lambda_1,...,lambda_M with M the largest row length; short rows are padded
/// with empty fields.
[[nodiscard]] std::string trajectory_csv(const Trajectory& tr);

/// t,alive
[[nodiscard]] std::string alive_csv(const std::vector<AlivePoint>& alive);

/// t,re_omega,im_omega,re_G,im_G,converged
[[nodiscard]] std::string field_csv(const std::vector<GridField>& fields);

/// t,sup_distance
[[nodiscard]] std::string series_csv(const std::vector<double>& t, const std::vector<double>& v,
                                     const std::string& value_name);

/// Numbers from a text file separated by whitespace, commas or newlines; lines
/// starting with '#' are skipped.
[[nodiscard]] std::vector<double> parse_numbers(const std::string& text);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool points = false;  // markers instead of a polyline
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    double width = 640.0;
    double height = 420.0;
};

/// Standalone SVG line/scatter plot. Non-positive values are dropped on log axes.
[[nodiscard]] std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace rmnc
