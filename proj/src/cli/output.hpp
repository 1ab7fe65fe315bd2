#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace chaology::cli {

/// Shortest round-trip decimal form, '.' separator regardless of locale.
std::string format_number(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    void close();

private:
    std::ofstream out_;
    std::size_t columns_;
    std::filesystem::path path_;
};

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool markers = false;
};

struct PlotSpec {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool log_y = false;
};

void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec,
                     const std::vector<PlotSeries>& series);

/// Bars for the histogram, curves for the overlays.
void write_histogram_plot(const std::filesystem::path& path, const PlotSpec& spec,
                          const std::vector<double>& edges, const std::vector<double>& density,
                          const std::vector<PlotSeries>& overlays);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace chaology::cli
