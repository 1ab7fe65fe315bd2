#include "output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "chaology/error.hpp"

namespace chaology::cli {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()), path_(path) {
    if (!out_) throw InvalidArgument("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_) throw InvalidArgument("csv row width mismatch in " + path_.string());
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw InvalidArgument("failed writing " + path_.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw InvalidArgument("cannot write " + path.string());
}

namespace {

constexpr double width = 640, height = 420, left = 70, right = 20, top = 40, bottom = 50;

struct Frame {
    double x0, x1, y0, y1;
    bool log_y;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    double py(double y) const {
        const double v = log_y ? std::log10(y) : y;
        return height - bottom - (v - y0) / (y1 - y0) * (height - top - bottom);
    }
    bool drawable(double y) const { return std::isfinite(y) && (!log_y || y > 0); }
};

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

std::string tick(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

Frame make_frame(const std::vector<const PlotSeries*>& all, bool log_y, double ymin_hint = NAN) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto* s : all)
        for (std::size_t i = 0; i < std::min(s->x.size(), s->y.size()); ++i) {
            const double y = s->y[i];
            if (!std::isfinite(s->x[i]) || !std::isfinite(y) || (log_y && y <= 0)) continue;
            x0 = std::min(x0, s->x[i]);
            x1 = std::max(x1, s->x[i]);
            const double v = log_y ? std::log10(y) : y;
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    if (std::isfinite(ymin_hint)) y0 = std::min(y0, ymin_hint);
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    return {x0, x1, y0 - pad, y1 + pad, log_y};
}

void axes(std::ostream& o, const Frame& f, const PlotSpec& spec) {
    o << "<rect x='" << left << "' y='" << top << "' width='" << width - left - right << "' height='"
      << height - top - bottom << "' fill='none' stroke='#333'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 4, yv = f.y0 + (f.y1 - f.y0) * i / 4;
        const double xp = f.px(xv);
        const double yp = height - bottom - (height - top - bottom) * i / 4.0;
        o << "<text x='" << xp << "' y='" << height - bottom + 16 << "' font-size='11' text-anchor='middle'>"
          << tick(xv) << "</text>\n";
        o << "<text x='" << left - 6 << "' y='" << yp + 4 << "' font-size='11' text-anchor='end'>"
          << (f.log_y ? "1e" + tick(yv) : tick(yv)) << "</text>\n";
    }
    o << "<text x='" << width / 2 << "' y='22' font-size='14' text-anchor='middle'>" << esc(spec.title) << "</text>\n";
    o << "<text x='" << width / 2 << "' y='" << height - 12 << "' font-size='12' text-anchor='middle'>"
      << esc(spec.xlabel) << "</text>\n";
    o << "<text x='16' y='" << height / 2 << "' font-size='12' text-anchor='middle' transform='rotate(-90 16 "
      << height / 2 << ")'>" << esc(spec.ylabel) << "</text>\n";
}

void curves(std::ostream& o, const Frame& f, const std::vector<PlotSeries>& series) {
    int legend = 0;
    for (const auto& s : series) {
        o << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (f.drawable(s.y[i])) o << f.px(s.x[i]) << ',' << f.py(s.y[i]) << ' ';
        o << "'/>\n";
        if (s.markers)
            for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
                if (f.drawable(s.y[i]))
                    o << "<circle cx='" << f.px(s.x[i]) << "' cy='" << f.py(s.y[i]) << "' r='3' fill='" << s.color
                      << "'/>\n";
        if (!s.label.empty()) {
            const double y = top + 16 + 16 * legend++;
            o << "<line x1='" << width - right - 150 << "' y1='" << y - 4 << "' x2='" << width - right - 130
              << "' y2='" << y - 4 << "' stroke='" << s.color << "' stroke-width='2'/>\n";
            o << "<text x='" << width - right - 125 << "' y='" << y << "' font-size='11'>" << esc(s.label)
              << "</text>\n";
        }
    }
}

void finish(const std::filesystem::path& path, const std::string& body) {
    std::ostringstream o;
    o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << body << "</svg>\n";
    write_text(path, o.str());
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    std::vector<const PlotSeries*> all;
    for (const auto& s : series) all.push_back(&s);
    const Frame f = make_frame(all, spec.log_y);
    std::ostringstream o;
    axes(o, f, spec);
    curves(o, f, series);
    finish(path, o.str());
}

void write_histogram_plot(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<double>& edges,
                          const std::vector<double>& density, const std::vector<PlotSeries>& overlays) {
    PlotSeries bars;
    for (std::size_t b = 0; b < density.size(); ++b) {
        bars.x.insert(bars.x.end(), {edges[b], edges[b + 1]});
        bars.y.insert(bars.y.end(), {density[b], density[b]});
    }
    std::vector<const PlotSeries*> all{&bars};
    for (const auto& s : overlays) all.push_back(&s);
    const Frame f = make_frame(all, false, 0.0);
    std::ostringstream o;
    axes(o, f, spec);
    for (std::size_t b = 0; b < density.size(); ++b) {
        const double x = f.px(edges[b]), w = f.px(edges[b + 1]) - x, y = f.py(density[b]);
        o << "<rect x='" << x << "' y='" << y << "' width='" << w << "' height='" << f.py(0.0) - y
          << "' fill='#c7d7ea' stroke='#7a9cc6' stroke-width='0.5'/>\n";
    }
    curves(o, f, overlays);
    finish(path, o.str());
}

}  // namespace chaology::cli
