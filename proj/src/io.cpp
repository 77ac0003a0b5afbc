#include "rmnc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "rmnc/errors.hpp"

namespace rmnc {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string histogram_csv(const Histogram& h) {
    std::string s = "bin_lo,bin_hi,count,density_estimate\n";
    for (std::size_t i = 0; i < h.bins(); ++i) {
        s += fmt(h.bin_lo(i)) + ',' + fmt(h.bin_hi(i)) + ',' + std::to_string(h.count(i)) + ',' + fmt(h.density(i)) +
             '\n';
    }
    return s;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DomainError("not a number: '" + s + "'");
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw DomainError("not a number: '" + s + "'");
    return v;
}

}  // namespace

Histogram parse_histogram_csv(const std::string& text, std::uint64_t under, std::uint64_t over) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("bin_lo,bin_hi,count", 0) != 0) {
        throw DomainError("histogram CSV: missing header");
    }
    std::vector<double> lo, hi;
    std::vector<std::uint64_t> counts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() < 3) throw DomainError("histogram CSV: short row");
        lo.push_back(to_double(f[0]));
        hi.push_back(to_double(f[1]));
        counts.push_back(static_cast<std::uint64_t>(std::stoull(f[2])));
    }
    if (counts.empty()) throw DomainError("histogram CSV: no bins");
    Histogram h(lo.front(), hi.back(), counts.size());
    h.set_counts(std::move(counts), under, over);
    return h;
}

std::string flux_csv(const std::vector<FluxRecord>& flux) {
    std::string s = "level,t_lo,t_hi,signed_crossings,rate\n";
    for (const auto& f : flux) {
        s += fmt(f.level) + ',' + fmt(f.t_lo) + ',' + fmt(f.t_hi) + ',' + std::to_string(f.signed_crossings) + ',' +
             fmt(f.rate) + '\n';
    }
    return s;
}

std::string density_csv(const std::vector<double>& x, const std::vector<double>& rho) {
    if (x.size() != rho.size()) throw DomainError("density_csv: size mismatch");
    std::string s = "x,rho\n";
    for (std::size_t i = 0; i < x.size(); ++i) s += fmt(x[i]) + ',' + fmt(rho[i]) + '\n';
    return s;
}

std::string trajectory_csv(const Trajectory& tr) {
    std::size_t width = 0;
    for (const auto& p : tr.paths) width = std::max(width, p.size());
    std::string s = "t";
    for (std::size_t k = 1; k <= width; ++k) s += ",lambda_" + std::to_string(k);
    s += '\n';
    for (std::size_t r = 0; r < tr.times.size(); ++r) {
        s += fmt(tr.times[r]);
        const auto& p = tr.paths[r];
        for (std::size_t k = 0; k < width; ++k) {
            s += ',';
            if (k < p.size()) s += fmt(p[k]);
        }
        s += '\n';
    }
    return s;
}

std::string alive_csv(const std::vector<AlivePoint>& alive) {
    std::string s = "t,alive\n";
    for (const auto& a : alive) s += fmt(a.t) + ',' + std::to_string(a.alive) + '\n';
    return s;
}

std::string field_csv(const std::vector<GridField>& fields) {
    std::string s = "t,re_omega,im_omega,re_G,im_G,converged\n";
    for (const auto& f : fields) {
        for (std::size_t k = 0; k < f.points.size(); ++k) {
            s += fmt(f.time) + ',' + fmt(f.points[k].real()) + ',' + fmt(f.points[k].imag()) + ',' +
                 fmt(f.values[k].real()) + ',' + fmt(f.values[k].imag()) + ',' + (f.converged[k] ? "1" : "0") + '\n';
        }
    }
    return s;
}

std::string series_csv(const std::vector<double>& t, const std::vector<double>& v, const std::string& value_name) {
    if (t.size() != v.size()) throw DomainError("series_csv: size mismatch");
    std::string s = "t," + value_name + '\n';
    for (std::size_t i = 0; i < t.size(); ++i) s += fmt(t[i]) + ',' + fmt(v[i]) + '\n';
    return s;
}

std::vector<double> parse_numbers(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        for (char& c : line) {
            if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
        }
        std::istringstream fields(line);
        std::string tok;
        while (fields >> tok) out.push_back(to_double(tok));
    }
    return out;
}

namespace {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    [[nodiscard]] double map(double v) const { return log ? std::log10(v) : v; }
    [[nodiscard]] double frac(double v) const { return (map(v) - lo) / (hi - lo); }
};

Axis make_axis(const std::vector<PlotSeries>& series, bool use_x, bool log) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : series) {
        for (double v : use_x ? s.x : s.y) {
            if (!std::isfinite(v) || (log && v <= 0.0)) continue;
            const double m = log ? std::log10(v) : v;
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        lo -= 0.5;
        hi += 0.5;
    }
    if (log) {
        lo = std::floor(lo);
        hi = std::ceil(hi);
    } else {
        const double pad = 0.02 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    return {lo, hi, log};
}

std::vector<double> ticks(const Axis& a) {
    std::vector<double> t;
    if (a.log) {
        const int step = std::max(1, static_cast<int>(std::ceil((a.hi - a.lo) / 8.0)));
        for (int e = static_cast<int>(a.lo); e <= static_cast<int>(a.hi); e += step) t.push_back(std::pow(10.0, e));
        return t;
    }
    const double raw = (a.hi - a.lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * step; v += step) {
        t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return t;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};
    const double W = spec.width;
    const double H = spec.height;
    const double left = 70.0, right = 20.0, top = 36.0, bottom = 50.0;
    const double pw = W - left - right;
    const double ph = H - top - bottom;
    const Axis ax = make_axis(series, true, spec.log_x);
    const Axis ay = make_axis(series, false, spec.log_y);
    auto px = [&](double v) { return left + ax.frac(v) * pw; };
    auto py = [&](double v) { return top + (1.0 - ay.frac(v)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(spec.title)
      << "</text>\n";
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(ax)) {
        const double x = px(t);
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(top + ph + 5) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
          << tick_label(t) << "</text>\n";
    }
    for (double t : ticks(ay)) {
        const double y = py(t);
        o << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left) << "\" y2=\"" << num(y)
          << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick_label(t)
          << "</text>\n";
    }
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 10) << "\" text-anchor=\"middle\">"
      << esc(spec.x_label) << "</text>\n";
    o << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << esc(spec.y_label) << "</text>\n";
    o << "<clipPath id=\"plot\"><rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\"/></clipPath>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = palette[k % (sizeof palette / sizeof palette[0])];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            const double x = s.x[i], y = s.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if ((spec.log_x && x <= 0.0) || (spec.log_y && y <= 0.0)) continue;
            pts.emplace_back(px(x), py(y));
        }
        o << "<g clip-path=\"url(#plot)\">\n";
        if (s.points) {
            for (const auto& [x, y] : pts) {
                o << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"2\" fill=\"" << colour << "\"/>\n";
            }
        } else if (!pts.empty()) {
            o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                o << (i ? " " : "") << num(pts[i].first) << ',' << num(pts[i].second);
            }
            o << "\"/>\n";
        }
        o << "</g>\n";
        const double ly = top + 14.0 + 16.0 * static_cast<double>(k);
        o << "<rect x=\"" << num(left + pw - 150) << "\" y=\"" << num(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
          << colour << "\"/>\n";
        o << "<text x=\"" << num(left + pw - 135) << "\" y=\"" << num(ly) << "\">" << esc(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace rmnc
