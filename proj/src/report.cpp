#include "levyflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "levyflow/errors.hpp"

namespace levyflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0, kMargin = 60.0;

std::string escape_xml(const std::string& s) {
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

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw IoError("cannot write " + p.string());
}

} // namespace

std::string render_svg(const Series& s, const std::string& title) {
    auto tx = [&](double v) { return s.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return s.log_y ? std::log10(v) : v; };
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        const double a = tx(s.x[i]), b = ty(s.y[i]);
        if (std::isfinite(a) && std::isfinite(b)) pts.emplace_back(a, b);
    }
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!pts.empty()) {
        const auto [xmin, xmax] = std::minmax_element(pts.begin(), pts.end());
        const auto [ymin, ymax] = std::minmax_element(pts.begin(), pts.end(),
                                                      [](const auto& a, const auto& b) { return a.second < b.second; });
        x0 = xmin->first;
        x1 = xmax->first;
        y0 = ymin->second;
        y1 = ymax->second;
    }
    if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
    if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
    auto px = [&](double a) { return kMargin + (a - x0) / (x1 - x0) * (kWidth - 2 * kMargin); };
    auto py = [&](double b) { return kHeight - kMargin - (b - y0) / (y1 - y0) * (kHeight - 2 * kMargin); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
       << "</text>\n"
       << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
       << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
    auto axis_label = [&](const std::string& text, bool log) { return escape_xml(log ? "log10 " + text : text); };
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\" font-size=\"12\">"
       << axis_label(s.x_label, s.log_x) << "</text>\n"
       << "<text x=\"15\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 15 " << kHeight / 2
       << ")\" text-anchor=\"middle\" font-size=\"12\">" << axis_label(s.y_label, s.log_y) << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double a = x0 + (x1 - x0) * k / 4.0, b = y0 + (y1 - y0) * k / 4.0;
        os << "<text x=\"" << px(a) << "\" y=\"" << kHeight - kMargin + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
           << a << "</text>\n"
           << "<text x=\"" << kMargin - 6 << "\" y=\"" << py(b) + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << b
           << "</text>\n";
    }
    if (!pts.empty()) {
        os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (const auto& [a, b] : pts) os << px(a) << "," << py(b) << " ";
        os << "\"/>\n";
        for (const auto& [a, b] : pts) os << "<circle cx=\"" << px(a) << "\" cy=\"" << py(b) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

ReportSummary emit_report(const std::vector<ResultRecord>& records, const fs::path& dir, bool plots) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create report directory " + dir.string() + ": " + ec.message());

    ReportSummary summary;
    summary.records = records.size();
    json list = json::array();
    for (const auto& r : records) {
        const bool ok = r.passed();
        if (!ok) ++summary.failed;
        json failing = json::array();
        for (const auto& m : r.rows)
            if (!m.pass) failing.push_back(m.name);
        list.push_back({{"id", r.id},
                        {"experiment", kind_name(r.kind)},
                        {"config_hash", r.config_hash},
                        {"passed", ok},
                        {"rows", r.rows.size()},
                        {"failing_rows", failing},
                        {"wall_clock_seconds", r.wall_clock_seconds}});
        if (plots)
            for (const auto& s : r.series) {
                const auto p = dir / (r.id + "_" + s.name + ".svg");
                write_text(p, render_svg(s, r.id + ": " + s.name));
                summary.written.push_back(p);
            }
    }
    summary.exit_code = summary.failed == 0 ? 0 : 1;
    const json doc{{"records", list},
                   {"total", summary.records},
                   {"failed", summary.failed},
                   {"exit_code", summary.exit_code}};
    const auto path = dir / "summary.json";
    write_text(path, doc.dump(2) + "\n");
    summary.written.push_back(path);
    return summary;
}

std::vector<ResultRecord> load_records(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json" && e.path().filename() != "summary.json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<ResultRecord> out;
    for (const auto& p : files) {
        std::ifstream in(p);
        if (!in) throw IoError("cannot read " + p.string());
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("malformed record " + p.string() + ": " + e.what());
        }
        out.push_back(record_from_json(j));
    }
    return out;
}

} // namespace levyflow
