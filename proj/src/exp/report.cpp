#include "planlab/exp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "planlab/errors.hpp"

namespace planlab::exp {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string range_label(const std::optional<double>& r) {
    return r ? fmt_short(*r) + " m" : "unlimited";
}

double range_sort_key(const std::optional<double>& r) {
    return r ? *r : std::numeric_limits<double>::infinity();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Cell identity without the seed: groups the per-seed repeats.
struct CellId {
    std::optional<double> range_m;
    double fov_deg, iou, rot_deg, hours_equiv;
    bool fine_tuned;

    auto key() const {
        return std::make_tuple(range_sort_key(range_m), fov_deg, iou, rot_deg, hours_equiv,
                               fine_tuned);
    }
    bool operator<(const CellId& o) const { return key() < o.key(); }

    std::string label() const {
        std::ostringstream os;
        os << "range " << range_label(range_m) << ", fov " << fmt_short(fov_deg) << ", iou "
           << fmt_short(iou) << ", rot " << fmt_short(rot_deg) << ", " << fmt_short(hours_equiv)
           << " h" << (fine_tuned ? ", fine-tuned" : "");
        return os.str();
    }
};

struct CellStats {
    std::vector<const ResultRow*> rows;  // per seed
    double median_ade() const {
        std::vector<double> v;
        for (auto* r : rows) v.push_back(r->ade_m);
        return median(v);
    }
    double median_collision() const {
        std::vector<double> v;
        for (auto* r : rows) v.push_back(r->collision_rate);
        return median(v);
    }
};

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values) {
    const int bar_w = 36, gap = 14, left = 60, bottom = 90, top = 40;
    const int chart_h = 220;
    const int width = left + static_cast<int>(values.size()) * (bar_w + gap) + 20;
    const int height = top + chart_h + bottom;
    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<text x=\"" << left << "\" y=\"20\" font-family=\"monospace\" font-size=\"14\">"
       << title << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top + chart_h << "\" x2=\"" << width - 10
       << "\" y2=\"" << top + chart_h << "\" stroke=\"black\"/>\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        char hbuf[32];
        std::snprintf(hbuf, sizeof(hbuf), "%.2f", values[i] / vmax * chart_h);
        double h = values[i] / vmax * chart_h;
        char ybuf[32];
        std::snprintf(ybuf, sizeof(ybuf), "%.2f", top + chart_h - h);
        int x = left + static_cast<int>(i) * (bar_w + gap);
        os << "<rect x=\"" << x << "\" y=\"" << ybuf << "\" width=\"" << bar_w << "\" height=\""
           << hbuf << "\" fill=\"#4878a8\"/>\n";
        os << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << top + chart_h - h - 4
           << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"middle\">"
           << fmt_short(values[i]) << "</text>\n";
        os << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << top + chart_h + 12
           << "\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"middle\" "
          "transform=\"rotate(45 "
           << x + bar_w / 2 << " " << top + chart_h + 12 << ")\">" << labels[i] << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << content;
    if (!out) throw ParseError("write failed: " + path);
}

}  // namespace

ReportPaths write_report(const ResultsTable& table, const std::string& out_dir) {
    if (table.rows.empty()) throw ValidationError("report: results table has no rows");
    fs::create_directories(out_dir);

    std::map<CellId, CellStats> cells;
    for (const ResultRow& r : table.rows) {
        CellId id{r.range_m, r.fov_deg, r.iou, r.rot_deg, r.hours_equiv, r.fine_tuned};
        cells[id].rows.push_back(&r);
    }

    std::ostringstream md;
    md << "# Results summary\n\n";
    md << "Rows: " << table.rows.size() << ", cells: " << cells.size() << "\n\n";

    md << "## Per-cell medians\n\n";
    md << "| cell | seeds | median ADE (m) | median collision rate |\n";
    md << "|---|---|---|---|\n";
    for (const auto& [id, st] : cells)
        md << "| " << id.label() << " | " << st.rows.size() << " | " << fmt(st.median_ade())
           << " | " << fmt(st.median_collision()) << " |\n";
    md << "\n";

    // complete range x FoV product among plain grid cells -> matrix views
    std::set<double> range_keys, fovs;
    std::map<std::pair<double, double>, const CellStats*> grid;
    std::map<double, std::optional<double>> range_by_key;
    for (const auto& [id, st] : cells) {
        if (id.fine_tuned || id.iou != 1.0 || id.rot_deg != 0.0) continue;
        double rk = range_sort_key(id.range_m);
        range_keys.insert(rk);
        fovs.insert(id.fov_deg);
        range_by_key[rk] = id.range_m;
        grid[{rk, id.fov_deg}] = &st;
    }
    bool complete = range_keys.size() >= 2 && fovs.size() >= 2 &&
                    grid.size() == range_keys.size() * fovs.size();
    if (complete) {
        auto matrix = [&](const std::string& name, auto metric) {
            md << "## " << name << " by range x FoV (medians over seeds)\n\n| range \\\\ fov |";
            for (double f : fovs) md << " " << fmt_short(f) << " |";
            md << "\n|---|";
            for (std::size_t i = 0; i < fovs.size(); ++i) md << "---|";
            md << "\n";
            for (double rk : range_keys) {
                md << "| " << range_label(range_by_key[rk]) << " |";
                for (double f : fovs) md << " " << fmt(metric(*grid[{rk, f}])) << " |";
                md << "\n";
            }
            md << "\n";
        };
        matrix("ADE (m)", [](const CellStats& s) { return s.median_ade(); });
        matrix("Collision rate", [](const CellStats& s) { return s.median_collision(); });
    }

    // wall time is excluded so regeneration stays byte-identical
    md << "## All rows\n\n";
    std::string header(ResultsTable::kHeader);
    header.erase(header.rfind(','));
    for (char& c : header)
        if (c == ',') c = '|';
    md << "| " << header << " |\n|";
    for (int i = 0; i < 11; ++i) md << "---|";
    md << "\n";
    for (const ResultRow& r : table.rows) {
        std::string line = format_row(r);
        line.erase(line.rfind(','));
        for (char& c : line)
            if (c == ',') c = '|';
        md << "| " << line << " |\n";
    }
    md << "\n";

    ReportPaths paths;
    std::vector<std::string> labels;
    std::vector<double> ade, coll;
    for (const auto& [id, st] : cells) {
        labels.push_back(id.label());
        ade.push_back(st.median_ade());
        coll.push_back(st.median_collision());
    }
    std::string ade_svg = (fs::path(out_dir) / "ade.svg").string();
    std::string coll_svg = (fs::path(out_dir) / "collision_rate.svg").string();
    write_file(ade_svg, svg_bar_chart("median ADE (m)", labels, ade));
    write_file(coll_svg, svg_bar_chart("median collision rate", labels, coll));
    paths.svgs = {ade_svg, coll_svg};
    md << "![ADE](ade.svg)\n![Collision rate](collision_rate.svg)\n";

    paths.markdown = (fs::path(out_dir) / "report.md").string();
    write_file(paths.markdown, md.str());
    return paths;
}

}  // namespace planlab::exp
