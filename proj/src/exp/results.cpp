#include "planlab/exp/results.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "planlab/errors.hpp"

namespace planlab::exp {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_range(const std::optional<double>& r) {
    return r ? fmt_double(*r) : "unlimited";
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string ResultRow::cell_key() const {
    std::ostringstream os;
    os << "range=" << fmt_range(range_m) << ";fov=" << fmt_double(fov_deg)
       << ";iou=" << fmt_double(iou) << ";rot=" << fmt_double(rot_deg)
       << ";hours=" << fmt_double(hours_equiv) << ";ft=" << (fine_tuned ? 1 : 0)
       << ";seed=" << seed;
    return os.str();
}

std::string format_row(const ResultRow& r) {
    std::ostringstream os;
    os << fmt_range(r.range_m) << ',' << fmt_double(r.fov_deg) << ',' << fmt_double(r.iou) << ','
       << fmt_double(r.rot_deg) << ',' << fmt_double(r.hours_equiv) << ','
       << (r.fine_tuned ? 1 : 0) << ',' << r.seed << ',' << fmt_double(r.ade_m) << ','
       << fmt_double(r.collision_rate) << ',' << r.n_steps << ',' << r.n_collisions << ','
       << fmt_double(r.wall_time_s);
    return os.str();
}

bool ResultsTable::has(const std::string& cell_key) const {
    for (const auto& r : rows)
        if (r.cell_key() == cell_key) return true;
    return false;
}

void ResultsTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << kSchemaLine << '\n' << kHeader << '\n';
    for (const auto& r : rows) out << format_row(r) << '\n';
    if (!out) throw ParseError("write failed: " + path);
}

ResultsTable ResultsTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kSchemaLine)
        throw ParseError(path + ": missing schema line '" + kSchemaLine + "'");
    if (!std::getline(in, line)) throw ParseError(path + ": missing header row");
    std::vector<std::string> cols = split_csv(line);
    std::vector<std::string> want = split_csv(kHeader);
    for (const auto& c : want) {
        bool found = false;
        for (const auto& have : cols)
            if (have == c) found = true;
        if (!found) throw ParseError(path + ": missing column '" + c + "'");
    }
    if (cols != want) throw ParseError(path + ": column order does not match schema");

    ResultsTable t;
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f = split_csv(line);
        if (f.size() != want.size())
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(want.size()) + " fields, got " +
                             std::to_string(f.size()));
        try {
            ResultRow r;
            if (f[0] != "unlimited") r.range_m = std::stod(f[0]);
            r.fov_deg = std::stod(f[1]);
            r.iou = std::stod(f[2]);
            r.rot_deg = std::stod(f[3]);
            r.hours_equiv = std::stod(f[4]);
            r.fine_tuned = std::stoi(f[5]) != 0;
            r.seed = std::stoull(f[6]);
            r.ade_m = std::stod(f[7]);
            r.collision_rate = std::stod(f[8]);
            r.n_steps = std::stol(f[9]);
            r.n_collisions = std::stol(f[10]);
            r.wall_time_s = std::stod(f[11]);
            t.rows.push_back(r);
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad value: " + e.what());
        }
    }
    return t;
}

bool rows_match_ignoring_time(const ResultsTable& a, const ResultsTable& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        ResultRow x = a.rows[i], y = b.rows[i];
        x.wall_time_s = 0.0;
        y.wall_time_s = 0.0;
        if (format_row(x) != format_row(y)) return false;
    }
    return true;
}

}  // namespace planlab::exp
