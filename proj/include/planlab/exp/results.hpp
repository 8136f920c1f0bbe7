#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace planlab::exp {

/// One experiment cell outcome. The quality knobs plus hours/fine-tune/seed
/// identify the cell; metrics and wall time are its results.
struct ResultRow {
    std::optional<double> range_m;  // nullopt = unlimited
    double fov_deg = 360.0;
    double iou = 1.0;
    double rot_deg = 0.0;
    double hours_equiv = 0.0;
    bool fine_tuned = false;
    std::uint64_t seed = 0;
    double ade_m = 0.0;
    double collision_rate = 0.0;
    long n_steps = 0;
    long n_collisions = 0;
    double wall_time_s = 0.0;

    /// Identity of the cell-and-seed, independent of results.
    std::string cell_key() const;
};

/// CSV-backed results artifact with a schema version header line.
struct ResultsTable {
    static constexpr const char* kSchemaLine = "# planlab-results v1";
    static constexpr const char* kHeader =
        "range,fov,iou,rot,hours_equiv,fine_tuned,seed,ade_m,collision_rate,n_steps,"
        "n_collisions,wall_time_s";

    std::vector<ResultRow> rows;

    bool has(const std::string& cell_key) const;
    void save(const std::string& path) const;
    static ResultsTable load(const std::string& path);  // ParseError on schema mismatch
};

std::string format_row(const ResultRow& r);  // one CSV line, %.17g floats

/// Equality of everything except wall_time_s; the reproducibility contract.
bool rows_match_ignoring_time(const ResultsTable& a, const ResultsTable& b);

}  // namespace planlab::exp
