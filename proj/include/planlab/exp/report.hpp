#pragma once

#include <string>
#include <vector>

#include "planlab/exp/results.hpp"

namespace planlab::exp {

struct ReportPaths {
    std::string markdown;
    std::vector<std::string> svgs;
};

/// Renders a markdown summary plus one SVG bar chart per metric per
/// experiment family into out_dir. Medians are taken over seeds per cell.
/// When the non-fine-tuned single-quality rows cover a complete range x FoV
/// product, each metric also gets a matrix table. Throws ValidationError on
/// an empty table. Output is a pure function of the rows (wall time
/// excluded), so regeneration is byte-identical.
ReportPaths write_report(const ResultsTable& table, const std::string& out_dir);

}  // namespace planlab::exp
