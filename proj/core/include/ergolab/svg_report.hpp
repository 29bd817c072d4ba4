#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ergolab/theory.hpp"

namespace ergolab {

/// One chart request: which figure to draw from which CSV, with optional
/// theoretical overlays. Rendering is pure string building, so identical
/// inputs give byte-identical SVG.
struct ChartSpec {
    enum class Kind { policy_curve, indifference_vs_m, mse_vs_m };

    Kind kind = Kind::policy_curve;
    std::string csv_path;
    std::string out_dir;
    // Overlays for policy charts; markers for the indifference chart.
    std::vector<std::pair<std::string, PolicyCurve>> overlays;
    std::optional<double> marker_p_e;
    std::optional<double> marker_p_t;
};

/// Renders the chart(s) described by the spec and returns the paths
/// written. Policy-curve specs emit one file per M found in the CSV.
/// Missing columns raise DomainError naming the column; an input with no
/// data rows raises DomainError before any file is written.
std::vector<std::string> render_chart(const ChartSpec& spec);

}  // namespace ergolab
