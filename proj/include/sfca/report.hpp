#pragma once

#include <string>
#include <string_view>

#include "sfca/eval.hpp"

namespace sfca {

/// `method,type,problem,filter,n,rmse_min,gm_min`, one row per cell.
/// Failed cells leave rmse_min empty; gm_min is empty when undefined.
std::string report_csv(const EvaluationReport& report);
/// Rebuilds cells (and GM/markers) from `report_csv` output.
EvaluationReport parse_report_csv(std::string_view text);

/// Aligned text table per signal source: GM(RMSE) per activity and target
/// with markers, followed by the per-filter RMSE grid and exclusions.
std::string report_table(const EvaluationReport& report);

/// Half width of the 95% interval of a survey mean: 1.96 * sd / sqrt(n).
double ci_half_width(int respondents, double sd_minutes);

/// `method,problem,city_id,year,observed,predicted,respondents,ci_half_width`.
std::string scatter_csv(const EvaluationReport& report, double sd_minutes);
std::vector<ScatterPoint> parse_scatter_csv(std::string_view text);

/// Predicted-vs-observed chart with grey interval bars on the observed
/// values and the identity line.
std::string scatter_svg(std::span<const ScatterPoint> points, std::string_view title,
                        double sd_minutes);

}  // namespace sfca
