#pragma once

#include <string>

#include "crashsev/causality.hpp"
#include "crashsev/evaluate.hpp"

namespace crashsev {

/// Horizontal bar chart of the ranking, highest score first.
void save_ranking_svg(const GcRanking& ranking, const std::string& path);

/// 3x3 heatmap of a row-normalized confusion matrix: PDO/BC/KA labels on
/// both axes, each cell annotated with its rate to two decimals.
void save_confusion_svg(const NormalizedConfusion& cm, const std::string& title,
                        const std::string& path);

}  // namespace crashsev
