#ifndef RELPROBE_REPORT_H_
#define RELPROBE_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "relprobe/association.h"
#include "relprobe/dataset.h"
#include "relprobe/evaluation.h"

namespace relprobe {

enum class TableFormat { kCsv, kMarkdown };

// Score table: one row per target plus a final CONC row, one column per
// report in the given order, headed "model/method". Cells are dcor rounded
// to two decimals with a '*' suffix when p < `significance`; targets a
// report did not score print as "-". Throws InvalidArgumentError if the
// reports are for different relations.
std::string EmitScoreTable(const std::vector<ScoreReport>& reports,
                           TableFormat format, double significance = 0.01);

// Self-contained SVG heatmap. Sources run down the y axis grouped by gold
// argmax target (groups in target order, gold row order within a group;
// sources absent from `gold` form a trailing group),
// targets along x. Values are min-max normalized over the matrix and
// mapped linearly from #f7fbff (min) to #08306b (max); a constant matrix
// maps to the min colour. Each cell is a <rect class="cell"> carrying
// data-source, data-target and data-value attributes; groups are separated
// by <line class="group-sep">.
std::string RenderHeatmap(const AssociationMatrix& assoc,
                          const GoldMatrix& gold);
// Throws DataError on I/O failure.
void EmitHeatmap(const AssociationMatrix& assoc, const GoldMatrix& gold,
                 const std::filesystem::path& path);

// Maps t in [0, 1] onto the heatmap ramp; returns "#rrggbb".
std::string RampColor(double t);

// sources x targets association matrix as CSV (shortest round-trip decimals).
std::string AssociationToCsv(const AssociationMatrix& assoc);

std::string CsvEscape(std::string_view field);

}  // namespace relprobe

#endif  // RELPROBE_REPORT_H_
