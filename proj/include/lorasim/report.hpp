#pragma once

#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "lorasim/config.hpp"
#include "lorasim/engine.hpp"

namespace lorasim {

inline constexpr const char* kCsvSchema = "lorasim-results/1";
inline constexpr const char* kSummarySchema = "lorasim-summary/1";

struct CellResult {
  SweepCell cell;
  MonteCarloResult result;
};

/// `value` printed with 9 significant digits (%.9g).
std::string format_g9(double value);
/// `value` rounded to 9 significant digits, so JSON dumps stay at that width.
double round_g9(double value);

/// Column names of the results CSV, in emission order.
const std::vector<std::string>& csv_columns();

/// Schema comment, header, then one row per (cell, replication).
void write_csv(std::ostream& out, std::span<const CellResult> cells);

nlohmann::json cell_summary(const CellResult& cell);
/// All cell summaries in one document.
nlohmann::json summary_document(std::span<const CellResult> cells);

}  // namespace lorasim
