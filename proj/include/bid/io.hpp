#pragma once

#include <string>
#include <vector>

#include "bid/alpha_metrics.hpp"
#include "bid/id_core.hpp"
#include "bid/importance.hpp"

namespace bid {

// Alpha matrix CSV: optional comment lines starting with '#', a header row of
// date labels, then one row per alpha beginning with its identifier. Parse
// errors carry "path:line:" prefixes.
DataMatrix load_alpha_matrix(const std::string& path);

// Price CSV with date,close columns and an optional header row.
PriceSeries load_prices(const std::string& path);

// Raw importance scores, one finite real per line; must match the expected
// row count when expected is nonzero.
RawImportance load_importance(const std::string& path, std::size_t expected);

// Render a labeled matrix in the same CSV layout load_alpha_matrix reads, so
// writing and re-loading reproduces values and labels bitwise. The corner
// string fills the ignored top-left header cell.
std::string data_matrix_csv(const DataMatrix& m, const std::string& corner = "id");

void write_text_file(const std::string& path, const std::string& content);

// Deterministic CSV cell rendering for doubles, shortest round-trip form.
std::string format_double(double v);

}  // namespace bid
