#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thresholds/types.hpp"

namespace thresholds {

/// Parses item metadata: a JSON object `{"items": {"<id>": {...}, ...}}` with
/// one nested object per item declaring `support`, `family` and optionally
/// `treat_as`, `allow_continuous` and `squeeze`.
std::vector<ItemSpec> parse_item_metadata(std::string_view json_text);
std::vector<ItemSpec> load_item_metadata(const std::filesystem::path& path);
std::string item_metadata_to_json(const std::vector<ItemSpec>& items);

/// Model settings object: response_function, slope_mode, quadrature_nodes,
/// penalty_lambda, identification. Missing keys take the ModelSpec defaults.
ModelSpec parse_model_spec(std::string_view json_text);
std::string model_spec_to_json(const ModelSpec& spec);

struct CsvOptions {
  ItemResponseMatrix::Options matrix;
};

/// Reads a wide CSV (header row of item ids, one person per row, "NA" for
/// missing) and validates every cell against its item's support. Columns are
/// ordered as in the header. Bounded continuous items whose family needs the
/// open unit interval are rescaled and squeezed.
ItemResponseMatrix ingest_csv(std::istream& csv, const std::vector<ItemSpec>& metadata,
                              const CsvOptions& options = {});
ItemResponseMatrix ingest_csv(const std::filesystem::path& path,
                              const std::vector<ItemSpec>& metadata,
                              const CsvOptions& options = {});

/// Inverse of ingest_csv for matrices holding raw (unrescaled) values.
void write_csv(std::ostream& out, const ItemResponseMatrix& data);

/// Affine map of [lower, upper] onto [0,1] followed by the boundary squeeze
/// (y (n-1) + 0.5) / n, where n is the number of distinct input levels
/// (at least 100 unless every value is an integer).
std::vector<double> rescale_to_unit_interval(std::span<const double> values, double lower,
                                             double upper);
double squeeze_unit(double unit_value, int levels);
int squeeze_levels(std::span<const double> values);

struct ItemSummary {
  std::string id;
  std::string support;
  std::string family;
  std::string treat_as;
  std::size_t observed = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

std::vector<ItemSummary> summarize(const ItemResponseMatrix& data);
std::string summary_text(const ItemResponseMatrix& data);
std::string summary_json(const ItemResponseMatrix& data);

}  // namespace thresholds
