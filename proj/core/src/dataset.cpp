#include "thresholds/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json_convert.hpp"
#include "thresholds/error.hpp"

namespace thresholds {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  return s.substr(b);
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<ItemSpec> parse_item_metadata(std::string_view json_text) {
  detail::json j;
  try {
    j = detail::json::parse(json_text);
  } catch (const detail::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("item metadata is not valid JSON: ") + e.what());
  }
  return detail::items_from_json(j);
}

ModelSpec parse_model_spec(std::string_view json_text) {
  detail::json j;
  try {
    j = detail::json::parse(json_text);
  } catch (const detail::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("model settings are not valid JSON: ") + e.what());
  }
  return detail::model_spec_from_json(j);
}

std::string model_spec_to_json(const ModelSpec& spec) { return detail::model_spec_to_json(spec).dump(); }

std::vector<ItemSpec> load_item_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open item metadata '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_item_metadata(buf.str());
}

std::string item_metadata_to_json(const std::vector<ItemSpec>& items) {
  return detail::items_to_json(items).dump(2);
}

int squeeze_levels(std::span<const double> values) {
  std::set<double> distinct;
  bool all_integer = true;
  for (double v : values) {
    if (std::isnan(v)) continue;
    distinct.insert(v);
    all_integer = all_integer && std::floor(v) == v;
  }
  const int n = static_cast<int>(distinct.size());
  if (all_integer) return std::max(n, 2);
  return std::max(n, 100);
}

double squeeze_unit(double unit_value, int levels) {
  return (unit_value * (levels - 1) + 0.5) / levels;
}

std::vector<double> rescale_to_unit_interval(std::span<const double> values, double lower,
                                             double upper) {
  if (!(lower < upper)) {
    throw Error(ErrorCode::DegenerateRange, "rescale needs lower < upper");
  }
  for (double v : values) {
    if (!(v >= lower && v <= upper)) {
      throw Error(ErrorCode::ValueOutOfSupport, "value " + format_double(v) + " outside [" +
                                                    format_double(lower) + ", " +
                                                    format_double(upper) + "]");
    }
  }
  const int levels = squeeze_levels(values);
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(squeeze_unit((v - lower) / (upper - lower), levels));
  return out;
}

ItemResponseMatrix ingest_csv(std::istream& csv, const std::vector<ItemSpec>& metadata,
                              const CsvOptions& options) {
  std::string line;
  if (!std::getline(csv, line)) throw Error(ErrorCode::MalformedCsv, "empty CSV: missing header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);

  std::vector<ItemSpec> items;
  for (auto& raw : split_row(trim(line))) {
    const auto id = trim(raw);
    auto it = std::find_if(metadata.begin(), metadata.end(),
                           [&](const ItemSpec& s) { return s.id == id; });
    if (it == metadata.end()) {
      throw Error(ErrorCode::UnknownItem, "CSV column '" + id + "' is not declared in the metadata");
    }
    items.push_back(*it);
  }
  const std::size_t n_items = items.size();

  std::vector<double> values;
  std::vector<std::uint8_t> observed;
  std::size_t row = 0;
  while (std::getline(csv, line)) {
    line = trim(line);
    if (line.empty()) continue;
    ++row;
    const auto cells = split_row(line);
    if (cells.size() != n_items) {
      throw Error(ErrorCode::MalformedCsv, "row " + std::to_string(row) + " has " +
                                               std::to_string(cells.size()) + " cells, expected " +
                                               std::to_string(n_items));
    }
    for (std::size_t i = 0; i < n_items; ++i) {
      const auto cell = trim(cells[i]);
      if (cell == "NA") {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        observed.push_back(0);
        continue;
      }
      double v = 0.0;
      if (!parse_double(cell, v) || !std::isfinite(v)) {
        throw Error(ErrorCode::MalformedCsv, "row " + std::to_string(row) + ", column '" +
                                                 items[i].id + "': cannot parse '" + cell + "'");
      }
      values.push_back(v);
      observed.push_back(1);
    }
  }
  if (row == 0) throw Error(ErrorCode::EmptyPerson, "CSV has a header but no data rows");

  for (std::size_t i = 0; i < n_items; ++i) {
    if (!items[i].uses_unit_rescale() || items[i].rescale) continue;
    std::vector<double> column;
    for (std::size_t p = 0; p < row; ++p) {
      if (observed[p * n_items + i]) column.push_back(values[p * n_items + i]);
    }
    items[i].rescale = UnitRescale{items[i].support.lower, items[i].support.upper,
                                   squeeze_levels(column)};
  }
  return ItemResponseMatrix::create(std::move(items), row, std::move(values), std::move(observed),
                                    options.matrix);
}

ItemResponseMatrix ingest_csv(const std::filesystem::path& path,
                              const std::vector<ItemSpec>& metadata, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open data file '" + path.string() + "'");
  return ingest_csv(in, metadata, options);
}

void write_csv(std::ostream& out, const ItemResponseMatrix& data) {
  for (std::size_t i = 0; i < data.item_count(); ++i) {
    out << (i ? "," : "") << data.item(i).id;
  }
  out << '\n';
  for (std::size_t p = 0; p < data.persons(); ++p) {
    for (std::size_t i = 0; i < data.item_count(); ++i) {
      if (i) out << ',';
      out << (data.observed(p, i) ? format_double(data.raw_value(p, i)) : "NA");
    }
    out << '\n';
  }
}

std::vector<ItemSummary> summarize(const ItemResponseMatrix& data) {
  std::vector<ItemSummary> out;
  for (std::size_t i = 0; i < data.item_count(); ++i) {
    const auto& item = data.item(i);
    ItemSummary s;
    s.id = item.id;
    s.support = describe(item.support);
    s.family = std::string(to_string(item.family.kind));
    s.treat_as = std::string(to_string(item.treat_as));
    s.observed = data.observed_count(i);
    double sum = 0.0;
    s.min = kInf;
    s.max = -kInf;
    for (std::size_t p = 0; p < data.persons(); ++p) {
      if (!data.observed(p, i)) continue;
      const double v = data.raw_value(p, i);
      sum += v;
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(s.observed);
    out.push_back(s);
  }
  return out;
}

std::string summary_text(const ItemResponseMatrix& data) {
  std::ostringstream os;
  os << "persons: " << data.persons() << "  items: " << data.item_count() << '\n';
  os << std::left << std::setw(14) << "item" << std::setw(26) << "support" << std::setw(14)
     << "family" << std::setw(12) << "treat_as" << std::right << std::setw(9) << "observed"
     << std::setw(11) << "min" << std::setw(11) << "max" << std::setw(11) << "mean" << '\n';
  for (const auto& s : summarize(data)) {
    os << std::left << std::setw(14) << s.id << std::setw(26) << s.support << std::setw(14)
       << s.family << std::setw(12) << s.treat_as << std::right << std::setw(9) << s.observed
       << std::setw(11) << std::setprecision(5) << s.min << std::setw(11) << s.max
       << std::setw(11) << s.mean << '\n';
  }
  return os.str();
}

std::string summary_json(const ItemResponseMatrix& data) {
  detail::json items = detail::json::array();
  for (const auto& s : summarize(data)) {
    items.push_back({{"id", s.id},
                     {"support", s.support},
                     {"family", s.family},
                     {"treat_as", s.treat_as},
                     {"observed", s.observed},
                     {"min", s.min},
                     {"max", s.max},
                     {"mean", s.mean}});
  }
  detail::json j = {{"persons", data.persons()}, {"items", items}};
  return j.dump(2);
}

}  // namespace thresholds
