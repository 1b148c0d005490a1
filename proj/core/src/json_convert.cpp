#include "json_convert.hpp"

#include <cmath>

#include "thresholds/error.hpp"

namespace thresholds::detail {

namespace {

Error bad(const std::string& msg) { return Error(ErrorCode::InvalidConfig, msg); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw bad(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json number_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw bad("expected a number, got " + j.dump());
}

json support_to_json(const SupportKind& s) {
  switch (s.type) {
    case SupportKind::Type::Continuous:
      return {{"type", "continuous"}, {"lower", number_to_json(s.lower)},
              {"upper", number_to_json(s.upper)}};
    case SupportKind::Type::Binary: return {{"type", "binary"}};
    case SupportKind::Type::OrderedCategorical:
      return {{"type", "ordinal"}, {"categories", s.categories}};
    case SupportKind::Type::Count: return {{"type", "count"}};
  }
  return {};
}

SupportKind support_from_json(const json& j) {
  const std::string type = j.is_string() ? j.get<std::string>() : get_or<std::string>(j, "type", "");
  SupportKind s;
  if (type == "continuous") {
    s = SupportKind::continuous(
        j.is_object() && j.contains("lower") ? number_from_json(j["lower"]) : -kInf,
        j.is_object() && j.contains("upper") ? number_from_json(j["upper"]) : kInf);
  } else if (type == "binary") {
    s = SupportKind::binary();
  } else if (type == "ordinal") {
    if (!j.is_object() || !j.contains("categories")) throw bad("ordinal support needs 'categories'");
    s = SupportKind::ordinal(j["categories"].get<int>());
  } else if (type == "count") {
    s = SupportKind::count();
  } else {
    throw bad("unknown support type '" + type + "'");
  }
  s.validate();
  return s;
}

json family_to_json(const DifficultyFamily& f) {
  json j = {{"type", std::string(to_string(f.kind))}};
  if (f.kind == FamilyKind::InverseCdf && f.inverse_cdf_kind) {
    j["inverse_cdf_kind"] = std::string(to_string(*f.inverse_cdf_kind));
  }
  if (f.kind == FamilyKind::BSpline) {
    j["n_basis"] = f.n_basis;
    j["degree"] = f.degree;
    if (f.knot_range) j["knot_range"] = {(*f.knot_range)[0], (*f.knot_range)[1]};
  }
  if (!f.values.empty()) j["values"] = f.values;
  return j;
}

DifficultyFamily family_from_json(const json& j) {
  DifficultyFamily f;
  if (j.is_string()) {
    f.kind = family_from_string(j.get<std::string>());
    return f;
  }
  if (!j.is_object()) throw bad("family must be a string or an object");
  f.kind = family_from_string(get_or<std::string>(j, "type", ""));
  if (j.contains("inverse_cdf_kind")) {
    f.inverse_cdf_kind = response_function_from_string(j["inverse_cdf_kind"].get<std::string>());
  }
  f.n_basis = get_or<int>(j, "n_basis", 8);
  f.degree = get_or<int>(j, "degree", 3);
  if (j.contains("knot_range")) {
    const auto& r = j["knot_range"];
    if (!r.is_array() || r.size() != 2) throw bad("knot_range must be [lower, upper]");
    f.knot_range = std::array<double, 2>{r[0].get<double>(), r[1].get<double>()};
  }
  if (j.contains("values")) f.values = j["values"].get<std::vector<double>>();
  return f;
}

json item_to_json(const ItemSpec& item) {
  json j = {{"support", support_to_json(item.support)},
            {"family", family_to_json(item.family)},
            {"treat_as", std::string(to_string(item.treat_as))}};
  if (item.allow_continuous_override) j["allow_continuous"] = true;
  if (item.squeeze) j["squeeze"] = *item.squeeze;
  if (item.rescale) {
    j["rescale"] = {{"lower", item.rescale->lower},
                    {"upper", item.rescale->upper},
                    {"levels", item.rescale->levels}};
  }
  return j;
}

ItemSpec item_from_json(const std::string& id, const json& j) {
  if (!j.is_object()) throw bad("item '" + id + "' must be an object");
  ItemSpec item;
  item.id = id;
  if (!j.contains("support")) throw bad("item '" + id + "' needs a 'support'");
  item.support = support_from_json(j["support"]);
  item.family = j.contains("family") ? family_from_json(j["family"]) : DifficultyFamily{};
  const auto default_branch = item.support.is_discrete() ? "discrete" : "continuous";
  const auto branch = get_or<std::string>(j, "treat_as", default_branch);
  if (branch == "discrete") {
    item.treat_as = DensityBranch::Discrete;
  } else if (branch == "continuous") {
    item.treat_as = DensityBranch::Continuous;
  } else {
    throw bad("item '" + id + "': treat_as must be 'discrete' or 'continuous'");
  }
  item.allow_continuous_override = get_or<bool>(j, "allow_continuous", false);
  if (j.contains("squeeze")) item.squeeze = j["squeeze"].get<bool>();
  if (j.contains("rescale")) {
    const auto& r = j["rescale"];
    UnitRescale rescale;
    rescale.lower = get_or<double>(r, "lower", 0.0);
    rescale.upper = get_or<double>(r, "upper", 1.0);
    rescale.levels = get_or<int>(r, "levels", 100);
    if (!(rescale.lower < rescale.upper) || rescale.levels < 2) {
      throw bad("item '" + id + "': rescale needs lower < upper and levels >= 2");
    }
    item.rescale = rescale;
  }
  item.validate();
  return item;
}

json model_spec_to_json(const ModelSpec& spec) {
  return {{"response_function", std::string(to_string(spec.response_function))},
          {"slope_mode", std::string(to_string(spec.slope_mode))},
          {"quadrature_nodes", spec.quadrature_nodes},
          {"penalty_lambda", spec.penalty_lambda},
          {"identification", std::string(to_string(spec.identification))}};
}

ModelSpec model_spec_from_json(const json& j) {
  ModelSpec spec;
  if (!j.is_object()) throw bad("model settings must be an object");
  spec.response_function =
      response_function_from_string(get_or<std::string>(j, "response_function", "normal"));
  spec.slope_mode = slope_mode_from_string(get_or<std::string>(j, "slope_mode", "varying_slopes"));
  spec.quadrature_nodes = get_or<int>(j, "quadrature_nodes", 30);
  spec.penalty_lambda = get_or<double>(j, "penalty_lambda", 0.0);
  const auto default_id = spec.slope_mode == SlopeMode::SplineCommonShape
                              ? "first_spline_intercept_zero"
                              : "penalty_only";
  spec.identification =
      identification_from_string(get_or<std::string>(j, "identification", default_id));
  spec.validate();
  return spec;
}

json items_to_json(const std::vector<ItemSpec>& items) {
  json obj = json::object();
  json order = json::array();
  for (const auto& item : items) {
    obj[item.id] = item_to_json(item);
    order.push_back(item.id);
  }
  return {{"items", obj}, {"order", order}};
}

std::vector<ItemSpec> items_from_json(const json& j) {
  if (!j.is_object() || !j.contains("items") || !j["items"].is_object()) {
    throw bad("item metadata needs an 'items' object");
  }
  std::vector<ItemSpec> items;
  if (j.contains("order")) {
    for (const auto& id : j["order"]) {
      const auto key = id.get<std::string>();
      if (!j["items"].contains(key)) throw bad("order names unknown item '" + key + "'");
      items.push_back(item_from_json(key, j["items"][key]));
    }
  } else {
    for (const auto& [key, value] : j["items"].items()) items.push_back(item_from_json(key, value));
  }
  return items;
}

}  // namespace thresholds::detail
