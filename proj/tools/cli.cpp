#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "thresholds/thresholds.hpp"

namespace thresholds::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::optional<int> nodes;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

// A run config with paths resolved against the config file's directory.
struct RunConfig {
  json doc;
  fs::path base;

  fs::path path(const std::string& key) const { return resolve(doc.at(key).get<std::string>()); }
  fs::path resolve(const std::string& p) const {
    const fs::path raw(p);
    return (raw.is_absolute() ? raw : base / raw).lexically_normal();
  }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, what + " is not valid JSON: " + e.what());
  }
}

RunConfig load_config(const std::string& file) {
  if (file.empty()) throw Error(ErrorCode::InvalidConfig, "--config is required");
  RunConfig c;
  c.doc = parse_json(read_file(file), "config '" + file + "'");
  if (!c.doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  c.base = fs::absolute(fs::path(file)).parent_path();
  return c;
}

// Replaces the path-valued keys by absolute paths so the echoed config is
// self-contained.
void absolutize(RunConfig& c, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (c.doc.contains(k) && c.doc[k].is_string()) c.doc[k] = c.path(k).string();
  }
}

unsigned threads_of(const Flags& f) { return f.threads ? *f.threads : default_threads(); }

void apply_model_overrides(json& model, const Flags& f) {
  if (!model.is_object()) model = json::object();
  if (f.nodes) model["quadrature_nodes"] = *f.nodes;
  if (f.lambda) model["penalty_lambda"] = *f.lambda;
}

std::vector<ItemSpec> metadata_of(const RunConfig& c) {
  if (c.doc.contains("metadata")) return load_item_metadata(c.path("metadata"));
  if (c.doc.contains("items")) {
    json j = {{"items", c.doc["items"]}};
    if (c.doc.contains("order")) j["order"] = c.doc["order"];
    return parse_item_metadata(j.dump());
  }
  throw Error(ErrorCode::InvalidConfig, "config needs 'metadata' (a file) or inline 'items'");
}

ItemResponseMatrix data_of(const RunConfig& c, const std::vector<ItemSpec>& items) {
  if (!c.doc.contains("data")) throw Error(ErrorCode::InvalidConfig, "config needs 'data' (a CSV file)");
  const auto path = c.path("data");
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "data file '" + path.string() + "' not found");
  CsvOptions options;
  options.matrix.allow_empty_persons = c.doc.value("allow_empty_persons", false);
  return ingest_csv(path, items, options);
}

FitOptions fit_options_of(const json& j, const Flags& f) {
  FitOptions o;
  if (j.is_object()) {
    o.max_iterations = j.value("max_iterations", o.max_iterations);
    o.grad_tolerance = j.value("grad_tolerance", o.grad_tolerance);
    o.rel_tolerance = j.value("rel_tolerance", o.rel_tolerance);
    o.random_starts = j.value("random_starts", o.random_starts);
    o.seed = j.value("seed", o.seed);
    o.newton_steps = j.value("newton_steps", o.newton_steps);
    o.compute_standard_errors = j.value("standard_errors", o.compute_standard_errors);
    if (j.contains("fixed_sigma")) o.fixed_sigma = j["fixed_sigma"].get<double>();
  }
  if (f.seed) o.seed = *f.seed;
  o.threads = threads_of(f);
  return o;
}

// Effective fit settings: model and fit blocks after flag overrides.
void normalize_fit_config(RunConfig& c, const Flags& f) {
  absolutize(c, {"data", "metadata"});
  json model = c.doc.value("model", json::object());
  apply_model_overrides(model, f);
  c.doc["model"] = json::parse(model_spec_to_json(parse_model_spec(model.dump())));
  json fit = c.doc.value("fit", json::object());
  if (f.seed) fit["seed"] = *f.seed;
  c.doc["fit"] = fit;
}

FitResult run_fit(const RunConfig& c, const Flags& f) {
  const auto items = metadata_of(c);
  const auto data = data_of(c, items);
  const auto spec = parse_model_spec(c.doc["model"].dump());
  return fit(data, spec, fit_options_of(c.doc["fit"], f));
}

std::string out_path(const RunConfig& c, const Flags& f, const std::string& fallback) {
  if (f.out) return fs::absolute(*f.out).lexically_normal().string();
  if (c.doc.contains("out")) return c.path("out").string();
  return fs::absolute(fallback).lexically_normal().string();
}

// Companion file echoing the config of a CSV artifact.
void write_sidecar(const std::string& artifact, const json& config, const json& extra = json::object()) {
  json j = {{"schema_version", kReportSchemaVersion}, {"config", config}};
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  write_file(artifact + ".run.json", j.dump(2) + "\n");
}

std::vector<double> numbers(const json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (j[key].is_number()) return {j[key].get<double>()};
  return j[key].get<std::vector<double>>();
}

// Default IC abscissae: support points below the top category, or the
// quartiles of the default grid for continuous items.
std::vector<double> default_ic_points(const FittedModel& m, std::size_t i) {
  auto grid = default_y_grid(m, i);
  const auto& support = m.difficulties[i].support();
  if (support.is_discrete()) {
    if (support.is_finite_discrete() && !grid.empty()) grid.pop_back();
    return grid;
  }
  if (grid.size() < 4) return grid;
  return {grid[grid.size() / 4], grid[grid.size() / 2], grid[3 * grid.size() / 4]};
}

std::vector<CurveTable> curve_tables(const FittedModel& m, const json& spec) {
  std::vector<std::size_t> items;
  if (spec.contains("items")) {
    for (const auto& id : spec["items"]) items.push_back(m.item_index(id.get<std::string>()));
  } else {
    for (std::size_t i = 0; i < m.items.size(); ++i) items.push_back(i);
  }
  std::vector<std::string> kinds = spec.value("kinds", std::vector<std::string>{"pt", "ic", "difficulty"});
  const auto thetas = numbers(spec, "theta", {0.0});
  const auto theta_grid = spec.contains("theta_grid") ? spec["theta_grid"].get<std::vector<double>>()
                                                      : default_theta_grid(m);
  std::vector<CurveTable> tables;
  for (const auto& kind : kinds) {
    if (kind != "pt" && kind != "ic" && kind != "difficulty") {
      throw Error(ErrorCode::InvalidConfig, "unknown curve kind '" + kind + "'");
    }
    for (std::size_t i : items) {
      const auto ys = default_y_grid(m, i);
      if (kind == "pt") {
        for (double t : thetas) tables.push_back(pt_curve(m, i, t, ys));
      } else if (kind == "ic") {
        for (double y : numbers(spec, "y", default_ic_points(m, i))) {
          tables.push_back(ic_curve(m, i, y, theta_grid));
        }
      } else {
        tables.push_back(difficulty_curve(m, i, ys));
      }
    }
  }
  return tables;
}

std::string curves_csv(const std::vector<CurveTable>& tables) {
  std::ostringstream os;
  write_curves_csv(os, tables);
  return os.str();
}

// ---- commands ------------------------------------------------------------

int cmd_fit(const Flags& f, std::ostream& out, std::ostream& err) {
  auto c = load_config(f.config);
  normalize_fit_config(c, f);
  const auto target = out_path(c, f, "fit.json");
  c.doc["out"] = target;
  const auto result = run_fit(c, f);
  write_file(target, fit_report_json(result, c.doc.dump()));
  if (c.doc.contains("curves")) {
    json cs = c.doc["curves"];
    const auto csv_path = cs.contains("out") ? c.resolve(cs["out"].get<std::string>()).string()
                                             : target + ".curves.csv";
    write_file(csv_path, curves_csv(curve_tables(result.model, cs)));
    write_sidecar(csv_path, c.doc);
  }
  out << fit_summary_text(result);
  if (!result.converged) {
    err << "fit did not converge (|grad| " << result.grad_norm << "); report written to " << target << '\n';
    return kNotConverged;
  }
  return kOk;
}

RunConfig sub_config(const RunConfig& parent, const char* key, const Flags& f) {
  if (!parent.doc.contains(key)) throw Error(ErrorCode::InvalidConfig, std::string("compare needs '") + key + "'");
  RunConfig c;
  c.base = parent.base;
  if (parent.doc[key].is_string()) {
    c = load_config(parent.path(key).string());
  } else {
    c.doc = parent.doc[key];
  }
  for (const char* inherited : {"data", "metadata", "items", "order", "fit"}) {
    if (!c.doc.contains(inherited) && parent.doc.contains(inherited)) {
      c.doc[inherited] = parent.doc[inherited];
      if (parent.doc[inherited].is_string()) c.doc[inherited] = parent.path(inherited).string();
    }
  }
  normalize_fit_config(c, f);
  return c;
}

int cmd_compare(const Flags& f, std::ostream& out, std::ostream&) {
  auto c = load_config(f.config);
  auto full_cfg = sub_config(c, "full", f);
  auto reduced_cfg = sub_config(c, "reduced", f);
  const auto target = out_path(c, f, "compare.json");
  const json effective = {{"full", full_cfg.doc}, {"reduced", reduced_cfg.doc}, {"out", target}};
  const auto full = run_fit(full_cfg, f);
  const auto reduced = run_fit(reduced_cfg, f);
  const auto lr = lr_test(full, reduced);
  json report = json::parse(lr_test_json(lr, full, reduced));
  report["config"] = effective;
  write_file(target, report.dump(2) + "\n");
  out << "LR statistic " << format_double(lr.statistic) << " on " << lr.df << " df, p = "
      << format_double(lr.p_value) << '\n';
  return kOk;
}

std::vector<double> read_theta_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  std::vector<double> theta;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      theta.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedCsv, "bad theta row '" + line + "' in " + path.string());
    }
  }
  return theta;
}

int cmd_score(const Flags& f, std::ostream& out, std::ostream& err) {
  auto c = load_config(f.config);
  absolutize(c, {"model", "data", "metadata", "truth"});
  if (!c.doc.contains("model")) throw Error(ErrorCode::InvalidConfig, "score needs 'model' (a fit report)");
  auto model = load_model_from_report(c.path("model"));
  if (f.nodes) model.quadrature_nodes = *f.nodes;
  c.doc["quadrature_nodes"] = model.quadrature_nodes;
  std::vector<ItemSpec> items;
  if (c.doc.contains("metadata") || c.doc.contains("items")) {
    items = metadata_of(c);
  } else {
    items = model.items;
    for (auto& item : items) item.family.values.clear();
  }
  if (!c.doc.contains("allow_empty_persons")) c.doc["allow_empty_persons"] = true;
  const auto data = data_of(c, items);
  const auto target = out_path(c, f, "scores.csv");
  c.doc["out"] = target;
  const auto rows = score_persons(model, data, threads_of(f));
  std::ostringstream csv;
  write_scores_csv(csv, rows);
  write_file(target, csv.str());

  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.score.has_value();
  json summary = {{"persons", rows.size()}, {"scored", rows.size() - failed}, {"errors", failed}};
  if (c.doc.contains("truth")) {
    const auto theta = read_theta_csv(c.path("truth"));
    if (theta.size() != rows.size()) {
      throw Error(ErrorCode::InvalidConfig, "truth file has " + std::to_string(theta.size()) +
                                                " persons, data has " + std::to_string(rows.size()));
    }
    double mx = 0, my = 0, n = 0;
    for (std::size_t p = 0; p < rows.size(); ++p) {
      if (!rows[p].score) continue;
      mx += theta[p];
      my += rows[p].score->posterior_mean;
      n += 1;
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t p = 0; p < rows.size(); ++p) {
      if (!rows[p].score) continue;
      const double dx = theta[p] - mx;
      const double dy = rows[p].score->posterior_mean - my;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    const double r = sxy / std::sqrt(sxx * syy);
    summary["truth_correlation"] = r;
    out << "correlation with truth " << format_double(r) << '\n';
  }
  write_sidecar(target, c.doc, {{"summary", summary}});
  out << "scored " << rows.size() - failed << " of " << rows.size() << " persons\n";
  if (failed > 0) err << failed << " persons had no observed items\n";
  return kOk;
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream&) {
  auto c = load_config(f.config);
  if (f.seed) c.doc["seed"] = *f.seed;
  json model = c.doc.value("model", json::object());
  apply_model_overrides(model, f);
  c.doc["model"] = model;
  const auto scenario = parse_scenario(c.doc.dump());
  const fs::path dir = out_path(c, f, "simulation");
  c.doc["out"] = dir.string();

  const auto sim = simulate_dataset(scenario);
  std::ostringstream data;
  write_csv(data, sim.data);
  write_file(dir / "data.csv", data.str());
  std::ostringstream theta;
  write_theta_csv(theta, sim.theta);
  write_file(dir / "theta.csv", theta.str());
  auto items = scenario.truth.items;
  for (auto& item : items) item.family.values.clear();
  write_file(dir / "metadata.json", item_metadata_to_json(items));
  json truth = c.doc;
  truth["schema_version"] = kReportSchemaVersion;
  write_file(dir / "truth.json", truth.dump(2) + "\n");
  out << "simulated " << scenario.persons << " persons x " << items.size() << " items into " << dir.string()
      << '\n';

  if (c.doc.value("recovery", false)) {
    FitOptions options = fit_options_of(c.doc.value("fit", json::object()), f);
    const auto report = recovery_study(scenario, options, threads_of(f));
    json r = json::parse(recovery_report_json(report));
    r["config"] = c.doc;
    write_file(dir / "recovery.json", r.dump(2) + "\n");
    out << recovery_report_table(report);
  }
  return kOk;
}

int cmd_curves(const Flags& f, std::ostream& out, std::ostream&) {
  auto c = load_config(f.config);
  absolutize(c, {"model"});
  if (!c.doc.contains("model")) throw Error(ErrorCode::InvalidConfig, "curves needs 'model' (a fit report)");
  const auto model = load_model_from_report(c.path("model"));
  const auto target = out_path(c, f, "curves.csv");
  c.doc["out"] = target;
  const auto tables = curve_tables(model, c.doc);
  for (const auto& t : tables) {
    const auto problem = check_curve(t);
    if (!problem.empty()) throw Error(ErrorCode::InvalidConfig, "curve invariant violated: " + problem);
  }
  write_file(target, curves_csv(tables));
  write_sidecar(target, c.doc);
  out << "wrote " << tables.size() << " curves to " << target << '\n';
  return kOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return kIo;
    case ErrorCode::NotConverged: return kNotConverged;
    default: return kValidation;
  }
}

}  // namespace

unsigned default_threads() {
  if (const char* env = std::getenv("THRESHOLDS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return 0;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thresholds model: fit, compare, score, simulate and tabulate curves"};
  app.require_subcommand(1);
  Flags flags;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON run config")->required();
    sub->add_option("--nodes", flags.nodes, "Gauss-Hermite nodes (overrides the config)");
    sub->add_option("--lambda", flags.lambda, "shape penalty weight (overrides the config)");
    sub->add_option("--seed", flags.seed, "random seed (overrides the config)");
    sub->add_option("--out", flags.out, "output path (overrides the config)");
    sub->add_option("--threads", flags.threads, "worker threads (default: THRESHOLDS_THREADS or all)");
  };
  auto* fit_cmd = app.add_subcommand("fit", "fit a model and write a JSON report");
  auto* compare_cmd = app.add_subcommand("compare", "likelihood-ratio test of two nested fits");
  auto* score_cmd = app.add_subcommand("score", "posterior person scores for a fitted model");
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate data from a scenario");
  auto* curves_cmd = app.add_subcommand("curves", "tabulate PT, IC and difficulty curves");
  for (auto* sub : {fit_cmd, compare_cmd, score_cmd, simulate_cmd, curves_cmd}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kValidation;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(flags, out, err);
    if (compare_cmd->parsed()) return cmd_compare(flags, out, err);
    if (score_cmd->parsed()) return cmd_score(flags, out, err);
    if (simulate_cmd->parsed()) return cmd_simulate(flags, out, err);
    return cmd_curves(flags, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: bad config value: " << e.what() << '\n';
    return kValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace thresholds::cli
