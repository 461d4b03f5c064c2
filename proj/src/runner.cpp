#include "latlab/runner.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "latlab/dynamics.hpp"
#include "latlab/errors.hpp"

namespace latlab {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Json index_to_json(const LatticeIndex& z) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < z.size(); ++i) arr.push_back(z[i]);
  return arr;
}

Vector vector_from_json(const Json& arr, const char* what) {
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError(std::string(what) + " must be a nonempty numeric array");
  }
  Vector v(static_cast<Eigen::Index>(arr.size()));
  Eigen::Index i = 0;
  for (const Json& e : arr) {
    if (!e.is_number()) throw ConfigError(std::string(what) + " must be numeric");
    v[i++] = e.get<double>();
  }
  return v;
}

Json estimate_to_json(const MeasureEstimate& est) {
  return Json{{"value", est.value},
              {"stderr", est.std_error},
              {"ci_low", est.ci_low},
              {"ci_high", est.ci_high},
              {"n_samples", est.n_samples},
              {"seed", est.seed}};
}

Json verdict_to_json(const ConditionVerdict& verdict) {
  Json out{{"satisfied", verdict.satisfied}, {"certified", verdict.certified}};
  if (verdict.witness) {
    Json w{{"detail", verdict.witness->detail}};
    Json pts = Json::array(), vals = Json::array();
    for (const Vector& p : verdict.witness->points) pts.push_back(vector_to_json(p));
    for (const Vector& v : verdict.witness->values) vals.push_back(vector_to_json(v));
    w["points"] = pts;
    w["values"] = vals;
    out["witness"] = w;
  }
  return out;
}

std::function<bool(const Vector&)> make_predicate(const std::string& name, const Vector& lower,
                                                  const Vector& upper) {
  if (name == "simplex") {
    return [](const Vector& x) { return (x.array() >= 0.0).all() && x.sum() <= 1.0; };
  }
  if (name == "ball") {
    Vector c = ((lower + upper) / 2).eval();
    double r = 0.5 * (upper - lower).minCoeff();
    return [c, r](const Vector& x) { return (x - c).norm() <= r; };
  }
  if (name == "L-shape") {
    // The box with its strictly-upper open corner quadrant removed.
    Vector m = ((lower + upper) / 2).eval();
    return [m](const Vector& x) { return !(x.array() > m.array()).all(); };
  }
  throw ConfigError("unknown domain predicate '" + name + "'");
}

}  // namespace

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kRobustnessSingle: return "robustness-single";
    case RunMode::kMeasureSweep: return "measure-sweep";
    case RunMode::kQGridScan: return "q-grid-scan";
    case RunMode::kBoundsReport: return "bounds-report";
  }
  return "unknown";
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "robustness-single") return RunMode::kRobustnessSingle;
  if (name == "measure-sweep") return RunMode::kMeasureSweep;
  if (name == "q-grid-scan") return RunMode::kQGridScan;
  if (name == "bounds-report") return RunMode::kBoundsReport;
  throw ConfigError("unknown mode '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  static const char* known[] = {"family", "params",     "dimension", "lower",
                                "upper",  "predicate",  "h",         "mode",
                                "q",      "n_samples",  "seed",      "resolution",
                                "out_dir", "format"};
  for (const auto& [key, value] : doc.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown config key '" + key + "'");
  }
  auto need = [&](const char* key) -> const Json& {
    if (!doc.contains(key)) throw ConfigError(std::string("config missing key '") + key + "'");
    return doc.at(key);
  };

  ExperimentConfig cfg;
  try {
    cfg.family = need("family").get<std::string>();
    cfg.params = need("params").get<std::vector<double>>();
    cfg.dimension = need("dimension").get<int>();
    cfg.lower = vector_from_json(need("lower"), "lower");
    cfg.upper = vector_from_json(need("upper"), "upper");
    if (doc.contains("predicate") && !doc.at("predicate").is_null()) {
      cfg.predicate = doc.at("predicate").get<std::string>();
    }
    cfg.h = need("h").get<double>();
    cfg.mode = run_mode_from_string(need("mode").get<std::string>());
    if (doc.contains("q") && !doc.at("q").is_null()) {
      cfg.q = vector_from_json(doc.at("q"), "q");
    }
    if (doc.contains("n_samples")) cfg.n_samples = doc.at("n_samples").get<Index>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("resolution")) cfg.resolution = doc.at("resolution").get<Index>();
    if (doc.contains("out_dir")) cfg.out_dir = doc.at("out_dir").get<std::string>();
    if (doc.contains("format")) cfg.format = doc.at("format").get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config value: ") + e.what());
  }
  return cfg;
}

Json ExperimentConfig::to_json() const {
  Json doc;
  doc["family"] = family;
  doc["params"] = params;
  doc["dimension"] = dimension;
  doc["lower"] = vector_to_json(lower);
  doc["upper"] = vector_to_json(upper);
  if (!predicate.empty()) doc["predicate"] = predicate;
  doc["h"] = h;
  doc["mode"] = to_string(mode);
  if (q.size() > 0) doc["q"] = vector_to_json(q);
  doc["n_samples"] = n_samples;
  doc["seed"] = seed;
  if (resolution > 0) doc["resolution"] = resolution;
  doc["out_dir"] = out_dir;
  doc["format"] = format;
  return doc;
}

MapSpec ExperimentConfig::make_map() const { return builtin_map(family, params, dimension); }

DomainSpec ExperimentConfig::make_domain() const {
  if (predicate.empty()) return DomainSpec::box(lower, upper);
  return DomainSpec::restricted(lower, upper, make_predicate(predicate, lower, upper),
                                predicate);
}

void ExperimentConfig::validate() const {
  if (dimension < 1) throw ConfigError("dimension must be >= 1");
  if (lower.size() != dimension || upper.size() != dimension) {
    throw ConfigError("lower/upper must have length = dimension");
  }
  if (!(h > 0) || !std::isfinite(h)) throw ConfigError("h must be finite and positive");
  if (format != "json" && format != "csv") throw ConfigError("format must be json or csv");

  try {
    make_map();       // family + parameter arity
    make_domain();    // box order + predicate name
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }

  switch (mode) {
    case RunMode::kRobustnessSingle:
      if (q.size() != dimension) {
        throw ConfigError("robustness-single needs q with length = dimension");
      }
      break;
    case RunMode::kQGridScan:
      if (resolution < 2) throw ConfigError("q-grid-scan needs resolution >= 2");
      if (dimension > 2) throw ConfigError("q-grid-scan supports dimensions 1 and 2 only");
      break;
    case RunMode::kMeasureSweep:
    case RunMode::kBoundsReport:
      if (n_samples < 100) throw ConfigError("measure modes need n_samples >= 100");
      break;
  }
}

namespace {

Json common_hypotheses(const MapSpec& map, const DomainSpec& dom, double h, Index n_samples,
                       std::uint64_t seed) {
  Json out;
  out["declared_monotone"] = map.declared_monotone;
  try {
    out["margin"] = verdict_to_json(
        check_margin(map, dom, h, std::min<Index>(n_samples, 10'000), seed));
  } catch (const ConfigError& e) {
    out["margin"] = Json{{"satisfied", false},
                         {"certified", false},
                         {"witness", Json{{"detail", std::string("not checkable: ") + e.what()}}}};
  }
  return out;
}

Json scan_row_to_json(const ScanRow& row) {
  Json r;
  r["q"] = vector_to_json(row.q);
  r["k"] = row.k;
  r["robust"] = row.robust;
  r["eq"] = row.equilibrium ? vector_to_json(*row.equilibrium) : Json(nullptr);
  return r;
}

}  // namespace

RunReport run(const ExperimentConfig& config, int workers) {
  config.validate();
  const MapSpec map = config.make_map();
  const DomainSpec dom = config.make_domain();

  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config;
  report.hypotheses = common_hypotheses(map, dom, config.h, config.n_samples, config.seed);

  switch (config.mode) {
    case RunMode::kRobustnessSingle: {
      GridContext ctx = GridContext::make(config.h, config.q);
      DiscretizedSystem sys = discretize(map, dom, ctx);
      std::vector<Index> fixed = fixed_point_positions(sys);
      CycleReport cycles = analyze_cycles(sys);
      RobustnessVerdict verdict = robustness_verdict(sys, fixed, cycles);

      std::vector<Vector> real_points;
      real_points.reserve(sys.points.size());
      for (Index i = 0; i < sys.n(); ++i) real_points.push_back(sys.point_at(i));
      report.hypotheses["monotone_on_lattice"] = verdict_to_json(
          check_monotone(map, real_points));
      report.hypotheses["self_mapping"] = verdict_to_json(check_self_mapping(map, dom, ctx));

      Json payload;
      payload["q_canonical"] = vector_to_json(ctx.q());
      payload["points"] = sys.n();
      payload["robust"] = verdict.robust;
      payload["reason"] = to_string(verdict.reason);
      payload["k"] = static_cast<Index>(fixed.size());
      Json fps = Json::array();
      for (Index i : fixed) {
        fps.push_back(Json{{"z", index_to_json(sys.points[static_cast<std::size_t>(i)])},
                           {"x", vector_to_json(sys.point_at(i))}});
      }
      payload["fixed_points"] = fps;
      if (verdict.equilibrium) {
        payload["equilibrium"] = vector_to_json(ctx.point_at(*verdict.equilibrium));
      }
      if (!verdict.cycle.empty()) {
        Json cyc = Json::array();
        for (const LatticeIndex& z : verdict.cycle) cyc.push_back(index_to_json(z));
        payload["cycle"] = cyc;
      }
      if (verdict.escape_witness) {
        payload["escape_witness"] = index_to_json(*verdict.escape_witness);
      }
      Json cyc_summary = Json::array();
      for (const auto& c : cycles.cycles) {
        cyc_summary.push_back(Json{{"period", c.period}, {"basin", c.basin_size}});
      }
      payload["cycles"] = cyc_summary;
      payload["escaped"] = cycles.escaped;
      report.payload = payload;
      break;
    }
    case RunMode::kMeasureSweep: {
      report.payload["vs"] = estimate_to_json(estimate_robust_offset_volume(
          map, dom, config.h, config.n_samples, config.seed, workers));
      report.payload["vnear"] = estimate_to_json(estimate_near_fixed_measure(
          map, dom, config.h, config.n_samples, config.seed, workers));
      report.payload["k_integral"] = estimate_to_json(estimate_count_integral(
          map, dom, config.h, config.n_samples, config.seed, workers));
      break;
    }
    case RunMode::kQGridScan: {
      report.scan_rows = q_grid_scan(map, dom, config.h, config.resolution);
      report.payload["resolution"] = config.resolution;
      report.payload["rows"] = static_cast<Index>(report.scan_rows.size());
      Index k1 = 0, robust = 0;
      for (const ScanRow& row : report.scan_rows) {
        if (row.k == 1) ++k1;
        if (row.robust) ++robust;
      }
      report.payload["k1_fraction"] =
          static_cast<double>(k1) / static_cast<double>(report.scan_rows.size());
      report.payload["robust_fraction"] =
          static_cast<double>(robust) / static_cast<double>(report.scan_rows.size());
      if (config.format == "csv") {
        report.payload["table"] = "scan.csv";
      } else {
        Json rows = Json::array();
        for (const ScanRow& row : report.scan_rows) rows.push_back(scan_row_to_json(row));
        report.payload["table"] = rows;
      }
      break;
    }
    case RunMode::kBoundsReport: {
      BoundReport br =
          bounds_report(map, dom, config.h, config.n_samples, config.seed, workers);
      Json payload;
      payload["vs"] = estimate_to_json(br.vs);
      payload["vnear"] = estimate_to_json(br.vnear);
      payload["k_integral"] = estimate_to_json(br.count_integral);
      payload["vs_hypothesis_gated"] = estimate_to_json(br.vs_gated);
      payload["L"] = br.extent.L;
      payload["L_per_axis"] = index_to_json(br.extent.L_per_axis);
      payload["lower_bound"] = br.lower_bound;
      if (br.upper_bound) {
        payload["upper_bound"] = *br.upper_bound;
      } else {
        payload["upper_bound_note"] = br.upper_bound_note;
      }
      payload["hypotheses_verified"] = br.hypotheses_verified;
      payload["gates"] = Json{{"samples", br.gates.samples},
                              {"order_bound_failures", br.gates.order_bound_failures},
                              {"self_map_failures", br.gates.self_map_failures},
                              {"monotone_failures", br.gates.monotone_failures},
                              {"nontrivial_cycle_failures", br.gates.nontrivial_cycle_failures},
                              {"count_above_ceiling", br.gates.count_above_ceiling}};
      Json checks = Json::array();
      for (const CheckResult& c : br.checks) {
        checks.push_back(Json{{"name", c.name}, {"pass", c.pass}, {"slack", c.slack}});
      }
      payload["checks"] = checks;
      report.hypotheses["margin"] = verdict_to_json(br.margin);
      report.payload = payload;
      report.strict_failure = !br.all_checks_pass();
      break;
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

Json RunReport::to_json() const {
  Json doc;
  doc["version"] = version;
  doc["mode"] = to_string(config.mode);
  doc["config"] = config.to_json();
  doc["hypotheses"] = hypotheses;
  for (const auto& [key, value] : payload.items()) doc[key] = value;
  return doc;
}

std::vector<std::string> emit(const RunReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  try {
    fs::create_directories(out_dir);

    const fs::path report_path = fs::path(out_dir) / "report.json";
    {
      std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot open " + report_path.string());
      out << report.to_json().dump(2) << '\n';
      if (!out) throw IoError("failed writing " + report_path.string());
    }
    written.push_back(report_path.string());

    if (report.config.mode == RunMode::kQGridScan && report.config.format == "csv") {
      const fs::path csv_path = fs::path(out_dir) / "scan.csv";
      std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot open " + csv_path.string());

      const int d = report.config.dimension;
      for (int i = 0; i < d; ++i) out << "q_" << (i + 1) << ",";
      out << "k,robust";
      for (int i = 0; i < d; ++i) out << ",eq_" << (i + 1);
      out << '\n';
      for (const ScanRow& row : report.scan_rows) {
        for (int i = 0; i < d; ++i) out << fmt17(row.q[i]) << ",";
        out << row.k << ',' << (row.robust ? 1 : 0);
        for (int i = 0; i < d; ++i) {
          out << ',';
          if (row.equilibrium) out << fmt17((*row.equilibrium)[i]);
        }
        out << '\n';
      }
      if (!out) throw IoError("failed writing " + csv_path.string());
      written.push_back(csv_path.string());
    }
  } catch (const fs::filesystem_error& e) {
    throw IoError(e.what());
  }
  return written;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"offset-lattice roundoff dynamics lab"};
  app.get_formatter()->column_width(30);

  std::string config_path;
  std::string mode_override, out_override, format_override;
  std::int64_t seed_override = 0;
  Index samples_override = 0;
  bool strict = false;

  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  auto* mode_opt = app.add_option("--mode", mode_override, "override config mode");
  auto* seed_opt = app.add_option("--seed", seed_override, "override config seed");
  auto* samples_opt = app.add_option("--samples", samples_override, "override sample count");
  auto* out_opt = app.add_option("--out", out_override, "override output directory");
  auto* format_opt =
      app.add_option("--format", format_override, "scan table format: json or csv");
  app.add_flag("--strict", strict, "exit 1 when a bounds consistency check fails");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    int workers = 0;
    if (const char* env = std::getenv("LATLAB_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 0) {
        throw ConfigError("LATLAB_THREADS must be a nonnegative integer");
      }
      workers = static_cast<int>(v);
    }

    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw IoError("cannot read config file " + config_path);
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig config = ExperimentConfig::from_json(doc);
    if (mode_opt->count()) config.mode = run_mode_from_string(mode_override);
    if (seed_opt->count()) config.seed = static_cast<std::uint64_t>(seed_override);
    if (samples_opt->count()) config.n_samples = samples_override;
    if (out_opt->count()) config.out_dir = out_override;
    if (format_opt->count()) config.format = format_override;

    RunReport report = run(config, workers);
    std::vector<std::string> written = emit(report, config.out_dir);

    std::cerr << report.version << ": " << to_string(config.mode) << " done in "
              << report.wall_seconds << " s";
    for (const std::string& path : written) std::cerr << ", wrote " << path;
    std::cerr << '\n';

    if (strict && report.strict_failure) {
      std::cerr << "strict mode: a bounds consistency check failed\n";
      return 1;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace latlab
