#include "restool/pipeline.hpp"

#include "restool/csv.hpp"
#include "restool/ellipse.hpp"
#include "restool/index.hpp"
#include "restool/panel.hpp"
#include "restool/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>

namespace restool::pipeline {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---- config parsing --------------------------------------------------------

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError("unknown field '" + key + "'", where.empty() ? key : where + "." + key);
  }
}

const json& section(const json& doc, const char* name) {
  static const json empty = json::object();
  if (!doc.contains(name)) return empty;
  const auto& s = doc[name];
  if (!s.is_object()) throw ConfigError(std::string(name) + " must be an object", name);
  return s;
}

std::string get_string(const json& obj, const char* key, const std::string& where, std::optional<std::string> def) {
  const std::string field = where + "." + key;
  if (!obj.contains(key) || obj[key].is_null()) {
    if (def) return *def;
    throw ConfigError("missing required field", field);
  }
  if (!obj[key].is_string()) throw ConfigError("must be a string", field);
  return obj[key].get<std::string>();
}

std::optional<std::string> get_optional_string(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_string()) throw ConfigError("must be a string", where + "." + key);
  return obj[key].get<std::string>();
}

long long get_integer(const json& obj, const char* key, const std::string& where, long long def, long long lo,
                      long long hi) {
  const std::string field = where + "." + key;
  if (!obj.contains(key) || obj[key].is_null()) return def;
  if (!obj[key].is_number_integer()) throw ConfigError("must be an integer", field);
  const auto v = obj[key].get<long long>();
  if (v < lo || v > hi) {
    throw ConfigError("must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", field);
  }
  return v;
}

std::optional<double> get_positive(const json& obj, const char* key, const std::string& where) {
  const std::string field = where + "." + key;
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_number()) throw ConfigError("must be a number", field);
  const double v = obj[key].get<double>();
  if (!(v > 0.0)) throw ConfigError("must be positive", field);
  return v;
}

std::vector<int> get_years(const json& obj, const char* key, const std::string& where) {
  const std::string field = where + "." + key;
  std::vector<int> years;
  if (!obj.contains(key) || obj[key].is_null()) return years;
  if (!obj[key].is_array()) throw ConfigError("must be an array of years", field);
  for (const auto& y : obj[key]) {
    if (!y.is_number_integer()) throw ConfigError("must be an array of integer years", field);
    years.push_back(y.get<int>());
  }
  std::set<int> unique(years.begin(), years.end());
  if (unique.size() != years.size()) throw ConfigError("duplicate years", field);
  return years;
}

std::vector<std::string> get_strings(const json& obj, const char* key, const std::string& where) {
  const std::string field = where + "." + key;
  std::vector<std::string> out;
  if (!obj.contains(key) || obj[key].is_null()) return out;
  if (!obj[key].is_array()) throw ConfigError("must be an array of strings", field);
  for (const auto& s : obj[key]) {
    if (!s.is_string()) throw ConfigError("must be an array of strings", field);
    out.push_back(s.get<std::string>());
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

void require_file(const fs::path& p, const std::string& field) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw ConfigError("file not found: " + p.string(), field);
}

// ---- output helpers --------------------------------------------------------

void write_json(const ojson& doc, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string(), path.string());
  out << doc.dump(2) << '\n';
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---- stages ----------------------------------------------------------------

class Runner {
public:
  explicit Runner(const PipelineConfig& cfg) : cfg_(cfg), out_(cfg.paths.output_dir) {}

  StageRecord run(Stage stage) {
    StageRecord rec;
    rec.stage = to_string(stage);
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = out_ / rec.stage;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message(), dir.string());
    outputs_ = &rec.outputs;
    switch (stage) {
      case Stage::Validate: validate(dir); break;
      case Stage::Index: index(dir); break;
      case Stage::Classify: classify(dir); break;
      case Stage::Ellipse: ellipse(dir); break;
      case Stage::Density: density(dir); break;
      case Stage::Detect: detect(dir); break;
      case Stage::All: throw std::logic_error("run(All) is expanded by the caller");
    }
    outputs_ = nullptr;
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
  }

private:
  fs::path emit(const fs::path& dir, const std::string& name) {
    const fs::path p = dir / name;
    outputs_->push_back(p.lexically_relative(out_).generic_string());
    return p;
  }

  IndicatorPanel filled_panel(std::vector<IndicatorSpec>* specs_out = nullptr, FillReport* report = nullptr) {
    auto specs = load_indicator_specs(cfg_.paths.spec);
    auto panel = load_panel(cfg_.paths.values, specs);
    auto filled = fill_missing_report(panel);
    if (specs_out) *specs_out = specs;
    if (report) *report = filled;
    return std::move(filled.panel);
  }

  int base_year(const IndicatorPanel& panel) const {
    const int y = cfg_.normalization.base_year.value_or(panel.first_year());
    if (!panel.year_index(y)) {
      throw ConfigError("base year " + std::to_string(y) + " outside panel years " + std::to_string(panel.first_year()) +
                            "-" + std::to_string(panel.last_year()),
                        "normalization.base_year");
    }
    return y;
  }

  void check_years(const std::vector<int>& years, const std::vector<int>& available, const std::string& field) const {
    for (int y : years) {
      if (std::find(available.begin(), available.end(), y) == available.end()) {
        throw ConfigError("year " + std::to_string(y) + " not in the panel", field);
      }
    }
  }

  WeightVector weights_for(const IndicatorPanel& panel, const std::vector<IndicatorSpec>& specs,
                           const NormalizedPanel& norm) const {
    if (cfg_.weights.source == "entropy") return entropy_weights(norm);
    std::vector<std::string> ids;
    for (const auto& s : panel.indicators()) ids.push_back(s.id);
    if (cfg_.paths.weights) return load_weights(*cfg_.paths.weights, ids);
    return weights_from_specs(specs);
  }

  NormalizedPanel normalize(const IndicatorPanel& panel) const {
    if (cfg_.normalization.mode == "fixed_base") return normalize_fixed_base(panel, base_year(panel));
    return normalize_minmax(panel, cfg_.normalization.scope == "pooled" ? MinMaxScope::Pooled : MinMaxScope::PerYear);
  }

  ScoreSeries scores() const {
    const fs::path p = out_ / "index" / "scores.csv";
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) throw DataError("missing " + p.string() + "; run the index stage first", p.string());
    return read_scores(p);
  }

  SpatialWeights neighbours(const std::vector<std::string>& regions) const {
    if (cfg_.density.neighbors == "knn") {
      return knn_spatial_weights(load_centroids(cfg_.paths.centroids).aligned(regions), cfg_.density.knn_k);
    }
    return build_spatial_weights(*cfg_.paths.adjacency, regions);
  }

  IndicatorPanel drivers() const {
    if (!cfg_.paths.drivers) throw ConfigError("the detect stage needs a drivers file", "paths.drivers");
    return fill_missing(load_long_table(*cfg_.paths.drivers, "factor"));
  }

  void validate(const fs::path& dir) {
    std::vector<IndicatorSpec> specs;
    FillReport fill;
    const auto panel = filled_panel(&specs, &fill);
    const auto raw_missing = fill.filled.size();
    if (cfg_.normalization.mode == "fixed_base") base_year(panel);
    check_years(cfg_.ellipse.years, panel.years(), "ellipse.years");
    check_years(cfg_.detector.years, panel.years(), "detector.years");

    ojson report;
    report["regions"] = panel.region_count();
    report["years"] = {panel.first_year(), panel.last_year()};
    report["indicators"] = panel.indicator_count();
    report["cells"] = panel.cell_count();
    report["missing_before_fill"] = raw_missing;
    report["missing_after_fill"] = panel.missing_count();
    ojson filled = ojson::array();
    for (const auto& c : fill.filled) {
      filled.push_back({{"region", panel.regions()[c.region]},
                        {"indicator", panel.indicators()[c.indicator].id},
                        {"year", panel.first_year() + static_cast<int>(c.year)},
                        {"value", c.value},
                        {"method", c.extrapolated ? "growth_extrapolation" : "linear_interpolation"}});
    }
    report["filled"] = filled;

    if (cfg_.weights.source == "file") {
      std::vector<std::string> ids;
      for (const auto& s : specs) ids.push_back(s.id);
      const auto w = cfg_.paths.weights ? load_weights(*cfg_.paths.weights, ids) : weights_from_specs(specs);
      report["weights_sum"] = w.sum();
    }

    const auto geometry = load_centroids(cfg_.paths.centroids);
    geometry.aligned(panel.regions());
    report["projection"] = geometry.projection ? "equirectangular" : "supplied_km";

    if (cfg_.paths.adjacency) {
      const auto w = build_spatial_weights(*cfg_.paths.adjacency, panel.regions());
      report["islands"] = w.islands;
    }
    if (cfg_.paths.drivers) {
      const auto raw = load_long_table(*cfg_.paths.drivers, "factor");
      const auto d = fill_missing(raw);
      for (const auto& r : panel.regions()) {
        if (!d.region_index(r)) throw DataError("drivers file has no rows for region " + r, "paths.drivers");
      }
      for (const auto& f : cfg_.detector.factors) {
        if (!d.indicator_index(f)) throw ConfigError("factor '" + f + "' not in drivers file", "detector.factors");
      }
      std::vector<std::string> factors;
      for (const auto& s : d.indicators()) factors.push_back(s.id);
      report["drivers"] = {{"factors", factors},
                           {"missing_before_fill", raw.missing_count()},
                           {"missing_after_fill", d.missing_count()}};
    }
    write_json(report, emit(dir, "report.json"));
    write_panel(panel, emit(dir, "panel_filled.csv"));
  }

  void index(const fs::path& dir) {
    std::vector<IndicatorSpec> specs;
    const auto panel = filled_panel(&specs);
    const auto norm = normalize(panel);
    const auto w = weights_for(panel, specs, norm);
    const auto s = aggregate_scores(norm, w);

    write_scores(s, emit(dir, "scores.csv"), static_cast<int>(cfg_.classification.k));
    write_weights(w, emit(dir, "weights.json"));

    ojson summary;
    summary["normalization"] = to_string(norm.mode());
    if (norm.mode() == NormalizationMode::FixedBase) summary["base_year"] = base_year(panel);
    summary["weight_source"] = cfg_.weights.source;
    summary["weights_sum"] = w.sum();
    ojson means = ojson::array();
    for (std::size_t k = 0; k < s.years.size(); ++k) {
      const auto slice = s.year_slice(k);
      double m = 0.0;
      for (double v : slice) m += v;
      means.push_back({{"year", s.years[k]}, {"mean", m / static_cast<double>(slice.size())}});
    }
    summary["mean_by_year"] = means;
    write_json(summary, emit(dir, "summary.json"));
  }

  void classify(const fs::path& dir) {
    auto s = scores();
    const auto per_year = classify_levels(s, cfg_.classification.k);
    write_scores(s, emit(dir, "levels.csv"), static_cast<int>(cfg_.classification.k));
    ojson doc = ojson::array();
    for (std::size_t k = 0; k < s.years.size(); ++k) {
      std::vector<std::size_t> counts(cfg_.classification.k, 0);
      for (int c : per_year[k].classes) ++counts[static_cast<std::size_t>(c)];
      doc.push_back({{"year", s.years[k]},
                     {"upper_bounds", per_year[k].upper_bounds},
                     {"counts", counts},
                     {"within_ssd", per_year[k].within_ssd}});
    }
    write_json(doc, emit(dir, "breaks.json"));
  }

  void ellipse(const fs::path& dir) {
    const auto s = scores();
    check_years(cfg_.ellipse.years, s.years, "ellipse.years");
    const auto traj = ellipse_trajectory(s, load_centroids(cfg_.paths.centroids), cfg_.ellipse.years);
    write_ellipses(traj, emit(dir, "ellipses.csv"));
    write_trajectory(traj, emit(dir, "trajectory.csv"));
    ojson summary;
    const double net = traj.net_azimuth_change_deg;
    summary["net_azimuth_change_deg"] = net;
    summary["rotation"] = net > 0.0 ? "clockwise" : net < 0.0 ? "counterclockwise" : "none";
    if (traj.ellipses.size() >= 2) {
      const auto& a = traj.ellipses.front();
      const auto& b = traj.ellipses.back();
      summary["area_change_km2"] = b.area_km2 - a.area_km2;
      summary["semi_major_change_km"] = b.semi_major_km - a.semi_major_km;
      summary["semi_minor_change_km"] = b.semi_minor_km - a.semi_minor_km;
    }
    write_json(summary, emit(dir, "summary.json"));
  }

  void density(const fs::path& dir) {
    const auto s = scores();
    const auto w = neighbours(s.regions);
    const std::size_t n = cfg_.density.grid_size;
    constexpr double pad = 3.0;

    ojson summary;
    summary["grid_size"] = n;
    summary["grid_padding_bandwidths"] = pad;
    summary["neighbors"] = cfg_.density.neighbors;
    summary["islands"] = w.islands;

    const double h_all = silverman_bandwidth(s.scores);
    const auto grid_all = padded_grid(s.scores, h_all, pad, n);
    auto marginal = kde_1d(s.scores, h_all, grid_all);
    marginal.mode = "pooled";
    write_density_json(marginal, emit(dir, "marginal.json"));

    ojson modes = ojson::object();
    for (PairMode mode : cfg_.density.modes) {
      const auto pairs = build_pairs(s, w, mode, cfg_.density.delta);
      if (pairs.pairs.size() < 2) throw NumericError("too few observation pairs for " + to_string(mode));
      const auto xs = pairs.xs();
      const auto ys = pairs.ys();
      const double hx = cfg_.density.h_x.value_or(silverman_bandwidth(xs));
      const double hy = cfg_.density.h_y.value_or(silverman_bandwidth(ys));
      const auto gx = padded_grid(xs, hx, pad, n);
      const auto gy = padded_grid(ys, hy, pad, n);
      const std::string name = to_string(mode);

      write_density_json(kde_2d(pairs, hx, hy, gx, gy), emit(dir, name + "_joint.json"));
      const auto cond = conditional_density(pairs, hx, hy, gx, gy);
      write_density_json(cond, emit(dir, name + "_conditional.json"));

      std::ofstream out(emit(dir, name + "_pairs.csv"), std::ios::binary);
      csv::write_row(out, {"region", "year", "x", "y"});
      for (const auto& p : pairs.pairs) {
        csv::write_row(out, {s.regions[p.region], std::to_string(p.year), csv::format_number(p.x),
                             csv::format_number(p.y)});
      }

      ojson m;
      m["n_pairs"] = pairs.pairs.size();
      m["h_x"] = hx;
      m["h_y"] = hy;
      if (mode != PairMode::SpatialStatic) m["delta"] = pairs.lag;
      m["excluded_islands"] = pairs.excluded_islands;
      m["empty_columns"] = cond.empty_columns.size();
      modes[name] = m;
    }
    summary["modes"] = modes;
    write_json(summary, emit(dir, "summary.json"));
  }

  void detect(const fs::path& dir) {
    const auto s = scores();
    const auto d = drivers();
    const auto& det = cfg_.detector;
    check_years(det.years, s.years, "detector.years");
    std::vector<int> years = det.years.empty() ? std::vector<int>{s.years.back()} : det.years;

    std::vector<std::string> factors = det.factors;
    if (factors.empty()) {
      for (const auto& f : d.indicators()) factors.push_back(f.id);
    }
    std::vector<std::size_t> factor_pos;
    for (const auto& f : factors) {
      const auto j = d.indicator_index(f);
      if (!j) throw ConfigError("factor '" + f + "' not in drivers file", "detector.factors");
      factor_pos.push_back(*j);
    }
    std::vector<std::size_t> region_pos;
    for (const auto& r : s.regions) {
      const auto i = d.region_index(r);
      if (!i) throw DataError("drivers file has no rows for region " + r, "paths.drivers");
      region_pos.push_back(*i);
    }

    const bool test = det.permutations > 0;
    ojson report;
    report["n_regions"] = s.regions.size();
    report["permutations"] = det.permutations;
    if (det.seed) report["seed"] = *det.seed;
    ojson methods = ojson::array();
    for (auto m : det.methods) methods.push_back(to_string(m));
    report["methods"] = methods;
    report["L_range"] = {det.min_classes, det.max_classes};

    ojson per_year = ojson::array();
    for (int year : years) {
      const auto k_scores = *s.year_index(year);
      const auto k_drivers = d.year_index(year);
      if (!k_drivers) throw DataError("drivers file has no data for " + std::to_string(year), "paths.drivers");
      const auto y = s.year_slice(k_scores);

      std::vector<StrataPartition> partitions;
      ojson factor_rows = ojson::array();
      ojson risk_rows = ojson::array();
      for (std::size_t f = 0; f < factors.size(); ++f) {
        std::vector<double> x;
        for (std::size_t i : region_pos) x.push_back(d.value(i, factor_pos[f], *k_drivers));
        auto opt = discretize_optimal(x, y, det.methods, det.min_classes, det.max_classes, factors[f]);

        ojson row;
        row["factor"] = factors[f];
        row["q"] = opt.q;
        if (test) {
          const std::uint64_t seed = stream_seed(*det.seed, static_cast<std::uint64_t>(year) * 1000 + f);
          const auto sig = significance(y, opt.partition, det.permutations, seed);
          row["p"] = sig.p_value;
          row["exceedances"] = sig.exceedances;
          row["ties"] = sig.ties;
          row["stream_seed"] = seed;
        }
        row["method"] = to_string(opt.partition.method);
        row["classes"] = opt.partition.requested_classes;
        row["strata"] = opt.partition.strata;
        row["breaks"] = opt.partition.breaks;
        ojson cands = ojson::array();
        for (const auto& c : opt.candidates) {
          cands.push_back({{"method", to_string(c.method)}, {"classes", c.classes}, {"strata", c.strata}, {"q", c.q}});
        }
        row["candidates"] = cands;
        factor_rows.push_back(row);

        const auto risk = risk_detector(y, opt.partition);
        ojson r;
        r["factor"] = factors[f];
        ojson strata = ojson::array();
        for (const auto& st : risk.strata) {
          strata.push_back({{"stratum", st.label}, {"n", st.n}, {"mean", st.mean}});
        }
        r["strata"] = strata;
        ojson cmp = ojson::array();
        for (const auto& c : risk.comparisons) {
          ojson e{{"a", c.a}, {"b", c.b}, {"testable", c.testable}};
          if (c.testable) {
            e["t"] = std::isfinite(c.t) ? ojson(c.t) : ojson(c.t > 0 ? "inf" : "-inf");
            e["df"] = c.df;
            e["p"] = c.p_value;
            e["significant"] = c.significant;
          }
          cmp.push_back(e);
        }
        r["comparisons"] = cmp;
        risk_rows.push_back(r);
        partitions.push_back(std::move(opt.partition));
      }

      std::vector<InteractionResult> inter;
      ojson eco = ojson::array();
      for (std::size_t a = 0; a < partitions.size(); ++a) {
        for (std::size_t b = a + 1; b < partitions.size(); ++b) {
          inter.push_back(interaction(y, partitions[a], partitions[b]));
          const auto e = ecological_detector(y, partitions[a], partitions[b]);
          eco.push_back({{"pair", {factors[a], factors[b]}},
                         {"F", std::isfinite(e.f) ? ojson(e.f) : ojson("inf")},
                         {"p", e.p_value},
                         {"significant", e.significant}});
        }
      }
      std::stable_sort(inter.begin(), inter.end(), [](const auto& l, const auto& r) { return l.q_ab > r.q_ab; });
      ojson inter_rows = ojson::array();
      for (const auto& r : inter) {
        inter_rows.push_back({{"pair", {r.factor_a, r.factor_b}},
                              {"q_a", r.q_a},
                              {"q_b", r.q_b},
                              {"q_ab", r.q_ab},
                              {"type", to_string(r.type)},
                              {"at_max_boundary", r.at_max_boundary}});
      }

      per_year.push_back({{"year", year},
                          {"factors", factor_rows},
                          {"interactions", inter_rows},
                          {"risk", risk_rows},
                          {"ecological", eco}});
    }
    report["years"] = per_year;
    write_json(report, emit(dir, "report.json"));
  }

  const PipelineConfig& cfg_;
  fs::path out_;
  std::vector<std::string>* outputs_ = nullptr;
};

} // namespace

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Validate: return "validate";
    case Stage::Index: return "index";
    case Stage::Classify: return "classify";
    case Stage::Ellipse: return "ellipse";
    case Stage::Density: return "density";
    case Stage::Detect: return "detect";
    case Stage::All: return "all";
  }
  return "unknown";
}

Stage parse_stage(const std::string& s) {
  for (auto st : {Stage::Validate, Stage::Index, Stage::Classify, Stage::Ellipse, Stage::Density, Stage::Detect,
                  Stage::All}) {
    if (to_string(st) == s) return st;
  }
  throw ConfigError("unknown subcommand '" + s + "'", "subcommand");
}

PipelineConfig parse_config(json doc, const fs::path& base_dir, const Overrides& ov) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object", "");
  reject_unknown(doc, "", {"paths", "normalization", "weights", "classification", "ellipse", "density", "detector"});

  // Overrides are written into the document so they go through the same checks.
  auto put = [&](const char* sec, const char* key, json v) {
    if (!doc.contains(sec)) doc[sec] = json::object();
    if (doc[sec].is_object()) doc[sec][key] = std::move(v);
  };
  if (ov.seed) put("detector", "seed", *ov.seed);
  if (ov.output_dir) put("paths", "output_dir", *ov.output_dir);
  if (ov.base_year) put("normalization", "base_year", *ov.base_year);
  if (ov.permutations) put("detector", "permutations", *ov.permutations);
  if (ov.delta) put("density", "delta", *ov.delta);
  if (ov.grid_size) put("density", "grid_size", *ov.grid_size);

  PipelineConfig cfg;
  json canon;

  const auto& paths = section(doc, "paths");
  reject_unknown(paths, "paths", {"values", "spec", "centroids", "adjacency", "drivers", "weights", "output_dir"});
  auto req_path = [&](const char* key, fs::path& dst) {
    const auto s = get_string(paths, key, "paths", std::nullopt);
    dst = resolve(base_dir, s);
    require_file(dst, std::string("paths.") + key);
    canon["paths"][key] = fs::path(s).lexically_normal().generic_string();
  };
  auto opt_path = [&](const char* key, std::optional<fs::path>& dst) {
    const auto s = get_optional_string(paths, key, "paths");
    if (!s) {
      canon["paths"][key] = nullptr;
      return;
    }
    dst = resolve(base_dir, *s);
    require_file(*dst, std::string("paths.") + key);
    canon["paths"][key] = fs::path(*s).lexically_normal().generic_string();
  };
  req_path("values", cfg.paths.values);
  req_path("spec", cfg.paths.spec);
  req_path("centroids", cfg.paths.centroids);
  opt_path("adjacency", cfg.paths.adjacency);
  opt_path("drivers", cfg.paths.drivers);
  opt_path("weights", cfg.paths.weights);
  cfg.paths.output_dir = resolve(base_dir, get_string(paths, "output_dir", "paths", std::nullopt));

  const auto& norm = section(doc, "normalization");
  reject_unknown(norm, "normalization", {"mode", "base_year", "scope"});
  cfg.normalization.mode = get_string(norm, "mode", "normalization", "fixed_base");
  if (cfg.normalization.mode != "fixed_base" && cfg.normalization.mode != "minmax") {
    throw ConfigError("must be \"fixed_base\" or \"minmax\"", "normalization.mode");
  }
  if (norm.contains("base_year") && !norm["base_year"].is_null()) {
    cfg.normalization.base_year = static_cast<int>(get_integer(norm, "base_year", "normalization", 0, -9999, 9999));
  }
  cfg.normalization.scope = get_string(norm, "scope", "normalization", "per_year");
  if (cfg.normalization.scope != "per_year" && cfg.normalization.scope != "pooled") {
    throw ConfigError("must be \"per_year\" or \"pooled\"", "normalization.scope");
  }
  canon["normalization"] = {{"mode", cfg.normalization.mode}, {"scope", cfg.normalization.scope}};
  canon["normalization"]["base_year"] =
      cfg.normalization.base_year ? json(*cfg.normalization.base_year) : json(nullptr);

  const auto& weights = section(doc, "weights");
  reject_unknown(weights, "weights", {"source"});
  cfg.weights.source = get_string(weights, "source", "weights", "file");
  if (cfg.weights.source != "file" && cfg.weights.source != "entropy") {
    throw ConfigError("must be \"file\" or \"entropy\"", "weights.source");
  }
  canon["weights"] = {{"source", cfg.weights.source}};

  const auto& cls = section(doc, "classification");
  reject_unknown(cls, "classification", {"k"});
  cfg.classification.k = static_cast<std::size_t>(get_integer(cls, "k", "classification", 5, 2, 64));
  canon["classification"] = {{"k", cfg.classification.k}};

  const auto& ell = section(doc, "ellipse");
  reject_unknown(ell, "ellipse", {"years"});
  cfg.ellipse.years = get_years(ell, "years", "ellipse");
  canon["ellipse"] = {{"years", cfg.ellipse.years}};

  const auto& den = section(doc, "density");
  reject_unknown(den, "density", {"modes", "delta", "h_x", "h_y", "grid_size", "neighbors", "k"});
  if (den.contains("modes")) {
    cfg.density.modes.clear();
    for (const auto& m : get_strings(den, "modes", "density")) cfg.density.modes.push_back(parse_pair_mode(m));
    if (cfg.density.modes.empty()) throw ConfigError("needs at least one mode", "density.modes");
  }
  cfg.density.delta = static_cast<int>(get_integer(den, "delta", "density", 3, 1, 1000));
  cfg.density.h_x = get_positive(den, "h_x", "density");
  cfg.density.h_y = get_positive(den, "h_y", "density");
  cfg.density.grid_size = static_cast<std::size_t>(get_integer(den, "grid_size", "density", 256, 8, 4096));
  cfg.density.neighbors = get_string(den, "neighbors", "density", "contiguity");
  if (cfg.density.neighbors != "contiguity" && cfg.density.neighbors != "knn") {
    throw ConfigError("must be \"contiguity\" or \"knn\"", "density.neighbors");
  }
  cfg.density.knn_k = static_cast<std::size_t>(get_integer(den, "k", "density", 4, 1, 1000));
  if (cfg.density.neighbors == "contiguity" && !cfg.paths.adjacency) {
    const bool spatial = std::any_of(cfg.density.modes.begin(), cfg.density.modes.end(),
                                     [](PairMode m) { return m != PairMode::Unconditional; });
    if (spatial) throw ConfigError("contiguity neighbours need an adjacency file", "paths.adjacency");
  }
  {
    json modes = json::array();
    for (auto m : cfg.density.modes) modes.push_back(to_string(m));
    canon["density"] = {{"modes", modes},
                        {"delta", cfg.density.delta},
                        {"h_x", cfg.density.h_x ? json(*cfg.density.h_x) : json(nullptr)},
                        {"h_y", cfg.density.h_y ? json(*cfg.density.h_y) : json(nullptr)},
                        {"grid_size", cfg.density.grid_size},
                        {"neighbors", cfg.density.neighbors},
                        {"k", cfg.density.neighbors == "knn" ? json(cfg.density.knn_k) : json(nullptr)}};
  }

  const auto& det = section(doc, "detector");
  reject_unknown(det, "detector", {"years", "factors", "methods", "L_range", "permutations", "seed"});
  cfg.detector.years = get_years(det, "years", "detector");
  cfg.detector.factors = get_strings(det, "factors", "detector");
  if (det.contains("methods")) {
    cfg.detector.methods.clear();
    for (const auto& m : get_strings(det, "methods", "detector")) {
      cfg.detector.methods.push_back(parse_discretization_method(m));
    }
    if (cfg.detector.methods.empty()) throw ConfigError("needs at least one method", "detector.methods");
  }
  if (det.contains("L_range")) {
    const auto& r = det["L_range"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
      throw ConfigError("must be [min, max]", "detector.L_range");
    }
    const auto lo = r[0].get<long long>();
    const auto hi = r[1].get<long long>();
    if (lo < 2 || hi < lo || hi > 64) throw ConfigError("needs 2 <= min <= max <= 64", "detector.L_range");
    cfg.detector.min_classes = static_cast<std::size_t>(lo);
    cfg.detector.max_classes = static_cast<std::size_t>(hi);
  }
  cfg.detector.permutations = static_cast<std::size_t>(get_integer(det, "permutations", "detector", 999, 0, 10'000'000));
  if (cfg.detector.permutations != 0 && cfg.detector.permutations < 99) {
    throw ConfigError("must be 0 (no test) or at least 99", "detector.permutations");
  }
  if (det.contains("seed") && !det["seed"].is_null()) {
    if (!det["seed"].is_number_unsigned() && !(det["seed"].is_number_integer() && det["seed"].get<long long>() >= 0)) {
      throw ConfigError("must be a non-negative integer", "detector.seed");
    }
    cfg.detector.seed = det["seed"].get<std::uint64_t>();
  }
  if (cfg.detector.permutations > 0 && !cfg.detector.seed) {
    throw ConfigError("a seed is required when permutations are requested", "detector.seed");
  }
  {
    json methods = json::array();
    for (auto m : cfg.detector.methods) methods.push_back(to_string(m));
    canon["detector"] = {{"years", cfg.detector.years},
                         {"factors", cfg.detector.factors},
                         {"methods", methods},
                         {"L_range", {cfg.detector.min_classes, cfg.detector.max_classes}},
                         {"permutations", cfg.detector.permutations},
                         {"seed", cfg.detector.seed ? json(*cfg.detector.seed) : json(nullptr)}};
  }

  cfg.canonical = std::move(canon);
  return cfg;
}

PipelineConfig load_config(const fs::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string(), "config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what(), "config");
  }
  const fs::path base = fs::absolute(path).parent_path();
  return parse_config(std::move(doc), base, overrides);
}

std::string config_hash(const PipelineConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.canonical.dump())));
  return buf;
}

RunManifest run(Stage stage, const PipelineConfig& cfg) {
  RunManifest manifest;
  manifest.config_hash = config_hash(cfg);
  manifest.subcommand = to_string(stage);

  std::vector<Stage> stages;
  if (stage == Stage::All) {
    stages = {Stage::Validate, Stage::Index, Stage::Classify, Stage::Ellipse, Stage::Density};
    if (cfg.paths.drivers) stages.push_back(Stage::Detect);
  } else {
    stages = {stage};
  }

  std::error_code ec;
  fs::create_directories(cfg.paths.output_dir, ec);
  if (ec) throw DataError("cannot create output directory " + cfg.paths.output_dir.string(), "paths.output_dir");
  fs::remove(cfg.paths.output_dir / "error.json", ec);

  Runner runner(cfg);
  for (Stage s : stages) manifest.stages.push_back(runner.run(s));

  ojson doc;
  doc["tool"] = "restool";
  doc["version"] = manifest.version;
  doc["config_hash"] = manifest.config_hash;
  doc["subcommand"] = manifest.subcommand;
  ojson st = ojson::array();
  for (const auto& r : manifest.stages) {
    st.push_back({{"stage", r.stage}, {"outputs", r.outputs}, {"wall_ms", r.wall_ms}});
  }
  doc["stages"] = st;
  write_json(doc, cfg.paths.output_dir / "manifest.json");
  return manifest;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Data: return 3;
    case ErrorKind::Numeric: return 4;
  }
  return 1;
}

nlohmann::json error_report(const Error& e, const std::string& stage) {
  return {{"error", to_string(e.kind())},
          {"exit_code", exit_code(e.kind())},
          {"field", e.field()},
          {"message", e.what()},
          {"stage", stage}};
}

} // namespace restool::pipeline
