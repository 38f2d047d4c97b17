#pragma once

#include "restool/density.hpp"
#include "restool/detector.hpp"
#include "restool/error.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace restool::pipeline {

inline constexpr const char* kVersion = "1.0.0";

enum class Stage { Validate, Index, Classify, Ellipse, Density, Detect, All };

std::string to_string(Stage s);
Stage parse_stage(const std::string& s);

struct PipelineConfig {
  struct Paths {
    std::filesystem::path values;
    std::filesystem::path spec;
    std::filesystem::path centroids;
    std::optional<std::filesystem::path> adjacency;
    std::optional<std::filesystem::path> drivers;
    std::optional<std::filesystem::path> weights;
    std::filesystem::path output_dir;
  } paths;

  struct Normalization {
    std::string mode = "fixed_base"; // fixed_base | minmax
    std::optional<int> base_year;
    std::string scope = "per_year"; // per_year | pooled (minmax only)
  } normalization;

  struct Weights {
    std::string source = "file"; // file | entropy
  } weights;

  struct Classification {
    std::size_t k = 5;
  } classification;

  struct Ellipse {
    std::vector<int> years; // empty: every year
  } ellipse;

  struct Density {
    std::vector<PairMode> modes{PairMode::Unconditional, PairMode::SpatialStatic, PairMode::SpatialDynamic};
    int delta = 3;
    std::optional<double> h_x;
    std::optional<double> h_y;
    std::size_t grid_size = 256;
    std::string neighbors = "contiguity"; // contiguity | knn
    std::size_t knn_k = 4;
  } density;

  struct Detector {
    std::vector<int> years; // empty: last year
    std::vector<std::string> factors; // empty: every factor in the drivers file
    std::vector<DiscretizationMethod> methods{DiscretizationMethod::EqualInterval, DiscretizationMethod::Quantile,
                                              DiscretizationMethod::NaturalBreaks, DiscretizationMethod::Geometric,
                                              DiscretizationMethod::StdDev};
    std::size_t min_classes = 3;
    std::size_t max_classes = 6;
    std::size_t permutations = 999;
    std::optional<std::uint64_t> seed;
  } detector;

  /// Normalized document: defaults filled in, paths as written (relative to
  /// the config file). Basis of the config hash.
  nlohmann::json canonical;
};

/// Command-line overrides, applied to the config document before validation.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> base_year;
  std::optional<std::size_t> permutations;
  std::optional<int> delta;
  std::optional<std::size_t> grid_size;
};

/// Parses and validates a config document. Relative paths resolve against
/// `base_dir`. Schema violations throw ConfigError naming the field.
PipelineConfig parse_config(nlohmann::json doc, const std::filesystem::path& base_dir,
                            const Overrides& overrides = {});
PipelineConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// FNV-1a 64 of the canonical document, excluding the output directory.
std::string config_hash(const PipelineConfig& cfg);

struct StageRecord {
  std::string stage;
  std::vector<std::string> outputs; // relative to the output directory
  double wall_ms = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::string version = kVersion;
  std::string subcommand;
  std::vector<StageRecord> stages;
};

/// Runs one stage (or all of them in order) and writes the manifest.
/// Errors propagate as restool::Error subclasses.
RunManifest run(Stage stage, const PipelineConfig& cfg);

/// CLI exit status for an error kind: config 2, data 3, numeric 4.
int exit_code(ErrorKind kind);

/// Machine-readable error document.
nlohmann::json error_report(const Error& e, const std::string& stage);

} // namespace restool::pipeline
