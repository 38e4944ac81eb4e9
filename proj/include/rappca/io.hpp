#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rappca/data.hpp"
#include "rappca/engines.hpp"

namespace rappca {

/// Shortest text form of x that round-trips to the exact double.
std::string format_double(double x);

/// Writes content to path atomically (temp file + rename).
void atomic_write(const std::string& path, const std::string& content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Index find_column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path);

/// Column roles for dataset ingestion. Empty id_col means synthesize ids from
/// the row number.
struct CsvSchema {
  std::string id_col;
  std::vector<std::string> coord_cols;      // exactly 2
  std::vector<std::string> covariate_cols;  // may be empty
  std::vector<std::string> outcome_cols;    // at least 1
};

/// Parses and validates a CSV file into a Dataset. Non-numeric cells and
/// missing columns are DataErrors naming the offending row/column.
Dataset ingest_csv(const std::string& path, const CsvSchema& schema);

void write_dataset_csv(const std::string& path, const Dataset& data);

void write_matrix_csv(const std::string& path, const Matrix& A,
                      const std::vector<std::string>& col_names,
                      const std::vector<std::string>& row_ids = {},
                      const std::string& id_header = "id");

/// Flat key-value file with [section] headers and '#' comments.
struct Config {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;  // ConfigError if absent
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long get_int(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key) const;
};

Config parse_config_file(const std::string& path);
Config parse_config_text(const std::string& text);

/// FNV-1a hash of the canonicalized (sorted) config content, recorded in every
/// artifact manifest.
std::string config_hash(const Config& config);

inline constexpr const char* kToolVersion = "rappca 0.1.0";

/// Writes manifest.txt into dir: tool version, config hash, seed, plus any
/// extra key-value pairs. No timestamps, so re-runs are byte-identical.
void write_manifest(const std::string& dir, const std::string& cfg_hash, std::uint64_t seed,
                    const std::vector<std::pair<std::string, std::string>>& extra = {});

/// Model bundle: loadings.csv, scores.csv, per-component coefficient files,
/// features.csv (training coords + covariates), and metadata.txt carrying
/// hyperparameters and standardization statistics.
void save_model(const std::string& dir, const PCModel& model, const Dataset& train,
                std::uint64_t seed, const std::string& cfg_hash);

struct LoadedModel {
  PCModel model;
  Matrix coords;  // training locations
  Matrix X;       // training covariates (may have 0 columns)
  std::uint64_t seed = 0;
};

LoadedModel load_model(const std::string& dir);

}  // namespace rappca
