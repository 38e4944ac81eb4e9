#include "rappca/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace rappca {

std::string format_double(double x) {
  // Try increasing precision until the text round-trips exactly.
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out.good()) throw DataError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  const char* start = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(start, &end);
  if (end == start || *end != '\0')
    throw DataError("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                    ", column '" + col + "'");
  return v;
}

}  // namespace

Index CsvTable::find_column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return static_cast<Index>(j);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "': empty file");
  table.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != table.header.size())
      throw DataError("'" + path + "': row " + std::to_string(table.rows.size() + 1) +
                      " has " + std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

Dataset ingest_csv(const std::string& path, const CsvSchema& schema) {
  if (schema.coord_cols.size() != 2)
    throw ConfigError("schema: exactly two coordinate columns required");
  if (schema.outcome_cols.empty())
    throw ConfigError("schema: at least one outcome column required");

  const CsvTable table = read_csv(path);
  auto column_index = [&](const std::string& name) {
    const Index j = table.find_column(name);
    if (j < 0) throw DataError("'" + path + "': missing column '" + name + "'");
    return j;
  };

  const Index n = static_cast<Index>(table.rows.size());
  if (n < 1) throw DataError("'" + path + "': no data rows");

  Dataset data;
  data.coords.resize(n, 2);
  data.X.resize(n, static_cast<Index>(schema.covariate_cols.size()));
  data.Y.resize(n, static_cast<Index>(schema.outcome_cols.size()));
  data.x_names = schema.covariate_cols;
  data.y_names = schema.outcome_cols;

  std::vector<Index> coord_idx, x_idx, y_idx;
  for (const auto& c : schema.coord_cols) coord_idx.push_back(column_index(c));
  for (const auto& c : schema.covariate_cols) x_idx.push_back(column_index(c));
  for (const auto& c : schema.outcome_cols) y_idx.push_back(column_index(c));
  const Index id_idx = schema.id_col.empty() ? -1 : column_index(schema.id_col);

  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const std::size_t row_no = static_cast<std::size_t>(i) + 1;
    data.ids.push_back(id_idx >= 0 ? row[static_cast<std::size_t>(id_idx)]
                                   : std::to_string(i + 1));
    for (int c = 0; c < 2; ++c)
      data.coords(i, c) = parse_cell(row[static_cast<std::size_t>(coord_idx[c])], row_no,
                                     schema.coord_cols[c]);
    for (std::size_t c = 0; c < x_idx.size(); ++c)
      data.X(i, static_cast<Index>(c)) =
          parse_cell(row[static_cast<std::size_t>(x_idx[c])], row_no, schema.covariate_cols[c]);
    for (std::size_t c = 0; c < y_idx.size(); ++c)
      data.Y(i, static_cast<Index>(c)) =
          parse_cell(row[static_cast<std::size_t>(y_idx[c])], row_no, schema.outcome_cols[c]);
  }

  // Duplicate id detection.
  {
    std::vector<std::string> sorted = data.ids;
    std::sort(sorted.begin(), sorted.end());
    const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) throw DataError("'" + path + "': duplicate id '" + *dup + "'");
  }

  data.validate();
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::string out = "id,s1,s2";
  for (const auto& name : data.x_names) out += "," + name;
  for (const auto& name : data.y_names) out += "," + name;
  out += "\n";
  for (Index i = 0; i < data.n(); ++i) {
    out += data.ids[static_cast<std::size_t>(i)];
    out += "," + format_double(data.coords(i, 0)) + "," + format_double(data.coords(i, 1));
    for (Index j = 0; j < data.d(); ++j) out += "," + format_double(data.X(i, j));
    for (Index j = 0; j < data.p(); ++j) out += "," + format_double(data.Y(i, j));
    out += "\n";
  }
  atomic_write(path, out);
}

void write_matrix_csv(const std::string& path, const Matrix& A,
                      const std::vector<std::string>& col_names,
                      const std::vector<std::string>& row_ids, const std::string& id_header) {
  if (static_cast<Index>(col_names.size()) != A.cols())
    throw DataError("write_matrix_csv: column name count mismatch");
  const bool with_ids = !row_ids.empty();
  if (with_ids && static_cast<Index>(row_ids.size()) != A.rows())
    throw DataError("write_matrix_csv: row id count mismatch");
  std::string out;
  if (with_ids) out += id_header;
  for (std::size_t j = 0; j < col_names.size(); ++j) {
    if (with_ids || j > 0) out += ",";
    out += col_names[j];
  }
  out += "\n";
  for (Index i = 0; i < A.rows(); ++i) {
    if (with_ids) out += row_ids[static_cast<std::size_t>(i)];
    for (Index j = 0; j < A.cols(); ++j) {
      if (with_ids || j > 0) out += ",";
      out += format_double(A(i, j));
    }
    out += "\n";
  }
  atomic_write(path, out);
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = sections.find(section);
  return s != sections.end() && s->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
  if (!has(section, key))
    throw ConfigError("config: missing [" + section + "] " + key);
  return sections.at(section).at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return has(section, key) ? sections.at(section).at(key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: [" + section + "] " + key + " = '" + v + "' is not a number");
  return x;
}

long Config::get_int(const std::string& section, const std::string& key, long fallback) const {
  const double x = get_double(section, key, static_cast<double>(fallback));
  const long i = static_cast<long>(x);
  if (static_cast<double>(i) != x)
    throw ConfigError("config: [" + section + "] " + key + " must be an integer");
  return i;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: [" + section + "] " + key + " must be a boolean");
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  if (!has(section, key)) return out;
  std::stringstream ss(get(section, key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    char* end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0')
      throw ConfigError("config: [" + section + "] " + key + " has non-numeric entry '" +
                        item + "'");
    out.push_back(x);
  }
  return out;
}

Config parse_config_text(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  std::string section = "global";
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    cfg.sections[section][key] = value;
  }
  return cfg;
}

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_hash(const Config& config) {
  // Canonical form: sections and keys in sorted (map) order.
  std::string canon;
  for (const auto& [section, kv] : config.sections) {
    canon += "[" + section + "]\n";
    for (const auto& [key, value] : kv) canon += key + "=" + value + "\n";
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : canon) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const std::string& dir, const std::string& cfg_hash, std::uint64_t seed,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  std::string out;
  out += "tool_version = " + std::string(kToolVersion) + "\n";
  out += "config_hash = " + cfg_hash + "\n";
  out += "seed = " + std::to_string(seed) + "\n";
  for (const auto& [k, v] : extra) out += k + " = " + v + "\n";
  atomic_write((fs::path(dir) / "manifest.txt").string(), out);
}

namespace {

std::string join_doubles(const Vector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

Vector parse_double_list(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    vals.push_back(std::strtod(item.c_str(), nullptr));
  }
  Vector v(static_cast<Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Index>(i)] = vals[i];
  return v;
}

std::vector<std::string> pc_names(Index r) {
  std::vector<std::string> names;
  for (Index l = 0; l < r; ++l) names.push_back("pc" + std::to_string(l + 1));
  return names;
}

}  // namespace

void save_model(const std::string& dir, const PCModel& model, const Dataset& train,
                std::uint64_t seed, const std::string& cfg_hash) {
  fs::create_directories(dir);
  const fs::path base(dir);
  const Index r = model.r();

  write_matrix_csv((base / "loadings.csv").string(), model.V, pc_names(r), train.y_names,
                   "outcome");
  write_matrix_csv((base / "scores.csv").string(), model.U_train, pc_names(r), train.ids);

  Matrix features(train.n(), 2 + train.d());
  features.leftCols(2) = train.coords;
  if (train.d() > 0) features.rightCols(train.d()) = train.X;
  std::vector<std::string> feat_names = {"s1", "s2"};
  feat_names.insert(feat_names.end(), train.x_names.begin(), train.x_names.end());
  write_matrix_csv((base / "features.csv").string(), features, feat_names, train.ids);

  if (model.method == Method::rappca && r > 0) {
    Matrix alpha(model.components[0].alpha.size(), r);
    Matrix beta(model.components[0].beta.size(), r);
    for (Index l = 0; l < r; ++l) {
      alpha.col(l) = model.components[static_cast<std::size_t>(l)].alpha;
      beta.col(l) = model.components[static_cast<std::size_t>(l)].beta;
    }
    write_matrix_csv((base / "alpha.csv").string(), alpha, pc_names(r));
    write_matrix_csv((base / "beta.csv").string(), beta, pc_names(r));
  }

  std::string meta;
  meta += "method = " + to_string(model.method) + "\n";
  meta += "r = " + std::to_string(r) + "\n";
  meta += "n = " + std::to_string(train.n()) + "\n";
  meta += "p = " + std::to_string(train.p()) + "\n";
  meta += "d = " + std::to_string(train.d()) + "\n";
  meta += "seed = " + std::to_string(seed) + "\n";
  if (model.kernel) {
    meta += "kernel_family = " + to_string(model.kernel->family) + "\n";
    meta += "kernel_h = " + format_double(model.kernel->h) + "\n";
  }
  if (model.basis) meta += "spline_m = " + std::to_string(model.basis->m) + "\n";
  meta += "y_mean = " + join_doubles(model.y_stats.mean) + "\n";
  meta += "y_sd = " + join_doubles(model.y_stats.sd) + "\n";
  meta += "x_mean = " + join_doubles(model.x_stats.mean) + "\n";
  meta += "x_sd = " + join_doubles(model.x_stats.sd) + "\n";
  for (Index l = 0; l < r; ++l) {
    const auto& comp = model.components[static_cast<std::size_t>(l)];
    const std::string tag = "component" + std::to_string(l + 1);
    meta += tag + "_gamma = " + format_double(comp.hyper.gamma) + "\n";
    meta += tag + "_lambda1 = " + format_double(comp.hyper.lambda1) + "\n";
    meta += tag + "_lambda2 = " + format_double(comp.hyper.lambda2) + "\n";
    meta += tag + "_delta = " + format_double(comp.hyper.delta) + "\n";
    meta += tag + "_kernel_h = " + format_double(comp.kernel_h) + "\n";
    meta += tag + "_objective = " + format_double(comp.objective) + "\n";
  }
  atomic_write((base / "metadata.txt").string(), meta);
  write_manifest(dir, cfg_hash, seed);
}

LoadedModel load_model(const std::string& dir) {
  const fs::path base(dir);
  Config meta = parse_config_file((base / "metadata.txt").string());

  LoadedModel loaded;
  PCModel& model = loaded.model;
  model.method = parse_method(meta.get("global", "method"));
  const long r = meta.get_int("global", "r", 0);
  loaded.seed = static_cast<std::uint64_t>(meta.get_int("global", "seed", 0));

  const CsvTable loadings = read_csv((base / "loadings.csv").string());
  const Index p = static_cast<Index>(loadings.rows.size());
  model.V.resize(p, r);
  for (Index i = 0; i < p; ++i)
    for (Index l = 0; l < r; ++l)
      model.V(i, l) = std::strtod(
          loadings.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(l + 1)].c_str(),
          nullptr);

  const CsvTable scores = read_csv((base / "scores.csv").string());
  const Index n = static_cast<Index>(scores.rows.size());
  model.U_train.resize(n, r);
  for (Index i = 0; i < n; ++i)
    for (Index l = 0; l < r; ++l)
      model.U_train(i, l) = std::strtod(
          scores.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(l + 1)].c_str(),
          nullptr);

  const CsvTable features = read_csv((base / "features.csv").string());
  if (static_cast<Index>(features.rows.size()) != n)
    throw DataError("model bundle: features.csv row count mismatch");
  const Index d = static_cast<Index>(features.header.size()) - 3;  // id, s1, s2
  loaded.coords.resize(n, 2);
  loaded.X.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& row = features.rows[static_cast<std::size_t>(i)];
    loaded.coords(i, 0) = std::strtod(row[1].c_str(), nullptr);
    loaded.coords(i, 1) = std::strtod(row[2].c_str(), nullptr);
    for (Index j = 0; j < d; ++j)
      loaded.X(i, j) = std::strtod(row[static_cast<std::size_t>(j + 3)].c_str(), nullptr);
  }

  model.y_stats.mean = parse_double_list(meta.get("global", "y_mean"));
  model.y_stats.sd = parse_double_list(meta.get("global", "y_sd"));
  model.x_stats.mean = parse_double_list(meta.get_or("global", "x_mean", ""));
  model.x_stats.sd = parse_double_list(meta.get_or("global", "x_sd", ""));
  if (meta.has("global", "kernel_family")) {
    KernelSpec spec;
    spec.family = parse_kernel_family(meta.get("global", "kernel_family"));
    spec.h = meta.get_double("global", "kernel_h", 1.0);
    model.kernel = spec;
  }

  for (Index l = 0; l < r; ++l) {
    PCComponent comp;
    comp.v = model.V.col(l);
    comp.u = model.U_train.col(l);
    const std::string tag = "component" + std::to_string(l + 1);
    comp.hyper.gamma = meta.get_double("global", tag + "_gamma", 0.0);
    comp.hyper.lambda1 = meta.get_double("global", tag + "_lambda1", 0.0);
    comp.hyper.lambda2 = meta.get_double("global", tag + "_lambda2", 0.0);
    comp.hyper.delta = meta.get_double("global", tag + "_delta", 0.05);
    comp.kernel_h = meta.get_double("global", tag + "_kernel_h", 1.0);
    comp.objective = meta.get_double("global", tag + "_objective", 0.0);
    model.components.push_back(std::move(comp));
  }
  return loaded;
}

}  // namespace rappca
