#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "rappca/io.hpp"
#include "rappca/tuning.hpp"

using namespace rappca;
using namespace rappca::oracles;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("rappca_io_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double x : {0.0, 1.0, -1.5, 0.1, 1.0 / 3.0, 1e-300, 6.02e23, -0.0001234567890123456}) {
    const std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("csv ingestion with roles") {
  const fs::path dir = temp_dir("ingest");
  const fs::path file = dir / "mini.csv";
  atomic_write(file.string(),
               "id,s1,s2,y1,y2\n"
               "a,0.1,0.2,1.5,2.5\n"
               "b,0.3,0.4,1.25,2.25\n"
               "c,0.5,0.1,0.75,1.75\n"
               "d,0.7,0.9,0.5,1.5\n");
  CsvSchema schema;
  schema.id_col = "id";
  schema.coord_cols = {"s1", "s2"};
  schema.outcome_cols = {"y1", "y2"};
  const Dataset data = ingest_csv(file.string(), schema);
  CHECK(data.n() == 4);
  CHECK(data.d() == 0);
  CHECK(data.p() == 2);
  CHECK(data.ids[1] == "b");
  CHECK(data.Y(2, 1) == 1.75);
}

TEST_CASE("non-numeric cells name the row and column") {
  const fs::path dir = temp_dir("na");
  const fs::path file = dir / "bad.csv";
  atomic_write(file.string(),
               "id,s1,s2,y1\n"
               "a,0.1,0.2,1.0\n"
               "b,0.3,NA,2.0\n"
               "c,0.5,0.6,3.0\n"
               "d,0.6,0.7,4.0\n");
  CsvSchema schema;
  schema.id_col = "id";
  schema.coord_cols = {"s1", "s2"};
  schema.outcome_cols = {"y1"};
  try {
    ingest_csv(file.string(), schema);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("s2") != std::string::npos);
  }
}

TEST_CASE("missing columns and duplicate ids are rejected") {
  const fs::path dir = temp_dir("dup");
  const fs::path file = dir / "dup.csv";
  atomic_write(file.string(),
               "id,s1,s2,y1\n"
               "a,0.1,0.2,1.0\n"
               "a,0.3,0.4,2.0\n"
               "c,0.5,0.6,3.0\n"
               "d,0.6,0.7,4.0\n");
  CsvSchema schema;
  schema.id_col = "id";
  schema.coord_cols = {"s1", "s2"};
  schema.outcome_cols = {"y1"};
  CHECK_THROWS_AS(ingest_csv(file.string(), schema), DataError);

  schema.outcome_cols = {"nope"};
  CHECK_THROWS_AS(ingest_csv(file.string(), schema), DataError);
}

TEST_CASE("dataset write / ingest round-trip preserves full precision") {
  Dataset data;
  data.coords = random_coords(12, 1);
  data.X = random_gaussian(12, 3, 2) * 1e-7;
  data.Y = random_gaussian(12, 4, 3) * 1e5;
  for (Index i = 0; i < 12; ++i) data.ids.push_back("site" + std::to_string(i));
  data.x_names = {"x1", "x2", "x3"};
  data.y_names = {"y1", "y2", "y3", "y4"};

  const fs::path dir = temp_dir("roundtrip");
  const fs::path file = dir / "data.csv";
  write_dataset_csv(file.string(), data);
  CsvSchema schema;
  schema.id_col = "id";
  schema.coord_cols = {"s1", "s2"};
  schema.covariate_cols = data.x_names;
  schema.outcome_cols = data.y_names;
  const Dataset back = ingest_csv(file.string(), schema);
  CHECK((back.coords - data.coords).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.X - data.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.Y - data.Y).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.ids == data.ids);
}

TEST_CASE("config parsing") {
  const Config cfg = parse_config_text(
      "# comment\n"
      "[data]\n"
      "csv = path/to/file.csv\n"
      "outcome_cols = y1, y2 , y3\n"
      "\n"
      "[method]\n"
      "gamma = 0.5,1,2\n"
      "r = 3\n"
      "standardize = true\n");
  CHECK(cfg.get("data", "csv") == "path/to/file.csv");
  CHECK(cfg.get_int("method", "r", 0) == 3);
  CHECK(cfg.get_bool("method", "standardize", false));
  CHECK(cfg.get_list("method", "gamma") == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(cfg.get_or("method", "absent", "dflt") == "dflt");
  CHECK_THROWS_AS(cfg.get("method", "absent"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("key_without_value\n"), ConfigError);
  CHECK_THROWS_AS(cfg.get_int("data", "csv", 0), ConfigError);
}

TEST_CASE("config hash is canonical") {
  const Config a = parse_config_text("[m]\na = 1\nb = 2\n");
  const Config b = parse_config_text("[m]\nb = 2\na = 1\n");
  const Config c = parse_config_text("[m]\na = 1\nb = 3\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("model bundle round-trip") {
  Dataset data;
  data.coords = random_coords(20, 4);
  data.X = random_matrix(20, 2, 5);
  data.Y = random_gaussian(20, 5, 6);
  for (Index i = 0; i < 20; ++i) data.ids.push_back(std::to_string(i + 1));
  data.x_names = {"x1", "x2"};
  data.y_names = {"y1", "y2", "y3", "y4", "y5"};

  MethodConfig mc;
  mc.method = Method::rappca;
  mc.r = 2;
  mc.kernel = {KernelFamily::polynomial, 2.0};
  Hyperparams hp;
  hp.gamma = 1.0;
  hp.lambda1 = 0.5;
  hp.lambda2 = 0.25;
  mc.hyper = {hp};
  const PCModel model = fit_method(data, mc);

  const fs::path dir = temp_dir("bundle");
  save_model(dir.string(), model, data, 12345, "deadbeef");
  const LoadedModel loaded = load_model(dir.string());

  CHECK(loaded.model.method == Method::rappca);
  CHECK(loaded.seed == 12345);
  CHECK((loaded.model.V - model.V).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.model.U_train - model.U_train).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.coords - data.coords).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.X - data.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.model.y_stats.mean - model.y_stats.mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.model.y_stats.sd - model.y_stats.sd).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loaded.model.kernel->family == KernelFamily::polynomial);
  CHECK(loaded.model.components[0].hyper.gamma == 1.0);
  CHECK(loaded.model.components[0].hyper.lambda2 == 0.25);
  CHECK(slurp(dir / "manifest.txt").find("deadbeef") != std::string::npos);
}

TEST_CASE("atomic_write leaves no temp files and replaces content") {
  const fs::path dir = temp_dir("atomic");
  const fs::path file = dir / "x.txt";
  atomic_write(file.string(), "one");
  atomic_write(file.string(), "two");
  CHECK(slurp(file) == "two");
  int count = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) ++count;
  CHECK(count == 1);
}
