#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oss/dataio.hpp"
#include "testutil.hpp"

using testutil::TempDir;
using testutil::write_file;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CommandResult run_cli(const TempDir& tmp, const std::string& args) {
  const auto out_path = tmp.path("stdout.txt");
  const auto err_path = tmp.path("stderr.txt");
  const std::string cmd = std::string(OSS_CLI_PATH) + " " + args + " > " + out_path.string() +
                          " 2> " + err_path.string();
  const int raw = std::system(cmd.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

std::size_t count_lines(const std::string& text) {
  std::size_t lines = 0;
  for (const char c : text) lines += c == '\n';
  return lines;
}

// Shared fixture: a deterministic synthetic dataset written once per test.
std::string make_dataset(const TempDir& tmp, oss::Index n, oss::Index p) {
  const auto spec_path = tmp.path("data.spec");
  write_file(spec_path, "case=uniform\nn=" + std::to_string(n) + "\np=" + std::to_string(p) +
                            "\nseed=11\nbeta0=1\nsigma2=9\nslopes=1\n");
  const auto csv_path = tmp.path("data.csv");
  const auto result =
      run_cli(tmp, "gen --spec " + spec_path.string() + " --output " + csv_path.string());
  REQUIRE(result.exit_code == 0);
  return csv_path.string();
}

std::string mask_timing_columns(const std::string& table_csv) {
  std::stringstream in(table_csv);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto last_comma = line.rfind(',');
    out += line.substr(0, last_comma);
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("gen writes the requested synthetic dataset") {
  TempDir tmp("cli_gen");
  const std::string data = make_dataset(tmp, 200, 3);
  const std::string content = slurp(data);
  CHECK(count_lines(content) == 201);  // header + n rows
  CHECK(content.rfind("x1,x2,x3,y\n", 0) == 0);
}

TEST_CASE("sample writes indices plus a sidecar with the discrepancy") {
  TempDir tmp("cli_sample");
  const std::string data = make_dataset(tmp, 1000, 2);
  const auto idx = tmp.path("idx.csv");
  const auto result = run_cli(tmp, "sample --input " + data +
                                       " --header --response-col y --method oss --k 20"
                                       " --output " + idx.string());
  REQUIRE(result.exit_code == 0);
  CHECK(count_lines(slurp(idx)) == 20);

  const auto sidecar = nlohmann::json::parse(slurp(idx.string() + ".json"));
  CHECK(sidecar["method"] == "oss");
  CHECK(sidecar["k"] == 20);
  CHECK(sidecar["g"] == 1);
  CHECK(sidecar["discrepancy"].is_number());
  CHECK(sidecar["wall_time_ms"].is_number());
}

TEST_CASE("batched sampling reports the disjoint group sizes") {
  TempDir tmp("cli_batch");
  const std::string data = make_dataset(tmp, 1000, 2);
  const auto idx = tmp.path("idx.csv");
  const auto result = run_cli(tmp, "sample --input " + data +
                                       " --header --response-col y --method oss --k 20 --g 4"
                                       " --seed 5 --output " + idx.string());
  REQUIRE(result.exit_code == 0);
  const auto sidecar = nlohmann::json::parse(slurp(idx.string() + ".json"));
  CHECK(sidecar["g"] == 4);
  CHECK(sidecar["batch_sizes"] == nlohmann::json::array({5, 5, 5, 5}));

  // The index file feeds fit without transformation and stays distinct.
  std::set<std::string> unique;
  std::stringstream lines(slurp(idx));
  std::string line;
  while (std::getline(lines, line)) unique.insert(line);
  CHECK(unique.size() == 20);
}

TEST_CASE("sample validates k against the data") {
  TempDir tmp("cli_kn");
  const std::string data = make_dataset(tmp, 50, 2);
  const auto result = run_cli(tmp, "sample --input " + data +
                                       " --header --response-col y --method oss --k 100"
                                       " --output " + tmp.path("idx.csv").string());
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("k exceeds n") != std::string::npos);
}

TEST_CASE("sample maps a missing input to the I/O exit code") {
  TempDir tmp("cli_io");
  const auto result = run_cli(tmp, "sample --input " + tmp.path("absent.csv").string() +
                                       " --method uni --k 5 --output " +
                                       tmp.path("idx.csv").string());
  CHECK(result.exit_code == 1);
}

TEST_CASE("fit recovers exact coefficients on a noiseless dataset") {
  TempDir tmp("cli_fit");
  const auto spec_path = tmp.path("noiseless.spec");
  write_file(spec_path, "case=uniform\nn=50\np=2\nseed=3\nbeta0=1\nsigma2=0\nslopes=1\n");
  const auto csv_path = tmp.path("noiseless.csv");
  REQUIRE(run_cli(tmp, "gen --spec " + spec_path.string() + " --output " + csv_path.string())
              .exit_code == 0);
  const auto idx = tmp.path("idx.csv");
  std::string idx_content;
  for (int i = 0; i < 25; ++i) idx_content += std::to_string(i) + "\n";
  write_file(idx, idx_content);

  const auto coef = tmp.path("coef.csv");
  const auto result = run_cli(tmp, "fit --input " + csv_path.string() +
                                       " --header --response-col y --indices " + idx.string() +
                                       " --output " + coef.string());
  REQUIRE(result.exit_code == 0);
  const std::string table = slurp(coef);
  CHECK(table.rfind("term,estimate\n", 0) == 0);
  std::stringstream rows(table);
  std::string line;
  std::getline(rows, line);  // header
  for (const std::string term : {"intercept", "x1", "x2"}) {
    REQUIRE(std::getline(rows, line));
    REQUIRE(line.rfind(term + ",", 0) == 0);
    const double value = std::stod(line.substr(term.size() + 1));
    CHECK(value == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("fit with interactions emits one row per design term") {
  TempDir tmp("cli_fit_inter");
  const std::string data = make_dataset(tmp, 300, 10);
  const auto idx = tmp.path("idx.csv");
  REQUIRE(run_cli(tmp, "sample --input " + data +
                           " --header --response-col y --method oss --k 150 --output " +
                           idx.string())
              .exit_code == 0);
  const auto coef = tmp.path("coef.csv");
  const auto result = run_cli(tmp, "fit --input " + data +
                                       " --header --response-col y --indices " + idx.string() +
                                       " --interactions --output " + coef.string());
  REQUIRE(result.exit_code == 0);
  // Header + intercept + 10 main effects + 45 products.
  CHECK(count_lines(slurp(coef)) == 57);
  CHECK(slurp(coef).find("x9:x10,") != std::string::npos);
}

TEST_CASE("fit propagates a missing index file as an I/O failure") {
  TempDir tmp("cli_fit_io");
  const std::string data = make_dataset(tmp, 50, 2);
  const auto result = run_cli(tmp, "fit --input " + data +
                                       " --header --response-col y --indices " +
                                       tmp.path("absent.csv").string() + " --output " +
                                       tmp.path("coef.csv").string());
  CHECK(result.exit_code == 1);
}

TEST_CASE("scale writes a unit-range copy and the transform sidecar") {
  TempDir tmp("cli_scale");
  const std::string data = make_dataset(tmp, 100, 3);
  const auto scaled_path = tmp.path("scaled.csv");
  const auto transform_path = tmp.path("transform.json");
  const auto result = run_cli(tmp, "scale --input " + data +
                                       " --header --response-col y --output " +
                                       scaled_path.string() + " --transform " +
                                       transform_path.string());
  REQUIRE(result.exit_code == 0);
  const oss::DataMatrix scaled = oss::load_csv(scaled_path, true, std::string("y"));
  for (oss::Index j = 0; j < scaled.p(); ++j) {
    CHECK(scaled.values.col(j).minCoeff() == -1.0);
    CHECK(scaled.values.col(j).maxCoeff() == 1.0);
  }
  const auto doc = nlohmann::json::parse(slurp(transform_path));
  CHECK(doc["col_min"].size() == 3);
  CHECK(doc["col_max"].size() == 3);
}

TEST_CASE("evaluate reports the efficiency of a selected subsample") {
  TempDir tmp("cli_eval");
  const std::string data = make_dataset(tmp, 500, 2);
  const auto idx = tmp.path("idx.csv");
  REQUIRE(run_cli(tmp, "sample --input " + data +
                           " --header --response-col y --method oss --k 24 --no-elimination"
                           " --output " + idx.string())
              .exit_code == 0);
  const auto result = run_cli(tmp, "evaluate --input " + data +
                                       " --header --response-col y --indices " + idx.string());
  REQUIRE(result.exit_code == 0);
  const auto doc = nlohmann::json::parse(result.out);
  CHECK(doc["k"] == 24);
  CHECK(doc["p"] == 2);
  CHECK(doc["d_eff"].get<double>() > 0.5);
  CHECK(doc["a_eff"].get<double>() > 0.5);
  CHECK(doc["discrepancy"].get<double>() >= doc["discrepancy_lower_bound"].get<double>());
}

TEST_CASE("bench writes the contract table and honours the method filter") {
  TempDir tmp("cli_bench");
  const auto table = tmp.path("table.csv");
  const auto json_path = tmp.path("table.json");
  const auto result = run_cli(tmp, "bench --case uniform --n 300,400,500 --p 3 --k 30 --T 3"
                                   " --seed 5 --output " + table.string() + " --json " +
                                       json_path.string());
  REQUIRE(result.exit_code == 0);
  const std::string csv = slurp(table);
  CHECK(csv.rfind("n,p,k,method,mse_slopes,mse_intercept,d_eff_mean,a_eff_mean,wall_time\n", 0) ==
        0);
  CHECK(count_lines(csv) == 10);  // header + 3 grid points x 3 methods
  CHECK(count_lines(result.out) == 9);  // one summary line per row

  const auto doc = nlohmann::json::parse(slurp(json_path));
  REQUIRE(doc.size() == 9);
  CHECK(doc[0]["n"] == 300);
  CHECK(doc[0]["method"] == "uni");
  CHECK(doc[0].contains("wall_time"));

  const auto filtered = run_cli(tmp, "bench --case uniform --n 300,400,500 --p 3 --k 30 --T 3"
                                     " --methods oss,uni --seed 5 --output " + table.string());
  REQUIRE(filtered.exit_code == 0);
  CHECK(count_lines(slurp(table)) == 7);  // header + 3 x 2
}

TEST_CASE("bench output is reproducible for a fixed seed up to timing") {
  TempDir tmp("cli_bench_det");
  const auto table_a = tmp.path("a.csv");
  const auto table_b = tmp.path("b.csv");
  const std::string flags = "bench --case normal --n 400 --p 3 --k 40 --T 4 --seed 9 --output ";
  REQUIRE(run_cli(tmp, flags + table_a.string()).exit_code == 0);
  REQUIRE(run_cli(tmp, flags + table_b.string()).exit_code == 0);
  // wall_time is measured, so it is the one column allowed to differ.
  CHECK(mask_timing_columns(slurp(table_a)) == mask_timing_columns(slurp(table_b)));
}

TEST_CASE("bootstrap runs end to end on a generated dataset") {
  TempDir tmp("cli_boot");
  const std::string data = make_dataset(tmp, 400, 3);
  const auto table = tmp.path("boot.csv");
  const auto result = run_cli(tmp, "bootstrap --input " + data +
                                       " --header --response-col y --k 45 --B 4 --seed 13"
                                       " --methods uni,oss --output " + table.string());
  REQUIRE(result.exit_code == 0);
  CHECK(count_lines(slurp(table)) == 3);  // header + 2 methods
  CHECK(count_lines(result.out) == 2);

  const auto bad = run_cli(tmp, "bootstrap --input " + data +
                                    " --header --response-col y --k 45 --B 1 --output " +
                                    table.string());
  CHECK(bad.exit_code == 2);
}

TEST_CASE("flag validation failures exit with the validation code") {
  TempDir tmp("cli_flags");
  const std::string data = make_dataset(tmp, 50, 2);
  CHECK(run_cli(tmp, "sample --input " + data + " --method leverage --k 5 --output " +
                         tmp.path("i.csv").string())
            .exit_code == 2);
  CHECK(run_cli(tmp, "sample --input " + data + " --output " + tmp.path("i.csv").string())
            .exit_code == 2);  // missing required --k
  CHECK(run_cli(tmp, "bench --case nowhere --n 100 --p 2 --k 10 --T 2").exit_code == 2);
}
