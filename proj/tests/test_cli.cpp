#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "igs/cli.hpp"
#include "oracles.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = igs::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream l(line);
    std::string cell;
    while (std::getline(l, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("igs_cli_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::vector<std::string> kTableRow6 = {"simulate", "--N", "6", "--marked", "111000",
                                             "--oracle-g0T", "28.610", "--oracle-deltaT", "19.470",
                                             "--refl-g0T", "25.830", "--refl-deltaT", "10.320"};

}  // namespace

TEST_CASE("simulate emits the population trace") {
  auto args = kTableRow6;
  args.insert(args.end(), {"--steps", "3"});
  const Run r = cli(args);
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"step", "tau_elapsed", "marked_population", "norm"});
  CHECK(std::stod(rows[1][2]) == doctest::Approx(1.0 / 20.0));
  CHECK(std::stod(rows[4][2]) >= 0.98);
}

TEST_CASE("N=8 defaults to six steps") {
  const Run r = cli({"simulate", "--N", "8", "--marked", "11110000", "--oracle-g0T", "10.8", "--oracle-deltaT",
                     "21.4", "--refl-g0T", "24.4", "--refl-deltaT", "21.05"});
  REQUIRE(r.code == 0);
  CHECK(csv_rows(r.out).size() == 8);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(cli({"simulate", "--N", "6", "--marked", "110000"}).code == 2);
  CHECK(cli({"simulate", "--N", "5"}).code == 2);
  CHECK(cli({"simulate", "--bogus"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"tune", "--kind", "oracle", "--N", "6", "--marked", "111000", "--g0T-range", "3-4"}).code == 2);
  CHECK(cli({"tune", "--N", "6"}).code == 2);
  CHECK(cli({"ideal", "--N", "1"}).code == 2);
  CHECK(cli({"pulse", "--N", "4", "--addressed", "10x0"}).code == 2);
  CHECK(cli({"simulate", "--config", scratch("missing.json").string()}).code == 2);
  const Run r = cli({"simulate", "--N", "6", "--marked", "110000"});
  CHECK(r.err.find("excite exactly 3") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
  const Run r = cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("simulate") != std::string::npos);
}

TEST_CASE("ideal matches the closed form") {
  const Run r = cli({"ideal", "--N", "20", "--phi", "3.14159265", "--steps", "3"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"step", "population"});
  CHECK(std::stod(rows[4][1]) == doctest::Approx(oracle::grover_population(20, 3)).epsilon(1e-8));
}

TEST_CASE("basis dump and chain census") {
  const Run r = cli({"basis", "--N", "6"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string first;
  std::getline(in, first);
  CHECK(first == "0\t111000\t3\t0");
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 42);

  const Run c = cli({"basis", "--N", "6", "--chains"});
  REQUIRE(c.code == 0);
  const json j = json::parse(c.out);
  REQUIRE(j.size() == 4);
  CHECK(j[0]["j"] == 3);
  CHECK(j[2]["N_j"] == 9);
  CHECK(j[0]["couplings"][0].get<double>() == doctest::Approx(std::sqrt(12.0)));
}

TEST_CASE("pulse reports phases") {
  const Run r = cli({"pulse", "--N", "6", "--g0T", "28.61", "--deltaT", "19.47", "--K", "4", "--addressed", "markedhalf",
                     "--marked", "111000"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  REQUIRE(j["probes"].size() == 4);
  CHECK(j["probes"][0]["label"] == "Phi_0");
  CHECK(j["probes"][3]["phase"].get<double>() == doctest::Approx(0.0));
  CHECK(j["provenance"]["addressed"] == "111000");

  const Run a = cli({"pulse", "--N", "4", "--g0T", "5", "--deltaT", "3", "--addressed", "all"});
  REQUIRE(a.code == 0);
  CHECK(json::parse(a.out)["probes"][0]["label"] == "j=2");
  const Run m = cli({"pulse", "--N", "4", "--g0T", "5", "--deltaT", "3", "--addressed", "1000"});
  REQUIRE(m.code == 0);
  CHECK(json::parse(m.out)["probes"].empty());
  CHECK(json::parse(m.out)["ladders"].size() == 2);
}

TEST_CASE("validate runs the invariant suite") {
  const Run r = cli({"validate"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("config values override flags and summaries reproduce runs") {
  const auto cfg = scratch("cfg.json");
  std::ofstream(cfg) << R"({"simulate": {"steps": 2, "seed": 5, "shots": 50}})";
  auto args = kTableRow6;
  args.insert(args.end(), {"--steps", "3", "--config", cfg.string()});
  const Run r = cli(args);
  REQUIRE(r.code == 0);
  CHECK(csv_rows(r.out).size() == 4);

  const auto s1 = scratch("s1.json"), s2 = scratch("s2.json");
  auto first = kTableRow6;
  first.insert(first.end(), {"--seed", "77", "--format", "json", "--output", s1.string()});
  REQUIRE(cli(first).code == 0);
  REQUIRE(cli({"simulate", "--config", s1.string(), "--format", "json", "--output", s2.string()}).code == 0);
  const json a = json::parse(slurp(s1)), b = json::parse(slurp(s2));
  CHECK(a == b);
  CHECK(a["provenance"]["seed"] == 77);
  CHECK(a["schema_version"] == 1);
  std::filesystem::remove(cfg);
  std::filesystem::remove(s1);
  std::filesystem::remove(s2);
}

TEST_CASE("unwritable output is a runtime failure") {
  auto args = kTableRow6;
  args.insert(args.end(), {"--output", "/nonexistent-dir/trace.csv"});
  CHECK(cli(args).code == 1);
}

TEST_CASE("expected fidelity gate") {
  auto args = kTableRow6;
  args.insert(args.end(), {"--steps", "1", "--expect-fidelity", "0.9"});
  CHECK(cli(args).code == 1);
}

TEST_CASE("tune reports failure with code 3") {
  const Run r = cli({"tune", "--kind", "reflection", "--N", "4", "--g0T-range", "1:1.01", "--deltaT-range", "1:1.01",
                     "--grid", "2"});
  CHECK(r.code == 3);
  const json j = json::parse(r.out);
  CHECK(j["status"] == "tuning-failed");
  CHECK(j["provenance"]["kind"] == "reflection");
}

TEST_CASE("tune emits a converged result") {
  const Run r = cli({"tune", "--kind", "reflection", "--N", "4", "--grid", "12", "--threads", "2"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["status"] == "converged");
  CHECK(j["objective"].get<double>() <= 0.05);
  CHECK(j["best"]["addressed"] == "1111");
}
