// End-to-end tests of the command-line binary. The test runner passes the
// binary's location in the PARCELCA_BIN environment variable.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "parcelca/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "parcelca-cli-tests";
  fs::create_directories(dir);
  return dir;
}

std::string binary() {
  const char* bin = std::getenv("PARCELCA_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "PARCELCA_BIN must point at the built binary");
  return bin;
}

CmdResult run_cli(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd =
      "\"" + binary() + "\" " + args + " > \"" + out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = pca::read_text_file(out);
  r.err = pca::read_text_file(err);
  return r;
}

}  // namespace

TEST_CASE("usage surface: help exits 0, bad invocations exit 1") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("simulate --help").exit_code == 0);
  CHECK(run_cli("--no-such-flag").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("simulate").exit_code == 1);  // missing required options
  CHECK(run_cli("").exit_code == 1);          // a verb is required
}

TEST_CASE("the seven verbs compose into a working pipeline") {
  const fs::path dir = work_dir() / "pipeline";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();

  // synth: write a small country.
  const CmdResult synth = run_cli(
      "--seed 11 synth --out-dir \"" + d + "\" --cities 3 --parcels-per-city 49 "
      "--urban-fraction 0.2 --exclusion-band");
  REQUIRE(synth.exit_code == 0);
  CHECK(fs::exists(dir / "parcels.geojson"));
  CHECK(fs::exists(dir / "cities.csv"));
  CHECK(fs::exists(dir / "exclusions.geojson"));
  const json synth_info = json::parse(synth.out);
  CHECK(synth_info.at("parcels").get<int>() == 3 * 49);

  // ingest: validate and re-cache.
  const CmdResult ingest = run_cli(
      "ingest --parcels \"" + d + "/parcels.geojson\" --out \"" + d + "/parcels-cache.geojson\"");
  REQUIRE(ingest.exit_code == 0);
  const json ingest_info = json::parse(ingest.out);
  CHECK(ingest_info.at("loaded").get<int>() == 3 * 49);
  CHECK(ingest_info.at("rejected").size() == 0);

  // neighbors: build and save the graph cache.
  const CmdResult neighbors = run_cli(
      "neighbors --parcels \"" + d + "/parcels.geojson\" --out \"" + d + "/graph.txt\"");
  REQUIRE(neighbors.exit_code == 0);
  CHECK(fs::exists(dir / "graph.txt"));
  const json nb_info = json::parse(neighbors.out);
  CHECK(nb_info.at("parcels").get<int>() == 3 * 49);
  CHECK(nb_info.at("edges").get<int>() > 0);

  // simulate: UAO via config file, reusing the graph cache.
  pca::write_text_file(dir / "config.json", R"({"scenario": "UAO", "seed": 11})");
  const std::string sim_args =
      "--config \"" + d + "/config.json\" simulate --parcels \"" + d +
      "/parcels.geojson\" --cities \"" + d + "/cities.csv\" --exclusions \"" + d +
      "/exclusions.geojson\" --graph \"" + d + "/graph.txt\" --out \"" + d + "/run.geojson\"";
  const CmdResult sim = run_cli(sim_args);
  REQUIRE_MESSAGE(sim.exit_code == 0, sim.err);
  CHECK(fs::exists(dir / "run.geojson"));
  CHECK(fs::exists(dir / "run.summary.csv"));
  CHECK(fs::exists(dir / "run.geojson.manifest.json"));
  const json sim_info = json::parse(sim.out);
  CHECK(sim_info.at("scenario") == "UAO");
  CHECK(sim_info.at("converted_parcels").get<int>() > 0);
  CHECK(sim_info.at("shortfall_city_years").get<int>() == 0);

  // Re-running byte-identically reproduces the export and manifest.
  const std::string first_map = pca::read_text_file(dir / "run.geojson");
  const std::string first_manifest = pca::read_text_file(dir / "run.geojson.manifest.json");
  const CmdResult sim2 = run_cli(sim_args);
  REQUIRE(sim2.exit_code == 0);
  CHECK(pca::read_text_file(dir / "run.geojson") == first_map);
  CHECK(pca::read_text_file(dir / "run.geojson.manifest.json") == first_manifest);

  // compare: a run against itself is a perfect match, in both modes.
  const CmdResult cmp = run_cli("compare --reference \"" + d + "/run.geojson\" --candidate \"" +
                                d + "/run.geojson\"");
  REQUIRE(cmp.exit_code == 0);
  const json cmp_info = json::parse(cmp.out);
  CHECK(cmp_info.at("overlap_precision").get<double>() == 1.0);
  CHECK(cmp_info.at("confusion_precision").get<double>() == 1.0);
  const CmdResult cmp_raster =
      run_cli("compare --reference \"" + d + "/run.geojson\" --candidate \"" + d +
              "/run.geojson\" --raster-cell-m 100");
  REQUIRE(cmp_raster.exit_code == 0);
  CHECK(json::parse(cmp_raster.out).at("overlap_precision").get<double>() == 1.0);

  // report: summary CSV to stdout when no files are requested.
  const CmdResult rep = run_cli("report --export \"" + d + "/run.geojson\" --cities \"" + d +
                                "/cities.csv\"");
  REQUIRE(rep.exit_code == 0);
  CHECK(rep.out.rfind("section,label,city_id", 0) == 0);

  // ...and file outputs on request.
  const CmdResult rep2 = run_cli("report --export \"" + d + "/run.geojson\" --cities \"" + d +
                                 "/cities.csv\" --json \"" + d + "/report.json\" --csv \"" + d +
                                 "/report.csv\"");
  REQUIRE(rep2.exit_code == 0);
  const json report = json::parse(pca::read_text_file(dir / "report.json"));
  CHECK(report.at("scenario") == "UAO");
  CHECK(report.at("total").at("growth_km2").get<double>() > 0.0);
  CHECK(pca::read_text_file(dir / "report.csv") == rep.out);

  // calibrate: fit a model from a sample table and reuse it in a run.
  {
    // A noisy linear rule the fit can learn: label 1 iff x + z + noise > 0.
    std::string csv = "size_ln,compact,center_km,density_std,label\n";
    unsigned state = 99;
    for (int i = 0; i < 4000; ++i) {
      state = state * 1664525u + 1013904223u;
      const double x = (state >> 8) * (1.0 / 16777216.0) * 6.0 - 3.0;
      state = state * 1664525u + 1013904223u;
      const double z = (state >> 8) * (1.0 / 16777216.0);
      state = state * 1664525u + 1013904223u;
      const double c = (state >> 8) * (1.0 / 16777216.0) * 10.0;
      state = state * 1664525u + 1013904223u;
      const double w = (state >> 8) * (1.0 / 16777216.0);
      state = state * 1664525u + 1013904223u;
      const double noise = (state >> 8) * (1.0 / 16777216.0) - 0.5;
      const int label = (x + z + noise > 0.0) ? 1 : 0;
      csv += std::to_string(x) + "," + std::to_string(16.0 + w) + "," + std::to_string(c) +
             "," + std::to_string(z) + "," + std::to_string(label) + "\n";
    }
    pca::write_text_file(dir / "samples.csv", csv);
  }
  const CmdResult cal = run_cli("calibrate --samples \"" + d + "/samples.csv\" --out \"" + d +
                                "/coefficients.json\"");
  REQUIRE_MESSAGE(cal.exit_code == 0, cal.err);
  const json cal_info = json::parse(cal.out);
  CHECK(cal_info.at("converged").get<bool>());
  CHECK(cal_info.at("precision").get<double>() > 0.7);
  CHECK(fs::exists(dir / "coefficients.json"));
}

TEST_CASE("schema and data errors exit 2") {
  const fs::path dir = work_dir() / "errors";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();

  pca::write_text_file(dir / "broken.geojson", "{\"type\": \"FeatureCollection\"}");
  const CmdResult bad = run_cli(
      "ingest --parcels \"" + d + "/broken.geojson\" --out \"" + d + "/out.geojson\"");
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("schema") != std::string::npos);

  pca::write_text_file(dir / "garbage.geojson", "][");
  CHECK(run_cli("ingest --parcels \"" + d + "/garbage.geojson\" --out \"" + d +
                "/out.geojson\"")
            .exit_code == 2);

  // Missing file is an io failure, also reported as 2.
  CHECK(run_cli("ingest --parcels \"" + d + "/nope.geojson\" --out \"" + d + "/out.geojson\"")
            .exit_code == 2);
}

TEST_CASE("a stale neighbor cache exits 3") {
  const fs::path dir = work_dir() / "stale";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();

  REQUIRE(run_cli("--seed 1 synth --out-dir \"" + d + "\" --cities 1 --parcels-per-city 16")
              .exit_code == 0);
  REQUIRE(run_cli("neighbors --parcels \"" + d + "/parcels.geojson\" --out \"" + d +
                  "/graph.txt\"")
              .exit_code == 0);

  // Regenerate the parcels with a different seed; the cached graph no longer
  // matches them.
  REQUIRE(run_cli("--seed 2 synth --out-dir \"" + d + "\" --cities 1 --parcels-per-city 16")
              .exit_code == 0);
  const CmdResult stale = run_cli(
      "simulate --parcels \"" + d + "/parcels.geojson\" --cities \"" + d +
      "/cities.csv\" --graph \"" + d + "/graph.txt\" --out \"" + d + "/run.geojson\"");
  CHECK(stale.exit_code == 3);
  CHECK(stale.err.find("stale") != std::string::npos);
}

TEST_CASE("an unreachable quota exits 4 but still writes the result") {
  const fs::path dir = work_dir() / "shortfall";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();

  REQUIRE(run_cli("--seed 3 synth --out-dir \"" + d + "\" --cities 1 --parcels-per-city 16")
              .exit_code == 0);

  // A 400%/yr growth demand outruns the available land immediately.
  pca::write_text_file(dir / "config.json",
                       R"({"scenario": "CUSTOM", "custom_rates": {"1": 4.0}, "seed": 3})");
  const CmdResult run = run_cli(
      "--config \"" + d + "/config.json\" simulate --parcels \"" + d +
      "/parcels.geojson\" --cities \"" + d + "/cities.csv\" --out \"" + d + "/run.geojson\"");
  CHECK(run.exit_code == 4);
  CHECK(fs::exists(dir / "run.geojson"));
  CHECK(fs::exists(dir / "run.summary.csv"));
  CHECK(fs::exists(dir / "run.geojson.manifest.json"));
  const json info = json::parse(run.out);
  CHECK(info.at("shortfall_city_years").get<int>() > 0);

  // The exported map still reloads cleanly.
  const pca::ExportedRun exported = pca::load_export(dir / "run.geojson");
  CHECK(exported.features.size() == 16);
}
