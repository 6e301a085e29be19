// Command-line surface: synth / ingest / neighbors / calibrate / simulate /
// compare / report. Exit codes: 0 success, 1 usage, 2 schema or data error,
// 3 stale neighbor cache, 4 quota shortfall (outputs still written).
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "parcelca/ca.hpp"
#include "parcelca/calibration.hpp"
#include "parcelca/errors.hpp"
#include "parcelca/io.hpp"
#include "parcelca/metrics.hpp"
#include "parcelca/neighbors.hpp"
#include "parcelca/pipeline.hpp"
#include "parcelca/synth.hpp"

namespace {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };
LogLevel g_log_level = LogLevel::Info;

void log_at(LogLevel level, const char* tag, const std::string& msg) {
  if (level <= g_log_level) std::cerr << "parcelca: " << tag << ": " << msg << '\n';
}
void log_error(const std::string& msg) { log_at(LogLevel::Error, "error", msg); }
void log_warn(const std::string& msg) { log_at(LogLevel::Warn, "warning", msg); }
void log_info(const std::string& msg) { log_at(LogLevel::Info, "info", msg); }

using ojson = nlohmann::ordered_json;

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string log_level = "info";
};

pca::RunConfig resolve_config(const GlobalArgs& g) {
  pca::RunConfig cfg;
  if (!g.config_path.empty()) cfg = pca::load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.jobs) cfg.jobs = *g.jobs;
  return cfg;
}

int run_synth(const pca::RunConfig& cfg, const pca::SynthSpec& spec_in,
              const std::string& out_dir) {
  pca::SynthSpec spec = spec_in;
  spec.seed = cfg.seed;
  const pca::SynthOutput out = pca::generate_synthetic(spec);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  pca::write_parcels(out.parcels, cfg.projection, dir / "parcels.geojson");
  pca::write_cities(out.cities, cfg.projection, dir / "cities.csv");
  if (!out.exclusions.empty()) {
    pca::write_exclusions(out.exclusions, cfg.projection, dir / "exclusions.geojson");
  }

  ojson j;
  j["parcels"] = out.parcels.size();
  j["cities"] = out.cities.size();
  j["exclusions"] = out.exclusions.size();
  j["total_parcel_area_km2"] = out.total_parcel_area_km2;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_ingest(const pca::RunConfig& cfg, const std::string& parcels_in,
               const std::string& parcels_out, const std::string& exclusions_in,
               const std::string& exclusions_out) {
  pca::LoadReport report;
  const std::vector<pca::ParcelRecord> parcels =
      pca::load_parcels(parcels_in, cfg.projection, &report);
  // The cache is always planar meters; the projection was applied on load.
  pca::write_parcels(parcels, pca::Projection::planar(), parcels_out);

  ojson j;
  j["loaded"] = report.loaded;
  j["repaired"] = report.repaired;
  j["rejected"] = report.rejected;

  if (!exclusions_in.empty()) {
    pca::LoadReport ex_report;
    const pca::ExclusionSet ex = pca::load_exclusions(exclusions_in, cfg.projection, &ex_report);
    if (exclusions_out.empty()) {
      pca::fail(pca::ErrorKind::Config, "--exclusions requires --exclusions-out");
    }
    pca::write_exclusions(ex, pca::Projection::planar(), exclusions_out);
    j["exclusions_loaded"] = ex_report.loaded;
    j["exclusions_rejected"] = ex_report.rejected;
  }
  std::cout << j.dump(2) << '\n';
  for (const std::string& r : report.rejected) log_warn("rejected " + r);
  return 0;
}

int run_neighbors(const pca::RunConfig& cfg, const std::string& parcels_path,
                  const std::string& out_path) {
  const std::vector<pca::ParcelRecord> parcels =
      pca::load_parcels(parcels_path, cfg.projection);
  pca::NeighborOptions opts;
  opts.radius_m = cfg.neighbor_radius_m;
  opts.jobs = cfg.jobs;
  const pca::NeighborGraph graph = pca::compute_neighbors(parcels, opts);
  pca::save_graph(graph, out_path);

  ojson j;
  j["parcels"] = graph.parcel_count;
  j["edges"] = graph.edge_count();
  j["radius_m"] = graph.radius_m;
  j["digest"] = graph.digest_hex;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_calibrate(const std::string& samples_path, const std::string& out_path,
                  double ridge) {
  const std::vector<pca::CalibrationSample> samples = pca::load_samples(samples_path);
  pca::FitOptions opts;
  opts.ridge = ridge;
  const pca::FitReport report = pca::fit_logistic(samples, opts);
  pca::save_coefficients(report.coefficients, out_path);
  if (!report.converged) {
    log_warn("fit did not converge; wrote the best iterate (is the data separable?)");
  }

  ojson j;
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["log_likelihood"] = report.log_likelihood;
  j["gradient_inf_norm"] = report.gradient_inf_norm;
  j["a0"] = report.coefficients.a0;
  j["size_ln"] = report.coefficients.size_ln;
  j["compact"] = report.coefficients.compact;
  j["center_km"] = report.coefficients.center_km;
  j["density_std"] = report.coefficients.density_std;
  j["precision"] = pca::classification_precision(report.coefficients, samples);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_simulate(const pca::RunConfig& cfg, const GlobalArgs& g, const std::string& parcels,
                 const std::string& cities, const std::string& exclusions,
                 const std::string& graph, const std::string& output) {
  pca::SimulateFiles files;
  files.parcels = parcels;
  files.cities = cities;
  if (!exclusions.empty()) files.exclusions = exclusions;
  if (!graph.empty()) files.graph = graph;
  if (!g.config_path.empty()) files.config = g.config_path;
  files.output = output;

  const pca::SimulationResult result = pca::run_simulate_files(files, cfg);
  log_info("wrote " + output + " and its summary and manifest");

  std::size_t converted = 0;
  std::size_t shortfalls = 0;
  for (const auto& city : result.cities) {
    for (const auto& year : city.years) {
      converted += year.converted_ids.size();
      if (year.shortfall) ++shortfalls;
    }
  }
  ojson j;
  j["scenario"] = pca::to_string(result.scenario);
  j["cities"] = result.cities.size();
  j["years"] = result.horizon_years;
  j["converted_parcels"] = converted;
  j["shortfall_city_years"] = shortfalls;
  j["output"] = output;
  std::cout << j.dump(2) << '\n';

  if (result.any_shortfall()) {
    log_warn("quota shortfall in " + std::to_string(shortfalls) +
             " city-year(s); results written");
    return 4;
  }
  return 0;
}

int run_compare(const pca::RunConfig& cfg, const std::string& reference_path,
                const std::string& candidate_path, double raster_cell) {
  const pca::ExportedRun ref = pca::load_export(reference_path, cfg.projection);
  const pca::ExportedRun cand = pca::load_export(candidate_path, cfg.projection);

  pca::ExpansionSet ref_set, cand_set, universe;
  std::string mode;
  if (raster_cell > 0.0) {
    mode = "raster";
    const auto as_parcels = [](const pca::ExportedRun& run) {
      std::vector<pca::ParcelRecord> ps;
      ps.reserve(run.features.size());
      for (const auto& f : run.features) {
        pca::ParcelRecord p;
        p.parcel_id = f.parcel_id;
        p.polygon = f.polygon;
        ps.push_back(std::move(p));
      }
      return ps;
    };
    const std::vector<pca::ParcelRecord> ref_parcels = as_parcels(ref);
    const std::vector<pca::ParcelRecord> cand_parcels = as_parcels(cand);
    std::vector<std::uint64_t> all_ids;
    for (const auto& f : ref.features) all_ids.push_back(f.parcel_id);
    universe = pca::rasterize_expansion(ref_parcels, all_ids, raster_cell);
    ref_set = pca::rasterize_expansion(ref_parcels, ref.converted_ids(), raster_cell);
    cand_set = pca::rasterize_expansion(cand_parcels, cand.converted_ids(), raster_cell);
  } else {
    mode = "parcel";
    const auto as_set = [](const pca::ExportedRun& run, bool converted_only) {
      std::vector<pca::ExpansionSet::Element> elems;
      for (const auto& f : run.features) {
        if (!converted_only || f.converted_year) elems.push_back({f.parcel_id, f.area_km2});
      }
      return pca::ExpansionSet::from_pairs(std::move(elems));
    };
    universe = as_set(ref, false);
    ref_set = as_set(ref, true);
    cand_set = as_set(cand, true);
  }

  ojson j;
  j["mode"] = mode;
  j["reference_expanded_km2"] = ref_set.total_area_km2();
  j["candidate_expanded_km2"] = cand_set.total_area_km2();
  j["overlap_precision"] = pca::overlap_precision(ref_set, cand_set);
  j["confusion_precision"] = pca::confusion_precision(cand_set, ref_set, universe);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_report(const pca::RunConfig& cfg, const std::string& export_path,
               const std::string& cities_path, const std::string& csv_out,
               const std::string& json_out) {
  const pca::ExportedRun run = pca::load_export(export_path, cfg.projection);
  const std::vector<pca::CityRecord> cities = pca::load_cities(cities_path, cfg.projection);
  const pca::SummaryTable table = pca::summary_from_export(run, cities);
  const std::string csv = pca::summary_csv(table);
  const std::string json_text = pca::report_json(table, run.scenario);
  if (!csv_out.empty()) pca::write_text_file(csv_out, csv);
  if (!json_out.empty()) pca::write_text_file(json_out, json_text);
  if (csv_out.empty() && json_out.empty()) std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parcel-level urban expansion simulator (constrained vector CA)"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "Run configuration JSON");
  app.add_option("--seed", g.seed, "Override the configured rng seed");
  app.add_option("--jobs", g.jobs, "Worker threads (0 = hardware)");
  app.add_option("--log-level", g.log_level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  auto* synth = app.add_subcommand("synth", "Generate a synthetic country");
  pca::SynthSpec synth_spec;
  std::string synth_out;
  synth->add_option("--out-dir", synth_out, "Output directory")->required();
  synth->add_option("--cities", synth_spec.cities, "Number of cities");
  synth->add_option("--parcels-per-city", synth_spec.parcels_per_city,
                    "Parcel count per city (rounded to a square)");
  synth->add_option("--parcel-size-m", synth_spec.parcel_size_m, "Nominal parcel edge, meters");
  synth->add_option("--urban-fraction", synth_spec.urban_seed_fraction,
                    "Initial urban fraction of each city");
  synth->add_option("--density-model", synth_spec.density_model, "decay|uniform");
  synth->add_flag("--exclusion-band", synth_spec.exclusion_band,
                  "Reserve each city's rightmost column");

  auto* ingest = app.add_subcommand("ingest", "Validate, reproject and cache input features");
  std::string ingest_parcels, ingest_out, ingest_exclusions, ingest_exclusions_out;
  ingest->add_option("--parcels", ingest_parcels, "Parcel feature file")->required();
  ingest->add_option("--out", ingest_out, "Planar parcel cache to write")->required();
  ingest->add_option("--exclusions", ingest_exclusions, "Exclusion feature file");
  ingest->add_option("--exclusions-out", ingest_exclusions_out, "Planar exclusion cache");

  auto* neighbors = app.add_subcommand("neighbors", "Build and save the neighbor graph");
  std::string nb_parcels, nb_out;
  neighbors->add_option("--parcels", nb_parcels, "Parcel feature file")->required();
  neighbors->add_option("--out", nb_out, "Graph cache to write")->required();

  auto* calibrate = app.add_subcommand("calibrate", "Fit local-potential coefficients");
  std::string cal_samples, cal_out;
  double cal_ridge = 0.0;
  calibrate->add_option("--samples", cal_samples, "Calibration sample CSV")->required();
  calibrate->add_option("--out", cal_out, "Coefficients JSON to write")->required();
  calibrate->add_option("--ridge", cal_ridge, "L2 penalty on slopes (0 = plain MLE)");

  auto* simulate = app.add_subcommand("simulate", "Run a scenario");
  std::string sim_parcels, sim_cities, sim_exclusions, sim_graph, sim_out;
  simulate->add_option("--parcels", sim_parcels, "Parcel feature file")->required();
  simulate->add_option("--cities", sim_cities, "City table CSV")->required();
  simulate->add_option("--exclusions", sim_exclusions, "Exclusion feature file");
  simulate->add_option("--graph", sim_graph, "Neighbor cache (loaded if present, else written)");
  simulate->add_option("--out", sim_out, "Expanded-parcel map to write")->required();

  auto* compare = app.add_subcommand("compare", "Compare two exported runs");
  std::string cmp_ref, cmp_cand;
  double cmp_raster = 0.0;
  compare->add_option("--reference", cmp_ref, "Reference export")->required();
  compare->add_option("--candidate", cmp_cand, "Candidate export")->required();
  compare->add_option("--raster-cell-m", cmp_raster,
                      "Compare on a square grid of this cell size instead of parcel ids");

  auto* report = app.add_subcommand("report", "Summarize an exported run");
  std::string rep_export, rep_cities, rep_csv, rep_json;
  report->add_option("--export", rep_export, "Exported run")->required();
  report->add_option("--cities", rep_cities, "City table CSV")->required();
  report->add_option("--csv", rep_csv, "Write the summary CSV here");
  report->add_option("--json", rep_json, "Write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (g.log_level == "error") g_log_level = LogLevel::Error;
  else if (g.log_level == "warn") g_log_level = LogLevel::Warn;
  else if (g.log_level == "debug") g_log_level = LogLevel::Debug;

  try {
    const pca::RunConfig cfg = resolve_config(g);
    if (synth->parsed()) return run_synth(cfg, synth_spec, synth_out);
    if (ingest->parsed()) {
      return run_ingest(cfg, ingest_parcels, ingest_out, ingest_exclusions,
                        ingest_exclusions_out);
    }
    if (neighbors->parsed()) return run_neighbors(cfg, nb_parcels, nb_out);
    if (calibrate->parsed()) return run_calibrate(cal_samples, cal_out, cal_ridge);
    if (simulate->parsed()) {
      return run_simulate(cfg, g, sim_parcels, sim_cities, sim_exclusions, sim_graph, sim_out);
    }
    if (compare->parsed()) return run_compare(cfg, cmp_ref, cmp_cand, cmp_raster);
    if (report->parsed()) return run_report(cfg, rep_export, rep_cities, rep_csv, rep_json);
    log_error("no command given");
    return 1;
  } catch (const pca::Error& e) {
    log_error(std::string(pca::to_string(e.kind())) + ": " + e.what());
    return e.kind() == pca::ErrorKind::StaleCache ? 3 : 2;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 2;
  }
}
