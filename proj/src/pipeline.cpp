#include "parcelca/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

#include "parcelca/calibration.hpp"
#include "parcelca/errors.hpp"
#include "parcelca/parallel.hpp"

namespace pca {

void prepare_parcels(std::vector<ParcelRecord>& parcels, const std::vector<CityRecord>& cities,
                     const ExclusionSet& exclusions, double exclusion_overlap, int jobs) {
  std::map<std::uint64_t, const CityRecord*> city_by_id;
  for (const CityRecord& c : cities) {
    if (!city_by_id.emplace(c.city_id, &c).second) {
      fail(ErrorKind::Data, "duplicate city_id " + std::to_string(c.city_id));
    }
  }

  double max_density = 0.0;
  for (const ParcelRecord& p : parcels) max_density = std::max(max_density, p.raw_density);
  // log(max) is undefined at or below 1; such a dataset has no usable density
  // signal, so the whole column collapses to 0.
  const bool usable_density = max_density > 1.0;

  std::vector<const CityRecord*> city_of(parcels.size(), nullptr);
  for (std::size_t i = 0; i < parcels.size(); ++i) {
    const auto it = city_by_id.find(parcels[i].city_id);
    if (it == city_by_id.end()) {
      fail(ErrorKind::Data, "parcel " + std::to_string(parcels[i].parcel_id) +
                                " references unknown city " +
                                std::to_string(parcels[i].city_id));
    }
    city_of[i] = it->second;
  }

  parallel_for(parcels.size(), jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ParcelRecord& p = parcels[i];
      if (usable_density) {
        p.features = extract_features(p, *city_of[i], max_density);
      } else {
        FeatureVector f;
        f.size_ln = std::log(polygon_area(p.polygon) / 1e4);
        f.compact = compactness(p.polygon);
        f.center_km = distance_km(centroid(p.polygon), city_of[i]->center);
        f.density_std = 0.0;
        p.features = f;
      }
      p.excluded =
          !exclusions.empty() && intersects_exclusion(p.polygon, exclusions, exclusion_overlap);
    }
  });
}

CaParams ca_params_from(const RunConfig& cfg, const Coefficients& w) {
  CaParams params;
  params.coefficients = w;
  params.beta = cfg.beta;
  params.p_threshold = cfg.p_threshold;
  params.rng_seed = cfg.seed;
  params.disturbance = cfg.disturbance;
  params.jobs = cfg.jobs;
  return params;
}

SimulationResult run_simulate_files(const SimulateFiles& files, const RunConfig& cfg) {
  LoadReport parcel_report;
  std::vector<ParcelRecord> parcels = load_parcels(files.parcels, cfg.projection, &parcel_report);
  if (!parcel_report.rejected.empty()) {
    fail(ErrorKind::Data, "parcel file has " + std::to_string(parcel_report.rejected.size()) +
                              " invalid feature(s); run ingest to inspect and repair");
  }
  const std::vector<CityRecord> cities = load_cities(files.cities, cfg.projection);

  ExclusionSet exclusions;
  if (files.exclusions) exclusions = load_exclusions(*files.exclusions, cfg.projection);

  Coefficients coefficients = Coefficients::defaults();
  if (cfg.coefficients_path) coefficients = load_coefficients(*cfg.coefficients_path);

  prepare_parcels(parcels, cities, exclusions, cfg.exclusion_overlap, cfg.jobs);

  NeighborOptions nopts;
  nopts.radius_m = cfg.neighbor_radius_m;
  nopts.jobs = cfg.jobs;
  NeighborGraph graph;
  bool graph_from_file = false;
  if (files.graph && std::filesystem::exists(*files.graph)) {
    graph = load_graph(*files.graph, parcels);  // stale cache raises here
    if (graph.radius_m != cfg.neighbor_radius_m) {
      fail(ErrorKind::StaleCache, "neighbor cache radius " + std::to_string(graph.radius_m) +
                                      " does not match configured radius");
    }
    graph_from_file = true;
  } else {
    graph = compute_neighbors(parcels, nopts);
    if (files.graph) {
      save_graph(graph, *files.graph);
      graph_from_file = true;
    }
  }

  const SimulationResult result =
      simulate(cities, parcels, graph, cfg.scenario_spec(), ca_params_from(cfg, coefficients));

  export_result(result, parcels, cities, cfg.projection, files.output);

  std::vector<ManifestInput> inputs;
  inputs.push_back({"parcels", files.parcels});
  inputs.push_back({"cities", files.cities});
  if (files.exclusions) inputs.push_back({"exclusions", *files.exclusions});
  if (graph_from_file) inputs.push_back({"graph", *files.graph});
  if (cfg.coefficients_path) inputs.push_back({"coefficients", *cfg.coefficients_path});
  if (files.config) inputs.push_back({"config", *files.config});
  write_manifest(files.output, cfg, inputs);

  return result;
}

SummaryTable summary_from_export(const ExportedRun& run, const std::vector<CityRecord>& cities) {
  std::map<std::uint64_t, std::pair<double, double>> areas;  // city -> initial, converted
  for (const auto& f : run.features) {
    auto& [initial, converted] = areas[f.city_id];
    if (f.state_2012 == LandState::Urban) initial += f.area_km2;
    if (f.converted_year) converted += f.area_km2;
  }

  std::map<std::uint64_t, const CityRecord*> by_id;
  for (const CityRecord& c : cities) by_id[c.city_id] = &c;

  SummaryTable table;
  double init_in = 0.0, final_in = 0.0, init_out = 0.0, final_out = 0.0;
  for (const auto& [city_id, pair] : areas) {
    const auto it = by_id.find(city_id);
    if (it == by_id.end()) {
      fail(ErrorKind::Data, "export references unknown city " + std::to_string(city_id));
    }
    const CityRecord& c = *it->second;
    SummaryRow row;
    row.label = c.name;
    row.city_id = city_id;
    row.initial_km2 = pair.first;
    row.final_km2 = pair.first + pair.second;
    row.growth_km2 = pair.second;
    row.growth_pct = pair.first > 0.0 ? 100.0 * pair.second / pair.first : 0.0;
    table.city_rows.push_back(std::move(row));
    if (c.in_urban_agglomeration) {
      init_in += pair.first;
      final_in += pair.first + pair.second;
    } else {
      init_out += pair.first;
      final_out += pair.first + pair.second;
    }
  }

  const auto aggregate = [](std::string label, double initial, double final_area) {
    SummaryRow row;
    row.label = std::move(label);
    row.initial_km2 = initial;
    row.final_km2 = final_area;
    row.growth_km2 = final_area - initial;
    row.growth_pct = initial > 0.0 ? 100.0 * row.growth_km2 / initial : 0.0;
    return row;
  };
  table.group_rows.push_back(aggregate("urban-agglomeration", init_in, final_in));
  table.group_rows.push_back(aggregate("other-cities", init_out, final_out));
  table.total = aggregate("all-cities", init_in + init_out, final_in + final_out);
  return table;
}

std::string report_json(const SummaryTable& table, const std::string& scenario) {
  using ojson = nlohmann::ordered_json;
  const auto row_json = [](const SummaryRow& r) {
    ojson j;
    j["label"] = r.label;
    if (r.city_id) j["city_id"] = *r.city_id;
    j["initial_km2"] = r.initial_km2;
    j["final_km2"] = r.final_km2;
    j["growth_km2"] = r.growth_km2;
    j["growth_pct"] = r.growth_pct;
    j["shortfall"] = r.shortfall;
    return j;
  };
  ojson j;
  j["scenario"] = scenario;
  ojson cities = ojson::array();
  for (const SummaryRow& r : table.city_rows) cities.push_back(row_json(r));
  j["cities"] = std::move(cities);
  ojson groups = ojson::array();
  for (const SummaryRow& r : table.group_rows) groups.push_back(row_json(r));
  j["groups"] = std::move(groups);
  j["total"] = row_json(table.total);
  return j.dump(2) + "\n";
}

}  // namespace pca
