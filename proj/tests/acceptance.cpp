// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Each criterion is self-contained and prints ACCEPTANCE <n> PASS|FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "parcelca/ca.hpp"
#include "parcelca/calibration.hpp"
#include "parcelca/errors.hpp"
#include "parcelca/geometry.hpp"
#include "parcelca/io.hpp"
#include "parcelca/metrics.hpp"
#include "parcelca/neighbors.hpp"
#include "parcelca/pipeline.hpp"
#include "parcelca/rng.hpp"
#include "parcelca/scenarios.hpp"
#include "parcelca/synth.hpp"

using namespace pca;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Checker {
  bool ok = true;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      std::printf("    failed: %s\n", what.c_str());
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- 1: neighbor graph equals the O(n^2) oracle on 10 tessellations ----
bool criterion_1() {
  Checker c;
  const auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 10; ++trial) {
    SynthSpec spec;
    spec.cities = 1 + trial % 3;
    spec.parcels_per_city = 150 + trial * 60;  // up to ~2,000 parcels total
    spec.parcel_size_m = 200.0 + 25.0 * (trial % 4);
    spec.seed = 1000 + trial;
    const SynthOutput synth = generate_synthetic(spec);
    const double radius = 250.0 + 50.0 * (trial % 5);

    const NeighborGraph g = compute_neighbors(synth.parcels, {radius});
    const auto oracle = testutil::brute_force_neighbors(synth.parcels, radius);
    c.expect(g.adjacency == oracle,
             "trial " + std::to_string(trial) + ": graph differs from brute force");
  }
  const double elapsed = seconds_since(start);
  std::printf("    10 tessellations vs oracle in %.1f s\n", elapsed);
  c.expect(elapsed < 60.0, "oracle comparison exceeded 60 s");
  return c.ok;
}

// ---- 2: 100,000-parcel neighbor build under 5 minutes with 8 workers ----
bool criterion_2() {
  Checker c;
  SynthSpec spec;
  spec.cities = 4;
  spec.parcels_per_city = 25000;  // rounds to 158^2 = 24,964 per city
  spec.seed = 2024;
  const SynthOutput synth = generate_synthetic(spec);
  c.expect(synth.parcels.size() >= 99000, "generator produced too few parcels");

  NeighborOptions opts;
  opts.radius_m = 500.0;
  opts.jobs = 8;
  const auto start = std::chrono::steady_clock::now();
  const NeighborGraph g = compute_neighbors(synth.parcels, opts);
  const double elapsed = seconds_since(start);
  std::printf("    %zu parcels -> %zu edges in %.1f s (8 workers)\n", synth.parcels.size(),
              g.edge_count(), elapsed);
  c.expect(g.edge_count() > 0, "no edges in the scale graph");
  c.expect(elapsed < 300.0, "100k-parcel build exceeded 5 minutes");
  return c.ok;
}

// ---- 3: planted logistic recovery at 50,000 samples ----
bool criterion_3() {
  Checker c;
  const Coefficients truth = Coefficients::defaults();
  const std::vector<CalibrationSample> samples = testutil::planted_samples(50000, truth, 2012);
  const FitReport fit = fit_logistic(samples);
  c.expect(fit.converged, "fit did not converge");
  c.expect(fit.gradient_inf_norm < 1e-6, "first-order optimality violated");

  const auto within5 = [&](double got, double want, const char* name) {
    const double rel = std::abs(got - want) / std::abs(want);
    std::printf("    %-12s fit %+9.4f  planted %+9.4f  (%.2f%% off)\n", name, got, want,
                100.0 * rel);
    c.expect(rel <= 0.05, std::string(name) + " off by more than 5%");
  };
  within5(fit.coefficients.a0, truth.a0, "a0");
  within5(fit.coefficients.size_ln, truth.size_ln, "size_ln");
  within5(fit.coefficients.compact, truth.compact, "compact");
  within5(fit.coefficients.center_km, truth.center_km, "center_km");
  within5(fit.coefficients.density_std, truth.density_std, "density_std");

  // Gradient against central finite differences at a generic point.
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < 2000; ++i) {
    const auto& s = samples[i];
    rows.push_back({s.features.size_ln, s.features.compact, s.features.center_km,
                    s.features.density_std});
    labels.push_back(s.label);
  }
  const std::vector<double> beta = {0.5, -0.1, 1.2, -0.08, 1.5};
  const std::vector<double> grad = logistic_gradient(rows, labels, beta);
  const double h = 1e-6;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    std::vector<double> plus = beta, minus = beta;
    plus[k] += h;
    minus[k] -= h;
    const double fd = (logistic_log_likelihood(rows, labels, plus) -
                       logistic_log_likelihood(rows, labels, minus)) /
                      (2.0 * h);
    c.expect(std::abs(grad[k] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)),
             "gradient component " + std::to_string(k) + " disagrees with finite differences");
  }
  return c.ok;
}

// ---- 4: transition-rule scalar checks ----
bool criterion_4() {
  Checker c;
  for (double beta : {0.0, 1.0, 5.0, 10.0}) {
    c.expect(std::abs(stochastic_disturbance(std::exp(-1.0), beta) - 2.0) < 1e-12,
             "disturbance(e^-1, " + std::to_string(beta) + ") != 2");
  }
  c.expect(std::abs(0.9 * 0.5 * 1.0 * stochastic_disturbance(std::exp(-1.0), 1.0) - 0.9) < 1e-12,
           "fixture 0.9*0.5*1*2 != 0.9");

  // Hub with 4 spokes; the hub scores 0 when excluded or when no neighbor is
  // urban, no matter what the other terms are.
  NeighborGraph g;
  g.parcel_count = 5;
  g.radius_m = 500.0;
  g.digest_hex = std::string(64, '0');
  g.adjacency = {{1, 2, 3, 4}, {0}, {0}, {0}, {0}};
  std::vector<ParcelRecord> parcels;
  for (int k = 0; k < 5; ++k) {
    ParcelRecord p = testutil::make_parcel(k + 1, 1, testutil::square_at(k * 200.0, 0, 100));
    p.features = FeatureVector{};
    parcels.push_back(p);
  }
  std::vector<LandState> states(5, LandState::NonUrban);
  CaParams params;
  params.coefficients = Coefficients::defaults();
  std::mt19937_64 rng = make_engine(4, 4);

  c.expect(transition_probability(0, states, g, parcels, params, rng) == 0.0,
           "zero-omega parcel scored nonzero");
  states[1] = LandState::Urban;
  parcels[0].excluded = true;
  c.expect(transition_probability(0, states, g, parcels, params, rng) == 0.0,
           "excluded parcel scored nonzero");
  parcels[0].excluded = false;
  c.expect(transition_probability(0, states, g, parcels, params, rng) > 0.0,
           "eligible parcel scored zero");
  return c.ok;
}

// ---- 5: quota conservation on a 20-city country under BAU/UAO/NTU ----
bool criterion_5() {
  Checker c;
  SynthSpec spec;
  spec.cities = 20;
  spec.parcels_per_city = 100;
  spec.urban_seed_fraction = 0.2;
  spec.seed = 555;
  SynthOutput synth = generate_synthetic(spec);
  prepare_parcels(synth.parcels, synth.cities, synth.exclusions);
  const NeighborGraph g = compute_neighbors(synth.parcels, {500.0});

  std::map<std::uint64_t, double> max_parcel;
  for (const ParcelRecord& p : synth.parcels) {
    max_parcel[p.city_id] = std::max(max_parcel[p.city_id], parcel_area_km2(p));
  }

  for (const ScenarioKind kind : {ScenarioKind::BAU, ScenarioKind::UAO, ScenarioKind::NTU}) {
    ScenarioSpec scenario;
    scenario.kind = kind;
    CaParams params;
    params.coefficients = Coefficients::defaults();
    params.rng_seed = 20;
    const SimulationResult result = simulate(synth.cities, synth.parcels, g, scenario, params);

    double national_realized = 0.0, national_target = 0.0, national_tolerance = 0.0;
    bool any_short = false;
    for (const CityRecord& record : synth.cities) {
      const CityTrajectory& traj = result.trajectory(record.city_id);
      const double tol = max_parcel[record.city_id];
      for (const YearLog& year : traj.years) {
        if (year.shortfall) {
          any_short = true;
          c.expect(year.realized_km2 < year.target_km2, "shortfall with target met");
        } else {
          c.expect(year.realized_km2 >= year.target_km2 - 1e-9 &&
                       year.realized_km2 - year.target_km2 <= tol + 1e-9,
                   std::string(to_string(kind)) + " city " + std::to_string(record.city_id) +
                       ": realized outside [target, target + max parcel]");
        }
      }
      national_realized += traj.years.back().realized_km2;
      national_target += traj.years.back().target_km2;
      national_tolerance += tol;
    }
    if ((kind == ScenarioKind::UAO || kind == ScenarioKind::NTU) && !any_short) {
      c.expect(std::abs(national_realized - national_target) <= national_tolerance,
               std::string(to_string(kind)) + ": national total misses the closed-form sum");
      std::printf("    %s national: realized %.3f vs closed-form %.3f km2 (tol %.3f)\n",
                  to_string(kind), national_realized, national_target, national_tolerance);
    }
  }
  return c.ok;
}

// ---- 6: byte-identical reruns; city order changes nothing ----
bool criterion_6() {
  Checker c;
  const fs::path dir = fs::temp_directory_path() / "parcelca-acceptance-6";
  fs::remove_all(dir);
  fs::create_directories(dir);

  SynthSpec spec;
  spec.cities = 3;
  spec.parcels_per_city = 49;
  spec.seed = 6;
  const SynthOutput synth = generate_synthetic(spec);
  write_parcels(synth.parcels, Projection::planar(), dir / "parcels.geojson");
  write_cities(synth.cities, Projection::planar(), dir / "cities.csv");

  RunConfig cfg;
  cfg.scenario = ScenarioKind::UAO;
  cfg.seed = 66;

  SimulateFiles files;
  files.parcels = dir / "parcels.geojson";
  files.cities = dir / "cities.csv";
  files.graph = dir / "graph.txt";
  files.output = dir / "run.geojson";
  run_simulate_files(files, cfg);
  const std::string map1 = read_text_file(dir / "run.geojson");
  const std::string manifest1 = read_text_file(dir / "run.geojson.manifest.json");
  const std::string summary1 = read_text_file(dir / "run.summary.csv");

  run_simulate_files(files, cfg);
  c.expect(read_text_file(dir / "run.geojson") == map1, "export differs between identical runs");
  c.expect(read_text_file(dir / "run.geojson.manifest.json") == manifest1,
           "manifest differs between identical runs");
  c.expect(read_text_file(dir / "run.summary.csv") == summary1,
           "summary differs between identical runs");

  // Same run with the city table reversed: per-city results identical.
  std::vector<ParcelRecord> parcels = load_parcels(dir / "parcels.geojson", Projection::planar());
  prepare_parcels(parcels, synth.cities, {});
  const NeighborGraph g = load_graph(dir / "graph.txt", parcels);
  ScenarioSpec scenario;
  scenario.kind = ScenarioKind::UAO;
  CaParams params;
  params.coefficients = Coefficients::defaults();
  params.rng_seed = 66;
  const SimulationResult forward = simulate(synth.cities, parcels, g, scenario, params);
  std::vector<CityRecord> reversed(synth.cities.rbegin(), synth.cities.rend());
  const SimulationResult backward = simulate(reversed, parcels, g, scenario, params);
  c.expect(forward.final_states == backward.final_states,
           "city order changed the final states");
  for (const CityTrajectory& traj : forward.cities) {
    const CityTrajectory& other = backward.trajectory(traj.city_id);
    for (std::size_t t = 0; t < traj.years.size(); ++t) {
      c.expect(other.years[t].converted_ids == traj.years[t].converted_ids,
               "city order changed a conversion list");
    }
  }
  fs::remove_all(dir);
  return c.ok;
}

// ---- 7: ranked greedy fill equals brute-force top-k across 20 seeds ----
bool criterion_7() {
  Checker c;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthSpec spec;
    spec.cities = 1;
    spec.parcels_per_city = 100 + static_cast<int>(seed) * 40;  // up to 900
    spec.urban_seed_fraction = 0.15 + 0.01 * (seed % 5);
    spec.seed = seed;
    SynthOutput synth = generate_synthetic(spec);
    prepare_parcels(synth.parcels, synth.cities, synth.exclusions);
    const NeighborGraph g = compute_neighbors(synth.parcels, {500.0});

    CaParams params;
    params.coefficients = Coefficients::defaults();
    params.disturbance = false;
    params.p_threshold = 0.0;

    ScenarioSpec scenario;
    scenario.kind = ScenarioKind::UAO;
    const CityRecord& record = synth.cities[0];
    const std::vector<double> targets = target_areas(record, scenario);

    std::vector<double> potentials(synth.parcels.size(), 0.0);
    for (std::size_t i = 0; i < synth.parcels.size(); ++i) {
      if (synth.parcels[i].state == LandState::NonUrban && !synth.parcels[i].excluded) {
        potentials[i] = local_potential(*synth.parcels[i].features, params.coefficients);
      }
    }

    CityState city;
    city.city_id = record.city_id;
    std::vector<LandState> states;
    for (std::uint32_t i = 0; i < synth.parcels.size(); ++i) {
      city.members.push_back(i);
      states.push_back(synth.parcels[i].state);
      if (synth.parcels[i].state == LandState::Urban) {
        city.urban_km2 += parcel_area_km2(synth.parcels[i]);
      }
    }

    std::mt19937_64 rng = make_engine(seed, record.city_id);
    for (double target : targets) {
      // Brute-force expectation from the year-start state.
      struct Scored {
        double score;
        std::uint64_t id;
        std::uint32_t index;
      };
      std::vector<Scored> ranked;
      for (std::uint32_t i : city.members) {
        if (states[i] == LandState::Urban || synth.parcels[i].excluded) continue;
        const double s = potentials[i] * neighborhood_potential(i, g, states);
        if (s > 0.0) ranked.push_back({s, synth.parcels[i].parcel_id, i});
      }
      std::sort(ranked.begin(), ranked.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
      });
      std::vector<std::uint32_t> expect;
      double area = city.urban_km2;
      for (const Scored& s : ranked) {
        if (area >= target) break;
        expect.push_back(s.index);
        area += parcel_area_km2(synth.parcels[s.index]);
      }

      const StepOutcome out =
          step_city(city, states, target, g, synth.parcels, potentials, params, rng);
      c.expect(out.converted == expect,
               "seed " + std::to_string(seed) + ": step differs from top-k oracle");
    }
  }
  return c.ok;
}

// ---- 8: metric fixtures ----
bool criterion_8() {
  Checker c;
  const ExpansionSet reference =
      ExpansionSet::from_pairs({{1, 119.0}, {2, 30.0}, {3, 25.0}});
  const ExpansionSet candidate = ExpansionSet::from_pairs({{1, 119.0}, {9, 40.0}});
  const double overlap = overlap_precision(reference, candidate);
  c.expect(std::abs(overlap - 119.0 / 174.0) < 1e-12, "overlap != 119/174");
  c.expect(std::abs(overlap - 0.684) < 1e-3, "overlap not 0.684 to 3 decimals");

  // Five hand-tabulated 2x2 confusion tables over a 10-cell unit universe.
  std::vector<ExpansionSet::Element> cells;
  for (std::uint64_t i = 1; i <= 10; ++i) cells.push_back({i, 1.0});
  const ExpansionSet universe = ExpansionSet::from_pairs(std::move(cells));
  const auto subset = [](std::initializer_list<std::uint64_t> ids) {
    std::vector<ExpansionSet::Element> elems;
    for (std::uint64_t id : ids) elems.push_back({id, 1.0});
    return ExpansionSet::from_pairs(std::move(elems));
  };
  struct Fixture {
    ExpansionSet sim, obs;
    double want;  // (both + neither) / 10
  };
  const std::vector<Fixture> fixtures = {
      {subset({1, 2, 3}), subset({1, 2, 3}), 1.0},
      {subset({1, 2, 3}), subset({4, 5, 6}), 0.4},
      {subset({1, 2, 3, 4}), subset({3, 4, 5, 6}), 0.6},
      {subset({}), subset({1, 2}), 0.8},
      {subset({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), subset({1}), 0.1},
  };
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const double got = confusion_precision(fixtures[i].sim, fixtures[i].obs, universe);
    c.expect(std::abs(got - fixtures[i].want) < 1e-12,
             "confusion fixture " + std::to_string(i) + " mismatch");
    const double swapped = confusion_precision(fixtures[i].obs, fixtures[i].sim, universe);
    c.expect(got == swapped, "confusion fixture " + std::to_string(i) + " not symmetric");
  }
  return c.ok;
}

// ---- 9: scenario rates on a 12-city fixture ----
bool criterion_9() {
  Checker c;
  struct Fix {
    double area2012;
    bool in_ua;
    double want_ntu;
  };
  // All size classes, both boundary values, both agglomeration flags.
  const std::vector<Fix> fixture = {
      {450.0, true, 0.03},  {401.0, false, 0.03}, {400.0, true, 0.04}, {300.0, false, 0.04},
      {201.0, true, 0.04},  {200.0, false, 0.05}, {150.0, true, 0.05}, {101.0, false, 0.05},
      {100.0, true, 0.06},  {99.0, false, 0.06},  {50.0, true, 0.06},  {1.0, false, 0.06},
  };
  for (std::size_t i = 0; i < fixture.size(); ++i) {
    CityRecord city;
    city.city_id = i + 1;
    city.name = "Fixture" + std::to_string(i + 1);
    city.urban_area_2007_km2 = fixture[i].area2012 * 0.9;
    city.urban_area_2012_km2 = fixture[i].area2012;
    city.in_urban_agglomeration = fixture[i].in_ua;
    c.expect(uao_rate(city) == (fixture[i].in_ua ? 0.05 : 0.04),
             "uao rate wrong for city " + std::to_string(i + 1));
    c.expect(ntu_rate(city) == fixture[i].want_ntu,
             "ntu rate wrong for city " + std::to_string(i + 1));
  }
  return c.ok;
}

// ---- 10: geometry invariants on 1,000 random polygons ----
bool criterion_10() {
  Checker c;
  std::mt19937_64 rng = make_engine(10, 10);
  for (int trial = 0; trial < 1000; ++trial) {
    const int vertices = 3 + static_cast<int>(uniform01(rng) * 13);
    const Polygon p = testutil::random_star_polygon(
        rng, {uniform_range(rng, -1000.0, 1000.0), uniform_range(rng, -1000.0, 1000.0)}, 10.0,
        150.0, vertices);
    c.expect(compactness(p) >= 4.0 * kPi - 1e-9, "compactness below the isoperimetric floor");

    // Rigid motion: area and perimeter invariant to 1e-9 relative.
    const double angle = uniform_range(rng, 0.0, 2.0 * kPi);
    const double dx = uniform_range(rng, -5000.0, 5000.0);
    const double dy = uniform_range(rng, -5000.0, 5000.0);
    Ring moved;
    for (const PointM& v : p.exterior()) {
      moved.push_back({v.x * std::cos(angle) - v.y * std::sin(angle) + dx,
                       v.x * std::sin(angle) + v.y * std::cos(angle) + dy});
    }
    const Polygon q = Polygon::make({moved});
    c.expect(std::abs(polygon_area(q) - polygon_area(p)) <= 1e-9 * polygon_area(p),
             "area not invariant under rigid motion");
    c.expect(std::abs(polygon_perimeter(q) - polygon_perimeter(p)) <=
                 1e-9 * polygon_perimeter(p),
             "perimeter not invariant under rigid motion");

    // min_distance symmetry against a second polygon.
    const Polygon r = testutil::random_star_polygon(
        rng, {uniform_range(rng, -1000.0, 1000.0), uniform_range(rng, -1000.0, 1000.0)}, 10.0,
        150.0, 8);
    c.expect(min_distance(p, r) == min_distance(r, p), "min_distance not symmetric");
  }
  return c.ok;
}

}  // namespace

int main() {
  using CriterionFn = bool (*)();
  const std::vector<CriterionFn> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    bool ok = false;
    try {
      ok = criteria[i]();
    } catch (const std::exception& e) {
      std::printf("    exception: %s\n", e.what());
    }
    std::printf("ACCEPTANCE %zu %s\n", i + 1, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
