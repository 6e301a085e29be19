#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "parcelca/calibration.hpp"
#include "parcelca/neighbors.hpp"
#include "parcelca/parcel.hpp"
#include "parcelca/scenarios.hpp"

namespace pca {

/// Knobs of the transition rule. The score of a candidate parcel is
///   P = P_l(features) * P_omega(neighbors) * con * P_r(gamma, beta)
/// where con is 0 inside exclusion zones and P_r >= 1, so P is a ranking
/// score rather than a probability.
struct CaParams {
  Coefficients coefficients;
  double beta = 1.0;         // disturbance exponent, [0, 10]
  double p_threshold = 0.01;  // eligibility cut, [0, 1]
  std::uint64_t rng_seed = 0;
  bool disturbance = true;  // off forces P_r = 1 (reproducible oracles)
  int jobs = 0;             // 0 = hardware concurrency

  void validate() const;
};

/// Fraction of graph neighbors currently urban; 0 for isolated parcels.
double neighborhood_potential(std::uint32_t index, const NeighborGraph& g,
                              const std::vector<LandState>& states);

/// 1 + (-ln gamma)^beta; >= 1 for gamma in (0,1).
double stochastic_disturbance(double gamma, double beta);

/// Full transition score for a non-urban parcel, drawing gamma from rng.
/// Excluded parcels score exactly 0 without consuming a draw.
double transition_probability(std::uint32_t index, const std::vector<LandState>& states,
                              const NeighborGraph& g, const std::vector<ParcelRecord>& parcels,
                              const CaParams& params, std::mt19937_64& rng);

/// One city's view of the shared canonical parcel array.
struct CityState {
  std::uint64_t city_id = 0;
  std::vector<std::uint32_t> members;  // canonical indices, ascending
  double urban_km2 = 0.0;              // running realized urban area
};

struct StepOutcome {
  std::vector<std::uint32_t> converted;  // canonical indices, conversion order
  double realized_km2 = 0.0;
  bool shortfall = false;
};

/// One annual step: scores from the year-start state (synchronous update),
/// candidates above the threshold ranked by score descending (parcel_id
/// ascending on ties), converted greedily until the realized area reaches the
/// target. May overshoot by at most one parcel; an unreachable target records
/// a shortfall instead of failing.
StepOutcome step_city(CityState& city, std::vector<LandState>& states,
                      double year_target_km2, const NeighborGraph& g,
                      const std::vector<ParcelRecord>& parcels,
                      const std::vector<double>& local_potentials, const CaParams& params,
                      std::mt19937_64& rng);

struct YearLog {
  double target_km2 = 0.0;
  double realized_km2 = 0.0;
  std::vector<std::uint64_t> converted_ids;  // parcel ids, conversion order
  bool shortfall = false;
};

struct CityTrajectory {
  std::uint64_t city_id = 0;
  double initial_km2 = 0.0;
  double annual_rate = 0.0;
  std::vector<YearLog> years;
};

struct SimulationResult {
  std::uint64_t rng_seed = 0;
  ScenarioKind scenario = ScenarioKind::BAU;
  int horizon_years = 0;
  std::vector<CityTrajectory> cities;   // ascending city_id
  std::vector<LandState> final_states;  // canonical parcel order

  bool any_shortfall() const;
  const CityTrajectory& trajectory(std::uint64_t city_id) const;
};

/// Run every city independently over the scenario horizon. Parcels must be in
/// canonical order with cached features; the graph digest must match the
/// parcel set. Cities run concurrently; each draws from its own rng stream
/// derived from (params.rng_seed, city_id), so results are independent of
/// city processing order and worker count.
SimulationResult simulate(const std::vector<CityRecord>& cities,
                          const std::vector<ParcelRecord>& parcels, const NeighborGraph& g,
                          const ScenarioSpec& scenario, const CaParams& params);

}  // namespace pca
