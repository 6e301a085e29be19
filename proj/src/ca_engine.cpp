#include "parcelca/ca.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "parcelca/errors.hpp"
#include "parcelca/parallel.hpp"
#include "parcelca/rng.hpp"

namespace pca {

void CaParams::validate() const {
  if (!(beta >= 0.0 && beta <= 10.0)) fail(ErrorKind::Config, "beta must lie in [0, 10]");
  if (!(p_threshold >= 0.0 && p_threshold <= 1.0)) {
    fail(ErrorKind::Config, "p_threshold must lie in [0, 1]");
  }
}

double neighborhood_potential(std::uint32_t index, const NeighborGraph& g,
                              const std::vector<LandState>& states) {
  if (index >= g.parcel_count) fail(ErrorKind::Data, "parcel index not in neighbor graph");
  if (states.size() != g.parcel_count) fail(ErrorKind::Data, "state vector size mismatch");
  const auto& row = g.adjacency[index];
  if (row.empty()) return 0.0;
  std::size_t urban = 0;
  for (std::uint32_t j : row) {
    if (states[j] == LandState::Urban) ++urban;
  }
  return static_cast<double>(urban) / static_cast<double>(row.size());
}

double stochastic_disturbance(double gamma, double beta) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    fail(ErrorKind::Domain, "gamma must lie strictly inside (0, 1)");
  }
  if (!(beta >= 0.0 && beta <= 10.0)) fail(ErrorKind::Domain, "beta must lie in [0, 10]");
  return 1.0 + std::pow(-std::log(gamma), beta);
}

namespace {

double cached_local_potential(const ParcelRecord& p, const Coefficients& w) {
  if (!p.features) {
    fail(ErrorKind::State,
         "parcel " + std::to_string(p.parcel_id) + " has no cached features");
  }
  return local_potential(*p.features, w);
}

}  // namespace

double transition_probability(std::uint32_t index, const std::vector<LandState>& states,
                              const NeighborGraph& g, const std::vector<ParcelRecord>& parcels,
                              const CaParams& params, std::mt19937_64& rng) {
  if (index >= parcels.size()) fail(ErrorKind::Data, "parcel index out of range");
  const ParcelRecord& p = parcels[index];
  if (p.state == LandState::Urban || states[index] == LandState::Urban) {
    fail(ErrorKind::State, "transition score requested for an urban parcel");
  }
  if (p.excluded) return 0.0;  // con = 0, no draw consumed
  // Non-excluded candidates always consume exactly one draw (when enabled),
  // matching step_city's accounting even for zero-omega parcels.
  const double p_omega = neighborhood_potential(index, g, states);
  const double p_r =
      params.disturbance ? stochastic_disturbance(uniform_open01(rng), params.beta) : 1.0;
  const double p_l = cached_local_potential(p, params.coefficients);
  return p_l * p_omega * p_r;
}

StepOutcome step_city(CityState& city, std::vector<LandState>& states,
                      double year_target_km2, const NeighborGraph& g,
                      const std::vector<ParcelRecord>& parcels,
                      const std::vector<double>& local_potentials, const CaParams& params,
                      std::mt19937_64& rng) {
  StepOutcome out;
  out.realized_km2 = city.urban_km2;
  if (city.urban_km2 >= year_target_km2) return out;  // quota already met

  // Synchronous update: every score is computed against the year-start state;
  // conversions are committed only after the full ranking exists.
  struct Candidate {
    double score;
    std::uint32_t index;
  };
  std::vector<Candidate> eligible;
  for (std::uint32_t i : city.members) {
    if (states[i] == LandState::Urban || parcels[i].excluded) continue;
    const double p_omega = neighborhood_potential(i, g, states);
    const double p_r =
        params.disturbance ? stochastic_disturbance(uniform_open01(rng), params.beta) : 1.0;
    const double score = local_potentials[i] * p_omega * p_r;
    if (score > params.p_threshold) eligible.push_back({score, i});
  }
  std::sort(eligible.begin(), eligible.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return parcels[a.index].parcel_id < parcels[b.index].parcel_id;
  });

  for (const Candidate& c : eligible) {
    if (city.urban_km2 >= year_target_km2) break;
    states[c.index] = LandState::Urban;
    city.urban_km2 += parcel_area_km2(parcels[c.index]);
    out.converted.push_back(c.index);
  }
  out.realized_km2 = city.urban_km2;
  out.shortfall = city.urban_km2 < year_target_km2;
  return out;
}

bool SimulationResult::any_shortfall() const {
  for (const auto& c : cities) {
    for (const auto& y : c.years) {
      if (y.shortfall) return true;
    }
  }
  return false;
}

const CityTrajectory& SimulationResult::trajectory(std::uint64_t city_id) const {
  const auto it = std::lower_bound(
      cities.begin(), cities.end(), city_id,
      [](const CityTrajectory& t, std::uint64_t id) { return t.city_id < id; });
  if (it == cities.end() || it->city_id != city_id) {
    fail(ErrorKind::Data, "no trajectory for city " + std::to_string(city_id));
  }
  return *it;
}

SimulationResult simulate(const std::vector<CityRecord>& cities,
                          const std::vector<ParcelRecord>& parcels, const NeighborGraph& g,
                          const ScenarioSpec& scenario, const CaParams& params) {
  params.validate();
  scenario.validate();
  if (!is_canonical(parcels)) {
    fail(ErrorKind::Data, "parcels must be sorted by parcel_id before simulation");
  }
  if (g.parcel_count != parcels.size() || g.digest_hex != parcel_set_digest(parcels)) {
    fail(ErrorKind::StaleCache, "neighbor graph does not match the parcel set");
  }

  std::map<std::uint64_t, const CityRecord*> city_by_id;
  for (const auto& c : cities) {
    validate_city(c);
    if (!city_by_id.emplace(c.city_id, &c).second) {
      fail(ErrorKind::Data, "duplicate city_id " + std::to_string(c.city_id));
    }
  }

  std::map<std::uint64_t, CityState> city_states;
  for (std::uint32_t i = 0; i < parcels.size(); ++i) {
    const std::uint64_t cid = parcels[i].city_id;
    if (!city_by_id.count(cid)) {
      fail(ErrorKind::Data, "parcel " + std::to_string(parcels[i].parcel_id) +
                                " references unknown city " + std::to_string(cid));
    }
    auto& cs = city_states[cid];
    cs.city_id = cid;
    cs.members.push_back(i);
    if (parcels[i].state == LandState::Urban) cs.urban_km2 += parcel_area_km2(parcels[i]);
  }
  for (const auto& c : cities) {
    auto& cs = city_states[c.city_id];  // cities without parcels still simulate
    cs.city_id = c.city_id;
  }

  // P_l depends only on static features, so it is evaluated once up front.
  std::vector<double> local_potentials(parcels.size(), 0.0);
  parallel_for(parcels.size(), params.jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (parcels[i].state == LandState::NonUrban && !parcels[i].excluded) {
        local_potentials[i] = cached_local_potential(parcels[i], params.coefficients);
      }
    }
  });

  std::vector<CityState*> order;
  order.reserve(city_states.size());
  for (auto& [cid, cs] : city_states) order.push_back(&cs);

  SimulationResult result;
  result.rng_seed = params.rng_seed;
  result.scenario = scenario.kind;
  result.horizon_years = scenario.horizon_years;
  result.final_states.resize(parcels.size());
  for (std::size_t i = 0; i < parcels.size(); ++i) result.final_states[i] = parcels[i].state;
  result.cities.resize(order.size());

  // Cities share nothing: disjoint member sets, per-city rng streams, and
  // per-city result slots, so chunked workers cannot interact.
  parallel_for(order.size(), params.jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t ci = begin; ci < end; ++ci) {
      CityState& cs = *order[ci];
      const CityRecord& record = *city_by_id.at(cs.city_id);
      const double rate = resolve_rate(record, scenario);
      const std::vector<double> targets = target_areas(record, scenario);
      std::mt19937_64 rng = make_engine(params.rng_seed, cs.city_id);

      CityTrajectory& traj = result.cities[ci];
      traj.city_id = cs.city_id;
      traj.initial_km2 = cs.urban_km2;
      traj.annual_rate = rate;
      traj.years.resize(targets.size());
      for (std::size_t t = 0; t < targets.size(); ++t) {
        StepOutcome step = step_city(cs, result.final_states, targets[t], g, parcels,
                                     local_potentials, params, rng);
        YearLog& log = traj.years[t];
        log.target_km2 = targets[t];
        log.realized_km2 = step.realized_km2;
        log.shortfall = step.shortfall;
        log.converted_ids.reserve(step.converted.size());
        for (std::uint32_t idx : step.converted) {
          log.converted_ids.push_back(parcels[idx].parcel_id);
        }
      }
    }
  });

  return result;
}

}  // namespace pca
