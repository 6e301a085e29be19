#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "parcelca/calibration.hpp"
#include "parcelca/errors.hpp"
#include "parcelca/parcel.hpp"
#include "parcelca/rng.hpp"
#include "parcelca/scenarios.hpp"

using namespace pca;
using testutil::make_parcel;
using testutil::planted_samples;
using testutil::square_at;

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

TEST_CASE("density standardization fixtures") {
  CHECK(standardize_density(10000.0, 10000.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(standardize_density(1.0, 10000.0) == 0.0);
  CHECK(standardize_density(0.0, 10000.0) == 0.0);
  CHECK(standardize_density(0.5, 10000.0) == 0.0);  // raw <= 1 clamps to zero
  CHECK(standardize_density(100.0, 10000.0) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(standardize_density(0.5, 1.0), Error);
  CHECK_THROWS_AS(standardize_density(0.5, 0.0), Error);
  CHECK_THROWS_AS(standardize_density(200.0, 100.0), Error);  // raw above max

  // Monotone non-decreasing in raw.
  double prev = -1.0;
  for (double raw = 0.0; raw <= 5000.0; raw += 61.7) {
    const double v = standardize_density(raw, 5000.0);
    CHECK(v >= prev);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("feature extraction composes the geometry oracles") {
  CityRecord city;
  city.city_id = 1;
  city.name = "C";
  city.center = {0.0, 0.0};
  city.urban_area_2007_km2 = 10.0;
  city.urban_area_2012_km2 = 12.0;

  // A 1-hectare square whose centroid sits 1 km from the center, at max density.
  const ParcelRecord one_ha = make_parcel(1, 1, square_at(950, -50, 100), LandState::NonUrban,
                                          5000.0);
  const FeatureVector f = extract_features(one_ha, city, 5000.0);
  CHECK(f.size_ln == doctest::Approx(0.0).epsilon(1e-12));  // ln(1 ha)
  CHECK(f.compact == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(f.center_km == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.density_std == doctest::Approx(1.0).epsilon(1e-12));

  // A 10-hectare square: size_ln = ln(10).
  const ParcelRecord ten_ha =
      make_parcel(2, 1, square_at(0, 0, 316.2277660168379), LandState::NonUrban, 100.0);
  const FeatureVector f10 = extract_features(ten_ha, city, 5000.0);
  CHECK(f10.size_ln == doctest::Approx(std::log(10.0)).epsilon(1e-9));

  // Each component matches its per-operation oracle on an irregular parcel.
  std::mt19937_64 rng = make_engine(31, 0);
  const Polygon poly = testutil::random_star_polygon(rng, {2500, -1800}, 60, 220, 11);
  const ParcelRecord p = make_parcel(3, 1, poly, LandState::NonUrban, 777.0);
  const FeatureVector fr = extract_features(p, city, 5000.0);
  CHECK(fr.size_ln == doctest::Approx(std::log(poly.area() / 1e4)).epsilon(1e-12));
  CHECK(fr.compact == doctest::Approx(compactness(poly)).epsilon(1e-12));
  CHECK(fr.center_km == doctest::Approx(distance_km(centroid(poly), city.center)).epsilon(1e-12));
  CHECK(fr.density_std == doctest::Approx(standardize_density(777.0, 5000.0)).epsilon(1e-12));
}

TEST_CASE("local potential scalar fixtures") {
  const Coefficients zero;  // all-zero weights
  FeatureVector f;
  f.size_ln = 3.7;
  f.compact = 21.0;
  f.center_km = 4.4;
  f.density_std = 0.3;
  CHECK(local_potential(f, zero) == doctest::Approx(0.5).epsilon(1e-12));

  const Coefficients w = Coefficients::defaults();
  CHECK(w.a0 == 2.224);
  CHECK(w.size_ln == -0.197);
  CHECK(w.compact == 1.933);
  CHECK(w.center_km == -0.101);
  CHECK(w.density_std == 2.230);
  CHECK(w.size_unit == "ln_hectares");

  // Default weights with all-zero features reduce to sigma(a0).
  CHECK(local_potential(FeatureVector{}, w) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-2.224))).epsilon(1e-12));
  CHECK(local_potential(FeatureVector{}, w) == doctest::Approx(0.9022).epsilon(1e-4));

  // Large positive linear term saturates to just under 1 without overflow.
  FeatureVector big;
  big.size_ln = 2.3026;
  big.compact = 16.0;
  big.center_km = 5.0;
  big.density_std = 0.8;
  const double linear = 2.224 - 0.197 * 2.3026 + 1.933 * 16.0 - 0.101 * 5.0 + 2.230 * 0.8;
  CHECK(local_potential(big, w) == doctest::Approx(1.0 / (1.0 + std::exp(-linear))).epsilon(1e-12));
  CHECK(local_potential(big, w) > 0.999999);
  CHECK(local_potential(big, w) < 1.0);

  // Saturating inputs stay bounded; moderate scores stay strictly interior.
  FeatureVector huge;
  huge.compact = 1e6;  // sigma rounds to 1.0 in double precision
  CHECK(local_potential(huge, w) <= 1.0);
  CHECK(local_potential(huge, w) >= local_potential(FeatureVector{}, w));
  huge.compact = 15.0;  // score ~ 31: large but unsaturated
  CHECK(local_potential(huge, w) < 1.0);
  CHECK(local_potential(huge, w) > 0.0);
  huge.compact = 0.0;
  huge.center_km = 300.0;  // score ~ -28
  CHECK(local_potential(huge, w) > 0.0);
  CHECK(local_potential(huge, w) < 1.0);
}

TEST_CASE("local potential monotonicity and logistic symmetry") {
  const Coefficients w = Coefficients::defaults();
  std::mt19937_64 rng = make_engine(32, 0);
  for (int i = 0; i < 200; ++i) {
    // Ranges keep the linear score within roughly [-3, 17] so the logistic
    // never saturates to an exact 0 or 1 and strict comparisons stay sharp.
    FeatureVector f;
    f.size_ln = uniform_range(rng, -3.0, 5.0);
    f.compact = uniform_range(rng, 0.0, 6.0);
    f.center_km = uniform_range(rng, 0.0, 40.0);
    f.density_std = uniform_range(rng, 0.0, 1.0);
    const double base = local_potential(f, w);

    FeatureVector up = f;
    up.compact += 0.5;  // positive coefficient -> potential rises
    CHECK(local_potential(up, w) > base);

    FeatureVector down = f;
    down.center_km += 0.5;  // negative coefficient -> potential falls
    CHECK(local_potential(down, w) < base);

    // sigma(x) + sigma(-x) = 1: negate the whole linear term.
    Coefficients neg = w;
    neg.a0 = -w.a0;
    neg.size_ln = -w.size_ln;
    neg.compact = -w.compact;
    neg.center_km = -w.center_km;
    neg.density_std = -w.density_std;
    CHECK(local_potential(f, w) + local_potential(f, neg) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("gradient matches finite differences of the log-likelihood") {
  const std::vector<CalibrationSample> samples =
      planted_samples(400, Coefficients::defaults(), 5);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (const CalibrationSample& s : samples) {
    rows.push_back({s.features.size_ln, s.features.compact, s.features.center_km,
                    s.features.density_std});
    labels.push_back(s.label);
  }

  const std::vector<double> beta = {0.3, -0.1, 0.8, -0.05, 1.1};
  const std::vector<double> grad = logistic_gradient(rows, labels, beta);
  REQUIRE(grad.size() == 5);

  const double h = 1e-6;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    std::vector<double> plus = beta, minus = beta;
    plus[k] += h;
    minus[k] -= h;
    const double fd = (logistic_log_likelihood(rows, labels, plus) -
                       logistic_log_likelihood(rows, labels, minus)) /
                      (2.0 * h);
    CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("two-group toy fit matches the closed-form logit of group means") {
  // One binary feature; group x=0 is 30% positive, group x=1 is 80% positive.
  // The saturated model has the closed form a0 = logit(0.3),
  // slope = logit(0.8) - logit(0.3).
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  auto add = [&](double x, int label, int count) {
    for (int i = 0; i < count; ++i) {
      rows.push_back({x});
      labels.push_back(label);
    }
  };
  add(0.0, 1, 30);
  add(0.0, 0, 70);
  add(1.0, 1, 80);
  add(1.0, 0, 20);

  const DesignFitReport fit = fit_logistic_design(rows, labels);
  CHECK(fit.converged);
  REQUIRE(fit.beta.size() == 2);
  CHECK(fit.beta[0] == doctest::Approx(logit(0.3)).epsilon(1e-6));
  CHECK(fit.beta[1] == doctest::Approx(logit(0.8) - logit(0.3)).epsilon(1e-6));
  CHECK(fit.gradient_inf_norm < 1e-6);
}

TEST_CASE("null model recovers the base rate with near-zero slopes") {
  // Labels drawn independently of the features at rate 0.35.
  std::mt19937_64 rng = make_engine(34, 0);
  std::vector<CalibrationSample> samples;
  for (int i = 0; i < 20000; ++i) {
    CalibrationSample s;
    s.features.size_ln = 5.0 * testutil::normal01(rng);
    s.features.compact = testutil::normal01(rng);
    s.features.center_km = 10.0 * testutil::normal01(rng);
    s.features.density_std = uniform_range(rng, -1.0, 1.0);
    s.label = uniform01(rng) < 0.35 ? 1 : 0;
    samples.push_back(s);
  }
  const FitReport fit = fit_logistic(samples);
  CHECK(fit.converged);
  CHECK(fit.coefficients.a0 == doctest::Approx(logit(0.35)).epsilon(0.1));
  // Null slopes: a few standard errors of zero given n = 20,000.
  CHECK(std::abs(fit.coefficients.size_ln) < 0.02);
  CHECK(std::abs(fit.coefficients.compact) < 0.1);
  CHECK(std::abs(fit.coefficients.center_km) < 0.01);
  CHECK(std::abs(fit.coefficients.density_std) < 0.15);
}

TEST_CASE("planted-model fit recovers the generator within tolerance") {
  // Smaller cousin of the acceptance-scale recovery run.
  const Coefficients truth = Coefficients::defaults();
  const std::vector<CalibrationSample> samples = planted_samples(20000, truth, 6);
  const FitReport fit = fit_logistic(samples);
  CHECK(fit.converged);
  CHECK(fit.gradient_inf_norm < 1e-6);
  CHECK(fit.coefficients.a0 == doctest::Approx(truth.a0).epsilon(0.10));
  CHECK(fit.coefficients.size_ln == doctest::Approx(truth.size_ln).epsilon(0.10));
  CHECK(fit.coefficients.compact == doctest::Approx(truth.compact).epsilon(0.10));
  CHECK(fit.coefficients.center_km == doctest::Approx(truth.center_km).epsilon(0.10));
  CHECK(fit.coefficients.density_std == doctest::Approx(truth.density_std).epsilon(0.10));

  // Precision on a held-out draw beats 0.8, mirroring the calibration target.
  const std::vector<CalibrationSample> held_out = planted_samples(10000, truth, 7);
  CHECK(classification_precision(fit.coefficients, held_out) >= 0.8);
}

TEST_CASE("degenerate designs are rejected; separation is reported") {
  // Single-label input.
  std::vector<CalibrationSample> one_label(10);
  for (CalibrationSample& s : one_label) s.label = 1;
  CHECK_THROWS_AS(fit_logistic(one_label), Error);

  // A constant feature column makes the design rank-deficient.
  std::vector<CalibrationSample> constant_col;
  std::mt19937_64 rng = make_engine(35, 0);
  for (int i = 0; i < 50; ++i) {
    CalibrationSample s;
    s.features.size_ln = testutil::normal01(rng);
    s.features.compact = 3.0;  // constant: collinear with the intercept
    s.features.center_km = testutil::normal01(rng);
    s.features.density_std = uniform_range(rng, 0.0, 1.0);
    s.label = i % 2;
    constant_col.push_back(s);
  }
  CHECK_THROWS_AS(fit_logistic(constant_col), Error);

  // Perfectly separable data: non-converged, finite best iterate.
  std::vector<CalibrationSample> separable;
  for (int i = 0; i < 60; ++i) {
    CalibrationSample s;
    s.features.size_ln = i < 30 ? -2.0 - 0.01 * i : 2.0 + 0.01 * i;
    s.features.compact = testutil::normal01(rng);
    s.features.center_km = testutil::normal01(rng);
    s.features.density_std = uniform_range(rng, 0.0, 1.0);
    s.label = i < 30 ? 0 : 1;
    separable.push_back(s);
  }
  const FitReport sep = fit_logistic(separable);
  CHECK_FALSE(sep.converged);
  CHECK(std::isfinite(sep.coefficients.size_ln));

  // Ridge tames the same data into a converged fit.
  FitOptions ridge;
  ridge.ridge = 1.0;
  const FitReport tamed = fit_logistic(separable, ridge);
  CHECK(tamed.converged);
}

TEST_CASE("classification precision fixtures") {
  std::vector<CalibrationSample> samples(4);
  samples[0].features.size_ln = 5.0;
  samples[0].label = 1;
  samples[1].features.size_ln = 5.0;
  samples[1].label = 1;
  samples[2].features.size_ln = -5.0;
  samples[2].label = 0;
  samples[3].features.size_ln = -5.0;
  samples[3].label = 1;  // the one miss

  Coefficients w;
  w.size_ln = 2.0;  // potential > 0.5 iff size_ln > 0
  CHECK(classification_precision(w, samples) == doctest::Approx(0.75).epsilon(1e-12));

  // All correct.
  samples[3].label = 0;
  CHECK(classification_precision(w, samples) == doctest::Approx(1.0).epsilon(1e-12));

  // A constant coin-flip model on balanced labels scores one half.
  Coefficients coin;  // potential exactly 0.5 everywhere, never above cutoff
  std::vector<CalibrationSample> balanced(10);
  for (int i = 0; i < 10; ++i) balanced[i].label = i % 2;
  CHECK(classification_precision(coin, balanced) == doctest::Approx(0.5).epsilon(1e-12));
}
