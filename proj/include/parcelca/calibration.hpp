#pragma once

#include <string>
#include <vector>

namespace pca {

struct ParcelRecord;
struct CityRecord;

/// The four spatial drivers of a parcel's development potential, in the
/// fixed binding order (SIZE_LN, COMPACT, CENTER, DENSITY).
struct FeatureVector {
  double size_ln = 0.0;      // ln of parcel area, in hectares
  double compact = 0.0;      // perimeter^2 / area
  double center_km = 0.0;    // distance from parcel centroid to city center
  double density_std = 0.0;  // log-standardized POI density in [0, 1]
};

/// Logistic-regression weights for the local potential.
struct Coefficients {
  double a0 = 0.0;
  double size_ln = 0.0;
  double compact = 0.0;
  double center_km = 0.0;
  double density_std = 0.0;
  std::string size_unit = "ln_hectares";

  double linear(const FeatureVector& f) const {
    return a0 + size_ln * f.size_ln + compact * f.compact + center_km * f.center_km +
           density_std * f.density_std;
  }

  /// The shipped default calibration (fit on observed parcel expansion).
  static Coefficients defaults();
};

struct CalibrationSample {
  FeatureVector features;
  int label = 0;  // expanded = 1, not expanded = 0
};

/// log(raw)/log(max) clamped to [0, 1]; raw <= 1 maps to 0.
/// max must be > 1 or a config error is raised.
double standardize_density(double raw, double max);

FeatureVector extract_features(const ParcelRecord& parcel, const CityRecord& city,
                               double max_density);

/// Overflow-safe logistic of the linear predictor; strictly inside (0, 1).
double local_potential(const FeatureVector& f, const Coefficients& w);

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;  // convergence on max |delta coefficient|
  double ridge = 0.0;       // optional L2 penalty; 0 = plain MLE
};

struct FitReport {
  Coefficients coefficients;
  bool converged = false;
  int iterations = 0;
  double gradient_inf_norm = 0.0;
  double log_likelihood = 0.0;
};

/// Maximum-likelihood fit of the four-feature model by iteratively
/// reweighted least squares. Requires at least one sample of each label and
/// no feature constant across all samples. Perfect separation is reported as
/// non-converged with the best iterate.
FitReport fit_logistic(const std::vector<CalibrationSample>& samples, const FitOptions& opts = {});

/// General-design fit: rows are feature rows (no intercept column; one is
/// added internally as coefficient 0 of the result).
struct DesignFitReport {
  std::vector<double> beta;  // [intercept, slopes...]
  bool converged = false;
  int iterations = 0;
  double gradient_inf_norm = 0.0;
  double log_likelihood = 0.0;
};

DesignFitReport fit_logistic_design(const std::vector<std::vector<double>>& rows,
                                    const std::vector<int>& labels, const FitOptions& opts = {});

/// Log-likelihood and score of the intercept-augmented design at beta;
/// exposed so tests can check first-order optimality independently.
double logistic_log_likelihood(const std::vector<std::vector<double>>& rows,
                               const std::vector<int>& labels, const std::vector<double>& beta);
std::vector<double> logistic_gradient(const std::vector<std::vector<double>>& rows,
                                      const std::vector<int>& labels,
                                      const std::vector<double>& beta);

/// Fraction of samples whose thresholded potential matches the label.
double classification_precision(const Coefficients& w, const std::vector<CalibrationSample>& samples,
                                double cutoff = 0.5);

}  // namespace pca
