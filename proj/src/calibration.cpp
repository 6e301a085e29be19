#include "parcelca/calibration.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "parcelca/errors.hpp"
#include "parcelca/parcel.hpp"
#include "parcelca/scenarios.hpp"

namespace pca {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// y*z - log(1 + e^z), evaluated without overflow.
double bernoulli_log_likelihood(double z, int y) {
  if (z > 0.0) return (y - 1.0) * z - std::log1p(std::exp(-z));
  return y * z - std::log1p(std::exp(z));
}

Eigen::MatrixXd augmented_design(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d + 1));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != d) fail(ErrorKind::Data, "ragged design matrix");
    x(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = rows[i][j];
    }
  }
  return x;
}

}  // namespace

Coefficients Coefficients::defaults() {
  Coefficients w;
  w.a0 = 2.224;
  w.size_ln = -0.197;
  w.compact = 1.933;
  w.center_km = -0.101;
  w.density_std = 2.230;
  return w;
}

double standardize_density(double raw, double max) {
  if (!(max > 1.0)) fail(ErrorKind::Config, "maximum density must be > 1");
  if (raw < 0.0) fail(ErrorKind::Data, "negative raw density");
  if (raw > max) fail(ErrorKind::Data, "raw density exceeds maximum");
  if (raw <= 1.0) return 0.0;
  const double v = std::log(raw) / std::log(max);
  return std::clamp(v, 0.0, 1.0);
}

FeatureVector extract_features(const ParcelRecord& parcel, const CityRecord& city,
                               double max_density) {
  FeatureVector f;
  f.size_ln = std::log(polygon_area(parcel.polygon) / 1e4);  // hectares
  f.compact = compactness(parcel.polygon);
  f.center_km = distance_km(centroid(parcel.polygon), city.center);
  f.density_std = standardize_density(parcel.raw_density, max_density);
  return f;
}

double local_potential(const FeatureVector& f, const Coefficients& w) {
  return sigmoid(w.linear(f));
}

double logistic_log_likelihood(const std::vector<std::vector<double>>& rows,
                               const std::vector<int>& labels, const std::vector<double>& beta) {
  const Eigen::MatrixXd x = augmented_design(rows);
  if (static_cast<std::size_t>(x.cols()) != beta.size()) {
    fail(ErrorKind::Data, "coefficient length does not match design width");
  }
  const Eigen::Map<const Eigen::VectorXd> b(beta.data(), static_cast<Eigen::Index>(beta.size()));
  const Eigen::VectorXd z = x * b;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    ll += bernoulli_log_likelihood(z(i), labels[static_cast<std::size_t>(i)]);
  }
  return ll;
}

std::vector<double> logistic_gradient(const std::vector<std::vector<double>>& rows,
                                      const std::vector<int>& labels,
                                      const std::vector<double>& beta) {
  const Eigen::MatrixXd x = augmented_design(rows);
  const Eigen::Map<const Eigen::VectorXd> b(beta.data(), static_cast<Eigen::Index>(beta.size()));
  const Eigen::VectorXd z = x * b;
  Eigen::VectorXd resid(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    resid(i) = labels[static_cast<std::size_t>(i)] - sigmoid(z(i));
  }
  const Eigen::VectorXd g = x.transpose() * resid;
  return {g.data(), g.data() + g.size()};
}

DesignFitReport fit_logistic_design(const std::vector<std::vector<double>>& rows,
                                    const std::vector<int>& labels, const FitOptions& opts) {
  if (rows.empty() || rows.size() != labels.size()) {
    fail(ErrorKind::Data, "empty or mismatched sample set");
  }
  int positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) fail(ErrorKind::Data, "labels must be 0 or 1");
    positives += y;
  }
  if (positives == 0 || positives == static_cast<int>(labels.size())) {
    fail(ErrorKind::Data, "need at least one sample of each label");
  }

  const std::size_t d = rows.front().size();
  for (std::size_t j = 0; j < d; ++j) {
    const double first = rows.front()[j];
    bool varies = false;
    for (const auto& r : rows) {
      if (r.size() != d) fail(ErrorKind::Data, "ragged design matrix");
      if (r[j] != first) {
        varies = true;
        break;
      }
    }
    if (!varies) {
      fail(ErrorKind::Data, "feature column " + std::to_string(j) + " is constant across samples");
    }
  }

  const Eigen::MatrixXd x = augmented_design(rows);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();

  {
    const Eigen::MatrixXd gram = x.transpose() * x;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (lu.rank() < p) fail(ErrorKind::Data, "rank-deficient design matrix");
  }

  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)];

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd best_beta = beta;
  double best_ll = -std::numeric_limits<double>::infinity();

  DesignFitReport report;
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const Eigen::VectorXd z = x * beta;
    Eigen::VectorXd prob(n), w(n);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = sigmoid(z(i));
      w(i) = prob(i) * (1.0 - prob(i));
      ll += bernoulli_log_likelihood(z(i), labels[static_cast<std::size_t>(i)]);
    }
    if (opts.ridge > 0.0) ll -= 0.5 * opts.ridge * beta.tail(p - 1).squaredNorm();
    if (ll > best_ll) {
      best_ll = ll;
      best_beta = beta;
    }

    Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x;
    Eigen::VectorXd grad = x.transpose() * (y - prob);
    if (opts.ridge > 0.0) {
      for (Eigen::Index j = 1; j < p; ++j) {  // intercept unpenalized
        hess(j, j) += opts.ridge;
        grad(j) -= opts.ridge * beta(j);
      }
    }

    const Eigen::LDLT<Eigen::MatrixXd> solver(hess);
    if (solver.info() != Eigen::Success) break;
    const Eigen::VectorXd delta = solver.solve(grad);
    if (!delta.allFinite()) break;

    beta += delta;
    report.iterations = iter;
    if (delta.cwiseAbs().maxCoeff() < opts.tolerance) {
      report.converged = true;
      best_beta = beta;
      break;
    }
  }

  if (!report.converged) beta = best_beta;
  report.beta.assign(beta.data(), beta.data() + beta.size());

  std::vector<double> grad = logistic_gradient(rows, labels, report.beta);
  double gmax = 0.0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  report.gradient_inf_norm = gmax;
  report.log_likelihood = logistic_log_likelihood(rows, labels, report.beta);
  return report;
}

FitReport fit_logistic(const std::vector<CalibrationSample>& samples, const FitOptions& opts) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  rows.reserve(samples.size());
  labels.reserve(samples.size());
  for (const CalibrationSample& s : samples) {
    rows.push_back({s.features.size_ln, s.features.compact, s.features.center_km,
                    s.features.density_std});
    labels.push_back(s.label);
  }
  const DesignFitReport fit = fit_logistic_design(rows, labels, opts);

  FitReport report;
  report.coefficients.a0 = fit.beta[0];
  report.coefficients.size_ln = fit.beta[1];
  report.coefficients.compact = fit.beta[2];
  report.coefficients.center_km = fit.beta[3];
  report.coefficients.density_std = fit.beta[4];
  report.converged = fit.converged;
  report.iterations = fit.iterations;
  report.gradient_inf_norm = fit.gradient_inf_norm;
  report.log_likelihood = fit.log_likelihood;
  return report;
}

double classification_precision(const Coefficients& w, const std::vector<CalibrationSample>& samples,
                                double cutoff) {
  if (samples.empty()) fail(ErrorKind::Data, "precision needs at least one sample");
  std::size_t correct = 0;
  for (const CalibrationSample& s : samples) {
    const bool predicted = local_potential(s.features, w) > cutoff;
    if (predicted == (s.label == 1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace pca
