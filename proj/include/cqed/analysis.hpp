// Copyright 2026 The cqed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Oscillation-frequency extraction and the f^2-versus-N regression.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

namespace cqed {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model: offset + amplitude * exp(-decay_rate t) * cos(2 pi frequency t + phase).
struct FitReport {
  double frequency = 0.0;   // Hz
  double amplitude = 0.0;
  double phase = 0.0;       // rad, in (-pi, pi]
  double decay_rate = 0.0;  // 1/s
  double offset = 0.0;
  double residual_rms = 0.0;
  double frequency_stderr = 0.0;  // Hz, from the Gauss-Newton covariance
  double jtj_condition = 0.0;     // of the scaled normal matrix
  int iterations = 0;

  double evaluate(double t) const {
    return offset + amplitude * std::exp(-decay_rate * t) * std::cos(2.0 * std::numbers::pi * frequency * t + phase);
  }
};

namespace detail {

inline constexpr double kTwoPiFit = 2.0 * std::numbers::pi;

// Peak of the zero-padded periodogram of the mean-removed samples, refined by
// parabolic interpolation. Frequency in units of 1/time.
inline double periodogram_peak(const std::vector<double>& t, const std::vector<double>& y, double mean) {
  const auto n = t.size();
  const double span = t.back() - t.front();
  const double nyquist = 0.5 * static_cast<double>(n - 1) / span;
  constexpr int kPadding = 16;
  const double df = 1.0 / (kPadding * span);
  const auto bins = static_cast<std::size_t>(std::ceil(nyquist / df)) + 1;
  std::vector<double> power(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = df * static_cast<double>(k);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = kTwoPiFit * f * (t[i] - t.front());
      re += (y[i] - mean) * std::cos(arg);
      im -= (y[i] - mean) * std::sin(arg);
    }
    power[k] = re * re + im * im;
  }
  // Skip the DC lobe: start after the first local minimum.
  std::size_t start = 1;
  while (start + 1 < bins && power[start] < power[start - 1]) ++start;
  const auto peak = static_cast<std::size_t>(
      std::max_element(power.begin() + static_cast<long>(start - 1), power.end()) - power.begin());
  if (!(power[peak] > 0.0)) throw FitError("no dominant spectral peak");
  double offset = 0.0;
  if (peak > 0 && peak + 1 < bins) {
    const double l = power[peak - 1], c = power[peak], r = power[peak + 1];
    const double denom = l - 2.0 * c + r;
    if (denom < 0.0) offset = 0.5 * (l - r) / denom;
  }
  return df * (static_cast<double>(peak) + offset);
}

// Residuals over scaled time s = (t - t0) / span; parameters
// (offset, amplitude, decay, frequency, phase) in scaled units.
struct DampedCosineFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<double>& s;
  const std::vector<double>& y;

  int inputs() const { return 5; }
  int values() const { return static_cast<int>(s.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double env = std::exp(-p(2) * s[i]);
      r(static_cast<Eigen::Index>(i)) = p(0) + p(1) * env * std::cos(kTwoPiFit * p(3) * s[i] + p(4)) - y[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double env = std::exp(-p(2) * s[i]);
      const double arg = kTwoPiFit * p(3) * s[i] + p(4);
      const double c = std::cos(arg);
      const double sn = std::sin(arg);
      j(row, 0) = 1.0;
      j(row, 1) = env * c;
      j(row, 2) = -s[i] * p(1) * env * c;
      j(row, 3) = -p(1) * env * sn * kTwoPiFit * s[i];
      j(row, 4) = -p(1) * env * sn;
    }
    return 0;
  }
};

inline double wrap_phase(double a) {
  a = std::remainder(a, kTwoPiFit);
  return a <= -std::numbers::pi ? a + kTwoPiFit : a;
}

}  // namespace detail

// Least-squares damped-cosine fit seeded by the periodogram peak.
inline FitReport fit_damped_sinusoid(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size()) throw std::invalid_argument("times and values differ in length");
  if (times.size() < 8) throw std::invalid_argument("fit needs at least 8 samples");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("times must be strictly increasing");
  }
  const double t0 = times.front();
  const double span = times.back() - t0;
  std::vector<double> s(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) s[i] = (times[i] - t0) / span;

  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  if (std::sqrt(var) <= 1e-12 * std::max(1.0, std::abs(mean))) throw FitError("no dominant spectral peak");

  const double f_seed = detail::periodogram_peak(s, values, mean);
  if (f_seed < 0.5) throw FitError("record shorter than one period of the dominant tone");

  // Linear seed for amplitude and phase at the seeded frequency.
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(s.size()), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    basis(r, 0) = 1.0;
    basis(r, 1) = std::cos(detail::kTwoPiFit * f_seed * s[i]);
    basis(r, 2) = std::sin(detail::kTwoPiFit * f_seed * s[i]);
    rhs(r) = values[i];
  }
  const Eigen::Vector3d lin = basis.colPivHouseholderQr().solve(rhs);
  Eigen::VectorXd p(5);
  p << lin(0), std::hypot(lin(1), lin(2)), 0.0, f_seed, std::atan2(-lin(2), lin(1));

  detail::DampedCosineFunctor functor{s, values};
  Eigen::LevenbergMarquardt<detail::DampedCosineFunctor> lm(functor);
  lm.parameters.maxfev = 2000;
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  const auto status = lm.minimize(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
      status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation || !p.allFinite()) {
    throw FitError("damped sinusoid fit did not converge (status " + std::to_string(static_cast<int>(status)) + ")");
  }

  double amplitude = p(1);
  double phase = p(4);
  double freq_scaled = p(3);
  if (amplitude < 0.0) {
    amplitude = -amplitude;
    phase += std::numbers::pi;
  }
  if (freq_scaled < 0.0) {
    freq_scaled = -freq_scaled;
    phase = -phase;
  }

  Eigen::VectorXd r(static_cast<Eigen::Index>(s.size()));
  functor(p, r);
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(s.size()), 5);
  functor.df(p, jac);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jtj);
  const auto& sv = svd.singularValues();

  FitReport report;
  report.frequency = freq_scaled / span;
  report.decay_rate = p(2) / span;
  // Shift the reference time from t0 back to zero.
  report.amplitude = amplitude * std::exp(report.decay_rate * t0);
  report.phase = detail::wrap_phase(phase - detail::kTwoPiFit * report.frequency * t0);
  report.offset = p(0);
  report.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(s.size()));
  report.jtj_condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
  const auto dof = static_cast<double>(s.size()) - 5.0;
  if (dof > 0 && sv(sv.size() - 1) > 0.0) {
    const double sigma2 = r.squaredNorm() / dof;
    const Eigen::MatrixXd cov = sigma2 * jtj.inverse();
    report.frequency_stderr = std::sqrt(std::max(0.0, cov(3, 3))) / span;
  }
  report.iterations = static_cast<int>(lm.iter);
  if (!std::isfinite(report.residual_rms)) throw FitError("fit produced a non-finite residual");
  return report;
}

struct ScalingReport {
  std::vector<int> n_values;
  std::vector<double> frequencies;  // Hz
  double slope = 0.0;               // Hz^2 per qubit
  double intercept = 0.0;           // Hz^2
  double r_squared = 0.0;
};

// Ordinary least squares of f_N^2 against N.
inline ScalingReport sqrtN_regression(const std::vector<std::pair<int, FitReport>>& reports) {
  std::set<int> distinct;
  for (const auto& [n, r] : reports) distinct.insert(n);
  if (distinct.size() < 2) throw std::invalid_argument("sqrt(N) regression needs at least two distinct N");
  ScalingReport out;
  const auto m = static_cast<Eigen::Index>(reports.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& [n, r] = reports[static_cast<std::size_t>(i)];
    out.n_values.push_back(n);
    out.frequencies.push_back(r.frequency);
    a(i, 0) = static_cast<double>(n);
    a(i, 1) = 1.0;
    b(i) = r.frequency * r.frequency;
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  out.slope = coef(0);
  out.intercept = coef(1);
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (a * coef - b).squaredNorm();
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

}  // namespace cqed
