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

// Transmon and resonator parameters, flux tuning, decoherence rates, and the
// linear flux-crosstalk model.
//
// Units: transmon energies and frequencies in GHz (E/h, omega/2pi), couplings
// and detunings in rad/s, times in seconds.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqed/hilbert.hpp"

namespace cqed {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct QubitParams {
  std::string name;
  double ej_max_ghz = 0.0;
  double ec_ghz = 0.0;
  // Signed angular coupling g_j in rad/s.
  double coupling_g = 0.0;
  double bias_frequency_ghz = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;

  void validate() const {
    if (!(ej_max_ghz > 0.0)) throw std::invalid_argument("qubit " + name + ": ej_max must be positive");
    if (!(ec_ghz > 0.0)) throw std::invalid_argument("qubit " + name + ": ec must be positive");
    if (coupling_g == 0.0) throw std::invalid_argument("qubit " + name + ": coupling must be nonzero");
    if (!(t1 > 0.0) || !(t2 > 0.0)) throw std::invalid_argument("qubit " + name + ": t1 and t2 must be positive");
    // 1% slack for measured values.
    if (t2 > 2.0 * t1 * 1.01) throw std::invalid_argument("qubit " + name + ": t2 exceeds 2*t1");
  }

  friend bool operator==(const QubitParams&, const QubitParams&) = default;
};

struct ResonatorParams {
  double omega_r_ghz = 0.0;
  double quality_factor = 0.0;

  void validate() const {
    if (!(omega_r_ghz > 0.0)) throw std::invalid_argument("resonator frequency must be positive");
    if (!(quality_factor > 0.0)) throw std::invalid_argument("resonator quality factor must be positive");
  }

  friend bool operator==(const ResonatorParams&, const ResonatorParams&) = default;
};

class CrosstalkMatrix {
 public:
  CrosstalkMatrix() = default;
  explicit CrosstalkMatrix(Eigen::MatrixXd m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
      throw DimensionError("crosstalk matrix must be square and nonempty");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix_);
    const auto& s = svd.singularValues();
    if (!(s(s.size() - 1) > 0.0) || !std::isfinite(s(0) / s(s.size() - 1)) || s(0) / s(s.size() - 1) > 1e12) {
      throw std::invalid_argument("crosstalk matrix is not invertible");
    }
  }

  static CrosstalkMatrix identity(int n) { return CrosstalkMatrix(Eigen::MatrixXd::Identity(n, n)); }

  // Unit diagonal with every off-diagonal entry equal to `amplitude`.
  static CrosstalkMatrix uniform(int n, double amplitude) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, amplitude);
    m.diagonal().setOnes();
    return CrosstalkMatrix(std::move(m));
  }

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int size() const { return static_cast<int>(matrix_.rows()); }
  bool is_identity() const { return matrix_.isIdentity(0.0); }
  CrosstalkMatrix inverse() const { return CrosstalkMatrix(matrix_.inverse()); }

  friend bool operator==(const CrosstalkMatrix& a, const CrosstalkMatrix& b) {
    return a.matrix_.rows() == b.matrix_.rows() && a.matrix_ == b.matrix_;
  }

 private:
  Eigen::MatrixXd matrix_;
};

struct SystemConfig {
  std::vector<QubitParams> qubits;
  ResonatorParams resonator;
  HilbertSpec spec;
  CrosstalkMatrix crosstalk;

  int num_qubits() const { return static_cast<int>(qubits.size()); }

  void validate() const {
    spec.validate();
    if (!spec.has_cavity()) throw std::invalid_argument("system config needs a cavity mode");
    if (spec.num_qubits < 1) throw std::invalid_argument("system config needs at least one qubit");
    if (num_qubits() != spec.num_qubits) {
      throw std::invalid_argument("config lists " + std::to_string(qubits.size()) + " qubits but the space has " +
                                  std::to_string(spec.num_qubits));
    }
    if (crosstalk.size() != num_qubits()) throw DimensionError("crosstalk matrix size must equal the qubit count");
    resonator.validate();
    for (const auto& q : qubits) q.validate();
  }

  // Delta_j = omega_j - omega_r at the bias point, rad/s.
  double bias_detuning(int j) const {
    return kTwoPi * (qubits.at(j).bias_frequency_ghz - resonator.omega_r_ghz) * 1e9;
  }
  std::vector<double> bias_detunings() const {
    std::vector<double> d;
    for (int j = 0; j < num_qubits(); ++j) d.push_back(bias_detuning(j));
    return d;
  }
  std::vector<double> couplings() const {
    std::vector<double> g;
    for (const auto& q : qubits) g.push_back(q.coupling_g);
    return g;
  }
  // Index of the qubit called `name`, if any.
  std::optional<int> find_qubit(const std::string& name) const {
    for (int j = 0; j < num_qubits(); ++j) {
      if (qubits[j].name == name) return j;
    }
    return std::nullopt;
  }

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

inline constexpr double kDefaultCrosstalkAmplitude = 0.02;

// Three-qubit device: resonator at 7.023 GHz with Q = 14800, transmons A, B, C.
// Couplings are quoted as g/pi in MHz, so g = pi * value * 1e6 rad/s.
inline SystemConfig paper_preset() {
  const double pi = std::numbers::pi;
  SystemConfig c;
  c.resonator = ResonatorParams{7.023, 14800.0};
  c.qubits = {
      QubitParams{"A", 26.8, 0.459, pi * -105.4e6, 6.11, 2.1e-6, 100e-9},
      QubitParams{"B", 28.1, 0.359, pi * 110.8e6, 4.97, 1.8e-6, 140e-9},
      QubitParams{"C", 25.7, 0.358, pi * 111.6e6, 7.82, 1.0e-6, 440e-9},
  };
  c.spec = HilbertSpec{3, 2};
  c.crosstalk = CrosstalkMatrix::identity(3);
  return c;
}

// The same device with a uniform off-diagonal flux-crosstalk error.
inline SystemConfig paper_crosstalk_preset(double amplitude = kDefaultCrosstalkAmplitude) {
  SystemConfig c = paper_preset();
  c.crosstalk = CrosstalkMatrix::uniform(3, amplitude);
  return c;
}

inline std::vector<std::string> preset_names() { return {"paper-default", "paper-crosstalk"}; }

inline SystemConfig preset(const std::string& name) {
  if (name == "paper-default") return paper_preset();
  if (name == "paper-crosstalk") return paper_crosstalk_preset();
  throw std::invalid_argument("unknown preset '" + name + "'");
}

// omega_j / 2pi in GHz at `flux` (units of the flux quantum):
// sqrt(8 E_C E_Jmax |cos(pi flux)|) - E_C. Degenerate near flux = 1/2.
inline double transmon_frequency(double flux, const QubitParams& q) {
  const double ej = q.ej_max_ghz * std::abs(std::cos(std::numbers::pi * flux));
  return std::sqrt(8.0 * q.ec_ghz * ej) - q.ec_ghz;
}

struct DecoherenceRates {
  double gamma1 = 0.0;     // 1/s
  double gamma_phi = 0.0;  // 1/s
  double kappa = 0.0;      // rad/s
};

inline DecoherenceRates decoherence_rates(const QubitParams& q, const ResonatorParams& r) {
  if (!(q.t1 > 0.0) || !(q.t2 > 0.0)) throw std::invalid_argument("t1 and t2 must be positive");
  DecoherenceRates rates;
  rates.gamma1 = 1.0 / q.t1;
  rates.gamma_phi = std::max(0.0, 1.0 / q.t2 - 1.0 / (2.0 * q.t1));
  rates.kappa = kTwoPi * r.omega_r_ghz * 1e9 / r.quality_factor;
  return rates;
}

// Frequency shifts actually produced by commanded flux-pulse shifts.
inline Eigen::VectorXd apply_crosstalk(const Eigen::VectorXd& commanded, const CrosstalkMatrix& xtalk) {
  if (commanded.size() != xtalk.size()) {
    throw DimensionError("commanded detuning vector has length " + std::to_string(commanded.size()) +
                         ", crosstalk matrix is " + std::to_string(xtalk.size()) + "x" +
                         std::to_string(xtalk.size()));
  }
  return xtalk.matrix() * commanded;
}

}  // namespace cqed
