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

// Joint dispersive readout tomography of three qubits.
//
// The readout observable M is diagonal, M = sum_S c_S Z_S over the eight
// Z-strings {Id, Z_A, Z_B, Z_C, Z_AZ_B, Z_AZ_C, Z_BZ_C, Z_AZ_BZ_C}. The
// 64 measured operators are U^dag M U with U = u_C (x) u_B (x) u_A and
// u in {Id, Rx(pi), Rx(pi/2), Ry(pi/2)}.
//
// States are expanded as rho = sum_P x_P P / 8 over the 64 Pauli strings,
// x_P = Tr(rho P). Normalization fixes x_Id = 1, so reconstruction solves for
// the 63 remaining coefficients.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqed/hilbert.hpp"
#include "cqed/protocols.hpp"

namespace cqed {

inline constexpr int kTomographyQubits = 3;
inline constexpr Index kTomographyDim = 8;
inline constexpr int kPauliCount = 64;

class IncompleteReadoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Pauli string k = 16 c + 4 b + a with digits I=0, X=1, Y=2, Z=3 for qubits
// C, B, A. Labels read in ket order, e.g. "IIZ" is Z on qubit A.
inline Matrix2 pauli_matrix(int digit) {
  switch (digit) {
    case 0:
      return identity2();
    case 1:
      return sigma_x();
    case 2:
      return sigma_y();
    default:
      return sigma_z();
  }
}

inline std::string pauli_label(int k) {
  static constexpr char kLetters[] = {'I', 'X', 'Y', 'Z'};
  return {kLetters[(k >> 4) & 3], kLetters[(k >> 2) & 3], kLetters[k & 3]};
}

inline Matrix kron3(const Matrix2& c, const Matrix2& b, const Matrix2& a) {
  return Eigen::kroneckerProduct(c, Eigen::kroneckerProduct(b, a).eval()).eval();
}

inline Matrix pauli_string(int k) { return kron3(pauli_matrix((k >> 4) & 3), pauli_matrix((k >> 2) & 3), pauli_matrix(k & 3)); }

// Coefficient order of the readout: Id, Z_A, Z_B, Z_C, Z_AZ_B, Z_AZ_C, Z_BZ_C, Z_AZ_BZ_C.
inline constexpr std::array<int, 8> kReadoutPauliIndex = {0, 3, 12, 48, 15, 51, 60, 63};

using ReadoutCoefficients = std::array<double, 8>;

inline constexpr ReadoutCoefficients kDefaultReadout = {0.0, 1.0, 0.9, 0.8, 0.3, 0.25, 0.2, 0.1};

struct ReadoutOperator {
  ReadoutCoefficients coefficients;
  Matrix matrix;  // 8x8 diagonal
};

inline ReadoutOperator build_readout(const ReadoutCoefficients& c) {
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] == 0.0 || !std::isfinite(c[i])) {
      throw IncompleteReadoutError("readout coefficient " + std::to_string(i) +
                                   " is zero; every Z-string must contribute for tomographic completeness");
    }
  }
  if (!std::isfinite(c[0])) throw std::invalid_argument("readout identity coefficient must be finite");
  Matrix m = Matrix::Zero(kTomographyDim, kTomographyDim);
  for (std::size_t i = 0; i < c.size(); ++i) m += c[i] * pauli_string(kReadoutPauliIndex[i]);
  return ReadoutOperator{c, std::move(m)};
}

enum class PreRotation { id, x180, x90, y90 };

inline constexpr std::array<PreRotation, 4> kPreRotations = {PreRotation::id, PreRotation::x180, PreRotation::x90,
                                                             PreRotation::y90};

inline std::string to_string(PreRotation r) {
  switch (r) {
    case PreRotation::id:
      return "I";
    case PreRotation::x180:
      return "X180";
    case PreRotation::x90:
      return "X90";
    case PreRotation::y90:
      return "Y90";
  }
  return "I";
}

inline std::optional<PreRotation> parse_pre_rotation(const std::string& s) {
  for (auto r : kPreRotations) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

inline Matrix2 pre_rotation_matrix(PreRotation r) {
  switch (r) {
    case PreRotation::id:
      return identity2();
    case PreRotation::x180:
      return rotation_matrix(Axis::x, std::numbers::pi);
    case PreRotation::x90:
      return rotation_matrix(Axis::x, std::numbers::pi / 2);
    case PreRotation::y90:
      return rotation_matrix(Axis::y, std::numbers::pi / 2);
  }
  return identity2();
}

// Pre-rotations indexed by qubit: {A, B, C}.
using RotationTriple = std::array<PreRotation, 3>;

inline std::string to_string(const RotationTriple& t) {
  return to_string(t[0]) + "," + to_string(t[1]) + "," + to_string(t[2]);
}

struct MeasurementOperator {
  RotationTriple rotations;
  Matrix matrix;  // U^dag M U
};

inline MeasurementOperator conjugated_readout(const ReadoutOperator& m, const RotationTriple& r) {
  const Matrix u = kron3(pre_rotation_matrix(r[2]), pre_rotation_matrix(r[1]), pre_rotation_matrix(r[0]));
  return MeasurementOperator{r, u.adjoint() * m.matrix * u};
}

namespace detail {

// Row i holds Tr(O_i P_k) / 8 for k = 0..63.
inline Eigen::MatrixXd pauli_design(const std::vector<MeasurementOperator>& ops) {
  Eigen::MatrixXd d(static_cast<Index>(ops.size()), kPauliCount);
  for (int k = 0; k < kPauliCount; ++k) {
    const Matrix p = pauli_string(k);
    for (std::size_t i = 0; i < ops.size(); ++i) {
      d(static_cast<Index>(i), k) = (ops[i].matrix * p).trace().real() / 8.0;
    }
  }
  return d;
}

inline int numeric_rank(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double tol = 1e-10 * std::max(1.0, s(0));
  return static_cast<int>((s.array() > tol).count());
}

}  // namespace detail

class TomographySet {
 public:
  static constexpr int kCompleteRank = 64;

  TomographySet(ReadoutOperator readout, std::vector<MeasurementOperator> ops)
      : readout_(std::move(readout)), operators_(std::move(ops)) {
    design_ = detail::pauli_design(operators_);
  }

  const ReadoutOperator& readout() const { return readout_; }
  const std::vector<MeasurementOperator>& operators() const { return operators_; }
  std::size_t size() const { return operators_.size(); }
  const Eigen::MatrixXd& design_matrix() const { return design_; }

  // Rank of the measured operators together with the normalization row;
  // 64 means every density-matrix coefficient is determined.
  int rank() const {
    Eigen::MatrixXd augmented(design_.rows() + 1, design_.cols());
    augmented.topRows(design_.rows()) = design_;
    augmented.bottomRows(1).setZero();
    augmented(design_.rows(), 0) = 1.0;
    return detail::numeric_rank(augmented);
  }

  // Rank of the measured operators alone.
  int operator_rank() const { return detail::numeric_rank(design_); }

  std::optional<std::size_t> find(const RotationTriple& r) const {
    for (std::size_t i = 0; i < operators_.size(); ++i) {
      if (operators_[i].rotations == r) return i;
    }
    return std::nullopt;
  }

 private:
  ReadoutOperator readout_;
  std::vector<MeasurementOperator> operators_;
  Eigen::MatrixXd design_;
};

// All 64 triples, qubit A varying fastest.
inline std::vector<RotationTriple> tomography_rotations() {
  std::vector<RotationTriple> out;
  for (auto c : kPreRotations) {
    for (auto b : kPreRotations) {
      for (auto a : kPreRotations) out.push_back({a, b, c});
    }
  }
  return out;
}

inline TomographySet tomography_set(const ReadoutOperator& m) {
  std::vector<MeasurementOperator> ops;
  for (const auto& r : tomography_rotations()) ops.push_back(conjugated_readout(m, r));
  TomographySet set(m, std::move(ops));
  if (set.rank() != TomographySet::kCompleteRank) {
    throw IncompleteReadoutError("tomography set has rank " + std::to_string(set.rank()) + " < 64");
  }
  return set;
}

// The eight diagonal operators with u in {Id, Rx(pi)} per qubit.
inline TomographySet population_set(const ReadoutOperator& m) {
  std::vector<MeasurementOperator> ops;
  for (auto c : {PreRotation::id, PreRotation::x180}) {
    for (auto b : {PreRotation::id, PreRotation::x180}) {
      for (auto a : {PreRotation::id, PreRotation::x180}) ops.push_back(conjugated_readout(m, {a, b, c}));
    }
  }
  return TomographySet(m, std::move(ops));
}

struct MeasurementRecord {
  RotationTriple rotations;
  double noiseless = 0.0;
  double noisy = 0.0;
  double sigma = 0.0;
};

// Tr(O rho) plus Gaussian noise; deterministic for a given seed. An empty
// `sigmas` uses `sigma` for every operator.
inline std::vector<MeasurementRecord> simulate_measurements(const DensityMatrix& rho, const TomographySet& set,
                                                            double sigma, std::uint64_t seed,
                                                            const std::vector<double>& sigmas = {}) {
  if (rho.dim() != kTomographyDim) throw DimensionError("tomography acts on three-qubit states");
  if (sigma < 0.0) throw std::invalid_argument("noise sigma must be nonnegative");
  if (!sigmas.empty() && sigmas.size() != set.size()) throw DimensionError("one sigma per operator required");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<MeasurementRecord> out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& op = set.operators()[i];
    const double s = sigmas.empty() ? sigma : sigmas[i];
    if (s < 0.0) throw std::invalid_argument("noise sigma must be nonnegative");
    const double value = (op.matrix.cwiseProduct(rho.matrix().transpose())).sum().real();
    const double z = normal(rng);
    out.push_back({op.rotations, value, s == 0.0 ? value : value + s * z, s});
  }
  return out;
}

namespace detail {

// Measured values aligned with the set's operator order.
inline Eigen::VectorXd aligned_values(const std::vector<MeasurementRecord>& records, const TomographySet& set,
                                      Eigen::VectorXd* weights) {
  if (records.size() != set.size()) {
    throw std::invalid_argument("expected " + std::to_string(set.size()) + " records, got " +
                                std::to_string(records.size()));
  }
  Eigen::VectorXd values(static_cast<Index>(set.size()));
  Eigen::VectorXd w(static_cast<Index>(set.size()));
  std::vector<bool> seen(set.size(), false);
  for (const auto& r : records) {
    const auto i = set.find(r.rotations);
    if (!i) throw std::invalid_argument("record " + to_string(r.rotations) + " is not part of the set");
    if (seen[*i]) throw std::invalid_argument("duplicate record " + to_string(r.rotations));
    seen[*i] = true;
    values(static_cast<Index>(*i)) = r.noisy;
    w(static_cast<Index>(*i)) = r.sigma > 0.0 ? 1.0 / r.sigma : 1.0;
  }
  // Uniform weights unless sigmas differ.
  if (weights) *weights = (w.maxCoeff() == w.minCoeff()) ? Eigen::VectorXd::Ones(w.size()) : w;
  return values;
}

inline Matrix from_pauli_coefficients(const Eigen::VectorXd& x) {
  Matrix rho = Matrix::Zero(kTomographyDim, kTomographyDim);
  for (int k = 0; k < kPauliCount; ++k) rho += (x(k) / 8.0) * pauli_string(k);
  return rho;
}

}  // namespace detail

struct LinearEstimate {
  Matrix estimate;  // Hermitian, trace 1, not necessarily positive
  double residual_norm = 0.0;
};

// Weighted least squares for the 63 traceless Pauli coefficients with
// Tr(rho) = 1 imposed.
inline LinearEstimate linear_inversion(const std::vector<MeasurementRecord>& records, const TomographySet& set) {
  if (set.rank() != TomographySet::kCompleteRank) {
    throw IncompleteReadoutError("design matrix is rank deficient (" + std::to_string(set.rank()) + ")");
  }
  Eigen::VectorXd weights;
  const Eigen::VectorXd values = detail::aligned_values(records, set, &weights);
  const Eigen::MatrixXd& d = set.design_matrix();
  const Eigen::VectorXd rhs = values - d.col(0);
  const Eigen::MatrixXd a = weights.asDiagonal() * d.rightCols(kPauliCount - 1);
  const Eigen::VectorXd b = weights.asDiagonal() * rhs;
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
  Eigen::VectorXd x(kPauliCount);
  x(0) = 1.0;
  x.tail(kPauliCount - 1) = sol;
  return LinearEstimate{detail::from_pauli_coefficients(x), (d * x - values).norm()};
}

// Basis populations from the eight population-set values, with the
// populations constrained to sum to one.
inline Eigen::VectorXd invert_populations(const std::vector<MeasurementRecord>& records, const TomographySet& set) {
  Eigen::VectorXd weights;
  const Eigen::VectorXd values = detail::aligned_values(records, set, &weights);
  Eigen::MatrixXd a(static_cast<Index>(set.size()) + 1, kTomographyDim);
  Eigen::VectorXd b(static_cast<Index>(set.size()) + 1);
  for (std::size_t i = 0; i < set.size(); ++i) {
    a.row(static_cast<Index>(i)) = weights(static_cast<Index>(i)) * set.operators()[i].matrix.diagonal().real().transpose();
    b(static_cast<Index>(i)) = weights(static_cast<Index>(i)) * values(static_cast<Index>(i));
  }
  a.bottomRows(1).setOnes();
  b(static_cast<Index>(set.size())) = 1.0;
  if (detail::numeric_rank(a) < kTomographyDim) throw IncompleteReadoutError("population set is rank deficient");
  return a.colPivHouseholderQr().solve(b);
}

struct ReconstructionResult {
  DensityMatrix rho;
  Matrix estimate;                // Hermitian input to the projection
  double eigenvalue_shift = 0.0;  // uniform shift applied to kept eigenvalues
  double residual_norm = 0.0;     // ||rho - estimate||_F
};

// Euclidean projection of a real vector onto the probability simplex.
inline Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v, double* shift = nullptr) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) theta = t;
  }
  if (shift) *shift = -theta;
  return (v.array() - theta).max(0.0);
}

// Closest trace-one positive semidefinite matrix in Frobenius norm: keep the
// eigenvectors and project the eigenvalues onto the simplex (the most
// negative eigenvalues are zeroed and the deficit spread uniformly over the
// rest).
inline ReconstructionResult mle_project(const Matrix& estimate, std::optional<HilbertSpec> spec = std::nullopt) {
  if (!is_hermitian(estimate, 1e-9)) throw std::invalid_argument("maximum-likelihood projection needs a Hermitian input");
  const Index d = estimate.rows();
  HilbertSpec s;
  if (spec) {
    s = *spec;
  } else {
    int n = 0;
    while ((Index{1} << n) < d) ++n;
    if ((Index{1} << n) != d) throw DimensionError("cannot infer a qubit space for dimension " + std::to_string(d));
    s = HilbertSpec::qubits_only(n);
  }
  const Matrix h = 0.5 * (estimate + estimate.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  double shift = 0.0;
  const Eigen::VectorXd lambda = project_to_simplex(es.eigenvalues(), &shift);
  Matrix rho = es.eigenvectors() * lambda.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  rho = (0.5 * (rho + rho.adjoint())).eval();
  const double residual = (rho - estimate).norm();
  return ReconstructionResult{DensityMatrix(s, rho), estimate, shift, residual};
}

inline ReconstructionResult reconstruct(const std::vector<MeasurementRecord>& records, const TomographySet& set) {
  const LinearEstimate lin = linear_inversion(records, set);
  return mle_project(lin.estimate, kThreeQubits);
}

// <P> for all 64 Pauli strings, identity first.
inline std::array<double, kPauliCount> pauli_set(const DensityMatrix& rho) {
  if (rho.dim() != kTomographyDim) throw DimensionError("Pauli set is defined for three-qubit states");
  std::array<double, kPauliCount> out{};
  for (int k = 0; k < kPauliCount; ++k) {
    out[k] = (pauli_string(k).cwiseProduct(rho.matrix().transpose())).sum().real();
  }
  return out;
}

}  // namespace cqed
