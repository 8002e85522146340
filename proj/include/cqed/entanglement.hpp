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

// Certification of three-qubit states: fidelity to a target, the W witness
// 2/3 Id - |W><W|, the three-tangle of pure states, and a convex-roof upper
// bound for mixed states.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqed/hilbert.hpp"

namespace cqed {

inline const HilbertSpec kThreeQubits = HilbertSpec::qubits_only(3);

enum class TargetLabel { w_paper, w_plus, ghz, custom };

inline std::string to_string(TargetLabel l) {
  switch (l) {
    case TargetLabel::w_paper:
      return "W_paper";
    case TargetLabel::w_plus:
      return "W_plus";
    case TargetLabel::ghz:
      return "GHZ";
    case TargetLabel::custom:
      return "custom";
  }
  return "custom";
}

struct TargetState {
  QuantumState vector;
  TargetLabel label;

  // 1/sqrt(3) (|A> + |B> + |C>) up to the sign pattern, |j> = qubit j excited.
  static TargetState w_with_signs(double sign_a, double sign_b, double sign_c, TargetLabel label) {
    Vector v = Vector::Zero(8);
    v(1) = sign_a;
    v(2) = sign_b;
    v(4) = sign_c;
    return {QuantumState::normalized(kThreeQubits, v), label};
  }
  // Qubit A carries the minus sign of its negative coupling.
  static TargetState w_paper() { return w_with_signs(-1, 1, 1, TargetLabel::w_paper); }
  static TargetState w_plus() { return w_with_signs(1, 1, 1, TargetLabel::w_plus); }
  static TargetState ghz() {
    Vector v = Vector::Zero(8);
    v(0) = 1;
    v(7) = 1;
    return {QuantumState::normalized(kThreeQubits, v), TargetLabel::ghz};
  }
  static TargetState custom(QuantumState psi) { return {std::move(psi), TargetLabel::custom}; }
};

// <psi_t| rho |psi_t>.
inline double fidelity(const DensityMatrix& rho, const TargetState& target) {
  return overlap_fidelity(rho, target.vector);
}

// Tr[(2/3 Id - |W><W|) rho]; negative values certify genuine tripartite
// entanglement.
inline double witness_value(const DensityMatrix& rho) {
  if (rho.dim() != 8) throw DimensionError("the W witness acts on three-qubit states");
  return 2.0 / 3.0 - fidelity(rho, TargetState::w_paper());
}

enum class TangleKind { pure_exact, mixed_upper_bound };

struct TangleEstimate {
  double value = 0.0;
  TangleKind kind = TangleKind::pure_exact;
  int decomposition_size = 1;
  long iterations = 0;
};

// 4|d1 - 2 d2 + 4 d3| of the (unnormalized) amplitudes a_{ijk}, index i+2j+4k.
// Homogeneous of degree 4 in the amplitudes.
inline double three_tangle_raw(const Vector& a) {
  if (a.size() != 8) throw DimensionError("three-tangle needs an 8-component amplitude vector");
  const Complex a000 = a(0), a100 = a(1), a010 = a(2), a110 = a(3);
  const Complex a001 = a(4), a101 = a(5), a011 = a(6), a111 = a(7);
  const Complex d1 = a000 * a000 * a111 * a111 + a001 * a001 * a110 * a110 + a010 * a010 * a101 * a101 +
                     a100 * a100 * a011 * a011;
  const Complex d2 = a000 * a111 * a011 * a100 + a000 * a111 * a101 * a010 + a000 * a111 * a110 * a001 +
                     a011 * a100 * a101 * a010 + a011 * a100 * a110 * a001 + a101 * a010 * a110 * a001;
  const Complex d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100;
  return 4.0 * std::abs(d1 - 2.0 * d2 + 4.0 * d3);
}

inline TangleEstimate three_tangle_pure(const QuantumState& psi) {
  if (psi.dim() != 8) throw DimensionError("three-tangle is defined for three-qubit states");
  const double tau = std::clamp(three_tangle_raw(psi.amplitudes()), 0.0, 1.0);
  return {tau, TangleKind::pure_exact, 1, 0};
}

struct TangleOptions {
  int restarts = 32;
  int budget = 2000;  // descent iterations per restart
  std::uint64_t seed = 20120601;
  double rank_tolerance = 1e-10;
};

namespace detail {

// Average tangle sum_k p_k tau(psi_k) of the decomposition w_k = sum_i U_ki v_i.
inline double decomposition_tangle(const Matrix& weighted_vectors, const Matrix& isometry) {
  const Matrix w = weighted_vectors * isometry.transpose();
  double total = 0.0;
  for (Index k = 0; k < w.cols(); ++k) {
    const double p = w.col(k).squaredNorm();
    if (p < 1e-300) continue;
    total += three_tangle_raw(w.col(k)) / p;
  }
  return total;
}

inline Matrix random_isometry(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix z(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) z(i, j) = Complex(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<Matrix> qr(z);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

// Cayley transform of a random Hermitian generator: an exactly unitary step
// of size roughly `step` away from the identity.
inline Matrix random_unitary_step(Index k, double step, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix h(k, k);
  for (Index i = 0; i < k; ++i) {
    h(i, i) = normal(rng);
    for (Index j = i + 1; j < k; ++j) {
      h(i, j) = Complex(normal(rng), normal(rng)) / std::sqrt(2.0);
      h(j, i) = std::conj(h(i, j));
    }
  }
  const Matrix a = (0.5 * step * kI) * h;
  const Matrix id = Matrix::Identity(k, k);
  return (id - a).partialPivLu().solve(id + a);
}

}  // namespace detail

// Upper bound on the convex roof min sum_k p_k tau(psi_k). Decompositions of a
// rank-r state are parameterized by K x r isometries acting on the
// sqrt(lambda)-weighted eigenvectors, K = r..2r, and searched by an adaptive
// random local descent on the unitary group with restarts.
inline TangleEstimate three_tangle_mixed(const DensityMatrix& rho, const TangleOptions& options = {}) {
  if (rho.dim() != 8) throw DimensionError("three-tangle is defined for three-qubit states");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const double top = es.eigenvalues().maxCoeff();
  std::vector<Index> kept;
  double weight = 0.0;
  for (Index i = 0; i < 8; ++i) {
    if (es.eigenvalues()(i) > options.rank_tolerance * std::max(top, 1.0)) {
      kept.push_back(i);
      weight += es.eigenvalues()(i);
    }
  }
  const auto rank = static_cast<Index>(kept.size());
  Matrix vectors(8, rank);
  for (Index c = 0; c < rank; ++c) {
    const Index i = kept[c];
    vectors.col(c) = std::sqrt(es.eigenvalues()(i) / weight) * es.eigenvectors().col(i);
  }

  TangleEstimate best{std::numeric_limits<double>::infinity(), TangleKind::mixed_upper_bound, 0, 0};
  if (rank == 1) {
    best.value = std::clamp(three_tangle_raw(vectors.col(0)), 0.0, 1.0);
    best.decomposition_size = 1;
    return best;
  }

  std::mt19937_64 rng(options.seed);
  const int restarts = std::max(1, options.restarts);
  for (int s = 0; s < restarts; ++s) {
    const Index k = rank + static_cast<Index>(s % (rank + 1));
    Matrix u = (s == 0) ? Matrix(Matrix::Identity(k, rank)) : detail::random_isometry(k, rank, rng);
    double value = detail::decomposition_tangle(vectors, u);
    double step = 0.3;
    for (int it = 0; it < options.budget; ++it) {
      ++best.iterations;
      const Matrix candidate = detail::random_unitary_step(k, step, rng) * u;
      const double v = detail::decomposition_tangle(vectors, candidate);
      if (v < value) {
        value = v;
        u = candidate;
        step = std::min(step * 1.5, 2.0);
      } else {
        step *= 0.9;
      }
      if (step < 1e-9 || value < 1e-14) break;
    }
    if (value < best.value) {
      best.value = value;
      best.decomposition_size = static_cast<int>(k);
    }
  }
  best.value = std::clamp(best.value, 0.0, 1.0);
  return best;
}

enum class EntanglementClass { w_class, ghz_class, inconclusive };

inline std::string to_string(EntanglementClass c) {
  switch (c) {
    case EntanglementClass::w_class:
      return "W_class";
    case EntanglementClass::ghz_class:
      return "GHZ_class";
    case EntanglementClass::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

struct ClassificationThresholds {
  double tangle = 0.1;
  double ghz = 0.5;
};

struct CertificationReport {
  double fidelity = 0.0;
  double witness = 0.0;
  TangleEstimate tangle;
  EntanglementClass classification = EntanglementClass::inconclusive;
  TargetLabel target = TargetLabel::w_paper;
};

inline EntanglementClass classify(double tangle_bound, double witness, const ClassificationThresholds& t = {}) {
  if (tangle_bound < t.tangle && witness < 0.0) return EntanglementClass::w_class;
  if (tangle_bound > t.ghz) return EntanglementClass::ghz_class;
  return EntanglementClass::inconclusive;
}

inline EntanglementClass classify_w_vs_ghz(const DensityMatrix& rho, const ClassificationThresholds& t = {},
                                           const TangleOptions& options = {}) {
  return classify(three_tangle_mixed(rho, options).value, witness_value(rho), t);
}

inline CertificationReport certify(const DensityMatrix& rho, const TargetState& target = TargetState::w_paper(),
                                   const ClassificationThresholds& thresholds = {},
                                   const TangleOptions& options = {}) {
  CertificationReport r;
  r.target = target.label;
  r.fidelity = fidelity(rho, target);
  r.witness = witness_value(rho);
  r.tangle = three_tangle_mixed(rho, options);
  r.classification = classify(r.tangle.value, r.witness, thresholds);
  return r;
}

}  // namespace cqed
