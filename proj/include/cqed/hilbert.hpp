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

// Dense linear algebra on the space of N two-level systems and one truncated
// bosonic mode.
//
// Basis ordering: index = n_photon * 2^N + sum_j b_j * 2^j, with qubit A at
// bit 0, B at bit 1, C at bit 2. Kets therefore read |C,B,A,Cavity> with the
// cavity as the slowest index. |g> is bit value 0 and sigma_z|g> = -|g>.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace cqed {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HilbertSpec {
  int num_qubits = 1;
  // Highest photon number kept; 0 means the space has no cavity factor.
  int photon_cutoff = 2;

  static HilbertSpec qubits_only(int n) { return HilbertSpec{n, 0}; }

  bool has_cavity() const { return photon_cutoff > 0; }
  Index qubit_dim() const { return Index{1} << num_qubits; }
  Index cavity_dim() const { return photon_cutoff + 1; }
  Index dim() const { return qubit_dim() * cavity_dim(); }

  void validate() const {
    if (num_qubits < 0 || num_qubits > 12) {
      throw DimensionError("num_qubits must be in [0, 12], got " + std::to_string(num_qubits));
    }
    if (photon_cutoff < 0) {
      throw DimensionError("photon_cutoff must be >= 0");
    }
    if (dim() < 2) {
      throw DimensionError("Hilbert space dimension must be >= 2");
    }
  }

  Index index(std::uint32_t qubit_bits, int photons = 0) const {
    return static_cast<Index>(photons) * qubit_dim() + static_cast<Index>(qubit_bits);
  }

  friend bool operator==(const HilbertSpec&, const HilbertSpec&) = default;
};

// Pauli algebra in the (|g>, |e>) basis with sigma_z = diag(-1, +1).
inline Matrix2 identity2() { return Matrix2::Identity(); }
inline Matrix2 sigma_x() {
  Matrix2 m;
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix2 sigma_y() {
  Matrix2 m;
  m << 0, kI, -kI, 0;
  return m;
}
inline Matrix2 sigma_z() {
  Matrix2 m;
  m << -1, 0, 0, 1;
  return m;
}
// sigma^- = |g><e|, sigma^+ = |e><g|.
inline Matrix2 sigma_minus() {
  Matrix2 m;
  m << 0, 1, 0, 0;
  return m;
}
inline Matrix2 sigma_plus() { return sigma_minus().adjoint(); }

inline bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

class QuantumState {
 public:
  static constexpr double kNormTolerance = 1e-9;

  QuantumState(HilbertSpec spec, Vector amplitudes) : spec_(spec), amplitudes_(std::move(amplitudes)) {
    spec_.validate();
    if (amplitudes_.size() != spec_.dim()) {
      throw DimensionError("state has " + std::to_string(amplitudes_.size()) + " amplitudes, space dimension is " +
                           std::to_string(spec_.dim()));
    }
    if (std::abs(amplitudes_.norm() - 1.0) > kNormTolerance) {
      throw std::invalid_argument("state is not normalized (norm " + std::to_string(amplitudes_.norm()) + ")");
    }
  }

  static QuantumState basis(HilbertSpec spec, std::uint32_t qubit_bits, int photons = 0) {
    spec.validate();
    if (qubit_bits >= spec.qubit_dim() || photons < 0 || photons >= spec.cavity_dim()) {
      throw DimensionError("basis label outside the space");
    }
    Vector v = Vector::Zero(spec.dim());
    v(spec.index(qubit_bits, photons)) = 1.0;
    return QuantumState(spec, std::move(v));
  }

  // Normalizes before validating.
  static QuantumState normalized(HilbertSpec spec, Vector amplitudes) {
    const double n = amplitudes.norm();
    if (n == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
    return QuantumState(spec, amplitudes / n);
  }

  const HilbertSpec& spec() const { return spec_; }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex operator[](Index i) const { return amplitudes_(i); }
  Index dim() const { return amplitudes_.size(); }

 private:
  HilbertSpec spec_;
  Vector amplitudes_;
};

class DensityMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-10;
  static constexpr double kTraceTolerance = 1e-9;
  static constexpr double kPositivityTolerance = 1e-8;

  DensityMatrix(HilbertSpec spec, Matrix entries) : spec_(spec), entries_(std::move(entries)) {
    spec_.validate();
    if (entries_.rows() != spec_.dim() || entries_.cols() != spec_.dim()) {
      throw DimensionError("density matrix size does not match the space dimension " + std::to_string(spec_.dim()));
    }
    if (!is_hermitian(entries_, kHermitianTolerance)) {
      throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(entries_.trace() - 1.0) > kTraceTolerance) {
      throw std::invalid_argument("density matrix trace is " + std::to_string(entries_.trace().real()));
    }
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(entries_, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (min_eig < -kPositivityTolerance) {
      throw std::invalid_argument("density matrix has eigenvalue " + std::to_string(min_eig));
    }
  }

  static DensityMatrix pure(const QuantumState& psi) {
    return DensityMatrix(psi.spec(), psi.amplitudes() * psi.amplitudes().adjoint());
  }

  static DensityMatrix maximally_mixed(HilbertSpec spec) {
    spec.validate();
    return DensityMatrix(spec, Matrix::Identity(spec.dim(), spec.dim()) / static_cast<double>(spec.dim()));
  }

  const HilbertSpec& spec() const { return spec_; }
  const Matrix& matrix() const { return entries_; }
  Complex operator()(Index i, Index j) const { return entries_(i, j); }
  Index dim() const { return entries_.rows(); }

  double purity() const { return (entries_ * entries_).trace().real(); }
  double population(Index i) const { return entries_(i, i).real(); }

 private:
  HilbertSpec spec_;
  Matrix entries_;
};

class OperatorMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-10;

  OperatorMatrix(HilbertSpec spec, Matrix entries, bool hermitian)
      : spec_(spec), entries_(std::move(entries)), hermitian_(hermitian) {
    spec_.validate();
    if (entries_.rows() != spec_.dim() || entries_.cols() != spec_.dim()) {
      throw DimensionError("operator size does not match the space dimension " + std::to_string(spec_.dim()));
    }
    if (hermitian_ && !is_hermitian(entries_, kHermitianTolerance)) {
      throw std::invalid_argument("operator flagged Hermitian is not conjugate-symmetric");
    }
  }

  // Sets the Hermitian flag by inspection.
  static OperatorMatrix detect(HilbertSpec spec, Matrix entries) {
    const bool h = is_hermitian(entries, kHermitianTolerance);
    return OperatorMatrix(spec, std::move(entries), h);
  }

  const HilbertSpec& spec() const { return spec_; }
  const Matrix& matrix() const { return entries_; }
  bool hermitian() const { return hermitian_; }

  OperatorMatrix adjoint() const { return OperatorMatrix(spec_, entries_.adjoint(), hermitian_); }

  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.spec_ != b.spec_) throw DimensionError("operator product across different spaces");
    return detect(a.spec_, a.entries_ * b.entries_);
  }
  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.spec_ != b.spec_) throw DimensionError("operator sum across different spaces");
    return OperatorMatrix(a.spec_, a.entries_ + b.entries_, a.hermitian_ && b.hermitian_);
  }
  friend OperatorMatrix operator*(double s, const OperatorMatrix& a) {
    return OperatorMatrix(a.spec_, s * a.entries_, a.hermitian_);
  }

 private:
  HilbertSpec spec_;
  Matrix entries_;
  bool hermitian_;
};

inline OperatorMatrix identity_operator(HilbertSpec spec) {
  spec.validate();
  return OperatorMatrix(spec, Matrix::Identity(spec.dim(), spec.dim()), true);
}

// Id_cavity (x) ... (x) op2 (x) ... (x) Id, with op2 acting on bit `qubit`.
inline OperatorMatrix embed_qubit_operator(const Matrix& op2, int qubit, HilbertSpec spec) {
  spec.validate();
  if (op2.rows() != 2 || op2.cols() != 2) {
    throw DimensionError("single-qubit operator must be 2x2");
  }
  if (qubit < 0 || qubit >= spec.num_qubits) {
    throw DimensionError("qubit index " + std::to_string(qubit) + " out of range for " +
                         std::to_string(spec.num_qubits) + " qubits");
  }
  const Index below = Index{1} << qubit;
  const Index above = Index{1} << (spec.num_qubits - 1 - qubit);
  const Matrix upper = Eigen::kroneckerProduct(Matrix::Identity(above, above), op2).eval();
  const Matrix qubits = Eigen::kroneckerProduct(upper, Matrix::Identity(below, below)).eval();
  Matrix full = Eigen::kroneckerProduct(Matrix::Identity(spec.cavity_dim(), spec.cavity_dim()), qubits).eval();
  return OperatorMatrix::detect(spec, std::move(full));
}

// a|n> = sqrt(n)|n-1> on the cavity factor, identity on the qubits.
inline OperatorMatrix cavity_annihilation(HilbertSpec spec) {
  spec.validate();
  if (!spec.has_cavity()) throw DimensionError("space has no cavity mode");
  Matrix a = Matrix::Zero(spec.cavity_dim(), spec.cavity_dim());
  for (Index n = 1; n < spec.cavity_dim(); ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  Matrix full = Eigen::kroneckerProduct(a, Matrix::Identity(spec.qubit_dim(), spec.qubit_dim())).eval();
  return OperatorMatrix(spec, std::move(full), false);
}

inline OperatorMatrix photon_number(HilbertSpec spec) {
  const OperatorMatrix a = cavity_annihilation(spec);
  return OperatorMatrix(spec, a.matrix().adjoint() * a.matrix(), true);
}

// Tr(op rho).
inline Complex expectation(const OperatorMatrix& op, const DensityMatrix& rho) {
  if (op.spec() != rho.spec()) throw DimensionError("operator and state live on different spaces");
  return (op.matrix().cwiseProduct(rho.matrix().transpose())).sum();
}

inline double expectation_real(const OperatorMatrix& op, const DensityMatrix& rho) {
  return expectation(op, rho).real();
}

// <psi|rho|psi>.
inline double overlap_fidelity(const DensityMatrix& rho, const QuantumState& psi) {
  if (rho.dim() != psi.dim()) throw DimensionError("fidelity between states of different dimension");
  return (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0, 0).real();
}

struct Subsystems {
  std::vector<int> qubits;
  bool cavity = false;

  static Subsystems all_qubits(int n) {
    Subsystems s;
    for (int j = 0; j < n; ++j) s.qubits.push_back(j);
    return s;
  }
  static Subsystems everything(HilbertSpec spec) {
    Subsystems s = all_qubits(spec.num_qubits);
    s.cavity = spec.has_cavity();
    return s;
  }
};

// Reduced state on `keep`. Kept qubits are renumbered in ascending order and
// the cavity (if kept) stays the slowest index.
inline DensityMatrix partial_trace(const DensityMatrix& rho, Subsystems keep) {
  const HilbertSpec& spec = rho.spec();
  std::sort(keep.qubits.begin(), keep.qubits.end());
  keep.qubits.erase(std::unique(keep.qubits.begin(), keep.qubits.end()), keep.qubits.end());
  if (keep.cavity && !spec.has_cavity()) throw DimensionError("cannot keep a cavity the space does not have");
  if (keep.qubits.empty() && !keep.cavity) throw std::invalid_argument("partial trace needs a nonempty keep set");
  for (int q : keep.qubits) {
    if (q < 0 || q >= spec.num_qubits) throw DimensionError("kept qubit index out of range");
  }

  const HilbertSpec out_spec{static_cast<int>(keep.qubits.size()), keep.cavity ? spec.photon_cutoff : 0};
  const Index nq = spec.qubit_dim();
  std::vector<bool> kept_bit(spec.num_qubits, false);
  for (int q : keep.qubits) kept_bit[q] = true;

  // Split each full index into (kept index, traced label).
  std::vector<Index> kept_index(spec.dim());
  std::vector<Index> traced_label(spec.dim());
  for (Index i = 0; i < spec.dim(); ++i) {
    const Index bits = i % nq;
    const Index photons = i / nq;
    Index k = 0;
    Index t = 0;
    int kpos = 0;
    int tpos = 0;
    for (int q = 0; q < spec.num_qubits; ++q) {
      const Index b = (bits >> q) & 1;
      if (kept_bit[q]) {
        k |= b << kpos++;
      } else {
        t |= b << tpos++;
      }
    }
    if (keep.cavity) {
      k += photons * out_spec.qubit_dim();
    } else {
      t += photons << tpos;
    }
    kept_index[i] = k;
    traced_label[i] = t;
  }

  Matrix out = Matrix::Zero(out_spec.dim(), out_spec.dim());
  for (Index i = 0; i < spec.dim(); ++i) {
    for (Index j = 0; j < spec.dim(); ++j) {
      if (traced_label[i] == traced_label[j]) out(kept_index[i], kept_index[j]) += rho(i, j);
    }
  }
  return DensityMatrix(out_spec, std::move(out));
}

}  // namespace cqed
