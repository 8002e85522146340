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

// Tavis-Cummings Hamiltonian in the frame rotating at the resonator frequency,
// closed and open system propagation, and the single-excitation block oracle.
// All Hamiltonians are H/hbar in rad/s.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqed/device.hpp"
#include "cqed/hilbert.hpp"

namespace cqed {

enum class TermKind { qubit_detuning, coupling, cavity_detuning };

struct HamiltonianTerm {
  TermKind kind;
  int qubit = -1;  // -1 for the cavity term
  OperatorMatrix matrix;
};

struct HamiltonianOptions {
  // Per-qubit flag; an empty mask couples every qubit.
  std::vector<bool> coupled;
  // Optional extra cavity term cavity_detuning * a^dag a (frame shifts).
  double cavity_detuning = 0.0;
};

// Summands (Delta_j/2) sigma_z_j and g_j (a^dag sigma^-_j + sigma^+_j a).
inline std::vector<HamiltonianTerm> hamiltonian_terms(const SystemConfig& config, const std::vector<double>& detunings,
                                                      const HamiltonianOptions& options = {}) {
  const HilbertSpec& spec = config.spec;
  const int n = config.num_qubits();
  if (static_cast<int>(detunings.size()) != n) {
    throw DimensionError("expected " + std::to_string(n) + " detunings, got " + std::to_string(detunings.size()));
  }
  if (!options.coupled.empty() && static_cast<int>(options.coupled.size()) != n) {
    throw DimensionError("coupling mask length must equal the qubit count");
  }
  const OperatorMatrix a = cavity_annihilation(spec);
  const Matrix adag = a.matrix().adjoint();

  std::vector<HamiltonianTerm> terms;
  for (int j = 0; j < n; ++j) {
    terms.push_back({TermKind::qubit_detuning, j,
                     0.5 * detunings[j] * embed_qubit_operator(sigma_z(), j, spec)});
    const bool on = options.coupled.empty() || options.coupled[j];
    if (!on) continue;
    const Matrix sm = embed_qubit_operator(sigma_minus(), j, spec).matrix();
    Matrix exchange = config.qubits[j].coupling_g * (adag * sm + sm.adjoint() * a.matrix());
    terms.push_back({TermKind::coupling, j, OperatorMatrix(spec, std::move(exchange), true)});
  }
  if (options.cavity_detuning != 0.0) {
    terms.push_back({TermKind::cavity_detuning, -1, options.cavity_detuning * photon_number(spec)});
  }
  return terms;
}

inline OperatorMatrix build_hamiltonian(const SystemConfig& config, const std::vector<double>& detunings,
                                        const HamiltonianOptions& options = {}) {
  Matrix h = Matrix::Zero(config.spec.dim(), config.spec.dim());
  for (const auto& term : hamiltonian_terms(config, detunings, options)) h += term.matrix.matrix();
  return OperatorMatrix(config.spec, std::move(h), true);
}

// Excitation number a^dag a + sum_j (sigma_z_j + 1)/2.
inline OperatorMatrix excitation_number(HilbertSpec spec) {
  Matrix n = photon_number(spec).matrix();
  for (int j = 0; j < spec.num_qubits; ++j) {
    n += 0.5 * (embed_qubit_operator(sigma_z(), j, spec).matrix() + Matrix::Identity(spec.dim(), spec.dim()));
  }
  return OperatorMatrix(spec, std::move(n), true);
}

// exp(-i H t) through one eigendecomposition of a Hermitian H.
class UnitaryPropagator {
 public:
  explicit UnitaryPropagator(const OperatorMatrix& h) : spec_(h.spec()) {
    if (!h.hermitian() || !is_hermitian(h.matrix(), OperatorMatrix::kHermitianTolerance)) {
      throw std::invalid_argument("propagation requires a Hermitian Hamiltonian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }

  const Eigen::VectorXd& energies() const { return energies_; }
  const Matrix& eigenvectors() const { return vectors_; }

  Vector phases(double t) const {
    Vector p(energies_.size());
    for (Index k = 0; k < energies_.size(); ++k) p(k) = std::polar(1.0, -energies_(k) * t);
    return p;
  }

  Matrix unitary(double t) const { return vectors_ * phases(t).asDiagonal() * vectors_.adjoint(); }

  Vector apply(const Vector& psi, double t) const {
    return vectors_ * (phases(t).asDiagonal() * (vectors_.adjoint() * psi));
  }

  QuantumState apply(const QuantumState& psi, double t) const {
    if (psi.spec() != spec_) throw DimensionError("state and Hamiltonian live on different spaces");
    // Renormalize away the last few ulps of rounding.
    return QuantumState::normalized(spec_, apply(psi.amplitudes(), t));
  }

 private:
  HilbertSpec spec_;
  Eigen::VectorXd energies_;
  Matrix vectors_;
};

inline QuantumState evolve_unitary(const QuantumState& state, const OperatorMatrix& h, double t) {
  return UnitaryPropagator(h).apply(state, t);
}

struct CollapseOperator {
  Matrix matrix;
  double rate = 0.0;  // 1/s
  std::string label;
};

// sigma^-_j at 1/T1, sigma_z_j at gamma_phi/2, and a at kappa.
inline std::vector<CollapseOperator> collapse_operators(const SystemConfig& config) {
  std::vector<CollapseOperator> ops;
  double kappa = 0.0;
  for (int j = 0; j < config.num_qubits(); ++j) {
    const DecoherenceRates r = decoherence_rates(config.qubits[j], config.resonator);
    kappa = r.kappa;
    ops.push_back({embed_qubit_operator(sigma_minus(), j, config.spec).matrix(), r.gamma1,
                   "relaxation " + config.qubits[j].name});
    ops.push_back({embed_qubit_operator(sigma_z(), j, config.spec).matrix(), 0.5 * r.gamma_phi,
                   "dephasing " + config.qubits[j].name});
  }
  if (config.num_qubits() == 0) kappa = kTwoPi * config.resonator.omega_r_ghz * 1e9 / config.resonator.quality_factor;
  ops.push_back({cavity_annihilation(config.spec).matrix(), kappa, "cavity loss"});
  return ops;
}

inline constexpr double kDefaultLindbladStep = 10e-12;

namespace detail {

// Master-equation integrator in the interaction picture of a constant H.
// With H = V diag(E) V^dag and sigma~ = e^{iEt} V^dag rho V e^{-iEt}, the
// Hamiltonian part is exact and RK4 only integrates the dissipator
//   d sigma~/dt = sum_k r_k (L~ s L~^dag - 1/2 {L~^dag L~, s}),
// with L~(t)_ab = (V^dag L V)_ab e^{i(E_a - E_b)t}.
class InteractionPictureLindblad {
 public:
  InteractionPictureLindblad(const OperatorMatrix& h, const std::vector<CollapseOperator>& collapse)
      : propagator_(h) {
    const Matrix& v = propagator_.eigenvectors();
    Matrix k = Matrix::Zero(v.rows(), v.cols());
    for (const auto& c : collapse) {
      if (c.rate < 0.0) throw std::invalid_argument("collapse rate must be nonnegative: " + c.label);
      if (c.rate == 0.0) continue;
      if (c.matrix.rows() != v.rows() || c.matrix.cols() != v.cols()) {
        throw DimensionError("collapse operator size mismatch: " + c.label);
      }
      Matrix l = v.adjoint() * c.matrix * v;
      k += c.rate * (l.adjoint() * l);
      jumps_.push_back(std::sqrt(c.rate) * l);
    }
    anticommutator_ = k;
  }

  bool closed() const { return jumps_.empty(); }

  Matrix to_frame(const Matrix& rho) const {
    const Matrix& v = propagator_.eigenvectors();
    return v.adjoint() * rho * v;
  }

  // Maps sigma~(t) back to rho(t) in the lab basis.
  Matrix from_frame(const Matrix& sigma, double t) const {
    const Vector p = propagator_.phases(t);
    const Matrix& v = propagator_.eigenvectors();
    const Matrix s = p.asDiagonal() * sigma * p.conjugate().asDiagonal();
    return v * s * v.adjoint();
  }

  Matrix integrate(Matrix sigma, double t, double step) const {
    if (closed() || t == 0.0) return sigma;
    const auto steps = static_cast<long>(std::ceil(t / step - 1e-9));
    const double h = t / static_cast<double>(steps);
    std::vector<Matrix> jumps_a;
    std::vector<Matrix> jumps_b;
    std::vector<Matrix> jumps_c;
    Matrix k_a;
    Matrix k_b;
    Matrix k_c;
    for (long n = 0; n < steps; ++n) {
      const double t0 = h * static_cast<double>(n);
      rotate(t0, jumps_a, k_a);
      rotate(t0 + 0.5 * h, jumps_b, k_b);
      rotate(t0 + h, jumps_c, k_c);
      const Matrix d1 = derivative(sigma, jumps_a, k_a);
      const Matrix d2 = derivative(sigma + 0.5 * h * d1, jumps_b, k_b);
      const Matrix d3 = derivative(sigma + 0.5 * h * d2, jumps_b, k_b);
      const Matrix d4 = derivative(sigma + h * d3, jumps_c, k_c);
      sigma += (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    }
    return sigma;
  }

 private:
  void rotate(double t, std::vector<Matrix>& jumps, Matrix& k) const {
    // e^{iEt} is the conjugate of the propagator phase e^{-iEt}.
    const Vector p = propagator_.phases(t).conjugate();
    const Matrix phase = p * p.adjoint();
    jumps.resize(jumps_.size());
    for (std::size_t i = 0; i < jumps_.size(); ++i) jumps[i] = jumps_[i].cwiseProduct(phase);
    k = anticommutator_.cwiseProduct(phase);
  }

  static Matrix derivative(const Matrix& s, const std::vector<Matrix>& jumps, const Matrix& k) {
    Matrix ks = k * s;
    Matrix out = -0.5 * (ks + ks.adjoint());
    for (const auto& l : jumps) out.noalias() += l * s * l.adjoint();
    return out;
  }

  UnitaryPropagator propagator_;
  std::vector<Matrix> jumps_;
  Matrix anticommutator_;
};

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline void check_step(const Matrix& rho, double dt) {
  const double trace_drift = std::abs(rho.trace() - 1.0);
  const bool finite = rho.allFinite();
  double min_eig = 0.0;
  if (finite) min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(rho, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (!finite || trace_drift > 1e-6 || min_eig < -1e-6) {
    std::ostringstream msg;
    msg << "Lindblad step dt=" << dt << " s is too large (trace drift " << trace_drift << ", minimum eigenvalue "
        << min_eig << "); try dt=" << dt / 4.0 << " s";
    throw NumericalError(msg.str());
  }
}

}  // namespace detail

// Fixed-step RK4 integration of the Lindblad master equation for time t with
// steps no longer than dt. Throws NumericalError when the step is too large.
inline DensityMatrix evolve_lindblad(const DensityMatrix& rho, const OperatorMatrix& h,
                                     const std::vector<CollapseOperator>& collapse, double t,
                                     double dt = kDefaultLindbladStep) {
  if (!(dt > 0.0)) throw std::invalid_argument("Lindblad step must be positive");
  if (t < 0.0) throw std::invalid_argument("evolution time must be nonnegative");
  if (rho.spec() != h.spec()) throw DimensionError("state and Hamiltonian live on different spaces");
  const detail::InteractionPictureLindblad engine(h, collapse);
  const Matrix sigma = engine.integrate(engine.to_frame(rho.matrix()), t, dt);
  const Matrix out = detail::hermitian_part(engine.from_frame(sigma, t));
  detail::check_step(out, dt);
  return DensityMatrix(rho.spec(), out);
}

struct LindbladResult {
  DensityMatrix rho;
  double dt = 0.0;      // step size of the accepted result
  double change = 0.0;  // max |entry| change against the previous step size
};

// Starts at dt and halves until halving changes the result by < tolerance.
inline LindbladResult evolve_lindblad_converged(const DensityMatrix& rho, const OperatorMatrix& h,
                                                const std::vector<CollapseOperator>& collapse, double t,
                                                double dt = kDefaultLindbladStep, double tolerance = 1e-8,
                                                int max_halvings = 10) {
  if (!(dt > 0.0)) throw std::invalid_argument("Lindblad step must be positive");
  if (t < 0.0) throw std::invalid_argument("evolution time must be nonnegative");
  if (rho.spec() != h.spec()) throw DimensionError("state and Hamiltonian live on different spaces");
  const detail::InteractionPictureLindblad engine(h, collapse);
  const Matrix start = engine.to_frame(rho.matrix());
  if (engine.closed() || t == 0.0) {
    return {DensityMatrix(rho.spec(), detail::hermitian_part(engine.from_frame(start, t))), dt, 0.0};
  }
  Matrix coarse = engine.integrate(start, t, dt);
  for (int i = 0; i < max_halvings; ++i) {
    const double half = dt / 2.0;
    Matrix fine = engine.integrate(start, t, half);
    const double change = (fine - coarse).cwiseAbs().maxCoeff();
    dt = half;
    if (change < tolerance) {
      const Matrix out = detail::hermitian_part(engine.from_frame(fine, t));
      detail::check_step(out, dt);
      return {DensityMatrix(rho.spec(), out), dt, change};
    }
    coarse = std::move(fine);
  }
  std::ostringstream msg;
  msg << "Lindblad integration did not converge to " << tolerance << " after " << max_halvings
      << " halvings; try dt=" << dt / 2.0 << " s";
  throw NumericalError(msg.str());
}

// Amplitudes over {|e_j, 0>}_j followed by |g...g, 1>, evolved inside the
// (N+1)-dimensional single-excitation block. Independent of the full-space
// operator construction.
inline Vector single_excitation_oracle(const std::vector<double>& couplings, const std::vector<double>& detunings,
                                       const Vector& initial, double t) {
  const std::size_t n = couplings.size();
  if (detunings.size() != n) throw DimensionError("couplings and detunings must have equal length");
  if (initial.size() != static_cast<Index>(n + 1)) throw DimensionError("initial block vector must have N+1 entries");
  double total = 0.0;
  for (double d : detunings) total += d;
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    // Qubit j excited: +Delta_j/2, every other qubit -Delta_k/2.
    block(j, j) = detunings[j] - 0.5 * total;
    block(j, n) = couplings[j];
    block(n, j) = couplings[j];
  }
  block(n, n) = -0.5 * total;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
  const Eigen::MatrixXcd v = es.eigenvectors().cast<Complex>();
  Vector phases(n + 1);
  for (std::size_t k = 0; k <= n; ++k) phases(k) = std::polar(1.0, -es.eigenvalues()(k) * t);
  return v * (phases.asDiagonal() * (v.adjoint() * initial));
}

inline Vector single_excitation_oracle(const std::vector<double>& couplings, const std::vector<double>& detunings,
                                       double t) {
  Vector initial = Vector::Zero(static_cast<Index>(couplings.size() + 1));
  initial(initial.size() - 1) = 1.0;
  return single_excitation_oracle(couplings, detunings, initial, t);
}

// Block coordinates of a full-space state, in the oracle's ordering.
inline Vector single_excitation_amplitudes(const QuantumState& psi) {
  const HilbertSpec& spec = psi.spec();
  Vector out(spec.num_qubits + 1);
  for (int j = 0; j < spec.num_qubits; ++j) out(j) = psi[spec.index(1u << j, 0)];
  out(spec.num_qubits) = psi[spec.index(0, 1)];
  return out;
}

// Full-space state from block coordinates.
inline QuantumState from_single_excitation(HilbertSpec spec, const Vector& block) {
  if (block.size() != spec.num_qubits + 1) throw DimensionError("block vector must have N+1 entries");
  Vector v = Vector::Zero(spec.dim());
  for (int j = 0; j < spec.num_qubits; ++j) v(spec.index(1u << j, 0)) = block(j);
  v(spec.index(0, 1)) = block(spec.num_qubits);
  return QuantumState(spec, std::move(v));
}

}  // namespace cqed
