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

// Pulse schedules for vacuum Rabi scans and W-state preparation.
//
// A schedule is a list of piecewise-constant segments. Qubits pulsed into
// resonance get the commanded shift -Delta_bias; the shifts actually realized
// pass through the config's crosstalk matrix. Qubits left at their bias point
// are decoupled from the cavity unless ProtocolOptions::couple_parked is set,
// so they only accrue dynamic phase.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqed/detail/nelder_mead.hpp"
#include "cqed/device.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/entanglement.hpp"
#include "cqed/hilbert.hpp"

namespace cqed {

enum class Axis { x, y, z };

struct Rotation {
  int qubit = 0;
  Axis axis = Axis::x;
  double angle = 0.0;
};

// exp(-i angle sigma_axis / 2).
inline Matrix2 rotation_matrix(Axis axis, double angle) {
  const Matrix2 s = axis == Axis::x ? sigma_x() : axis == Axis::y ? sigma_y() : sigma_z();
  return std::cos(0.5 * angle) * identity2() - kI * std::sin(0.5 * angle) * s;
}

struct ScheduleSegment {
  double duration = 0.0;
  std::vector<double> detunings;  // realized, rad/s
  std::vector<bool> coupled;
  std::vector<Rotation> boundary_rotations;  // applied before the segment
  std::string label;
};

struct PulseSchedule {
  std::vector<ScheduleSegment> segments;
  QuantumState initial_state;

  double total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }
};

struct ProtocolOptions {
  bool noise = false;          // Lindblad channels from T1, T2 and Q
  bool couple_parked = false;  // keep exchange coupling at the bias point
  double lindblad_dt = kDefaultLindbladStep;
  double lindblad_tolerance = 1e-8;
};

inline QuantumState ground_state(const SystemConfig& config) { return QuantumState::basis(config.spec, 0, 0); }

inline void check_qubit(const SystemConfig& config, int q) {
  if (q < 0 || q >= config.num_qubits()) throw std::invalid_argument("qubit index " + std::to_string(q) + " out of range");
}

// Segment with `resonant` pulsed to the resonator for `duration`.
inline ScheduleSegment resonant_segment(const SystemConfig& config, const std::vector<int>& resonant, double duration,
                                        const ProtocolOptions& options = {}, std::string label = {}) {
  if (duration < 0.0) throw std::invalid_argument("segment duration must be nonnegative");
  const int n = config.num_qubits();
  Eigen::VectorXd commanded = Eigen::VectorXd::Zero(n);
  std::vector<bool> coupled(n, options.couple_parked);
  for (int q : resonant) {
    check_qubit(config, q);
    commanded(q) = -config.bias_detuning(q);
    coupled[q] = true;
  }
  const Eigen::VectorXd shifts = apply_crosstalk(commanded, config.crosstalk);
  ScheduleSegment seg;
  seg.duration = duration;
  seg.coupled = std::move(coupled);
  for (int j = 0; j < n; ++j) seg.detunings.push_back(config.bias_detuning(j) + shifts(j));
  seg.label = std::move(label);
  return seg;
}

inline OperatorMatrix segment_hamiltonian(const SystemConfig& config, const ScheduleSegment& seg) {
  return build_hamiltonian(config, seg.detunings, HamiltonianOptions{seg.coupled, 0.0});
}

inline Matrix rotation_operator(const SystemConfig& config, const std::vector<Rotation>& rotations) {
  Matrix u = Matrix::Identity(config.spec.dim(), config.spec.dim());
  for (const auto& r : rotations) {
    check_qubit(config, r.qubit);
    u = embed_qubit_operator(rotation_matrix(r.axis, r.angle), r.qubit, config.spec).matrix() * u;
  }
  return u;
}

// Closed-system execution; exact per segment.
inline QuantumState execute_pure(const SystemConfig& config, const PulseSchedule& schedule) {
  Vector psi = schedule.initial_state.amplitudes();
  for (const auto& seg : schedule.segments) {
    if (!seg.boundary_rotations.empty()) psi = rotation_operator(config, seg.boundary_rotations) * psi;
    if (seg.duration > 0.0) psi = UnitaryPropagator(segment_hamiltonian(config, seg)).apply(psi, seg.duration);
  }
  return QuantumState::normalized(config.spec, psi);
}

inline DensityMatrix evolve_segment(const SystemConfig& config, const DensityMatrix& rho, const OperatorMatrix& h,
                                    double duration, const ProtocolOptions& options) {
  if (duration <= 0.0) return rho;
  if (!options.noise) {
    const Matrix u = UnitaryPropagator(h).unitary(duration);
    return DensityMatrix(config.spec, detail::hermitian_part(u * rho.matrix() * u.adjoint()));
  }
  return evolve_lindblad_converged(rho, h, collapse_operators(config), duration, options.lindblad_dt,
                                   options.lindblad_tolerance)
      .rho;
}

inline DensityMatrix execute(const SystemConfig& config, const PulseSchedule& schedule,
                             const ProtocolOptions& options = {}) {
  if (!options.noise) return DensityMatrix::pure(execute_pure(config, schedule));
  DensityMatrix rho = DensityMatrix::pure(schedule.initial_state);
  for (const auto& seg : schedule.segments) {
    if (!seg.boundary_rotations.empty()) {
      const Matrix u = rotation_operator(config, seg.boundary_rotations);
      rho = DensityMatrix(config.spec, detail::hermitian_part(u * rho.matrix() * u.adjoint()));
    }
    rho = evolve_segment(config, rho, segment_hamiltonian(config, seg), seg.duration, options);
  }
  return rho;
}

// <a^dag a>.
inline double cavity_population(const DensityMatrix& rho) {
  return expectation_real(photon_number(rho.spec()), rho);
}
inline double cavity_population(const QuantumState& psi) { return cavity_population(DensityMatrix::pure(psi)); }

// Excited-state population of each qubit.
inline std::vector<double> qubit_populations(const DensityMatrix& rho) {
  const HilbertSpec& spec = rho.spec();
  std::vector<double> p(spec.num_qubits, 0.0);
  for (Index i = 0; i < spec.dim(); ++i) {
    const Index bits = i % spec.qubit_dim();
    for (int j = 0; j < spec.num_qubits; ++j) {
      if ((bits >> j) & 1) p[j] += rho.population(i);
    }
  }
  return p;
}

// Population of |g...g> summed over photon numbers.
inline double ground_population(const DensityMatrix& rho) {
  const HilbertSpec& spec = rho.spec();
  double p = 0.0;
  for (Index n = 0; n < spec.cavity_dim(); ++n) p += rho.population(n * spec.qubit_dim());
  return p;
}

// pi rotation on the detuned source qubit, then a resonant segment of length
// pi / (2|g|) that moves the excitation into the resonator.
inline PulseSchedule prepare_single_photon(const SystemConfig& config, int source, const ProtocolOptions& options = {}) {
  config.validate();
  check_qubit(config, source);
  const double tau0 = std::numbers::pi / (2.0 * std::abs(config.qubits[source].coupling_g));
  ScheduleSegment seg = resonant_segment(config, {source}, tau0, options, "SRI " + config.qubits[source].name);
  seg.boundary_rotations.push_back({source, Axis::x, std::numbers::pi});
  return PulseSchedule{{std::move(seg)}, ground_state(config)};
}

struct PopulationTrace {
  std::vector<std::string> qubit_names;
  std::vector<double> times;
  std::vector<std::vector<double>> qubit_excited;  // [time][qubit]
  std::vector<double> ground;
  std::vector<double> cavity;

  void record(double t, const DensityMatrix& rho) {
    times.push_back(t);
    qubit_excited.push_back(qubit_populations(rho));
    ground.push_back(ground_population(rho));
    cavity.push_back(cavity_population(rho));
  }

  std::vector<double> qubit_series(int j) const {
    std::vector<double> s;
    for (const auto& row : qubit_excited) s.push_back(row.at(j));
    return s;
  }
};

// For each tau: single-photon preparation from `source`, then the
// participating qubits resonant for tau. Populations are recorded at the end
// of the collective segment; detuning afterwards freezes them.
inline PopulationTrace rabi_scan(const SystemConfig& config, const std::vector<int>& participating,
                                 const std::vector<double>& tau_grid, const ProtocolOptions& options = {},
                                 std::optional<int> source = std::nullopt) {
  config.validate();
  if (participating.empty()) throw std::invalid_argument("rabi_scan needs at least one participating qubit");
  if (tau_grid.empty()) throw std::invalid_argument("rabi_scan needs a nonempty tau grid");
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (tau_grid[i] < 0.0 || (i > 0 && tau_grid[i] < tau_grid[i - 1])) {
      throw std::invalid_argument("tau grid must be nonnegative and ascending");
    }
  }
  const int src = source.value_or(participating.front());
  const PulseSchedule prep = prepare_single_photon(config, src, options);
  const ScheduleSegment cri = resonant_segment(config, participating, 0.0, options, "CRI");
  const OperatorMatrix h = segment_hamiltonian(config, cri);

  PopulationTrace trace;
  for (const auto& q : config.qubits) trace.qubit_names.push_back(q.name);

  if (!options.noise) {
    const QuantumState start = execute_pure(config, prep);
    const UnitaryPropagator propagator(h);
    for (double tau : tau_grid) trace.record(tau, DensityMatrix::pure(propagator.apply(start, tau)));
    return trace;
  }
  DensityMatrix rho = execute(config, prep, options);
  double t = 0.0;
  for (double tau : tau_grid) {
    rho = evolve_segment(config, rho, h, tau - t, options);
    t = tau;
    trace.record(tau, rho);
  }
  return trace;
}

struct WPreparation {
  PulseSchedule schedule;
  DensityMatrix full_state;   // qubits and cavity at the end of the schedule
  DensityMatrix qubit_state;  // cavity traced out
  double cavity_population = 0.0;
  std::vector<double> segment_durations;
};

inline WPreparation run_w_schedule(const SystemConfig& config, PulseSchedule schedule, const ProtocolOptions& options) {
  DensityMatrix full = execute(config, schedule, options);
  DensityMatrix reduced = partial_trace(full, Subsystems::all_qubits(config.num_qubits()));
  std::vector<double> durations;
  for (const auto& s : schedule.segments) durations.push_back(s.duration);
  const double n = cavity_population(full);
  return WPreparation{std::move(schedule), std::move(full), std::move(reduced), n, std::move(durations)};
}

// pi / (2 sqrt(sum_j g_j^2)): the cavity empties after the collective segment.
inline double collective_w_time(const SystemConfig& config) {
  double g2 = 0.0;
  for (const auto& q : config.qubits) g2 += q.coupling_g * q.coupling_g;
  return std::numbers::pi / (2.0 * std::sqrt(g2));
}

// Photon from `source`, then every qubit resonant for the collective W time.
inline WPreparation prepare_w_collective(const SystemConfig& config, const ProtocolOptions& options = {},
                                         int source = 0) {
  config.validate();
  if (config.num_qubits() < 2) throw std::invalid_argument("collective W preparation needs at least two qubits");
  PulseSchedule schedule = prepare_single_photon(config, source, options);
  std::vector<int> all(config.num_qubits());
  for (int j = 0; j < config.num_qubits(); ++j) all[j] = j;
  schedule.segments.push_back(resonant_segment(config, all, collective_w_time(config), options, "CRI"));
  return run_w_schedule(config, std::move(schedule), options);
}

// Swap durations for the sequential method: the first qubit keeps 1/N of its
// excitation, the k-th later qubit takes 1/(N-k+1) of what the cavity holds.
inline std::vector<double> sequential_w_times(const SystemConfig& config, const std::vector<int>& order) {
  const auto n = static_cast<double>(order.size());
  std::vector<double> taus;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double g = std::abs(config.qubits.at(order[k]).coupling_g);
    const double fraction = k == 0 ? (n - 1.0) / n : 1.0 / (n - static_cast<double>(k));
    taus.push_back(std::asin(std::sqrt(fraction)) / g);
  }
  return taus;
}

inline std::vector<int> default_sequential_order(const SystemConfig& config) {
  std::vector<int> order;
  for (int j = config.num_qubits() - 1; j >= 0; --j) order.push_back(j);
  return order;
}

// Excite the first qubit in `order` (C for three qubits), then swap with each
// qubit in turn: C -> cavity (2/3), cavity -> B (1/2), cavity -> A (all).
inline WPreparation prepare_w_sequential(const SystemConfig& config, const ProtocolOptions& options = {},
                                         std::vector<int> order = {}) {
  config.validate();
  if (order.empty()) order = default_sequential_order(config);
  if (order.size() < 2) throw std::invalid_argument("sequential W preparation needs at least two qubits");
  const std::vector<double> taus = sequential_w_times(config, order);
  PulseSchedule schedule{{}, ground_state(config)};
  for (std::size_t k = 0; k < order.size(); ++k) {
    ScheduleSegment seg =
        resonant_segment(config, {order[k]}, taus[k], options, "swap " + config.qubits[order[k]].name);
    if (k == 0) seg.boundary_rotations.push_back({order[0], Axis::x, std::numbers::pi});
    schedule.segments.push_back(std::move(seg));
  }
  return run_w_schedule(config, std::move(schedule), options);
}

struct PhaseCorrection {
  DensityMatrix rho;
  std::vector<double> angles;  // per-qubit Z rotation, radians in (-pi, pi]
  double fidelity_before = 0.0;
  double fidelity_after = 0.0;
};

namespace detail {

// Diagonal of (x)_j Rz(angle_j) on a qubit-only space.
inline Vector z_rotation_diagonal(int num_qubits, const Eigen::VectorXd& angles) {
  const Index d = Index{1} << num_qubits;
  Vector diag(d);
  for (Index i = 0; i < d; ++i) {
    double phase = 0.0;
    for (int j = 0; j < num_qubits; ++j) phase += ((i >> j) & 1) ? -0.5 * angles(j) : 0.5 * angles(j);
    diag(i) = std::polar(1.0, phase);
  }
  return diag;
}

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

}  // namespace detail

// Per-qubit Z rotations maximizing <target| U rho U^dag |target>, found by a
// grid search followed by simplex refinement. Never lowers the fidelity.
inline PhaseCorrection apply_phase_correction(const DensityMatrix& rho, const QuantumState& target) {
  const HilbertSpec& spec = rho.spec();
  if (spec.has_cavity()) throw DimensionError("phase correction acts on qubit-only states");
  if (target.dim() != rho.dim()) throw DimensionError("target and state dimensions differ");
  const int n = spec.num_qubits;
  const Matrix& m = rho.matrix();
  const Vector& psi = target.amplitudes();

  auto fidelity_at = [&](const Eigen::VectorXd& angles) {
    // <psi|U rho U^dag|psi> = w^dag rho w with w = U^dag psi.
    const Vector w = detail::z_rotation_diagonal(n, angles).conjugate().cwiseProduct(psi);
    return (w.adjoint() * m * w)(0, 0).real();
  };

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const double before = fidelity_at(zero);

  constexpr int kGrid = 12;
  Eigen::VectorXd best = zero;
  double best_f = before;
  Eigen::VectorXd angles(n);
  long total = 1;
  for (int j = 0; j < n; ++j) total *= kGrid;
  for (long idx = 0; idx < total; ++idx) {
    long r = idx;
    for (int j = 0; j < n; ++j) {
      angles(j) = 2.0 * std::numbers::pi * static_cast<double>(r % kGrid) / kGrid;
      r /= kGrid;
    }
    const double f = fidelity_at(angles);
    if (f > best_f) {
      best_f = f;
      best = angles;
    }
  }
  const auto refined = detail::nelder_mead([&](const Eigen::VectorXd& x) { return -fidelity_at(x); }, best,
                                           std::numbers::pi / kGrid, 1e-16, 20000);
  if (-refined.value > best_f) {
    best_f = -refined.value;
    best = refined.x;
  }

  const Vector u = detail::z_rotation_diagonal(n, best);
  Matrix rotated = u.asDiagonal() * m * u.conjugate().asDiagonal();
  PhaseCorrection out{DensityMatrix(spec, detail::hermitian_part(rotated)), {}, before, best_f};
  for (int j = 0; j < n; ++j) out.angles.push_back(detail::wrap_angle(best(j)));
  return out;
}

}  // namespace cqed
