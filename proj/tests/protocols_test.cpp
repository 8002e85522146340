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

#include "cqed/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cqed/entanglement.hpp"

using namespace cqed;

namespace {

double g_squared_sum(const SystemConfig& c) {
  double s = 0.0;
  for (double g : c.couplings()) s += g * g;
  return s;
}

}  // namespace

TEST(SinglePhoton, duration_is_quarter_rabi_period) {
  const SystemConfig c = paper_preset();
  const PulseSchedule s = prepare_single_photon(c, 0);
  ASSERT_EQ(s.segments.size(), 1u);
  EXPECT_NEAR(s.segments[0].duration, 4.74e-9, 0.005e-9);
  EXPECT_NEAR(cavity_population(execute_pure(c, s)), 1.0, 1e-6);
}

TEST(SinglePhoton, zero_and_double_duration) {
  const SystemConfig c = paper_preset();
  PulseSchedule s = prepare_single_photon(c, 0);
  const double quarter = s.segments[0].duration;
  s.segments[0].duration = 0.0;
  QuantumState psi = execute_pure(c, s);
  EXPECT_NEAR(cavity_population(psi), 0.0, 1e-12);
  EXPECT_NEAR(qubit_populations(DensityMatrix::pure(psi))[0], 1.0, 1e-12);
  s.segments[0].duration = 2.0 * quarter;
  psi = execute_pure(c, s);
  EXPECT_NEAR(qubit_populations(DensityMatrix::pure(psi))[0], 1.0, 1e-6);
}

TEST(CavityPopulation, number_states_and_superposition) {
  const SystemConfig c = paper_preset();
  EXPECT_EQ(cavity_population(ground_state(c)), 0.0);
  EXPECT_NEAR(cavity_population(QuantumState::basis(c.spec, 0, 1)), 1.0, 1e-15);
  Vector v = Vector::Zero(c.spec.dim());
  v(c.spec.index(0, 0)) = v(c.spec.index(0, 1)) = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(cavity_population(QuantumState(c.spec, v)), 0.5, 1e-15);
}

TEST(RabiScan, follows_cos_squared_for_one_qubit) {
  const SystemConfig c = paper_preset();
  std::vector<double> taus;
  for (int k = 0; k < 41; ++k) taus.push_back(0.25e-9 * k);
  const PopulationTrace t = rabi_scan(c, {0}, taus);
  const double g = c.qubits[0].coupling_g;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    EXPECT_NEAR(t.cavity[i], std::pow(std::cos(g * taus[i]), 2), 1e-9);
    EXPECT_NEAR(t.cavity[i] + t.qubit_excited[i][0], 1.0, 1e-9);
  }
}

TEST(RabiScan, peak_populations_follow_coupling_weights) {
  const SystemConfig c = paper_preset();
  const double tw = collective_w_time(c);
  const PopulationTrace t = rabi_scan(c, {0, 1, 2}, {tw}, {}, 0);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(t.qubit_excited[0][j], c.qubits[j].coupling_g * c.qubits[j].coupling_g / g_squared_sum(c), 1e-6);
  }
}

TEST(RabiScan, rejects_bad_grids) {
  const SystemConfig c = paper_preset();
  EXPECT_THROW(rabi_scan(c, {0}, {2e-9, 1e-9}), std::invalid_argument);
  EXPECT_THROW(rabi_scan(c, {}, {1e-9}), std::invalid_argument);
  EXPECT_THROW(rabi_scan(c, {5}, {1e-9}), std::invalid_argument);
}

TEST(Collective, ideal_preparation) {
  const SystemConfig c = paper_preset();
  EXPECT_NEAR(collective_w_time(c), 2.64e-9, 0.005e-9);
  const WPreparation w = prepare_w_collective(c);
  EXPECT_LT(w.cavity_population, 1e-6);
  const PhaseCorrection pc = apply_phase_correction(w.qubit_state, TargetState::w_paper().vector);
  EXPECT_GT(pc.fidelity_after, 0.999);
  EXPECT_GE(pc.fidelity_after, pc.fidelity_before);
}

TEST(Collective, equal_couplings_give_plus_signs) {
  SystemConfig c = paper_preset();
  for (auto& q : c.qubits) q.coupling_g = std::numbers::pi * 110e6;
  // Resonant qubits with equal couplings: amplitudes -i g/G on every qubit.
  const WPreparation w = prepare_w_collective(c);
  EXPECT_NEAR(fidelity(w.qubit_state, TargetState::w_plus()), 1.0, 1e-6);
}

TEST(Sequential, swap_times) {
  const SystemConfig c = paper_preset();
  const auto order = default_sequential_order(c);
  ASSERT_EQ(order, (std::vector<int>{2, 1, 0}));
  const auto taus = sequential_w_times(c, order);
  EXPECT_NEAR(taus[0], 2.72e-9, 0.005e-9);
  EXPECT_NEAR(taus[1], 2.26e-9, 0.005e-9);
  EXPECT_NEAR(taus[2], 4.74e-9, 0.005e-9);
}

TEST(Sequential, first_swap_leaves_two_thirds_in_cavity) {
  const SystemConfig c = paper_preset();
  const auto taus = sequential_w_times(c, {2, 1, 0});
  ScheduleSegment seg = resonant_segment(c, {2}, taus[0]);
  seg.boundary_rotations.push_back({2, Axis::x, std::numbers::pi});
  const QuantumState psi = execute_pure(c, PulseSchedule{{seg}, ground_state(c)});
  EXPECT_NEAR(cavity_population(psi), 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(qubit_populations(DensityMatrix::pure(psi))[2], 1.0 / 3.0, 1e-6);
}

TEST(Sequential, ideal_preparation) {
  const SystemConfig c = paper_preset();
  const WPreparation w = prepare_w_sequential(c);
  EXPECT_LT(w.cavity_population, 1e-6);
  EXPECT_GT(apply_phase_correction(w.qubit_state, TargetState::w_paper().vector).fidelity_after, 0.999);
}

TEST(PhaseCorrection, already_matching) {
  const QuantumState w = TargetState::w_paper().vector;
  const PhaseCorrection pc = apply_phase_correction(DensityMatrix::pure(w), w);
  EXPECT_NEAR(pc.fidelity_after, 1.0, 1e-12);
  // Only relative phases matter, so the angles agree up to a common value.
  for (double a : pc.angles) EXPECT_NEAR(std::remainder(a - pc.angles[0], 2 * std::numbers::pi), 0.0, 1e-4);
}

TEST(PhaseCorrection, recovers_known_rotation) {
  const QuantumState w = TargetState::w_paper().vector;
  const DensityMatrix pure = DensityMatrix::pure(w);
  for (double phi : {0.3, 1.7, -2.9, 3.1}) {
    Eigen::VectorXd angles = Eigen::VectorXd::Zero(3);
    angles(0) = phi;
    const Vector u = detail::z_rotation_diagonal(3, angles);
    const Matrix rotated = u.asDiagonal() * pure.matrix() * u.conjugate().asDiagonal();
    const PhaseCorrection pc = apply_phase_correction(DensityMatrix(kThreeQubits, rotated), w);
    EXPECT_NEAR(pc.fidelity_after, 1.0, 1e-8) << phi;
  }
}

TEST(PhaseCorrection, maximally_mixed_unchanged) {
  const PhaseCorrection pc =
      apply_phase_correction(DensityMatrix::maximally_mixed(kThreeQubits), TargetState::w_paper().vector);
  EXPECT_NEAR(pc.fidelity_before, 0.125, 1e-14);
  EXPECT_NEAR(pc.fidelity_after, 0.125, 1e-14);
}

TEST(Noise, collective_beats_sequential_ceiling) {
  const SystemConfig c = paper_preset();
  ProtocolOptions o;
  o.noise = true;
  const auto target = TargetState::w_paper().vector;
  const double fc = apply_phase_correction(prepare_w_collective(c, o).qubit_state, target).fidelity_after;
  const double fs = apply_phase_correction(prepare_w_sequential(c, o).qubit_state, target).fidelity_after;
  EXPECT_GT(fc, fs);
  EXPECT_LT(fc, 0.999);
}
