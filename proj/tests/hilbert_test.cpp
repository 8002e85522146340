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

#include "cqed/hilbert.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace cqed;

TEST(HilbertSpec, dimensions_and_indexing) {
  const HilbertSpec s{3, 2};
  EXPECT_EQ(s.dim(), 24);
  EXPECT_EQ(s.index(0b001, 0), 1);
  EXPECT_EQ(s.index(0b100, 0), 4);
  EXPECT_EQ(s.index(0, 1), 8);
  EXPECT_EQ(s.index(0b111, 2), 23);
  EXPECT_EQ(HilbertSpec::qubits_only(3).dim(), 8);
  EXPECT_THROW((HilbertSpec{0, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((HilbertSpec{0, 2}.validate()));
  EXPECT_THROW((HilbertSpec{2, -1}.validate()), std::invalid_argument);
}

TEST(QuantumState, rejects_unnormalized) {
  const HilbertSpec s{1, 1};
  Vector v = Vector::Zero(4);
  v(0) = 1.1;
  EXPECT_THROW(QuantumState(s, v), std::invalid_argument);
  EXPECT_THROW(QuantumState(s, Vector::Zero(3)), DimensionError);
  EXPECT_NO_THROW(QuantumState::normalized(s, v));
}

TEST(DensityMatrix, rejects_unphysical) {
  const HilbertSpec s = HilbertSpec::qubits_only(1);
  Matrix m(2, 2);
  m << 1.2, 0, 0, -0.2;
  EXPECT_THROW(DensityMatrix(s, m), std::invalid_argument);
  m << 0.5, 0.1, 0.2, 0.5;
  EXPECT_THROW(DensityMatrix(s, m), std::invalid_argument);
  m << 0.6, 0, 0, 0.6;
  EXPECT_THROW(DensityMatrix(s, m), std::invalid_argument);
  EXPECT_NEAR(DensityMatrix::maximally_mixed(s).purity(), 0.5, 1e-15);
}

TEST(Embed, identity_is_identity) {
  const HilbertSpec s{3, 1};
  for (int q = 0; q < 3; ++q) {
    EXPECT_TRUE(embed_qubit_operator(identity2(), q, s).matrix().isIdentity(0.0));
  }
  EXPECT_THROW(embed_qubit_operator(identity2(), 3, s), DimensionError);
}

TEST(Embed, sigma_z_sign_convention) {
  const HilbertSpec s{3, 1};
  const Matrix z = embed_qubit_operator(sigma_z(), 0, s).matrix();
  EXPECT_EQ(z(1, 1), Complex(1.0));
  EXPECT_EQ(z(0, 0), Complex(-1.0));
}

TEST(Embed, sigma_minus_on_c) {
  const HilbertSpec s{3, 1};
  const Matrix m = embed_qubit_operator(sigma_minus(), 2, s).matrix();
  EXPECT_EQ(m(0, 4), Complex(1.0));
  EXPECT_EQ(m.col(4).norm(), 1.0);
}

TEST(Embed, operators_on_different_qubits_commute) {
  const HilbertSpec s{3, 2};
  const Matrix a = embed_qubit_operator(sigma_x(), 0, s).matrix();
  const Matrix b = embed_qubit_operator(sigma_y(), 2, s).matrix();
  EXPECT_LT((a * b - b * a).norm(), 1e-14);
  const Matrix y = embed_qubit_operator(sigma_y(), 1, s).matrix();
  const Matrix x = embed_qubit_operator(sigma_x(), 1, s).matrix();
  const Matrix z = embed_qubit_operator(sigma_z(), 1, s).matrix();
  // [X, Y] = 2iZ holds for any sign convention that keeps the algebra.
  EXPECT_LT((x * y - y * x - 2.0 * kI * z).norm(), 1e-14);
}

TEST(Cavity, ladder_elements) {
  const HilbertSpec s1{1, 1};
  const Matrix a1 = cavity_annihilation(s1).matrix();
  EXPECT_EQ(a1(s1.index(0, 0), s1.index(0, 1)), Complex(1.0));
  EXPECT_EQ(a1.col(s1.index(1, 0)).norm(), 0.0);
  const HilbertSpec s2{1, 2};
  const Matrix a2 = cavity_annihilation(s2).matrix();
  EXPECT_NEAR(a2(s2.index(0, 1), s2.index(0, 2)).real(), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(cavity_annihilation(HilbertSpec::qubits_only(2)), DimensionError);
}

TEST(Expectation, textbook_values) {
  const HilbertSpec s{3, 1};
  const DensityMatrix excited_a = DensityMatrix::pure(QuantumState::basis(s, 0b001, 0));
  EXPECT_NEAR(expectation_real(identity_operator(s), excited_a), 1.0, 1e-15);
  EXPECT_NEAR(expectation_real(embed_qubit_operator(sigma_z(), 0, s), excited_a), 1.0, 1e-15);
  const DensityMatrix one_photon = DensityMatrix::pure(QuantumState::basis(s, 0, 1));
  EXPECT_NEAR(expectation_real(photon_number(s), one_photon), 1.0, 1e-15);
}

TEST(PartialTrace, product_state_factorizes) {
  const HilbertSpec s{3, 2};
  std::mt19937_64 rng(1);
  const QuantumState phi = test_util::random_state(HilbertSpec::qubits_only(3), rng);
  Vector full = Vector::Zero(s.dim());
  full.head(8) = phi.amplitudes();
  const DensityMatrix reduced =
      partial_trace(DensityMatrix::pure(QuantumState(s, full)), Subsystems::all_qubits(3));
  EXPECT_LT((reduced.matrix() - DensityMatrix::pure(phi).matrix()).norm(), 1e-14);
}

TEST(PartialTrace, bell_state_gives_maximally_mixed) {
  const HilbertSpec s = HilbertSpec::qubits_only(2);
  Vector v = Vector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix r = partial_trace(DensityMatrix::pure(QuantumState(s, v)), Subsystems{{1}, false});
  EXPECT_LT((r.matrix() - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
}

// Defining property: Tr[(O (x) Id) rho] = Tr[O rho_reduced] for operators O on
// the kept factors.
TEST(PartialTrace, matches_defining_property_on_random_states) {
  std::mt19937_64 rng(7);
  const HilbertSpec s{3, 2};
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho = test_util::random_density(s, 1 + trial % 4, rng);
    const int kept = trial % 3;
    const DensityMatrix one = partial_trace(rho, Subsystems{{kept}, false});
    EXPECT_NEAR(one.matrix().trace().real(), 1.0, 1e-12);
    for (const Matrix2& p : {sigma_x(), sigma_y(), sigma_z(), sigma_minus()}) {
      const Complex full = (embed_qubit_operator(p, kept, s).matrix() * rho.matrix()).trace();
      const Complex red = (Matrix(p) * one.matrix()).trace();
      EXPECT_LT(std::abs(full - red), 1e-12);
    }
    const DensityMatrix cav = partial_trace(rho, Subsystems{{}, true});
    const Complex n_full = (photon_number(s).matrix() * rho.matrix()).trace();
    Matrix n_red = Matrix::Zero(3, 3);
    n_red(1, 1) = 1.0;
    n_red(2, 2) = 2.0;
    EXPECT_LT(std::abs(n_full - (n_red * cav.matrix()).trace()), 1e-12);
  }
}

TEST(PartialTrace, keeping_everything_is_identity_map) {
  std::mt19937_64 rng(3);
  const HilbertSpec s{2, 1};
  const DensityMatrix rho = test_util::random_density(s, 3, rng);
  EXPECT_LT((partial_trace(rho, Subsystems::everything(s)).matrix() - rho.matrix()).norm(), 1e-15);
  EXPECT_THROW(partial_trace(rho, Subsystems{{}, false}), std::invalid_argument);
  EXPECT_THROW(partial_trace(rho, Subsystems{{2}, false}), DimensionError);
}
