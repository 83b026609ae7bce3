// Copyright 2026 The msqpt authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "msqpt/msqpt.hpp"
#include "test_support.hpp"

using namespace msqpt;

namespace {

const std::string kTwoQubitFile = std::string(MSQPT_DATA_DIR) + "/two_qubit_states.txt";
const std::string kThreeQubitFile = std::string(MSQPT_DATA_DIR) + "/three_qubit_states.txt";

ComplexMatrix reduced_system_state(const PureState& psi, int n_sys) {
  std::vector<int> keep(n_sys);
  for (int q = 0; q < n_sys; ++q) keep[q] = q;
  return partial_trace(psi.density(), keep, psi.qubits());
}

}  // namespace

TEST_CASE("basis densities satisfy their invariants", "[states]") {
  const BasisDensity id1 = basis_density(PauliIndex(0, 1));
  REQUIRE(max_abs(id1.matrix - ComplexMatrix::Identity(2, 2) / 2.0) < 1e-15);

  const BasisDensity rho6 = basis_density(PauliIndex(6, 2));
  REQUIRE(max_abs(rho6.matrix -
                  (oracle::pauli(6, 2) + oracle::Matrix::Identity(4, 4)) / 4.0) < 1e-15);

  for (int n = 2; n <= 3; ++n) {
    for (int i = 0; i < PauliIndex::count(n); ++i) {
      const BasisDensity rho = basis_density(PauliIndex(i, n));
      REQUIRE(std::abs(rho.matrix.trace() - Complex(1, 0)) < 1e-12);
      const HermEig eig = herm_eig(rho.matrix);
      REQUIRE(eig.values.minCoeff() > -1e-12);
      if (i > 0) {
        const double nonzero = 1.0 / (1 << (n - 1));
        for (int k = 0; k < rho.matrix.rows(); ++k) {
          const double v = eig.values(k);
          REQUIRE((std::abs(v) < 1e-12 || std::abs(v - nonzero) < 1e-12));
        }
      }
    }
  }
}

TEST_CASE("purifications reduce to their basis density", "[states]") {
  for (int i = 1; i < 16; ++i) {
    const Purification p = purify(PauliIndex(i, 2));
    REQUIRE(p.state.qubits() == 3);
    REQUIRE(max_abs(reduced_system_state(p.state, 2) - basis_density(PauliIndex(i, 2)).matrix) <
            1e-12);
  }
  for (int i = 1; i < 64; ++i) {
    const Purification p = purify(PauliIndex(i, 3));
    REQUIRE(p.state.qubits() == 5);
    REQUIRE(max_abs(reduced_system_state(p.state, 3) - basis_density(PauliIndex(i, 3)).matrix) <
            1e-12);
  }

  REQUIRE_THROWS_AS(purify(PauliIndex(1, 1)), std::invalid_argument);
  REQUIRE_THROWS_AS(purify(PauliIndex(0, 2)), std::invalid_argument);
}

TEST_CASE("published pure states satisfy the same purification contract", "[states]") {
  // psi_6 from the two-qubit list
  ComplexVector psi6(8);
  psi6 << Complex(0, -0.5), 0, 0, 0.5, 0, Complex(0, -0.5), 0.5, 0;
  REQUIRE(max_abs(reduced_system_state(PureState(psi6), 2) -
                  basis_density(PauliIndex(6, 2)).matrix) < 1e-12);

  // psi_15 = (|000> + |111>)/sqrt(2); toolkit output is contract-equal
  ComplexVector psi15 = ComplexVector::Zero(8);
  psi15(0) = psi15(7) = 1.0 / std::sqrt(2.0);
  const ComplexMatrix from_published = reduced_system_state(PureState(psi15), 2);
  const ComplexMatrix from_toolkit = reduced_system_state(purify(PauliIndex(15, 2)).state, 2);
  REQUIRE(max_abs(from_published - from_toolkit) < 1e-12);

  // Omega_50 from the appendix fixture
  const auto states = load_fixture_states(kThreeQubitFile);
  for (const auto& [label, psi] : states) {
    if (label != 50) continue;
    REQUIRE(max_abs(reduced_system_state(psi, 3) -
                    reduced_system_state(purify(PauliIndex(50, 3)).state, 3)) < 1e-12);
  }
}

TEST_CASE("prep unitaries are unitary with eigenvector columns", "[states]") {
  // rho~_3 is diagonal, so R_3 must be a permutation of basis vectors
  const PrepUnitary r3 = synth_prep_unitary(PauliIndex(3, 2));
  for (int c = 0; c < 4; ++c) {
    int nonzero = 0;
    for (int r = 0; r < 4; ++r)
      if (std::abs(r3.matrix(r, c)) > 1e-12) ++nonzero;
    REQUIRE(nonzero == 1);
  }

  for (int i = 1; i < 16; ++i) {
    const PauliIndex idx(i, 2);
    const PrepUnitary r = synth_prep_unitary(idx);
    REQUIRE(is_unitary(r.matrix, 1e-10));
    const HermEig eig = herm_eig(basis_density(idx).matrix);
    for (int c = 0; c < 2; ++c)
      REQUIRE((r.matrix.col(c) - eig.vectors.col(r.column_map[c])).norm() < 1e-12);
  }
}

TEST_CASE("prep circuits produce the right reduced state", "[states]") {
  for (int i : {1, 3, 6, 10, 15}) {
    const Circuit c = build_prep_circuit(PauliIndex(i, 2));
    REQUIRE(c.wires == 3);
    ComplexMatrix rho0 = ComplexMatrix::Zero(8, 8);
    rho0(0, 0) = 1;
    const ComplexMatrix out = run_circuit(c, rho0);
    REQUIRE(max_abs(partial_trace(out, {0, 1}, 3) - basis_density(PauliIndex(i, 2)).matrix) <
            1e-12);
  }
  for (int i : {14, 50, 63}) {
    const Circuit c = build_prep_circuit(PauliIndex(i, 3));
    REQUIRE(c.wires == 5);
    ComplexMatrix rho0 = ComplexMatrix::Zero(32, 32);
    rho0(0, 0) = 1;
    const ComplexMatrix out = run_circuit(c, rho0);
    REQUIRE(max_abs(partial_trace(out, {0, 1, 2}, 3 + 2) -
                    basis_density(PauliIndex(i, 3)).matrix) < 1e-12);
  }
  REQUIRE_THROWS_AS(build_prep_circuit(PauliIndex(0, 2)), std::invalid_argument);
}

TEST_CASE("the published U6 block is one valid prep instance", "[states]") {
  // U6 = S_2 . CNOT_12 . CNOT_23 . H_2 . H_1 applied to |000>
  Circuit c(3);
  c.h(0).h(1).cnot(1, 2).cnot(0, 1).s(1);
  ComplexMatrix rho0 = ComplexMatrix::Zero(8, 8);
  rho0(0, 0) = 1;
  const ComplexMatrix out = run_circuit(c, rho0);
  REQUIRE(max_abs(partial_trace(out, {0, 1}, 3) - basis_density(PauliIndex(6, 2)).matrix) <
          1e-12);
}

TEST_CASE("fixture loading and parse errors", "[states]") {
  const auto two = load_fixture_states(kTwoQubitFile);
  REQUIRE(two.size() == 15);
  const auto three = load_fixture_states(kThreeQubitFile);
  REQUIRE(three.size() == 63);
  for (const auto& [label, psi] : three) REQUIRE(std::abs(psi.amps.norm() - 1.0) < 1e-9);
  REQUIRE(three.front().first == 1);

  std::istringstream bad("1: (0,0) (1,0)\n2: (1,0 nonsense\n");
  REQUIRE_THROWS_WITH(load_fixture_states(bad),
                      Catch::Matchers::ContainsSubstring("line 2"));
  std::istringstream empty("# only a comment\n");
  REQUIRE_THROWS_AS(load_fixture_states(empty), std::runtime_error);
  std::istringstream unnormalized("1: (0.5,0) (0.5,0)\n");
  REQUIRE_THROWS_AS(load_fixture_states(unnormalized), std::runtime_error);
}

TEST_CASE("fixture validation flags the published anomalies", "[states]") {
  const auto three = load_fixture_states(kThreeQubitFile);
  const auto checks = validate_fixture_states(three, 3, 1e-9);
  REQUIRE(checks.size() == 63);
  int mismatched = 0, duplicate_labels = 0, duplicate_amps = 0;
  for (const auto& chk : checks) {
    REQUIRE(chk.matched);  // every appendix vector reduces to some rho~_j
    if (!chk.label_agrees) ++mismatched;
    if (chk.duplicate_label) ++duplicate_labels;
    if (chk.duplicate_amplitudes) ++duplicate_amps;
  }
  // Omega_14 duplicates Omega_13; the 62nd entry is labeled 52 but holds
  // the vector for index 62
  REQUIRE(mismatched == 2);
  REQUIRE(duplicate_labels == 1);
  REQUIRE(duplicate_amps == 1);
  REQUIRE(checks[13].matched_index == 13);  // the entry labeled 14
  REQUIRE(checks[13].duplicate_amplitudes);
  REQUIRE(checks[61].label == 52);
  REQUIRE(checks[61].matched_index == 62);
  REQUIRE(checks[61].duplicate_label);

  const auto two = load_fixture_states(kTwoQubitFile);
  const auto two_checks = validate_fixture_states(two, 2, 1e-9);
  int unmatched = 0;
  for (const auto& chk : two_checks) {
    if (!chk.matched) {
      ++unmatched;
      REQUIRE(chk.label == 3);  // psi_3 as printed purifies no rho~_i
    }
  }
  REQUIRE(unmatched == 1);
  REQUIRE(two_checks[10].label == 11);
  REQUIRE(two_checks[10].matched);
  REQUIRE(two_checks[10].matched_index == 4);  // psi_11 reduces to rho~_4
}
