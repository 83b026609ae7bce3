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

#pragma once

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "msqpt/circuit.hpp"
#include "msqpt/qcore.hpp"

namespace msqpt {

/// Input state rho~_i = (E_i + I)/2^n for i > 0, I/2^n for i = 0.
/// Unit trace, PSD; for i > 0 the non-zero eigenvalues all equal 1/2^{n-1}.
struct BasisDensity {
  PauliIndex index;
  ComplexMatrix matrix;
};

/// Pure state on 2n-1 qubits (n system + n-1 ancilla, ancilla least
/// significant) whose ancilla-reduced density matrix is rho~_index.
struct Purification {
  PauliIndex index;
  PureState state;
};

/// Preparation unitary R_i. Column k holds the eigenvector of rho~_i with
/// rank column_map[k] in herm_eig order; the first 2^{n-1} columns are the
/// non-zero-eigenvalue eigenvectors.
struct PrepUnitary {
  ComplexMatrix matrix;
  std::vector<int> column_map;
};

inline BasisDensity basis_density(const PauliIndex& i) {
  const double dim = static_cast<double>(i.dim());
  ComplexMatrix m = pauli_operator(i);
  if (!i.is_identity()) m += ComplexMatrix::Identity(i.dim(), i.dim());
  return {i, m / dim};
}

namespace detail {

inline void require_purifiable(const PauliIndex& i) {
  if (i.n < 2)
    throw std::invalid_argument("purification is defined for n >= 2 qubits");
  if (i.is_identity())
    throw std::invalid_argument(
        "rho~_0 = I/2^n has rank 2^n and cannot be purified on n-1 ancilla qubits");
}

}  // namespace detail

/// |Psi_i> = 2^{-(n-1)/2} sum_k |u_k>|k>, with u_k the non-zero-eigenvalue
/// eigenvectors of rho~_i in herm_eig order and |k> the ancilla basis.
inline Purification purify(const PauliIndex& i) {
  detail::require_purifiable(i);
  const int n = i.n;
  const int sys_dim = 1 << n;
  const int anc_dim = 1 << (n - 1);
  const HermEig eig = herm_eig(basis_density(i).matrix);

  ComplexVector amps = ComplexVector::Zero(Eigen::Index(sys_dim) * anc_dim);
  const double w = 1.0 / std::sqrt(static_cast<double>(anc_dim));
  for (int k = 0; k < anc_dim; ++k)
    for (int s = 0; s < sys_dim; ++s)
      amps(Eigen::Index(s) * anc_dim + k) = w * eig.vectors(s, k);
  return {i, PureState(std::move(amps))};
}

/// R_i with the kept eigenvectors in the leading columns and the
/// null-eigenvalue eigenvectors completing the basis.
inline PrepUnitary synth_prep_unitary(const PauliIndex& i) {
  detail::require_purifiable(i);
  const HermEig eig = herm_eig(basis_density(i).matrix);
  std::vector<int> column_map(i.dim());
  for (int k = 0; k < i.dim(); ++k) column_map[k] = k;
  return {eig.vectors, std::move(column_map)};
}

/// Preparation circuit on 2n-1 wires (system 0..n-1, ancilla n..2n-2):
/// H on system wires 1..n-1, CNOT(q -> q+n-1) for q in 1..n-1, then R_i on
/// the system wires. From |0...0> the ancilla-reduced output is rho~_i.
inline Circuit build_prep_circuit(const PauliIndex& i) {
  detail::require_purifiable(i);
  const int n = i.n;
  Circuit c(2 * n - 1);
  for (int q = 1; q < n; ++q) c.h(q);
  for (int q = 1; q < n; ++q) c.cnot(q, q + n - 1);
  std::vector<int> sys(n);
  for (int q = 0; q < n; ++q) sys[q] = q;
  c.unitary(synth_prep_unitary(i).matrix, sys);
  return c;
}

/// Parse fixture states from a stream. Format: one state per line,
/// `label: (re,im) (re,im) ...`, amplitudes in computational-basis order;
/// blank lines and lines starting with '#' are skipped.
inline std::vector<std::pair<int, PureState>> load_fixture_states(std::istream& in) {
  std::vector<std::pair<int, PureState>> out;
  std::string line;
  int lineno = 0;
  const auto fail = [&](const std::string& what) {
    throw std::runtime_error("fixture parse error at line " + std::to_string(lineno) + ": " +
                             what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
    if (sv.empty() || sv.front() == '#') continue;

    const auto colon = sv.find(':');
    if (colon == std::string_view::npos) fail("missing ':' after label");
    int label = 0;
    try {
      label = std::stoi(std::string(sv.substr(0, colon)));
    } catch (const std::exception&) {
      fail("label is not an integer");
    }

    std::istringstream amps(std::string(sv.substr(colon + 1)));
    std::vector<Complex> values;
    std::string tok;
    while (amps >> tok) {
      double re = 0, im = 0;
      char l = 0, comma = 0, r = 0;
      std::istringstream ts(tok);
      ts >> l >> re >> comma >> im >> r;
      if (!ts || l != '(' || comma != ',' || r != ')') fail("malformed amplitude '" + tok + "'");
      values.emplace_back(re, im);
    }
    if (values.empty()) fail("no amplitudes");
    ComplexVector v(values.size());
    for (size_t k = 0; k < values.size(); ++k) v(static_cast<Eigen::Index>(k)) = values[k];
    try {
      out.emplace_back(label, PureState(std::move(v)));
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (out.empty()) {
    lineno = 0;
    fail("no states in fixture input");
  }
  return out;
}

inline std::vector<std::pair<int, PureState>> load_fixture_states(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file: " + path);
  return load_fixture_states(in);
}

/// Result of checking one fixture vector against the generated basis
/// densities by its ancilla-reduced state.
struct FixtureCheck {
  int label = 0;
  bool matched = false;   // reduced state equals some rho~_j
  int matched_index = -1; // the j it equals, when matched
  bool label_agrees = false;
  bool duplicate_label = false;      // label already seen earlier in the file
  bool duplicate_amplitudes = false; // identical amplitudes to an earlier entry
};

/// Reduced-state validation of loaded fixtures: each state on 2n-1 qubits
/// is traced down to the n system qubits and compared against every rho~_j.
inline std::vector<FixtureCheck> validate_fixture_states(
    const std::vector<std::pair<int, PureState>>& states, int n_sys, double tol = 1e-9) {
  std::vector<FixtureCheck> checks;
  checks.reserve(states.size());
  std::vector<int> keep(n_sys);
  for (int q = 0; q < n_sys; ++q) keep[q] = q;
  const int layout = 2 * n_sys - 1;

  for (size_t idx = 0; idx < states.size(); ++idx) {
    const auto& [label, psi] = states[idx];
    FixtureCheck chk;
    chk.label = label;
    if (psi.qubits() != layout)
      throw std::invalid_argument("fixture state has wrong qubit count for n=" +
                                  std::to_string(n_sys));
    const ComplexMatrix reduced = partial_trace(psi.density(), keep, layout);
    for (int j = 0; j < PauliIndex::count(n_sys); ++j) {
      if (max_abs(ComplexMatrix(reduced - basis_density(PauliIndex(j, n_sys)).matrix)) < tol) {
        chk.matched = true;
        chk.matched_index = j;
        break;
      }
    }
    chk.label_agrees = chk.matched && chk.matched_index == label;
    for (size_t prev = 0; prev < idx; ++prev) {
      if (states[prev].first == label) chk.duplicate_label = true;
      if (states[prev].second.amps.size() == psi.amps.size() &&
          (states[prev].second.amps - psi.amps).cwiseAbs().maxCoeff() < tol)
        chk.duplicate_amplitudes = true;
    }
    checks.push_back(chk);
  }
  return checks;
}

}  // namespace msqpt
