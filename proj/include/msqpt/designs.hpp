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

#include <algorithm>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "msqpt/qcore.hpp"
#include "msqpt/states.hpp"

namespace msqpt {

/// 2^n + 1 mutually unbiased orthonormal bases of 2^n states each.
struct MubFamily {
  int n = 0;
  std::vector<std::vector<PureState>> bases;
  // commuting Pauli class whose joint eigenbasis is bases[b]
  std::vector<std::vector<int>> classes;
};

/// Flattened MUB family: K = 2^n (2^n + 1) states forming a quantum
/// 2-design. states[j] belongs to basis j / 2^n.
struct TwoDesign {
  int n = 0;
  std::vector<PureState> states;
  std::vector<std::vector<int>> classes;

  int size() const { return static_cast<int>(states.size()); }
  int dim() const { return 1 << n; }
  const std::vector<int>& class_of_state(int j) const { return classes[j / dim()]; }
};

namespace detail {

// x/z bit rows of a Pauli label, qubit 0 in bit n-1
inline std::pair<unsigned, unsigned> pauli_xz(int value, int n) {
  unsigned x = 0, z = 0;
  for (int q = 0; q < n; ++q) {
    const int d = (value >> (2 * (n - 1 - q))) & 3;
    if (d == 1 || d == 2) x |= 1u << (n - 1 - q);
    if (d == 2 || d == 3) z |= 1u << (n - 1 - q);
  }
  return {x, z};
}

inline int pauli_from_xz(unsigned x, unsigned z, int n) {
  int value = 0;
  for (int q = 0; q < n; ++q) {
    const unsigned bit = 1u << (n - 1 - q);
    const bool xb = x & bit, zb = z & bit;
    const int d = xb ? (zb ? 2 : 1) : (zb ? 3 : 0);
    value |= d << (2 * (n - 1 - q));
  }
  return value;
}

inline bool paulis_commute(int a, int b, int n) {
  const auto [xa, za] = pauli_xz(a, n);
  const auto [xb, zb] = pauli_xz(b, n);
  return (__builtin_popcount((xa & zb) ^ (za & xb)) & 1) == 0;
}

// product label, phase discarded
inline int pauli_product_label(int a, int b, int n) {
  const auto [xa, za] = pauli_xz(a, n);
  const auto [xb, zb] = pauli_xz(b, n);
  return pauli_from_xz(xa ^ xb, za ^ zb, n);
}

// Lexicographic depth-first search for a partition of the 4^n - 1
// non-identity Paulis into 2^n + 1 multiplication-closed commuting classes.
// Plain greedy can dead-end on the closure constraint, so the search
// backtracks; candidate order makes the result deterministic.
struct ClassPartitionSearch {
  int n;
  int total;
  int class_size;
  std::vector<bool> assigned;
  std::vector<std::vector<int>> classes;

  explicit ClassPartitionSearch(int qubits)
      : n(qubits), total(PauliIndex::count(qubits) - 1), class_size((1 << qubits) - 1),
        assigned(PauliIndex::count(qubits), false) {}

  bool solve() {
    int seed = -1;
    for (int v = 1; v <= total; ++v)
      if (!assigned[v]) {
        seed = v;
        break;
      }
    if (seed < 0) return true;
    std::vector<int> cls{seed};
    assigned[seed] = true;
    const bool ok = extend(cls, seed + 1);
    if (!ok) assigned[seed] = false;
    return ok;
  }

  bool extend(std::vector<int>& cls, int from) {
    if (static_cast<int>(cls.size()) == class_size) {
      classes.push_back(cls);
      std::sort(classes.back().begin(), classes.back().end());
      if (solve()) return true;
      classes.pop_back();
      return false;
    }
    for (int cand = from; cand <= total; ++cand) {
      if (assigned[cand]) continue;
      bool commuting = true;
      for (int e : cls)
        if (!paulis_commute(cand, e, n)) {
          commuting = false;
          break;
        }
      if (!commuting) continue;
      // closure: adding cand also adds cand*e for every class element,
      // and those products are all distinct and outside the class
      std::vector<int> added{cand};
      bool clean = true;
      for (int e : cls) {
        const int prod = pauli_product_label(cand, e, n);
        if (assigned[prod]) {
          clean = false;
          break;
        }
        added.push_back(prod);
      }
      if (!clean) continue;
      for (int v : added) {
        assigned[v] = true;
        cls.push_back(v);
      }
      if (extend(cls, cand + 1)) return true;
      for (int v : added) {
        assigned[v] = false;
        cls.pop_back();
      }
    }
    return false;
  }
};

}  // namespace detail

/// Deterministic MUB family for n qubits: partition the non-identity Paulis
/// into 2^n + 1 maximal commuting classes (lexicographic search) and take
/// each class's joint eigenbasis. Eigenbasis phases follow herm_eig.
inline MubFamily build_mubs(int n) {
  if (n < 1 || n > 3) throw std::invalid_argument("build_mubs: supported qubit counts are 1..3");
  detail::ClassPartitionSearch search(n);
  if (!search.solve()) throw std::runtime_error("build_mubs: no commuting-class partition found");
  std::sort(search.classes.begin(), search.classes.end());

  MubFamily fam;
  fam.n = n;
  fam.classes = search.classes;
  const int dim = 1 << n;
  for (const auto& cls : fam.classes) {
    // distinct weights make the joint eigenbasis non-degenerate
    ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
    double w = 1.0;
    for (int p : cls) {
      a += w * pauli_operator(PauliIndex(p, n));
      w *= 3.0;
    }
    const HermEig eig = herm_eig(a);
    std::vector<PureState> basis;
    basis.reserve(dim);
    for (int k = 0; k < dim; ++k) basis.emplace_back(ComplexVector(eig.vectors.col(k)));
    fam.bases.push_back(std::move(basis));
  }
  return fam;
}

inline TwoDesign two_design(const MubFamily& fam) {
  TwoDesign d;
  d.n = fam.n;
  d.classes = fam.classes;
  for (const auto& basis : fam.bases)
    for (const auto& s : basis) d.states.push_back(s);
  return d;
}

inline TwoDesign two_design(int n) { return two_design(build_mubs(n)); }

/// Real coefficients e_k with Phi_j = sum_k e_k E_k. For a MUB state the
/// support is the identity plus the state's commuting class, entries
/// +-1/2^n.
inline RealVector state_coeffs(const TwoDesign& design, int j) {
  if (j < 0 || j >= design.size()) throw std::out_of_range("state_coeffs: design index");
  const ComplexVector c = expand_pauli(design.states[j].density());
  if (c.imag().cwiseAbs().maxCoeff() > kConstructionTol)
    throw std::runtime_error("state_coeffs: density expansion has imaginary residue");
  return c.real();
}

/// Complex coefficients c_i with E_m^dag Phi_j E_n = sum_i c_i E_i.
inline ComplexVector overlap_coeffs(const PauliIndex& m, const PauliIndex& n,
                                    const TwoDesign& design, int j) {
  if (m.n != design.n || n.n != design.n)
    throw std::invalid_argument("overlap_coeffs: Pauli qubit count mismatch");
  if (j < 0 || j >= design.size()) throw std::out_of_range("overlap_coeffs: design index");
  const auto& basis = pauli_basis(design.n);
  const ComplexMatrix phi = design.states[j].density();
  return expand_pauli(basis[m.value].adjoint() * phi * basis[n.value]);
}

struct BetaEntry {
  int j;  // design-state index
  int k;  // readout Pauli
  int i;  // input Pauli
  Complex value;
};

/// Sparse coefficients beta^{mn}_{j,k,i} = e_k(j) * c_i(m,n,j) of the
/// survival-probability sum, with the per-(i,k) totals aggregated over j.
struct BetaTensor {
  PauliIndex m, n;
  double threshold = 1e-12;
  int design_size = 0;
  std::vector<BetaEntry> entries;
  std::vector<std::pair<int, int>> support;  // distinct (i, k), sorted
  ComplexMatrix weights;                     // weights(k, i) = sum_j beta

  int settings() const {  // measured settings: support excluding k = 0
    int count = 0;
    for (const auto& [i, k] : support)
      if (k != 0) ++count;
    return count;
  }
};

inline BetaTensor beta(const PauliIndex& m, const PauliIndex& n, const TwoDesign& design,
                       double threshold = 1e-12) {
  BetaTensor t;
  t.m = m;
  t.n = n;
  t.threshold = threshold;
  t.design_size = design.size();
  const int np = PauliIndex::count(design.n);
  t.weights = ComplexMatrix::Zero(np, np);
  std::set<std::pair<int, int>> support;
  for (int j = 0; j < design.size(); ++j) {
    const RealVector e = state_coeffs(design, j);
    const ComplexVector c = overlap_coeffs(m, n, design, j);
    for (int k = 0; k < np; ++k) {
      if (std::abs(e(k)) <= threshold) continue;
      for (int i = 0; i < np; ++i) {
        if (std::abs(c(i)) <= threshold) continue;
        const Complex value = e(k) * c(i);
        if (std::abs(value) <= threshold) continue;
        t.entries.push_back({j, k, i, value});
        t.weights(k, i) += value;
        support.emplace(i, k);
      }
    }
  }
  t.support.assign(support.begin(), support.end());
  return t;
}

/// Write a MUB family in the fixture text format; labels are b*2^n + s for
/// basis b, state s.
inline void save_mub_family(const MubFamily& fam, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open MUB cache file for writing: " + path);
  out << "# MUB family cache, n=" << fam.n << "\n";
  out.precision(17);
  const int dim = 1 << fam.n;
  for (size_t b = 0; b < fam.bases.size(); ++b) {
    for (int s = 0; s < dim; ++s) {
      out << b * dim + s << ":";
      const auto& v = fam.bases[b][s].amps;
      for (Eigen::Index r = 0; r < v.size(); ++r)
        out << " (" << v(r).real() << "," << v(r).imag() << ")";
      out << "\n";
    }
  }
}

/// Load a MUB family written by save_mub_family. The class structure is
/// rebuilt from the canonical partition for n.
inline MubFamily load_mub_family(const std::string& path, int n) {
  const auto states = load_fixture_states(path);
  const int dim = 1 << n;
  const int expected = dim * (dim + 1);
  if (static_cast<int>(states.size()) != expected)
    throw std::runtime_error("MUB cache has wrong state count");
  detail::ClassPartitionSearch search(n);
  if (!search.solve()) throw std::runtime_error("load_mub_family: partition search failed");
  std::sort(search.classes.begin(), search.classes.end());
  MubFamily fam;
  fam.n = n;
  fam.classes = search.classes;
  fam.bases.resize(dim + 1);
  for (const auto& [label, psi] : states) {
    if (label < 0 || label >= expected) throw std::runtime_error("MUB cache label out of range");
    if (psi.amps.size() != dim) throw std::runtime_error("MUB cache state has wrong dimension");
    fam.bases[label / dim].push_back(psi);
  }
  for (const auto& basis : fam.bases)
    if (static_cast<int>(basis.size()) != dim)
      throw std::runtime_error("MUB cache basis is incomplete");
  return fam;
}

}  // namespace msqpt
