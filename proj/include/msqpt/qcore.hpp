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

#include <array>
#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace msqpt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Tolerance for quantities that are exact up to floating-point rounding
/// (tensor products, unit traces, analytic coefficients).
inline constexpr double kConstructionTol = 1e-12;
/// Tolerance for eigensolver and iterative results.
inline constexpr double kNumericalTol = 1e-9;

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const ComplexMatrix& m, double tol = 1e-10) {
  return m.rows() == m.cols() && max_abs(ComplexMatrix(m - m.adjoint())) < tol;
}

inline bool is_unitary(const ComplexMatrix& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  ComplexMatrix g = m.adjoint() * m;
  g -= ComplexMatrix::Identity(m.rows(), m.cols());
  return max_abs(g) < tol;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline int qubits_of_dim(Eigen::Index dim, const char* what) {
  int n = 0;
  Eigen::Index d = dim;
  while (d > 1 && d % 2 == 0) {
    d /= 2;
    ++n;
  }
  if (d != 1 || n == 0)
    throw std::invalid_argument(std::string(what) + ": dimension " +
                                std::to_string(dim) + " is not a power of two");
  return n;
}

/// Label of an n-qubit Pauli operator. The base-4 digits of `value` select
/// {I, X, Y, Z} per qubit, with qubit 0 (the leftmost tensor factor, most
/// significant bit of a basis index) as the most significant digit.
/// Index 0 is the identity.
struct PauliIndex {
  int value = 0;
  int n = 1;

  PauliIndex() = default;
  PauliIndex(int value_, int qubits) : value(value_), n(qubits) {
    if (n < 1 || n > 15) throw std::invalid_argument("PauliIndex: bad qubit count");
    if (value < 0 || value >= count(n))
      throw std::invalid_argument("PauliIndex: value " + std::to_string(value) +
                                  " out of range for " + std::to_string(n) + " qubits");
  }

  static int count(int qubits) { return 1 << (2 * qubits); }

  int dim() const { return 1 << n; }
  bool is_identity() const { return value == 0; }

  // digit for qubit q, 0-based from the left
  int digit(int q) const { return (value >> (2 * (n - 1 - q))) & 3; }

  std::string name() const {
    static const char* letters = "IXYZ";
    std::string s(n, 'I');
    for (int q = 0; q < n; ++q) s[q] = letters[digit(q)];
    return s;
  }

  bool operator==(const PauliIndex& o) const { return value == o.value && n == o.n; }
};

/// Normalized state vector on `qubits()` qubits, amplitudes in
/// computational-basis order (qubit 0 most significant).
struct PureState {
  ComplexVector amps;

  PureState() = default;
  explicit PureState(ComplexVector a) : amps(std::move(a)) {
    qubits_of_dim(amps.size(), "PureState");
    if (std::abs(amps.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("PureState: vector is not normalized");
  }

  int qubits() const { return qubits_of_dim(amps.size(), "PureState"); }
  ComplexMatrix density() const { return amps * amps.adjoint(); }
};

namespace detail {

inline const std::array<ComplexMatrix, 4>& single_qubit_paulis() {
  static const std::array<ComplexMatrix, 4> p = [] {
    std::array<ComplexMatrix, 4> t;
    for (auto& m : t) m = ComplexMatrix::Zero(2, 2);
    t[0] << 1, 0, 0, 1;
    t[1] << 0, 1, 1, 0;
    t[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    t[3] << 1, 0, 0, -1;
    return t;
  }();
  return p;
}

}  // namespace detail

/// Dense 2^n x 2^n matrix of the Pauli operator E_idx.
inline ComplexMatrix pauli_operator(const PauliIndex& idx) {
  const auto& p = detail::single_qubit_paulis();
  ComplexMatrix out = p[idx.digit(0)];
  for (int q = 1; q < idx.n; ++q) out = kron(out, p[idx.digit(q)]);
  return out;
}

/// All 4^n Pauli operators for n qubits, indexed by PauliIndex value.
/// Built once per n and shared; treat as read-only.
inline const std::vector<ComplexMatrix>& pauli_basis(int n) {
  static std::map<int, std::vector<ComplexMatrix>> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<ComplexMatrix> ops;
    ops.reserve(PauliIndex::count(n));
    for (int v = 0; v < PauliIndex::count(n); ++v)
      ops.push_back(pauli_operator(PauliIndex(v, n)));
    it = cache.emplace(n, std::move(ops)).first;
  }
  return it->second;
}

/// Coefficients c_i = Tr[E_i M] / 2^n of M in the Pauli operator basis,
/// so that M = sum_i c_i E_i.
inline ComplexVector expand_pauli(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("expand_pauli: matrix not square");
  const int n = qubits_of_dim(m.rows(), "expand_pauli");
  const auto& basis = pauli_basis(n);
  const double dim = static_cast<double>(m.rows());
  ComplexVector coeffs(PauliIndex::count(n));
  for (int i = 0; i < coeffs.size(); ++i)
    coeffs(i) = (basis[i].cwiseProduct(m.transpose())).sum() / dim;  // Tr[E_i M]/2^n
  return coeffs;
}

/// Inverse of expand_pauli: sum_i coeffs_i E_i.
inline ComplexMatrix pauli_reconstruct(const ComplexVector& coeffs, int n) {
  if (coeffs.size() != PauliIndex::count(n))
    throw std::invalid_argument("pauli_reconstruct: coefficient count mismatch");
  const auto& basis = pauli_basis(n);
  ComplexMatrix out = ComplexMatrix::Zero(1 << n, 1 << n);
  for (int i = 0; i < coeffs.size(); ++i)
    if (coeffs(i) != Complex(0, 0)) out += coeffs(i) * basis[i];
  return out;
}

/// Partial trace of a `layout`-qubit density operator, keeping the qubits
/// listed in `keep` (0-based, qubit 0 most significant). The kept qubits
/// appear in the output in the order given.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, const std::vector<int>& keep,
                                   int layout) {
  if (rho.rows() != rho.cols() || rho.rows() != (Eigen::Index(1) << layout))
    throw std::invalid_argument("partial_trace: dimension does not match layout");
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  std::vector<bool> kept(layout, false);
  for (int q : keep) {
    if (q < 0 || q >= layout) throw std::out_of_range("partial_trace: keep index out of range");
    if (kept[q]) throw std::invalid_argument("partial_trace: duplicate keep index");
    kept[q] = true;
  }
  std::vector<int> traced;
  for (int q = 0; q < layout; ++q)
    if (!kept[q]) traced.push_back(q);

  const int nk = static_cast<int>(keep.size());
  const int nt = layout - nk;
  const auto bitpos = [layout](int q) { return layout - 1 - q; };  // shift of qubit q

  ComplexMatrix out = ComplexMatrix::Zero(1 << nk, 1 << nk);
  for (long a = 0; a < (1L << nk); ++a) {
    for (long b = 0; b < (1L << nk); ++b) {
      long base_r = 0, base_c = 0;
      for (int j = 0; j < nk; ++j) {
        base_r |= ((a >> (nk - 1 - j)) & 1L) << bitpos(keep[j]);
        base_c |= ((b >> (nk - 1 - j)) & 1L) << bitpos(keep[j]);
      }
      Complex acc = 0;
      for (long e = 0; e < (1L << nt); ++e) {
        long env = 0;
        for (int j = 0; j < nt; ++j) env |= ((e >> (nt - 1 - j)) & 1L) << bitpos(traced[j]);
        acc += rho(base_r | env, base_c | env);
      }
      out(a, b) = acc;
    }
  }
  return out;
}

struct HermEig {
  RealVector values;      // descending
  ComplexMatrix vectors;  // orthonormal columns, vectors.col(k) <-> values(k)
};

/// Eigendecomposition of a Hermitian matrix with a fixed convention:
/// eigenvalues descending, and each eigenvector scaled so its first entry
/// of modulus > 1e-8 is real and positive.
inline HermEig herm_eig(const ComplexMatrix& h) {
  if (!is_hermitian(h, 1e-10))
    throw std::invalid_argument("herm_eig: input is not Hermitian within 1e-10");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("herm_eig: solver failed");

  const Eigen::Index d = h.rows();
  HermEig out;
  out.values.resize(d);
  out.vectors.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    out.values(k) = solver.eigenvalues()(d - 1 - k);  // ascending -> descending
    ComplexVector v = solver.eigenvectors().col(d - 1 - k);
    for (Eigen::Index r = 0; r < d; ++r) {
      if (std::abs(v(r)) > 1e-8) {
        v *= std::conj(v(r)) / std::abs(v(r));
        break;
      }
    }
    out.vectors.col(k) = v;
  }
  return out;
}

}  // namespace msqpt
