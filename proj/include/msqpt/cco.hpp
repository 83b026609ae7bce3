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
#include <string>
#include <vector>

#include "msqpt/qcore.hpp"
#include "msqpt/tomo.hpp"

namespace msqpt {

// Default tolerance is tighter than the re-projection drift it must beat:
// a fresh Dykstra run loses the correction terms, so projecting an output
// again can move it by a few times the successive-iterate tolerance.
struct ProjectionConfig {
  double tol = 1e-10;
  int max_iters = 5000;
};

struct ConvergencePoint {
  int iteration = 0;
  double distance = 0;        // Frobenius distance between successive iterates
  double min_eigenvalue = 0;  // of the TP-feasible iterate (PSD violation)
  double tp_residual = 0;     // of the PSD-feasible iterate (TP violation)
};

struct ProjectionResult {
  ChiMatrix chi;
  bool converged = false;
  int iterations = 0;
  std::vector<ConvergencePoint> log;
};

namespace detail {

/// Orthogonal projector onto the affine trace-preservation set
/// {chi : sum_mn chi_mn E_m^dag E_n = I}, acting on column-vectorized chi.
/// The linear map is fixed by the Pauli basis, so everything heavy is
/// precomputed once per qubit count.
class TpProjector {
 public:
  static const TpProjector& get(int n) {
    static std::map<int, TpProjector> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, TpProjector(n)).first;
    return it->second;
  }

  ComplexMatrix project(const ComplexMatrix& chi) const {
    const Eigen::Map<const ComplexVector> x(chi.data(), chi.size());
    const ComplexVector residual = map_ * x - target_;
    const ComplexVector projected = x - map_.adjoint() * gram_.solve(residual);
    return Eigen::Map<const ComplexMatrix>(projected.data(), chi.rows(), chi.cols());
  }

  double residual(const ComplexMatrix& chi) const {
    const Eigen::Map<const ComplexVector> x(chi.data(), chi.size());
    return (map_ * x - target_).cwiseAbs().maxCoeff();
  }

 private:
  explicit TpProjector(int n) {
    const auto& basis = pauli_basis(n);
    const int np = PauliIndex::count(n);
    const int dim = 1 << n;
    map_.resize(Eigen::Index(dim) * dim, Eigen::Index(np) * np);
    for (int m = 0; m < np; ++m)
      for (int k = 0; k < np; ++k) {
        const ComplexMatrix prod = basis[m].adjoint() * basis[k];
        // column index = column-major position of chi_{m,k}
        map_.col(Eigen::Index(k) * np + m) =
            Eigen::Map<const ComplexVector>(prod.data(), prod.size());
      }
    ComplexMatrix identity = ComplexMatrix::Identity(dim, dim);
    target_ = Eigen::Map<const ComplexVector>(identity.data(), identity.size());
    gram_.compute(map_ * map_.adjoint());
    if (gram_.info() != Eigen::Success)
      throw std::runtime_error("TpProjector: Gram factorization failed");
  }

  ComplexMatrix map_;     // D^2 x D^4
  ComplexVector target_;  // vec(I)
  Eigen::LLT<ComplexMatrix> gram_;
};

inline ComplexMatrix clip_to_psd(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(ComplexMatrix((h + h.adjoint()) / 2.0));
  if (solver.info() != Eigen::Success) throw std::runtime_error("clip_to_psd: solver failed");
  const RealVector clipped = solver.eigenvalues().cwiseMax(0.0);
  return solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().adjoint();
}

}  // namespace detail

/// Max-entry norm of sum_mn chi_mn E_m^dag E_n - I (condition (iii)).
inline double tp_residual(const ComplexMatrix& chi, int n) {
  if (chi.rows() != chi.cols() || chi.rows() != PauliIndex::count(n))
    throw std::invalid_argument("tp_residual: dimension does not match qubit count");
  return detail::TpProjector::get(n).residual(chi);
}

inline double tp_residual(const ChiMatrix& chi) { return tp_residual(chi.entries, chi.n); }

inline double min_eigenvalue(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(ComplexMatrix((h + h.adjoint()) / 2.0));
  return solver.eigenvalues().minCoeff();
}

/// Frobenius-nearest physical (PSD, trace-preserving) chi: Dykstra's
/// alternating projections between the affine TP set and the PSD cone.
/// The PSD clip runs last each sweep, so the returned iterate has min
/// eigenvalue >= 0 up to rounding and a TP residual bounded by the
/// convergence tolerance.
inline ProjectionResult project_physical(const ChiMatrix& chi_in,
                                         const ProjectionConfig& cfg = {}) {
  if (cfg.tol <= 0 || cfg.max_iters < 1)
    throw std::invalid_argument("project_physical: bad configuration");
  const auto& tp = detail::TpProjector::get(chi_in.n);

  ComplexMatrix x = (chi_in.entries + chi_in.entries.adjoint()) / 2.0;
  ComplexMatrix p = ComplexMatrix::Zero(x.rows(), x.cols());
  ComplexMatrix q = p;

  ProjectionResult result;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const ComplexMatrix y = tp.project(x + p);
    p = x + p - y;
    const ComplexMatrix xn = detail::clip_to_psd(y + q);
    q = y + q - xn;
    const double distance = (xn - x).norm();
    x = xn;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> spectrum(ComplexMatrix((y + y.adjoint()) / 2.0),
                                                          Eigen::EigenvaluesOnly);
    result.log.push_back({it, distance, spectrum.eigenvalues().minCoeff(), tp.residual(x)});
    result.iterations = it;
    if (distance < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.chi.n = chi_in.n;
  result.chi.provenance = Provenance::cco;
  result.chi.entries = std::move(x);
  return result;
}

/// Gate fidelity |Tr[a b^dag]| / sqrt(Tr[a^dag a] Tr[b^dag b]).
inline double fidelity(const ChiMatrix& a, const ChiMatrix& b) {
  if (a.entries.rows() != b.entries.rows())
    throw std::invalid_argument("fidelity: dimension mismatch");
  const double na = a.entries.norm(), nb = b.entries.norm();
  if (na < 1e-300 || nb < 1e-300) throw std::invalid_argument("fidelity: zero-norm argument");
  const double value = std::abs((a.entries * b.entries.adjoint()).trace()) / (na * nb);
  return std::min(1.0, value);
}

inline void write_convergence_csv(const std::string& path,
                                  const std::vector<ConvergencePoint>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open convergence log file: " + path);
  out << "iteration,distance,min_eigenvalue,tp_residual\n";
  out.precision(17);
  for (const auto& pt : log)
    out << pt.iteration << "," << pt.distance << "," << pt.min_eigenvalue << ","
        << pt.tp_residual << "\n";
}

}  // namespace msqpt
