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

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "msqpt/designs.hpp"
#include "msqpt/qcore.hpp"
#include "msqpt/sim.hpp"

namespace msqpt {

enum class Provenance { theoretical, msqpt, sqpt, standard, cco };

inline std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::theoretical: return "theoretical";
    case Provenance::msqpt: return "msqpt";
    case Provenance::sqpt: return "sqpt";
    case Provenance::standard: return "standard";
    case Provenance::cco: return "cco";
  }
  throw std::invalid_argument("bad provenance");
}

inline Provenance provenance_from_string(const std::string& s) {
  for (auto p : {Provenance::theoretical, Provenance::msqpt, Provenance::sqpt,
                 Provenance::standard, Provenance::cco})
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

/// Process matrix in the Pauli operator basis: Lambda(rho) = sum_{mn}
/// chi_mn E_m rho E_n^dag. Hermitian for every engine; `theoretical` and
/// `cco` outputs are additionally PSD and trace-preserving.
struct ChiMatrix {
  int n = 0;
  ComplexMatrix entries;  // D^2 x D^2
  Provenance provenance = Provenance::theoretical;

  int dim() const { return 1 << n; }
};

/// Average survival probabilities F_mn = (D chi_mn + delta_mn) / (D + 1).
struct SurvivalTable {
  ComplexMatrix values;
};

struct ComplexityReport {
  std::string method;
  int n = 0;
  long preparations = 0;
  long readouts = 0;
  long ancillas = 0;
};

enum class Method { msqpt, sqpt, standard };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::msqpt: return "msqpt";
    case Method::sqpt: return "sqpt";
    case Method::standard: return "standard";
  }
  throw std::invalid_argument("bad method");
}

inline Method method_from_string(const std::string& s) {
  for (auto m : {Method::msqpt, Method::sqpt, Method::standard})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown method '" + s + "'");
}

/// Closed-form experimental cost of determining one chi element with high
/// precision, plus the ancilla requirement.
inline ComplexityReport complexity(Method method, int n) {
  if (n < 1 || n > 3) throw std::invalid_argument("complexity: supported qubit counts are 1..3");
  const long dim = 1L << n;
  const long paulis = 1L << (2 * n);
  const long cardinality = dim * (dim + 1);  // 2-design size K
  ComplexityReport rep;
  rep.method = to_string(method);
  rep.n = n;
  switch (method) {
    case Method::standard:
      rep.preparations = paulis - 1;
      rep.readouts = (paulis - 1) * (paulis - 1);
      rep.ancillas = 0;
      break;
    case Method::sqpt:
      // 4 preparations per design state (real/imaginary parts of F_mn,
      // two-sided operator insertions), 2^n - 1 readouts each
      rep.preparations = 4 * cardinality;
      rep.readouts = rep.preparations * (dim - 1);
      rep.ancillas = 0;
      break;
    case Method::msqpt:
      // per MUB set: 2^n inputs x (2^n - 1) commuting observables
      rep.preparations = paulis - 1;
      rep.readouts = (dim + 1) * dim * (dim - 1);
      rep.ancillas = n - 1;
      break;
  }
  return rep;
}

/// Measured E-bar_k^i values keyed by (i, k), shared across chi elements so
/// each setting is run once.
struct SettingCache {
  std::map<std::pair<int, int>, double> values;
};

namespace detail {

// k = 0 readouts are never measured: Tr[E_0 Lambda(E_i)] = Tr[E_i] for a
// trace-preserving channel.
inline double analytic_identity_readout(int i, int dim) { return i == 0 ? double(dim) : 0.0; }

}  // namespace detail

/// F_mn via the sparse beta sum, each required setting measured once and
/// reused across the design states. run_setting estimates
/// D Tr[E_k Lambda(rho~_i)]; for a non-unital channel that overcounts by
/// the Lambda(I) baseline, which is measured once per readout and
/// subtracted.
inline Complex survival(const PauliIndex& m, const PauliIndex& n, const KrausChannel& channel,
                        const TwoDesign& design, const EstimationOptions& opts = {},
                        const SettingCache* cache = nullptr) {
  const BetaTensor bt = beta(m, n, design);
  const int dim = design.dim();
  const bool unital = channel.is_unital();
  std::map<int, double> local_baseline;
  std::map<std::pair<int, int>, double> local_settings;
  const auto setting = [&](int i, int k) {
    if (cache != nullptr) return cache->values.at({i, k});
    const auto it = local_settings.find({i, k});
    if (it != local_settings.end()) return it->second;
    const double value =
        run_setting(PauliIndex(i, design.n), PauliIndex(k, design.n), channel, opts);
    local_settings[{i, k}] = value;
    return value;
  };

  Complex acc = 0;
  for (const auto& [i, k] : bt.support) {
    double ebar;
    if (k == 0) {
      ebar = detail::analytic_identity_readout(i, dim);
    } else {
      ebar = setting(i, k);
      if (i != 0 && !unital) ebar -= setting(0, k);
    }
    acc += bt.weights(k, i) * ebar;
  }
  return acc / double(bt.design_size);
}

/// chi_mn = ((D+1) F_mn - delta_mn) / D.
inline Complex chi_element(const PauliIndex& m, const PauliIndex& n, const KrausChannel& channel,
                           const TwoDesign& design, const EstimationOptions& opts = {},
                           const SettingCache* cache = nullptr) {
  const double dim = design.dim();
  const Complex f = survival(m, n, channel, design, opts, cache);
  const double delta = m.value == n.value ? 1.0 : 0.0;
  return ((dim + 1.0) * f - delta) / dim;
}

/// Direct 2-design average of the survival probability (exact oracle for
/// the sparse-readout route).
inline Complex sqpt_reference(const PauliIndex& m, const PauliIndex& n,
                              const KrausChannel& channel, const TwoDesign& design) {
  const auto& basis = pauli_basis(design.n);
  Complex acc = 0;
  for (const auto& phi : design.states) {
    const ComplexMatrix op = basis[m.value].adjoint() * phi.density() * basis[n.value];
    const ComplexMatrix evolved = apply_channel(op, channel);
    acc += (phi.amps.adjoint() * evolved * phi.amps)(0, 0);
  }
  return acc / double(design.size());
}

inline int worker_count() {
  if (const char* env = std::getenv("MSQPT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const int workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t t = 0; t < count; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mtx;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      try {
        for (std::size_t t = next.fetch_add(1); t < count; t = next.fetch_add(1)) fn(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mtx);
        if (!error) error = std::current_exception();
        next.store(count);  // stop handing out work
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Run every (i, k != 0) setting once. Seeds are derived per setting, so
/// the schedule cannot change results.
inline SettingCache measure_all_settings(const KrausChannel& channel,
                                         const EstimationOptions& opts = {}) {
  const int n = channel.qubits();
  const int np = PauliIndex::count(n);
  std::vector<std::pair<int, int>> settings;
  settings.reserve(std::size_t(np) * (np - 1));
  for (int i = 0; i < np; ++i)
    for (int k = 1; k < np; ++k) settings.emplace_back(i, k);
  std::vector<double> values(settings.size());
  detail::parallel_for(settings.size(), [&](std::size_t t) {
    const auto [i, k] = settings[t];
    values[t] = run_setting(PauliIndex(i, n), PauliIndex(k, n), channel, opts);
  });
  SettingCache cache;
  for (std::size_t t = 0; t < settings.size(); ++t) cache.values[settings[t]] = values[t];
  return cache;
}

/// Element-by-element MSQPT reconstruction of the full chi matrix.
/// chi is computed per unordered pair and mirrored, so Hermiticity holds by
/// construction; independent elements are distributed across workers
/// (capped by MSQPT_THREADS).
inline ChiMatrix full_chi(const KrausChannel& channel, const EstimationOptions& opts = {},
                          const TwoDesign* design_in = nullptr,
                          SurvivalTable* survival_out = nullptr) {
  const int n = channel.qubits();
  const TwoDesign local_design = design_in == nullptr ? two_design(n) : TwoDesign{};
  const TwoDesign& design = design_in == nullptr ? local_design : *design_in;
  if (design.n != n) throw std::invalid_argument("full_chi: design qubit count mismatch");

  const SettingCache cache = measure_all_settings(channel, opts);

  const int np = PauliIndex::count(n);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(std::size_t(np) * (np + 1) / 2);
  for (int m = 0; m < np; ++m)
    for (int k = m; k < np; ++k) pairs.emplace_back(m, k);

  ChiMatrix chi;
  chi.n = n;
  chi.provenance = Provenance::msqpt;
  chi.entries.resize(np, np);
  ComplexMatrix f_table(np, np);
  detail::parallel_for(pairs.size(), [&](std::size_t t) {
    const auto [m, k] = pairs[t];
    const PauliIndex mi(m, n), ki(k, n);
    const Complex f = survival(mi, ki, channel, design, opts, &cache);
    const double delta = m == k ? 1.0 : 0.0;
    const Complex value = ((double(design.dim()) + 1.0) * f - delta) / double(design.dim());
    chi.entries(m, k) = value;
    chi.entries(k, m) = std::conj(value);
    f_table(m, k) = f;
    f_table(k, m) = std::conj(f);
  });
  if (survival_out != nullptr) survival_out->values = std::move(f_table);
  return chi;
}

/// chi of a unitary channel: expand U over the Pauli basis and take the
/// rank-1 outer product of the coefficient vector.
inline ChiMatrix analytic_chi(const ComplexMatrix& u) {
  if (!is_unitary(u, 1e-10)) throw std::invalid_argument("analytic_chi: matrix is not unitary");
  const int n = qubits_of_dim(u.rows(), "analytic_chi");
  const ComplexVector a = expand_pauli(u);
  ChiMatrix chi;
  chi.n = n;
  chi.provenance = Provenance::theoretical;
  chi.entries = a * a.adjoint();
  return chi;
}

/// Full-SQPT chi assembled from the direct 2-design averages (exact-mode
/// reference engine).
inline ChiMatrix sqpt_chi(const KrausChannel& channel, const TwoDesign& design) {
  const int n = channel.qubits();
  const int np = PauliIndex::count(n);
  ChiMatrix chi;
  chi.n = n;
  chi.provenance = Provenance::sqpt;
  chi.entries.resize(np, np);
  std::vector<std::pair<int, int>> pairs;
  for (int m = 0; m < np; ++m)
    for (int k = m; k < np; ++k) pairs.emplace_back(m, k);
  detail::parallel_for(pairs.size(), [&](std::size_t t) {
    const auto [m, k] = pairs[t];
    const Complex f = sqpt_reference(PauliIndex(m, n), PauliIndex(k, n), channel, design);
    const double delta = m == k ? 1.0 : 0.0;
    const Complex value = ((double(design.dim()) + 1.0) * f - delta) / double(design.dim());
    chi.entries(m, k) = value;
    chi.entries(k, m) = std::conj(value);
  });
  return chi;
}

/// Standard linear-inversion QPT: prepare every rho~_i, Pauli-tomograph each
/// output, invert the input map, and project the recovered superoperator
/// onto the chi basis.
inline ChiMatrix standard_qpt(const KrausChannel& channel) {
  const int n = channel.qubits();
  const int dim = 1 << n;
  const int np = PauliIndex::count(n);
  const auto& basis = pauli_basis(n);

  // Pauli-expectation tomography of Lambda(rho~_i)
  std::vector<ComplexMatrix> outputs(np);
  for (int i = 0; i < np; ++i) {
    const ComplexMatrix evolved = apply_channel(basis_density(PauliIndex(i, n)).matrix, channel);
    ComplexMatrix rec = ComplexMatrix::Zero(dim, dim);
    for (int k = 0; k < np; ++k) {
      const double expectation = (basis[k] * evolved).trace().real();
      rec += (expectation / dim) * basis[k];
    }
    outputs[i] = std::move(rec);
  }

  // rho~_i = sum_j C_ij E_j; solve for the action on the operator basis
  Eigen::MatrixXd input_map = Eigen::MatrixXd::Zero(np, np);
  for (int i = 0; i < np; ++i) {
    input_map(i, i) += 1.0 / dim;
    if (i > 0) input_map(i, 0) += 1.0 / dim;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(input_map);
  if (!lu.isInvertible())
    throw std::runtime_error("standard_qpt: singular input map (cannot happen for rho~ set)");
  const Eigen::MatrixXd inverse = lu.inverse();

  std::vector<ComplexMatrix> lambda_of_e(np, ComplexMatrix::Zero(dim, dim));
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < np; ++i)
      if (inverse(j, i) != 0.0) lambda_of_e[j] += inverse(j, i) * outputs[i];

  // superoperator on column-vectorized operators, then chi_mn by
  // orthogonality of conj(E_n) (x) E_m
  const int vdim = dim * dim;
  ComplexMatrix super = ComplexMatrix::Zero(vdim, vdim);
  for (int j = 0; j < np; ++j) {
    const Eigen::Map<const ComplexVector> vout(lambda_of_e[j].data(), vdim);
    const Eigen::Map<const ComplexVector> vin(basis[j].data(), vdim);
    super += (vout * vin.adjoint()) / double(dim);
  }

  ChiMatrix chi;
  chi.n = n;
  chi.provenance = Provenance::standard;
  chi.entries.resize(np, np);
  for (int m = 0; m < np; ++m)
    for (int k = 0; k < np; ++k) {
      const ComplexMatrix b = kron(basis[k].conjugate(), basis[m]);
      chi.entries(m, k) = b.conjugate().cwiseProduct(super).sum() / double(vdim);
    }
  return chi;
}

// ---- chi matrix serialization -------------------------------------------

inline nlohmann::json chi_to_json(const ChiMatrix& chi) {
  const Eigen::Index np = chi.entries.rows();
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < np; ++r) {
    nlohmann::json re_row = nlohmann::json::array(), im_row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < np; ++c) {
      re_row.push_back(chi.entries(r, c).real());
      im_row.push_back(chi.entries(r, c).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return nlohmann::json{
      {"n", chi.n}, {"provenance", to_string(chi.provenance)}, {"re", re}, {"im", im}};
}

inline ChiMatrix chi_from_json(const nlohmann::json& j) {
  ChiMatrix chi;
  chi.n = j.at("n").get<int>();
  chi.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  const int np = PauliIndex::count(chi.n);
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (static_cast<int>(re.size()) != np || static_cast<int>(im.size()) != np)
    throw std::runtime_error("chi_from_json: row count does not match n");
  chi.entries.resize(np, np);
  for (int r = 0; r < np; ++r) {
    if (static_cast<int>(re[r].size()) != np || static_cast<int>(im[r].size()) != np)
      throw std::runtime_error("chi_from_json: column count does not match n");
    for (int c = 0; c < np; ++c)
      chi.entries(r, c) = Complex(re[r][c].get<double>(), im[r][c].get<double>());
  }
  return chi;
}

inline void save_chi(const ChiMatrix& chi, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open chi output file: " + path);
  out << chi_to_json(chi).dump(2) << "\n";
}

inline ChiMatrix load_chi(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open chi input file: " + path);
  nlohmann::json j;
  in >> j;
  return chi_from_json(j);
}

}  // namespace msqpt
