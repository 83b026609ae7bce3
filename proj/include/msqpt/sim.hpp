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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "msqpt/circuit.hpp"
#include "msqpt/qcore.hpp"
#include "msqpt/states.hpp"

namespace msqpt {

/// Quantum channel as a set of Kraus operators with sum_a K_a^dag K_a = I.
struct KrausChannel {
  std::vector<ComplexMatrix> kraus_ops;
  std::string label;

  int qubits() const {
    if (kraus_ops.empty()) throw std::invalid_argument("KrausChannel: no Kraus operators");
    return qubits_of_dim(kraus_ops.front().rows(), "KrausChannel");
  }
  int dim() const { return 1 << qubits(); }

  bool is_complete(double tol = 1e-10) const {
    ComplexMatrix sum = ComplexMatrix::Zero(kraus_ops.front().rows(), kraus_ops.front().cols());
    for (const auto& k : kraus_ops) sum += k.adjoint() * k;
    sum -= ComplexMatrix::Identity(sum.rows(), sum.cols());
    return max_abs(sum) < tol;
  }

  // Lambda(I) = I; holds for every unitary gate and for the bundled noise
  // kinds except amplitude damping
  bool is_unital(double tol = 1e-10) const {
    ComplexMatrix sum = ComplexMatrix::Zero(kraus_ops.front().rows(), kraus_ops.front().cols());
    for (const auto& k : kraus_ops) sum += k * k.adjoint();
    sum -= ComplexMatrix::Identity(sum.rows(), sum.cols());
    return max_abs(sum) < tol;
  }

  static KrausChannel from_unitary(ComplexMatrix u, std::string label = "unitary") {
    if (!is_unitary(u, 1e-10))
      throw std::invalid_argument("KrausChannel::from_unitary: matrix is not unitary");
    return {{std::move(u)}, std::move(label)};
  }

  static KrausChannel identity(int n) {
    return {{ComplexMatrix::Identity(1 << n, 1 << n)}, "identity"};
  }

  /// rho -> (1-p) rho + p I/2^n
  static KrausChannel depolarizing(int n, double p) {
    if (p < 0 || p > 1) throw std::invalid_argument("depolarizing: strength outside [0,1]");
    const int count = PauliIndex::count(n);
    std::vector<ComplexMatrix> ops;
    ops.reserve(count);
    ops.push_back(std::sqrt(1.0 - p + p / count) * pauli_operator(PauliIndex(0, n)));
    for (int v = 1; v < count; ++v)
      ops.push_back(std::sqrt(p) / std::sqrt(double(count)) * pauli_operator(PauliIndex(v, n)));
    return {std::move(ops), "depolarizing"};
  }

  static KrausChannel amplitude_damping(double gamma) {
    if (gamma < 0 || gamma > 1) throw std::invalid_argument("amplitude_damping: rate outside [0,1]");
    ComplexMatrix k0(2, 2), k1(2, 2);
    k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
    k1 << 0, std::sqrt(gamma), 0, 0;
    return {{k0, k1}, "amplitude_damping"};
  }

  static KrausChannel bit_flip(double p) {
    if (p < 0 || p > 1) throw std::invalid_argument("bit_flip: strength outside [0,1]");
    ComplexMatrix k0 = std::sqrt(1.0 - p) * ComplexMatrix::Identity(2, 2);
    ComplexMatrix k1(2, 2);
    k1 << 0, std::sqrt(p), std::sqrt(p), 0;
    return {{k0, k1}, "bit_flip"};
  }
};

/// sum_a K_a rho K_a^dag. Input may be any operator of matching dimension;
/// the Kraus set itself must be complete.
inline ComplexMatrix apply_channel(const ComplexMatrix& rho, const KrausChannel& ch) {
  if (ch.kraus_ops.empty() || rho.rows() != ch.kraus_ops.front().rows() || rho.rows() != rho.cols())
    throw std::invalid_argument("apply_channel: dimension mismatch");
  if (!ch.is_complete())
    throw std::invalid_argument("apply_channel: Kraus operators do not sum to identity");
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ch.kraus_ops) out += k * rho * k.adjoint();
  return out;
}

/// Channel on a subset of wires of a larger register; remaining wires see
/// the identity.
inline ComplexMatrix apply_channel_on(const ComplexMatrix& rho, const KrausChannel& ch,
                                      const std::vector<int>& wires, int total) {
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  if (!ch.is_complete())
    throw std::invalid_argument("apply_channel_on: Kraus operators do not sum to identity");
  for (const auto& k : ch.kraus_ops) {
    const ComplexMatrix ke = embed_operator(k, wires, total);
    out += ke * rho * ke.adjoint();
  }
  return out;
}

enum class NoiseKind { none, depolarizing, amplitude_damping, bit_flip };
enum class NoiseApplication { terminal, per_gate };

/// Noise configuration. The single-qubit kinds are applied independently
/// to each wire in scope; `terminal` noise hits the system qubits once
/// after the channel under test, `per_gate` noise hits each gate's wires
/// inside run_circuit.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double strength = 0.0;
  NoiseApplication application = NoiseApplication::terminal;

  bool enabled() const { return kind != NoiseKind::none; }

  KrausChannel single_qubit_channel() const {
    switch (kind) {
      case NoiseKind::depolarizing: return KrausChannel::depolarizing(1, strength);
      case NoiseKind::amplitude_damping: return KrausChannel::amplitude_damping(strength);
      case NoiseKind::bit_flip: return KrausChannel::bit_flip(strength);
      case NoiseKind::none: break;
    }
    throw std::invalid_argument("NoiseSpec: no channel for kind 'none'");
  }
};

inline NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "depolarizing") return NoiseKind::depolarizing;
  if (s == "amplitude_damping") return NoiseKind::amplitude_damping;
  if (s == "bit_flip") return NoiseKind::bit_flip;
  throw std::invalid_argument("unknown noise kind '" + s + "'");
}

inline ComplexMatrix apply_noise(ComplexMatrix rho, const NoiseSpec& noise,
                                 const std::vector<int>& wires, int total) {
  if (!noise.enabled()) return rho;
  const KrausChannel ch = noise.single_qubit_channel();
  for (int q : wires) rho = apply_channel_on(rho, ch, {q}, total);
  return rho;
}

/// Evolve a density matrix through a circuit. With per-gate noise enabled,
/// each gate's wires are hit by the noise channel right after the gate.
inline ComplexMatrix run_circuit(const Circuit& c, ComplexMatrix rho,
                                 const NoiseSpec& noise = {}) {
  if (rho.rows() != rho.cols() || rho.rows() != (Eigen::Index(1) << c.wires))
    throw std::invalid_argument("run_circuit: state dimension does not match wire count");
  if (std::abs(rho.trace().real() - 1.0) > 1e-9 || std::abs(rho.trace().imag()) > 1e-9)
    throw std::invalid_argument("run_circuit: input state does not have unit trace");
  const bool per_gate = noise.enabled() && noise.application == NoiseApplication::per_gate;
  for (const auto& g : c.gates) {
    const ComplexMatrix u = embed_operator(gate_matrix(g), g.wires, c.wires);
    rho = u * rho * u.adjoint();
    if (per_gate) rho = apply_noise(std::move(rho), noise, g.wires, c.wires);
  }
  return rho;
}

/// Unitary U with U^dag (Z on target_wire) U = E_observable, so measuring
/// the target in the Z basis after U measures the observable.
struct MeasurementMap {
  ComplexMatrix unitary;
  int target_wire = 0;
  PauliIndex observable;
};

/// Synthesize the measurement map for a non-identity Pauli: local rotations
/// taking X->Z (Hadamard) and Y->Z, then a CNOT parity fan-in onto the
/// lowest-index non-identity wire.
inline MeasurementMap synth_measurement_map(const PauliIndex& k) {
  if (k.is_identity())
    throw std::invalid_argument("synth_measurement_map: identity observable has no map");
  Circuit c(k.n);
  int target = -1;
  std::vector<int> support;
  for (int q = 0; q < k.n; ++q) {
    const int d = k.digit(q);
    if (d == 0) continue;
    support.push_back(q);
    if (target < 0) target = q;
    if (d == 1) {
      c.h(q);
    } else if (d == 2) {
      c.sdg(q).h(q);  // (H S^dag)^dag Z (H S^dag) = Y
    }
  }
  for (int q : support)
    if (q != target) c.cnot(q, target);
  return {circuit_unitary(c), target, k};
}

/// <Z on wire> = p0 - p1 for a density matrix.
inline double z_expectation(const ComplexMatrix& rho, int wire) {
  const int total = qubits_of_dim(rho.rows(), "z_expectation");
  if (wire < 0 || wire >= total) throw std::out_of_range("z_expectation: wire out of range");
  const long bit = 1L << (total - 1 - wire);
  double value = 0;
  for (long i = 0; i < rho.rows(); ++i)
    value += ((i & bit) ? -1.0 : 1.0) * rho(i, i).real();
  return value;
}

/// Outcome counts of a finite-shot Z measurement.
struct ShotRecord {
  long shots = 0;
  long count0 = 0;
  long count1 = 0;
  std::uint64_t seed = 0;

  double p0_estimate() const { return double(count0) / double(shots); }
  double z_estimate() const { return double(count0 - count1) / double(shots); }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Per-setting RNG stream seed, so concurrent estimation of different
/// settings cannot change results.
inline std::uint64_t setting_seed(std::uint64_t seed, int i, int k) {
  return detail::splitmix64(detail::splitmix64(seed ^ (std::uint64_t(i) << 32)) ^
                            std::uint64_t(k));
}

/// Deterministic binomial draw of `shots` Bernoulli(p0) outcomes. Uniform
/// variates come straight from mt19937_64 output, so results do not depend
/// on the standard library's distribution implementations.
inline ShotRecord sample(double p0, long shots, std::uint64_t seed) {
  if (shots <= 0) throw std::invalid_argument("sample: shots must be positive");
  if (p0 < -1e-9 || p0 > 1.0 + 1e-9) throw std::invalid_argument("sample: p0 outside [0,1]");
  p0 = std::min(1.0, std::max(0.0, p0));
  std::mt19937_64 rng(seed);
  ShotRecord rec;
  rec.shots = shots;
  rec.seed = seed;
  for (long s = 0; s < shots; ++s) {
    const double u = double(rng() >> 11) * 0x1.0p-53;
    if (u < p0)
      ++rec.count0;
    else
      ++rec.count1;
  }
  return rec;
}

/// Estimation knobs shared by the tomography engines.
struct EstimationOptions {
  bool exact = true;
  long shots = 4096;
  std::uint64_t seed = 0;
  NoiseSpec noise;
};

/// One experimental setting: estimate D Tr[E_k Lambda(rho~_i)], which
/// equals E-bar_k^i = Tr[E_k Lambda(E_i)] whenever the identity does not
/// evolve (unital channels; survival() subtracts the measured Lambda(I)
/// baseline otherwise). For i > 0 the full pipeline runs on 2n-1 wires:
/// preparation circuit, channel on the system wires, measurement map,
/// Z readout on the target. For i = 0 the mixed state rho~_0 = I/D is
/// simulated directly; it is never prepared, and the complexity
/// accounting excludes it.
inline double run_setting(const PauliIndex& i, const PauliIndex& k, const KrausChannel& channel,
                          const EstimationOptions& opts = {}) {
  const int n = channel.qubits();
  if (i.n != n || k.n != n)
    throw std::invalid_argument("run_setting: index qubit count does not match channel");
  const int dim = 1 << n;
  const MeasurementMap map = synth_measurement_map(k);

  ComplexMatrix rho;
  int total = n;
  std::vector<int> sys(n);
  for (int q = 0; q < n; ++q) sys[q] = q;

  if (i.is_identity()) {
    rho = ComplexMatrix::Identity(dim, dim) / double(dim);
    rho = apply_channel(rho, channel);
  } else if (n == 1) {
    // single-qubit rho~_i is pure; no ancilla register to prepare
    rho = apply_channel(basis_density(i).matrix, channel);
  } else {
    total = 2 * n - 1;
    const Circuit prep = build_prep_circuit(i);
    ComplexMatrix rho0 = ComplexMatrix::Zero(1 << total, 1 << total);
    rho0(0, 0) = 1.0;
    rho = run_circuit(prep, std::move(rho0), opts.noise);
    rho = apply_channel_on(rho, channel, sys, total);
  }
  if (opts.noise.enabled() && opts.noise.application == NoiseApplication::terminal)
    rho = apply_noise(std::move(rho), opts.noise, sys, total);

  const ComplexMatrix u = total == n ? map.unitary : embed_operator(map.unitary, sys, total);
  rho = u * rho * u.adjoint();
  const double z = z_expectation(rho, map.target_wire);
  if (opts.exact) return dim * z;

  const double p0 = (1.0 + z) / 2.0;
  const ShotRecord rec = sample(p0, opts.shots, setting_seed(opts.seed, i.value, k.value));
  return dim * rec.z_estimate();
}

}  // namespace msqpt
