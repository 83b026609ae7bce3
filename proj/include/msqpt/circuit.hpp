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

#include <cmath>
#include <string>
#include <vector>

#include "msqpt/qcore.hpp"

namespace msqpt {

/// One gate application. `matrix` is only consulted for name "unitary",
/// which applies an arbitrary dense unitary to the listed wires.
struct Gate {
  std::string name;
  std::vector<double> params;
  std::vector<int> wires;
  ComplexMatrix matrix;
};

struct Circuit {
  int wires = 0;
  std::vector<Gate> gates;

  explicit Circuit(int wire_count = 0) : wires(wire_count) {}

  Circuit& h(int q) { return add({"h", {}, {q}, {}}); }
  Circuit& s(int q) { return add({"s", {}, {q}, {}}); }
  Circuit& sdg(int q) { return add({"sdg", {}, {q}, {}}); }
  Circuit& x(int q) { return add({"x", {}, {q}, {}}); }
  Circuit& ry(double theta, int q) { return add({"ry", {theta}, {q}, {}}); }
  Circuit& cnot(int control, int target) { return add({"cnot", {}, {control, target}, {}}); }
  Circuit& swap(int a, int b) { return add({"swap", {}, {a, b}, {}}); }
  Circuit& toffoli(int c1, int c2, int target) {
    return add({"toffoli", {}, {c1, c2, target}, {}});
  }
  Circuit& unitary(ComplexMatrix u, std::vector<int> on) {
    return add({"unitary", {}, std::move(on), std::move(u)});
  }

  Circuit& add(Gate g) {
    for (int q : g.wires)
      if (q < 0 || q >= wires)
        throw std::out_of_range("Circuit: wire " + std::to_string(q) + " out of range");
    gates.push_back(std::move(g));
    return *this;
  }
};

/// Local matrix of a gate (dimension 2^wires). Throws on unknown names,
/// wrong wire counts, or a non-unitary "unitary" payload.
inline ComplexMatrix gate_matrix(const Gate& g) {
  const auto need = [&](size_t wires, size_t params) {
    if (g.wires.size() != wires || g.params.size() != params)
      throw std::invalid_argument("gate '" + g.name + "': wrong arity");
  };
  const double s2 = 1.0 / std::sqrt(2.0);
  ComplexMatrix m;
  if (g.name == "h") {
    need(1, 0);
    m.resize(2, 2);
    m << s2, s2, s2, -s2;
  } else if (g.name == "s") {
    need(1, 0);
    m.resize(2, 2);
    m << 1, 0, 0, Complex(0, 1);
  } else if (g.name == "sdg") {
    need(1, 0);
    m.resize(2, 2);
    m << 1, 0, 0, Complex(0, -1);
  } else if (g.name == "x") {
    need(1, 0);
    m.resize(2, 2);
    m << 0, 1, 1, 0;
  } else if (g.name == "ry") {
    need(1, 1);
    const double c = std::cos(g.params[0] / 2), s = std::sin(g.params[0] / 2);
    m.resize(2, 2);
    m << c, -s, s, c;
  } else if (g.name == "cnot") {
    need(2, 0);
    m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
  } else if (g.name == "swap") {
    need(2, 0);
    m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
  } else if (g.name == "toffoli") {
    need(3, 0);
    m = ComplexMatrix::Identity(8, 8);
    m(6, 6) = m(7, 7) = 0;
    m(6, 7) = m(7, 6) = 1;
  } else if (g.name == "unitary") {
    if (g.wires.empty()) throw std::invalid_argument("gate 'unitary': no wires");
    m = g.matrix;
    if (m.rows() != (Eigen::Index(1) << g.wires.size()) || m.rows() != m.cols())
      throw std::invalid_argument("gate 'unitary': matrix dimension does not match wires");
    if (!is_unitary(m, 1e-10))
      throw std::invalid_argument("gate 'unitary': matrix is not unitary");
  } else {
    throw std::invalid_argument("unknown gate name '" + g.name + "'");
  }
  return m;
}

/// Embed a k-wire operator into a `total`-wire register. wires[0] is the
/// most significant index bit of the local operator.
inline ComplexMatrix embed_operator(const ComplexMatrix& u, const std::vector<int>& wires,
                                    int total) {
  const int k = static_cast<int>(wires.size());
  if (u.rows() != (Eigen::Index(1) << k) || u.rows() != u.cols())
    throw std::invalid_argument("embed_operator: dimension does not match wire count");
  std::vector<bool> used(total, false);
  for (int q : wires) {
    if (q < 0 || q >= total) throw std::out_of_range("embed_operator: wire out of range");
    if (used[q]) throw std::invalid_argument("embed_operator: duplicate wire");
    used[q] = true;
  }
  std::vector<int> rest;
  for (int q = 0; q < total; ++q)
    if (!used[q]) rest.push_back(q);

  const auto bitpos = [total](int q) { return total - 1 - q; };
  const int nr = total - k;
  ComplexMatrix out = ComplexMatrix::Zero(1L << total, 1L << total);
  for (long r = 0; r < (1L << nr); ++r) {
    long base = 0;
    for (int j = 0; j < nr; ++j) base |= ((r >> (nr - 1 - j)) & 1L) << bitpos(rest[j]);
    for (long a = 0; a < (1L << k); ++a) {
      long row = base;
      for (int j = 0; j < k; ++j) row |= ((a >> (k - 1 - j)) & 1L) << bitpos(wires[j]);
      for (long b = 0; b < (1L << k); ++b) {
        if (u(a, b) == Complex(0, 0)) continue;
        long col = base;
        for (int j = 0; j < k; ++j) col |= ((b >> (k - 1 - j)) & 1L) << bitpos(wires[j]);
        out(row, col) = u(a, b);
      }
    }
  }
  return out;
}

/// Product of all gate embeddings, last gate leftmost.
inline ComplexMatrix circuit_unitary(const Circuit& c) {
  ComplexMatrix u = ComplexMatrix::Identity(1L << c.wires, 1L << c.wires);
  for (const auto& g : c.gates) u = embed_operator(gate_matrix(g), g.wires, c.wires) * u;
  return u;
}

}  // namespace msqpt
