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

#include <cstdio>
#include <fstream>
#include <random>

#include "msqpt/msqpt.hpp"
#include "test_support.hpp"

using namespace msqpt;

namespace {

ComplexMatrix swap_gate() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
  return m;
}

ComplexMatrix cnot_gate() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
  return m;
}

ChiMatrix chi_of(const ComplexMatrix& entries, int n) {
  ChiMatrix chi;
  chi.n = n;
  chi.entries = entries;
  chi.provenance = Provenance::msqpt;
  return chi;
}

ChiMatrix random_physical_chi(int n, std::mt19937_64& rng) {
  const KrausChannel ch{oracle::random_kraus(1 << n, 2, rng), "random"};
  return standard_qpt(ch);
}

}  // namespace

TEST_CASE("trace-preservation residuals", "[cco]") {
  const ChiMatrix swap_chi = analytic_chi(swap_gate());
  REQUIRE(tp_residual(swap_chi) < 1e-12);

  const ChiMatrix zero = chi_of(ComplexMatrix::Zero(16, 16), 2);
  REQUIRE(tp_residual(zero) == Catch::Approx(1.0));

  const ChiMatrix scaled = chi_of(1.1 * swap_chi.entries, 2);
  REQUIRE(tp_residual(scaled) == Catch::Approx(0.1).margin(1e-10));
}

TEST_CASE("projection leaves physical matrices fixed", "[cco]") {
  const ChiMatrix swap_chi = analytic_chi(swap_gate());
  const ProjectionResult res = project_physical(swap_chi);
  REQUIRE(res.converged);
  REQUIRE(max_abs(res.chi.entries - swap_chi.entries) < 1e-9);
  REQUIRE(res.chi.provenance == Provenance::cco);
}

TEST_CASE("single-qubit hand case projects onto the simplex", "[cco]") {
  ComplexMatrix entries = ComplexMatrix::Zero(4, 4);
  entries(0, 0) = 1.2;
  entries(1, 1) = -0.1;
  const ProjectionResult res = project_physical(chi_of(entries, 1));
  REQUIRE(res.converged);

  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = 1.0;  // simplex projection of (1.2, -0.1, 0, 0)
  REQUIRE(max_abs(res.chi.entries - expected) < 1e-4);

  // grid oracle over diagonal physical chi (trace-one non-negative diag)
  double best = 1e9;
  Eigen::Vector4d best_d = Eigen::Vector4d::Zero();
  const int steps = 50;
  for (int a = 0; a <= steps; ++a)
    for (int b = 0; a + b <= steps; ++b)
      for (int c = 0; a + b + c <= steps; ++c) {
        const double d0 = double(a) / steps, d1 = double(b) / steps, d2 = double(c) / steps;
        const double d3 = 1.0 - d0 - d1 - d2;
        const double dist = std::pow(d0 - 1.2, 2) + std::pow(d1 + 0.1, 2) + d2 * d2 + d3 * d3;
        if (dist < best) {
          best = dist;
          best_d << d0, d1, d2, d3;
        }
      }
  for (int k = 0; k < 4; ++k)
    REQUIRE(res.chi.entries(k, k).real() == Catch::Approx(best_d(k)).margin(1.0 / steps));

  // variational inequality: the projection is the nearest physical point
  std::mt19937_64 rng(71);
  const ComplexMatrix diff = entries - res.chi.entries;
  for (int trial = 0; trial < 20; ++trial) {
    const ChiMatrix other = random_physical_chi(1, rng);
    const Complex inner =
        (diff.adjoint() * (other.entries - res.chi.entries)).trace();
    REQUIRE(inner.real() < 1e-6);
  }
}

TEST_CASE("projecting the zero matrix yields the depolarizing chi", "[cco]") {
  const ProjectionResult res = project_physical(chi_of(ComplexMatrix::Zero(16, 16), 2));
  REQUIRE(res.converged);
  REQUIRE(min_eigenvalue(res.chi.entries) > -1e-9);
  REQUIRE(tp_residual(res.chi) < 1e-6);
  // nearest TP point to zero is chi = I/D^2, which is already PSD
  REQUIRE(max_abs(res.chi.entries - ComplexMatrix::Identity(16, 16) / 16.0) < 1e-8);
}

TEST_CASE("projection output is always physical", "[cco]") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + trial % 2;
    const int np = PauliIndex::count(n);
    const ChiMatrix input = chi_of(oracle::random_hermitian(np, rng, 0.5), n);
    const ProjectionResult res = project_physical(input);
    REQUIRE(min_eigenvalue(res.chi.entries) > -1e-9);
    REQUIRE(tp_residual(res.chi) < 1e-6);
    REQUIRE(is_hermitian(res.chi.entries, 1e-10));

    // idempotence
    const ProjectionResult again = project_physical(res.chi);
    REQUIRE(max_abs(again.chi.entries - res.chi.entries) < 1e-8);
  }

  // non-expansiveness on random pairs
  for (int trial = 0; trial < 4; ++trial) {
    const ChiMatrix x1 = chi_of(oracle::random_hermitian(16, rng, 0.3), 2);
    const ChiMatrix x2 = chi_of(oracle::random_hermitian(16, rng, 0.3), 2);
    const ComplexMatrix p1 = project_physical(x1).chi.entries;
    const ComplexMatrix p2 = project_physical(x2).chi.entries;
    REQUIRE((p1 - p2).norm() <= (x1.entries - x2.entries).norm() + 1e-8);
  }
}

TEST_CASE("iteration cap returns the best iterate with a flag", "[cco]") {
  std::mt19937_64 rng(9);
  const ChiMatrix input = chi_of(oracle::random_hermitian(16, rng, 0.5), 2);
  ProjectionConfig cfg;
  cfg.max_iters = 2;
  const ProjectionResult res = project_physical(input, cfg);
  REQUIRE_FALSE(res.converged);
  REQUIRE(res.iterations == 2);
  REQUIRE(min_eigenvalue(res.chi.entries) > -1e-9);  // PSD step still runs last

  REQUIRE_THROWS_AS(project_physical(input, ProjectionConfig{0.0, 100}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(project_physical(input, ProjectionConfig{1e-8, 0}), std::invalid_argument);
}

TEST_CASE("projection recovers noisy gate chi matrices", "[cco]") {
  std::mt19937_64 rng(19);
  for (const auto& gate : {swap_gate(), cnot_gate()}) {
    const ChiMatrix reference = analytic_chi(gate);
    int improved = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
      const ChiMatrix noisy =
          chi_of(reference.entries + oracle::random_hermitian(16, rng, 0.05), 2);
      const ProjectionResult res = project_physical(noisy);
      REQUIRE(min_eigenvalue(res.chi.entries) > -1e-9);
      REQUIRE(tp_residual(res.chi) < 1e-6);
      if (fidelity(res.chi, reference) >= fidelity(noisy, reference)) ++improved;
    }
    REQUIRE(improved >= 19);  // 95% of trials
  }
}

TEST_CASE("fidelity measure", "[cco]") {
  const ChiMatrix swap_chi = analytic_chi(swap_gate());
  const ChiMatrix cnot_chi = analytic_chi(cnot_gate());

  REQUIRE(fidelity(swap_chi, swap_chi) == Catch::Approx(1.0));
  REQUIRE(fidelity(swap_chi, chi_of(2.0 * swap_chi.entries, 2)) == Catch::Approx(1.0));
  REQUIRE(fidelity(swap_chi, cnot_chi) == fidelity(cnot_chi, swap_chi));

  // direct trace-formula oracle
  const double num = std::abs((swap_chi.entries * cnot_chi.entries.adjoint()).trace());
  const double den = std::sqrt(
      (swap_chi.entries.adjoint() * swap_chi.entries).trace().real() *
      (cnot_chi.entries.adjoint() * cnot_chi.entries).trace().real());
  REQUIRE(fidelity(swap_chi, cnot_chi) == Catch::Approx(num / den));
  REQUIRE(fidelity(swap_chi, cnot_chi) == Catch::Approx(0.0625));

  REQUIRE_THROWS_AS(fidelity(swap_chi, chi_of(ComplexMatrix::Zero(16, 16), 2)),
                    std::invalid_argument);
}

TEST_CASE("convergence log is written as CSV", "[cco]") {
  std::mt19937_64 rng(5);
  const ChiMatrix input = chi_of(oracle::random_hermitian(4, rng, 0.4), 1);
  const ProjectionResult res = project_physical(input);
  REQUIRE(!res.log.empty());
  REQUIRE(res.log.front().iteration == 1);
  REQUIRE(res.log.back().tp_residual < 1e-6);

  const std::string path = "cco_log_test.csv";
  write_convergence_csv(path, res.log);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "iteration,distance,min_eigenvalue,tp_residual");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  REQUIRE(rows == int(res.log.size()));
  std::remove(path.c_str());
}
