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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msqpt/msqpt.hpp"

namespace {

using namespace msqpt;

struct GateSpec {
  std::string name;
  ComplexMatrix matrix;
  int qubits = 0;
};

ComplexMatrix named_gate(const std::string& name) {
  if (name == "swap") {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
    return m;
  }
  if (name == "cnot") {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
    return m;
  }
  if (name == "toffoli") {
    ComplexMatrix m = ComplexMatrix::Identity(8, 8);
    m(6, 6) = m(7, 7) = 0;
    m(6, 7) = m(7, 6) = 1;
    return m;
  }
  throw std::invalid_argument("unknown gate '" + name + "'");
}

ComplexMatrix load_unitary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open unitary file: " + path);
  nlohmann::json j;
  in >> j;
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  const size_t rows = re.size();
  ComplexMatrix m(rows, rows);
  for (size_t r = 0; r < rows; ++r) {
    if (re[r].size() != rows || im.size() != rows || im[r].size() != rows)
      throw std::runtime_error("unitary file is not a square re/im matrix");
    for (size_t c = 0; c < rows; ++c)
      m(r, c) = Complex(re[r][c].get<double>(), im[r][c].get<double>());
  }
  if (!is_unitary(m, 1e-8)) throw std::runtime_error("matrix in " + path + " is not unitary");
  return m;
}

GateSpec resolve_gate(const std::string& gate, int qubits) {
  GateSpec spec;
  spec.name = gate;
  if (gate.rfind("file:", 0) == 0) {
    spec.matrix = load_unitary_file(gate.substr(5));
    spec.qubits = qubits_of_dim(spec.matrix.rows(), "gate file");
  } else if (gate == "identity") {
    if (qubits == 0) qubits = 2;
    spec.matrix = ComplexMatrix::Identity(1 << qubits, 1 << qubits);
    spec.qubits = qubits;
  } else {
    spec.matrix = named_gate(gate);
    spec.qubits = qubits_of_dim(spec.matrix.rows(), "gate");
  }
  if (qubits != 0 && qubits != spec.qubits)
    throw std::invalid_argument("--qubits " + std::to_string(qubits) +
                                " does not match the arity of gate '" + gate + "'");
  return spec;
}

struct CommonOptions {
  std::string gate = "swap";
  int qubits = 0;
  std::string mode = "exact";
  long shots = 4096;
  std::string noise = "none:0";
  std::uint64_t seed = 0;

  EstimationOptions estimation() const {
    EstimationOptions opts;
    opts.exact = mode == "exact";
    opts.shots = shots;
    opts.seed = seed;
    const auto colon = noise.find(':');
    const std::string kind = colon == std::string::npos ? noise : noise.substr(0, colon);
    opts.noise.kind = parse_noise_kind(kind);
    if (colon != std::string::npos) opts.noise.strength = std::stod(noise.substr(colon + 1));
    if (opts.noise.kind != NoiseKind::none &&
        (opts.noise.strength < 0 || opts.noise.strength > 1))
      throw std::invalid_argument("noise strength outside [0,1]");
    if (!opts.exact && opts.shots < 1)
      throw std::invalid_argument("shots mode requires --shots >= 1");
    return opts;
  }
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--gate", opt.gate,
                  "channel under test: swap|cnot|toffoli|identity|file:<unitary json>");
  cmd->add_option("--qubits", opt.qubits, "system qubit count (checked against gate arity)")
      ->check(CLI::Range(1, 3));
  cmd->add_option("--mode", opt.mode, "exact|shots")->check(CLI::IsMember({"exact", "shots"}));
  cmd->add_option("--shots", opt.shots, "shots per setting in shots mode");
  cmd->add_option("--noise", opt.noise,
                  "noise as kind:strength (none, depolarizing, amplitude_damping, bit_flip)");
  cmd->add_option("--seed", opt.seed, "base RNG seed; per-setting streams are derived");
}

void write_heatmaps(const ChiMatrix& chi, const std::string& base, const std::string& format) {
  const Eigen::Index np = chi.entries.rows();
  const double scale = max_abs(chi.entries);
  const auto component = [&](bool real_part) {
    Eigen::MatrixXd m(np, np);
    for (Eigen::Index r = 0; r < np; ++r)
      for (Eigen::Index c = 0; c < np; ++c)
        m(r, c) = real_part ? chi.entries(r, c).real() : chi.entries(r, c).imag();
    return m;
  };
  for (const bool real_part : {true, false}) {
    const Eigen::MatrixXd m = component(real_part);
    const std::string suffix = real_part ? "_re" : "_im";
    if (format == "csv") {
      std::ofstream out(base + suffix + ".csv");
      if (!out) throw std::runtime_error("cannot write heatmap CSV");
      out.precision(17);
      out << "row,col,value\n";
      for (Eigen::Index r = 0; r < np; ++r)
        for (Eigen::Index c = 0; c < np; ++c) out << r << "," << c << "," << m(r, c) << "\n";
    } else {  // plain PGM, linear map [-max|chi|, +max|chi|] -> [0, 255]
      std::ofstream out(base + suffix + ".pgm");
      if (!out) throw std::runtime_error("cannot write heatmap PGM");
      out << "P2\n" << np << " " << np << "\n255\n";
      int tokens_on_line = 0;
      for (Eigen::Index r = 0; r < np; ++r)
        for (Eigen::Index c = 0; c < np; ++c) {
          const double unit = scale > 0 ? (m(r, c) + scale) / (2 * scale) : 0.5;
          const int value = std::min(255, std::max(0, int(std::lround(unit * 255.0))));
          // plain-format lines must stay under 70 characters
          out << value << (++tokens_on_line % 16 == 0 ? "\n" : " ");
        }
      if (tokens_on_line % 16 != 0) out << "\n";
    }
  }
}

std::string strip_json_suffix(const std::string& path) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json")
    return path.substr(0, path.size() - 5);
  return path;
}

int cmd_chi(const CommonOptions& common, const std::string& out_path, const std::string& format) {
  const GateSpec gate = resolve_gate(common.gate, common.qubits);
  const KrausChannel channel = KrausChannel::from_unitary(gate.matrix, gate.name);
  const EstimationOptions opts = common.estimation();
  const ChiMatrix chi = full_chi(channel, opts);
  save_chi(chi, out_path);
  if (format != "json") write_heatmaps(chi, strip_json_suffix(out_path), format);
  std::cout << "chi written to " << out_path << " (provenance " << to_string(chi.provenance)
            << ", dim " << chi.entries.rows() << ")\n";
  std::cout << "fidelity vs analytic chi: " << fidelity(chi, analytic_chi(gate.matrix)) << "\n";
  return 0;
}

int cmd_element(const CommonOptions& common, const std::string& element) {
  const GateSpec gate = resolve_gate(common.gate, common.qubits);
  const KrausChannel channel = KrausChannel::from_unitary(gate.matrix, gate.name);
  const EstimationOptions opts = common.estimation();

  const auto comma = element.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("--element expects m,n (0-based Pauli indices)");
  const int m = std::stoi(element.substr(0, comma));
  const int n = std::stoi(element.substr(comma + 1));
  const PauliIndex mi(m, gate.qubits), ni(n, gate.qubits);

  const TwoDesign design = two_design(gate.qubits);
  const BetaTensor bt = beta(mi, ni, design);
  const Complex f = survival(mi, ni, channel, design, opts);
  const Complex chi = chi_element(mi, ni, channel, design, opts);
  std::cout << "F(" << m << "," << n << ") = " << f.real() << (f.imag() < 0 ? " - " : " + ")
            << std::abs(f.imag()) << "i\n";
  std::cout << "chi(" << m << "," << n << ") = " << chi.real()
            << (chi.imag() < 0 ? " - " : " + ") << std::abs(chi.imag()) << "i\n";
  std::cout << "settings: " << bt.settings() << " (i,k) readouts\n";
  return 0;
}

int cmd_cco(const std::string& in_path, const std::string& out_path, const std::string& log_path,
            const std::string& gate, double tol, int max_iters) {
  const ChiMatrix input = load_chi(in_path);
  ProjectionConfig cfg;
  cfg.tol = tol;
  cfg.max_iters = max_iters;
  const ProjectionResult res = project_physical(input, cfg);
  save_chi(res.chi, out_path);
  if (!log_path.empty()) write_convergence_csv(log_path, res.log);

  std::cout << "projection " << (res.converged ? "converged" : "did NOT converge") << " after "
            << res.iterations << " iterations\n";
  std::cout << "min eigenvalue " << min_eigenvalue(res.chi.entries) << ", tp residual "
            << tp_residual(res.chi) << "\n";
  if (!gate.empty()) {
    const GateSpec ref = resolve_gate(gate, input.n);
    const ChiMatrix reference = analytic_chi(ref.matrix);
    std::cout << "fidelity before " << fidelity(input, reference) << ", after "
              << fidelity(res.chi, reference) << "\n";
  }
  if (!res.converged) {
    std::cerr << "warning: returned best iterate without convergence\n";
    return 2;
  }
  return 0;
}

int cmd_complexity(const std::string& method, int n) {
  const ComplexityReport rep = complexity(method_from_string(method), n);
  std::cout << rep.method << " n=" << rep.n << ": preparations / readouts / ancillas = "
            << rep.preparations << " / " << rep.readouts << " / " << rep.ancillas << "\n";
  return 0;
}

int cmd_fixtures(const std::string& data_dir) {
  int anomalies = 0;
  const struct {
    const char* file;
    const char* tag;
    int n;
  } sets[] = {{"two_qubit_states.txt", "two-qubit", 2}, {"three_qubit_states.txt", "three-qubit", 3}};
  for (const auto& set : sets) {
    const auto states = load_fixture_states(data_dir + "/" + set.file);
    const auto checks = validate_fixture_states(states, set.n, 1e-9);
    int passed = 0;
    std::cout << set.tag << ": " << states.size() << " states\n";
    for (const auto& chk : checks) {
      std::string flags;
      if (chk.matched && !chk.label_agrees)
        flags += " [label/content mismatch: matches rho~_" + std::to_string(chk.matched_index) +
                 "]";
      if (chk.duplicate_label) flags += " [duplicate label]";
      if (chk.duplicate_amplitudes) flags += " [duplicate amplitudes]";
      if (chk.matched) ++passed;
      if (!chk.matched || !flags.empty()) ++anomalies;
      std::cout << "  state " << chk.label << ": "
                << (chk.matched ? "pass" : "FAIL (matches no basis density)") << flags << "\n";
    }
    std::cout << set.tag << " reduced-state test: " << passed << "/" << states.size()
              << " pass\n";
  }
  std::cout << "flagged anomalies: " << anomalies << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective quantum process tomography toolkit"};
  app.require_subcommand(1);

  CommonOptions chi_opt;
  std::string chi_out = "chi.json", chi_format = "json";
  CLI::App* chi_cmd = app.add_subcommand("chi", "reconstruct a full chi matrix");
  add_common(chi_cmd, chi_opt);
  chi_cmd->add_option("--out", chi_out, "output chi JSON path");
  chi_cmd->add_option("--format", chi_format, "json|csv|pgm (heatmap emission)")
      ->check(CLI::IsMember({"json", "csv", "pgm"}));

  CommonOptions el_opt;
  std::string element;
  CLI::App* el_cmd = app.add_subcommand("element", "estimate a single chi element");
  add_common(el_cmd, el_opt);
  el_cmd->add_option("--element", element, "m,n Pauli indices (0-based)")->required();

  std::string cco_in, cco_out = "chi_cco.json", cco_log, cco_gate;
  double cco_tol = ProjectionConfig{}.tol;
  int cco_iters = ProjectionConfig{}.max_iters;
  CLI::App* cco_cmd = app.add_subcommand("cco", "project a chi estimate onto the physical set");
  cco_cmd->add_option("--in", cco_in, "input chi JSON")->required();
  cco_cmd->add_option("--out", cco_out, "output chi JSON");
  cco_cmd->add_option("--log", cco_log, "convergence CSV path");
  cco_cmd->add_option("--gate", cco_gate, "reference gate for the fidelity report");
  cco_cmd->add_option("--tol", cco_tol, "convergence tolerance");
  cco_cmd->add_option("--max-iters", cco_iters, "iteration cap");

  std::string method = "msqpt";
  int cx_qubits = 2;
  CLI::App* cx_cmd = app.add_subcommand("complexity", "print a Table row");
  cx_cmd->add_option("--method", method, "msqpt|sqpt|standard");
  cx_cmd->add_option("--qubits", cx_qubits, "system qubit count")->check(CLI::Range(1, 3));

  std::string data_dir = "data";
  CLI::App* fx_cmd = app.add_subcommand("fixtures", "validate the bundled state fixtures");
  fx_cmd->add_option("--data", data_dir, "fixture directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (chi_cmd->parsed()) return cmd_chi(chi_opt, chi_out, chi_format);
    if (el_cmd->parsed()) return cmd_element(el_opt, element);
    if (cco_cmd->parsed()) return cmd_cco(cco_in, cco_out, cco_log, cco_gate, cco_tol, cco_iters);
    if (cx_cmd->parsed()) return cmd_complexity(method, cx_qubits);
    if (fx_cmd->parsed()) return cmd_fixtures(data_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
