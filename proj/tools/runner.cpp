// Copyright 2026 The cqed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "runner.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace cqed::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using io::SchemaError;

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::rabi_scan:
      return "rabi_scan";
    case Experiment::w_collective:
      return "w_collective";
    case Experiment::w_sequential:
      return "w_sequential";
    case Experiment::tomography:
      return "tomography";
    case Experiment::certify:
      return "certify";
  }
  return "rabi_scan";
}

Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::rabi_scan, Experiment::w_collective, Experiment::w_sequential, Experiment::tomography,
                 Experiment::certify}) {
    if (to_string(e) == name) return e;
  }
  throw SchemaError("unknown experiment '" + name + "'");
}

namespace {

int qubit_ref(const SystemConfig& device, const json& j) {
  if (j.is_number_integer()) {
    const int q = j.get<int>();
    if (q < 0 || q >= device.num_qubits()) throw SchemaError("qubit index " + std::to_string(q) + " does not exist");
    return q;
  }
  if (j.is_string()) {
    const auto q = device.find_qubit(j.get<std::string>());
    if (!q) throw SchemaError("qubit '" + j.get<std::string>() + "' does not exist");
    return *q;
  }
  throw SchemaError("qubits are referenced by name or index");
}

std::vector<int> qubit_list(const SystemConfig& device, const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw SchemaError(std::string(what) + " must be a nonempty array of qubits");
  std::vector<int> out;
  std::set<int> seen;
  for (const auto& e : j) {
    const int q = qubit_ref(device, e);
    if (!seen.insert(q).second) throw SchemaError(std::string(what) + " repeats a qubit");
    out.push_back(q);
  }
  return out;
}

std::vector<double> tau_grid(const json& j) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& e : j) {
      if (!e.is_number()) throw SchemaError("tau_grid_ns entries must be numbers");
      out.push_back(e.get<double>() * 1e-9);
    }
  } else if (j.is_object()) {
    const double start = io::detail::required_number(j, "start", "tau_grid_ns");
    const double stop = io::detail::required_number(j, "stop", "tau_grid_ns");
    if (!j.contains("count") || !j.at("count").is_number_integer()) throw SchemaError("tau_grid_ns needs integer 'count'");
    const int count = j.at("count").get<int>();
    if (count < 2) throw SchemaError("tau_grid_ns count must be at least 2");
    for (int i = 0; i < count; ++i) out.push_back((start + (stop - start) * i / (count - 1)) * 1e-9);
  } else {
    throw SchemaError("tau_grid_ns must be an array or {start, stop, count}");
  }
  if (out.empty()) throw SchemaError("tau grid is empty");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0 || (i > 0 && !(out[i] > out[i - 1]))) throw SchemaError("tau grid must be nonnegative and ascending");
  }
  return out;
}

TargetLabel parse_target(const std::string& s) {
  for (auto l : {TargetLabel::w_paper, TargetLabel::w_plus, TargetLabel::ghz}) {
    if (to_string(l) == s) return l;
  }
  throw SchemaError("unknown target '" + s + "'");
}

TargetState target_state(TargetLabel l) {
  switch (l) {
    case TargetLabel::w_plus:
      return TargetState::w_plus();
    case TargetLabel::ghz:
      return TargetState::ghz();
    default:
      return TargetState::w_paper();
  }
}

ReadoutCoefficients parse_readout(const json& j) {
  if (!j.is_array() || j.size() != 8) throw SchemaError("readout_coefficients must hold 8 numbers");
  ReadoutCoefficients c{};
  for (std::size_t i = 0; i < 8; ++i) {
    if (!j[i].is_number()) throw SchemaError("readout_coefficients must hold 8 numbers");
    c[i] = j[i].get<double>();
  }
  return c;
}

const std::set<std::string> kKnownKeys = {
    "device",      "experiment", "participating", "participating_sets", "tau_grid_ns", "source",
    "order",       "noise",      "couple_parked", "phase_correct",      "sigma",       "seed",
    "restarts",    "budget",     "readout_coefficients", "state",       "rho",         "target",
    "out",         "schema"};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(what + " is not valid JSON: " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

template <typename F>
std::string to_text(F&& f) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  f(s);
  return s.str();
}

ProtocolOptions protocol_options(const ExperimentConfig& c) {
  ProtocolOptions o;
  o.noise = c.noise;
  o.couple_parked = c.couple_parked;
  return o;
}

json state_summary(const WPreparation& w, const PhaseCorrection* pc, const TargetState& target) {
  json j;
  json durations = json::array();
  for (double d : w.segment_durations) durations.push_back(d * 1e9);
  j["segment_durations_ns"] = durations;
  j["cavity_population"] = w.cavity_population;
  j["fidelity"] = fidelity(w.qubit_state, target);
  if (pc) {
    j["phase_correction_rad"] = pc->angles;
    j["fidelity_phase_corrected"] = pc->fidelity_after;
  }
  return j;
}

void add_certification(Artifacts& a, const DensityMatrix& rho, const ExperimentConfig& c, const std::string& prefix = "") {
  const CertificationReport report = certify(rho, target_state(c.target), {}, c.tangle);
  a[prefix + "certification.json"] = dump(io::certification_to_json(report, c.tangle));
}

WPreparation prepare(const ExperimentConfig& c, const std::string& kind) {
  const ProtocolOptions o = protocol_options(c);
  if (kind == "w_collective") return prepare_w_collective(c.device, o, c.source.value_or(0));
  if (kind == "w_sequential") return prepare_w_sequential(c.device, o, c.order);
  throw SchemaError("unknown state '" + kind + "'");
}

Artifacts run_rabi(const ExperimentConfig& c) {
  Artifacts a;
  const ProtocolOptions o = protocol_options(c);
  std::vector<std::pair<int, FitReport>> fits;
  const bool many = c.participating_sets.size() > 1;
  for (const auto& set : c.participating_sets) {
    const PopulationTrace trace = rabi_scan(c.device, set, c.tau_grid, o, c.source);
    std::string tag;
    for (int q : set) tag += c.device.qubits[q].name;
    const std::string suffix = many ? "_" + tag : "";
    a["trace" + suffix + ".csv"] = to_text([&](std::ostream& s) { io::write_trace_csv(s, trace); });
    const FitReport fit = fit_damped_sinusoid(trace.times, trace.cavity);
    json fj = io::fit_to_json(fit);
    fj["participating"] = tag;
    fj["n"] = set.size();
    double g2 = 0.0;
    for (int q : set) g2 += c.device.qubits[q].coupling_g * c.device.qubits[q].coupling_g;
    fj["expected_frequency_hz"] = 2.0 * std::sqrt(g2) / kTwoPi;
    a["fit" + suffix + ".json"] = dump(fj);
    fits.emplace_back(static_cast<int>(set.size()), fit);
  }
  std::set<int> distinct;
  for (const auto& [n, f] : fits) distinct.insert(n);
  if (distinct.size() >= 2) {
    const ScalingReport s = sqrtN_regression(fits);
    a["scaling.csv"] = to_text([&](std::ostream& os) { io::write_scaling_csv(os, s); });
    a["scaling.json"] = dump(io::scaling_to_json(s));
  }
  return a;
}

Artifacts run_w(const ExperimentConfig& c) {
  Artifacts a;
  const WPreparation w = prepare(c, to_string(c.experiment));
  const TargetState target = target_state(c.target);
  a["rho_full.json"] = dump(io::density_to_json(w.full_state));
  a["rho.json"] = dump(io::density_to_json(w.qubit_state));
  std::optional<PhaseCorrection> pc;
  if (c.phase_correct) {
    pc = apply_phase_correction(w.qubit_state, target.vector);
    a["rho_corrected.json"] = dump(io::density_to_json(pc->rho));
  }
  a["summary.json"] = dump(state_summary(w, pc ? &*pc : nullptr, target));
  add_certification(a, pc ? pc->rho : w.qubit_state, c);
  return a;
}

// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
double state_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  const Matrix root = Eigen::SelfAdjointEigenSolver<Matrix>(a.matrix()).operatorSqrt();
  const Matrix inner = root * b.matrix() * root;
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (inner + inner.adjoint())).eigenvalues();
  const double t = ev.cwiseMax(0.0).cwiseSqrt().sum();
  return t * t;
}

Artifacts run_tomography(const ExperimentConfig& c) {
  Artifacts a;
  std::optional<DensityMatrix> truth;
  if (c.state == "w_ideal") {
    truth = DensityMatrix::pure(target_state(c.target).vector);
  } else if (!c.rho_path.empty()) {
    truth = io::density_from_json(parse_json(read_file(c.rho_path), c.rho_path.string()));
  } else {
    const WPreparation w = prepare(c, c.state);
    truth = c.phase_correct ? apply_phase_correction(w.qubit_state, target_state(c.target).vector).rho : w.qubit_state;
  }
  if (truth->dim() != kTomographyDim) throw SchemaError("tomography needs a three-qubit state");
  const TomographySet set = tomography_set(build_readout(c.readout));
  const auto records = simulate_measurements(*truth, set, c.sigma, c.seed.value_or(0));
  const ReconstructionResult result = reconstruct(records, set);
  a["rho_true.json"] = dump(io::density_to_json(*truth));
  a["records.csv"] = to_text([&](std::ostream& s) { io::write_records_csv(s, records); });
  a["rho.json"] = dump(io::density_to_json(result.rho));
  a["pauli_set.csv"] = to_text([&](std::ostream& s) { io::write_pauli_csv(s, pauli_set(result.rho)); });
  json summary;
  summary["fidelity_to_truth"] = state_fidelity(*truth, result.rho);
  summary["eigenvalue_shift"] = result.eigenvalue_shift;
  summary["projection_distance"] = result.residual_norm;
  a["summary.json"] = dump(summary);
  add_certification(a, result.rho, c);
  return a;
}

Artifacts run_certify(const ExperimentConfig& c) {
  Artifacts a;
  DensityMatrix rho = io::density_from_json(parse_json(read_file(c.rho_path), c.rho_path.string()));
  if (rho.dim() != kTomographyDim) throw SchemaError("certify needs a three-qubit density matrix");
  if (c.phase_correct) {
    const PhaseCorrection pc = apply_phase_correction(rho, target_state(c.target).vector);
    rho = pc.rho;
    a["rho_corrected.json"] = dump(io::density_to_json(rho));
  }
  add_certification(a, rho, c);
  return a;
}

std::string versions_note() {
  std::ostringstream s;
  s << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return s.str();
}

RunResult failure(int code, const std::string& message) { return RunResult{code, message, {}}; }

template <typename F>
RunResult guarded(F&& f) {
  try {
    return f();
  } catch (const SchemaError& e) {
    return failure(kExitConfig, e.what());
  } catch (const IncompleteReadoutError& e) {
    return failure(kExitConfig, e.what());
  } catch (const DimensionError& e) {
    return failure(kExitConfig, e.what());
  } catch (const std::invalid_argument& e) {
    return failure(kExitConfig, e.what());
  } catch (const fs::filesystem_error& e) {
    return failure(kExitConfig, e.what());
  } catch (const std::exception& e) {
    return failure(kExitNumerical, e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw SchemaError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnownKeys.count(key)) throw SchemaError("unknown config key '" + key + "'");
  }
  if (!j.contains("experiment") || !j.at("experiment").is_string()) throw SchemaError("config needs 'experiment'");
  ExperimentConfig c;
  c.experiment = parse_experiment(j.at("experiment").get<std::string>());
  c.device = io::config_from_json(j.value("device", json("paper-default")));

  auto flag = [&](const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw SchemaError(std::string(key) + " must be a boolean");
    return j.at(key).get<bool>();
  };
  c.noise = flag("noise", false);
  c.couple_parked = flag("couple_parked", false);
  c.phase_correct = flag("phase_correct", c.experiment != Experiment::certify);

  if (j.contains("sigma")) {
    if (!j.at("sigma").is_number() || j.at("sigma").get<double>() < 0.0) throw SchemaError("sigma must be >= 0");
    c.sigma = j.at("sigma").get<double>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw SchemaError("seed must be a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("restarts")) {
    if (!j.at("restarts").is_number_integer() || j.at("restarts").get<int>() < 1) {
      throw SchemaError("restarts must be a positive integer");
    }
    c.tangle.restarts = j.at("restarts").get<int>();
  }
  if (j.contains("budget")) {
    if (!j.at("budget").is_number_integer() || j.at("budget").get<int>() < 1) {
      throw SchemaError("budget must be a positive integer");
    }
    c.tangle.budget = j.at("budget").get<int>();
  }
  if (c.seed) c.tangle.seed = *c.seed;
  if (j.contains("source")) c.source = qubit_ref(c.device, j.at("source"));
  if (j.contains("order")) c.order = qubit_list(c.device, j.at("order"), "order");
  if (j.contains("readout_coefficients")) c.readout = parse_readout(j.at("readout_coefficients"));
  if (j.contains("target")) {
    if (!j.at("target").is_string()) throw SchemaError("target must be a string");
    c.target = parse_target(j.at("target").get<std::string>());
  }
  if (j.contains("state")) {
    if (!j.at("state").is_string()) throw SchemaError("state must be a string");
    c.state = j.at("state").get<std::string>();
    if (c.state != "w_collective" && c.state != "w_sequential" && c.state != "w_ideal") {
      throw SchemaError("unknown state '" + c.state + "'");
    }
  }
  if (j.contains("rho")) {
    if (!j.at("rho").is_string()) throw SchemaError("rho must be a path");
    c.rho_path = fs::path(j.at("rho").get<std::string>());
    if (c.rho_path.is_relative()) c.rho_path = base_dir / c.rho_path;
  }
  if (j.contains("out")) {
    if (!j.at("out").is_string()) throw SchemaError("out must be a path");
    c.out_dir = fs::path(j.at("out").get<std::string>());
    if (c.out_dir.is_relative()) c.out_dir = base_dir / c.out_dir;
  }

  if (c.experiment == Experiment::rabi_scan) {
    if (j.contains("participating_sets")) {
      const auto& sets = j.at("participating_sets");
      if (!sets.is_array() || sets.empty()) throw SchemaError("participating_sets must be a nonempty array");
      for (const auto& s : sets) c.participating_sets.push_back(qubit_list(c.device, s, "participating_sets entry"));
    } else if (j.contains("participating")) {
      c.participating_sets.push_back(qubit_list(c.device, j.at("participating"), "participating"));
    } else {
      std::vector<int> all(c.device.num_qubits());
      for (int q = 0; q < c.device.num_qubits(); ++q) all[q] = q;
      c.participating_sets.push_back(all);
    }
    c.tau_grid = tau_grid(j.value("tau_grid_ns", json{{"start", 0.0}, {"stop", 40.0}, {"count", 401}}));
  }
  if (c.experiment == Experiment::certify && c.rho_path.empty()) throw SchemaError("certify needs 'rho'");
  if ((c.experiment == Experiment::w_collective || c.experiment == Experiment::w_sequential ||
       (c.experiment == Experiment::tomography && c.state != "w_ideal")) &&
      c.device.num_qubits() != 3 && c.phase_correct) {
    throw SchemaError("W targets are defined for three qubits");
  }
  return c;
}

Artifacts run_experiment(const ExperimentConfig& c) {
  if ((c.noise || c.sigma > 0.0) && !c.seed) throw SchemaError("a seed is required when noise is enabled");
  switch (c.experiment) {
    case Experiment::rabi_scan:
      return run_rabi(c);
    case Experiment::w_collective:
    case Experiment::w_sequential:
      return run_w(c);
    case Experiment::tomography:
      return run_tomography(c);
    case Experiment::certify:
      return run_certify(c);
  }
  return {};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return s.str();
}

void write_artifacts(const fs::path& out_dir, const Artifacts& artifacts, const std::string& input_hash,
                     const std::string& command, double seconds, std::vector<fs::path>* written) {
  fs::create_directories(out_dir);
  json manifest;
  manifest["command"] = command;
  manifest["config_sha256"] = input_hash;
  manifest["artifacts"] = json::array();
  for (const auto& [name, content] : artifacts) {
    const fs::path p = out_dir / name;
    std::ofstream f(p, std::ios::binary);
    f << content;
    f.close();
    if (!f) throw fs::filesystem_error("cannot write artifact", p, std::make_error_code(std::errc::io_error));
    manifest["artifacts"].push_back({{"path", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
    if (written) written->push_back(p);
  }
  manifest["versions"] = {{"cqed", kVersion},
                          {"eigen", versions_note()},
                          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  manifest["wall_clock_seconds"] = seconds;
  const fs::path mp = out_dir / "manifest.json";
  std::ofstream m(mp, std::ios::binary);
  m << dump(manifest);
  m.close();
  if (!m) throw fs::filesystem_error("cannot write manifest", mp, std::make_error_code(std::errc::io_error));
  if (written) written->push_back(mp);
}

RunResult run(const fs::path& config_path, std::optional<fs::path> out_override,
              std::optional<std::uint64_t> seed_override) {
  const auto start = std::chrono::steady_clock::now();
  return guarded([&] {
    const std::string text = read_file(config_path);
    ExperimentConfig c = parse_config(parse_json(text, config_path.string()), config_path.parent_path());
    if (seed_override) {
      c.seed = seed_override;
      c.tangle.seed = *seed_override;
    }
    if (out_override) c.out_dir = *out_override;
    if (c.out_dir.empty()) throw SchemaError("no output directory: set 'out' or pass --out");
    const Artifacts artifacts = run_experiment(c);
    RunResult r;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_artifacts(c.out_dir, artifacts, sha256_hex(text), "run " + to_string(c.experiment), seconds, &r.written);
    r.message = to_string(c.experiment) + ": wrote " + std::to_string(r.written.size()) + " files to " +
                c.out_dir.string();
    return r;
  });
}

RunResult export_preset(const std::string& name, const fs::path& path) {
  return guarded([&] {
    SystemConfig c;
    try {
      c = preset(name);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
    const std::string text = dump(io::config_to_json(c));
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    f << text;
    f.close();
    if (!f) throw SchemaError("cannot write " + path.string());
    return RunResult{kExitOk, "wrote preset " + name + " to " + path.string(), {path}};
  });
}

RunResult reconstruct(const fs::path& records_path, const std::optional<fs::path>& readout_path, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  return guarded([&] {
    const std::string records_text = read_file(records_path);
    std::istringstream in(records_text);
    const auto records = io::read_records_csv(in);
    ReadoutCoefficients coefficients = kDefaultReadout;
    std::string hashed = records_text;
    if (readout_path) {
      const std::string text = read_file(*readout_path);
      hashed += text;
      const json j = parse_json(text, readout_path->string());
      if (!j.is_object() || !j.contains("readout_coefficients")) {
        throw SchemaError("readout config needs 'readout_coefficients'");
      }
      coefficients = parse_readout(j.at("readout_coefficients"));
    }
    const TomographySet set = tomography_set(build_readout(coefficients));
    const ReconstructionResult result = reconstruct(records, set);
    Artifacts a;
    a["rho.json"] = dump(io::density_to_json(result.rho));
    a["pauli_set.csv"] = to_text([&](std::ostream& s) { io::write_pauli_csv(s, pauli_set(result.rho)); });
    ExperimentConfig c;
    add_certification(a, result.rho, c);
    RunResult r;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_artifacts(out_dir, a, sha256_hex(hashed), "reconstruct", seconds, &r.written);
    r.message = "reconstruct: wrote " + std::to_string(r.written.size()) + " files to " + out_dir.string();
    return r;
  });
}

RunResult certify(const fs::path& rho_path, const fs::path& out_dir, bool phase_correct) {
  const auto start = std::chrono::steady_clock::now();
  return guarded([&] {
    ExperimentConfig c;
    c.experiment = Experiment::certify;
    c.rho_path = rho_path;
    c.phase_correct = phase_correct;
    const std::string text = read_file(rho_path);
    const Artifacts a = run_certify(c);
    RunResult r;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_artifacts(out_dir, a, sha256_hex(text), "certify", seconds, &r.written);
    r.message = "certify: wrote " + std::to_string(r.written.size()) + " files to " + out_dir.string();
    return r;
  });
}

}  // namespace cqed::cli
