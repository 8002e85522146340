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

#pragma once

// File formats: device configs and density matrices as JSON, population
// traces, measurement records and Pauli sets as CSV ('.' decimal, '\n' line
// ends, mandatory header row).

#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "cqed/analysis.hpp"
#include "cqed/device.hpp"
#include "cqed/entanglement.hpp"
#include "cqed/hilbert.hpp"
#include "cqed/protocols.hpp"
#include "cqed/tomography.hpp"

namespace cqed::io {

using json = nlohmann::json;

class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr const char* kDensityBasis = "CBA-cavity-last";

// Shortest representation that round-trips, independent of the locale.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) throw SchemaError("not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  for (auto& f : out) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unit-bearing config values

namespace detail {

// The shortest decimal near `to(internal)` with from(written) == internal,
// falling back to an ulp search.
template <typename To, typename From>
double exact_external(double internal, To to, From from) {
  const double guess = to(internal);
  for (int digits = 1; digits <= 17; ++digits) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, guess, std::chars_format::general, digits);
    double v = 0.0;
    std::from_chars(buf, res.ptr, v);
    if (from(v) == internal) return v;
  }
  if (from(guess) == internal) return guess;
  double up = guess;
  double down = guess;
  for (int i = 0; i < 64; ++i) {
    up = std::nextafter(up, INFINITY);
    if (from(up) == internal) return up;
    down = std::nextafter(down, -INFINITY);
    if (from(down) == internal) return down;
  }
  return guess;
}

// v * 10^exp rounded once from the shortest decimal form of v, so that
// 2.1 us becomes exactly the double written as 2.1e-6.
inline double scale_pow10(double v, int exp) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + 40, v, std::chars_format::scientific);
  const std::string digits(buf, res.ptr);
  const auto e = digits.find('e');
  const std::string shifted = digits.substr(0, e) + "e" + std::to_string(std::stoi(digits.substr(e + 1)) + exp);
  double out = 0.0;
  std::from_chars(shifted.data(), shifted.data() + shifted.size(), out);
  return out;
}

inline double to_external_pow10(double internal, int exp) {
  return exact_external(internal, [exp](double x) { return scale_pow10(x, exp); },
                        [exp](double x) { return scale_pow10(x, -exp); });
}

inline double g_from_over_pi_mhz(double v) { return std::numbers::pi * v * 1e6; }
inline double g_to_over_pi_mhz(double g) { return g / 1e6 / std::numbers::pi; }

inline double required_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw SchemaError(where + ": missing numeric field '" + key + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace detail

inline json qubit_to_json(const QubitParams& q) {
  json j;
  j["name"] = q.name;
  j["ej_max_ghz"] = q.ej_max_ghz;
  j["ec_mhz"] = detail::to_external_pow10(q.ec_ghz, 3);
  j["g_over_pi_mhz"] = detail::exact_external(q.coupling_g, detail::g_to_over_pi_mhz, detail::g_from_over_pi_mhz);
  j["bias_ghz"] = q.bias_frequency_ghz;
  j["t1_us"] = detail::to_external_pow10(q.t1, 6);
  j["t2_ns"] = detail::to_external_pow10(q.t2, 9);
  return j;
}

inline QubitParams qubit_from_json(const json& j, int index) {
  const std::string where = "qubits[" + std::to_string(index) + "]";
  if (!j.is_object()) throw SchemaError(where + " must be an object");
  QubitParams q;
  q.name = j.value("name", std::string(1, static_cast<char>('A' + index)));
  q.ej_max_ghz = detail::required_number(j, "ej_max_ghz", where);
  q.ec_ghz = detail::scale_pow10(detail::required_number(j, "ec_mhz", where), -3);
  q.coupling_g = detail::g_from_over_pi_mhz(detail::required_number(j, "g_over_pi_mhz", where));
  q.bias_frequency_ghz = detail::required_number(j, "bias_ghz", where);
  q.t1 = detail::scale_pow10(detail::required_number(j, "t1_us", where), -6);
  q.t2 = detail::scale_pow10(detail::required_number(j, "t2_ns", where), -9);
  return q;
}

inline json config_to_json(const SystemConfig& c) {
  json j;
  j["schema"] = "cqed-device-1";
  j["resonator"] = {{"omega_r_ghz", c.resonator.omega_r_ghz}, {"quality_factor", c.resonator.quality_factor}};
  j["photon_cutoff"] = c.spec.photon_cutoff;
  j["qubits"] = json::array();
  for (const auto& q : c.qubits) j["qubits"].push_back(qubit_to_json(q));
  json rows = json::array();
  for (Index r = 0; r < c.crosstalk.matrix().rows(); ++r) {
    json row = json::array();
    for (Index k = 0; k < c.crosstalk.matrix().cols(); ++k) row.push_back(c.crosstalk.matrix()(r, k));
    rows.push_back(row);
  }
  j["crosstalk"] = rows;
  return j;
}

inline SystemConfig config_from_json(const json& j) {
  if (j.is_string()) {
    try {
      return preset(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
  }
  if (!j.is_object()) throw SchemaError("device must be a preset name or an object");
  if (!j.contains("qubits") || !j.at("qubits").is_array() || j.at("qubits").empty()) {
    throw SchemaError("device: 'qubits' must be a nonempty array");
  }
  if (!j.contains("resonator") || !j.at("resonator").is_object()) throw SchemaError("device: missing 'resonator'");
  SystemConfig c;
  c.resonator.omega_r_ghz = detail::required_number(j.at("resonator"), "omega_r_ghz", "resonator");
  c.resonator.quality_factor = detail::required_number(j.at("resonator"), "quality_factor", "resonator");
  int i = 0;
  for (const auto& q : j.at("qubits")) c.qubits.push_back(qubit_from_json(q, i++));
  const int n = c.num_qubits();
  c.spec = HilbertSpec{n, j.value("photon_cutoff", 2)};
  if (j.contains("crosstalk")) {
    const auto& rows = j.at("crosstalk");
    if (!rows.is_array() || static_cast<int>(rows.size()) != n) throw SchemaError("crosstalk must be an NxN array");
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r) {
      if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != n) {
        throw SchemaError("crosstalk must be an NxN array");
      }
      for (int k = 0; k < n; ++k) {
        if (!rows[r][k].is_number()) throw SchemaError("crosstalk entries must be numbers");
        m(r, k) = rows[r][k].get<double>();
      }
    }
    try {
      c.crosstalk = CrosstalkMatrix(m);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
  } else {
    c.crosstalk = CrosstalkMatrix::identity(n);
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("device: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Density matrices: {dim, real, imag, basis}, row-major.

inline json density_to_json(const DensityMatrix& rho) {
  json j;
  const Index d = rho.dim();
  j["dim"] = d;
  json re = json::array();
  json im = json::array();
  for (Index r = 0; r < d; ++r) {
    for (Index c = 0; c < d; ++c) {
      re.push_back(rho(r, c).real());
      im.push_back(rho(r, c).imag());
    }
  }
  j["real"] = re;
  j["imag"] = im;
  j["basis"] = kDensityBasis;
  return j;
}

// Power-of-two dimensions are read as qubit-only states unless `spec` says otherwise.
inline DensityMatrix density_from_json(const json& j, std::optional<HilbertSpec> spec = std::nullopt) {
  if (!j.is_object()) throw SchemaError("density matrix must be a JSON object");
  for (const char* key : {"dim", "real", "imag"}) {
    if (!j.contains(key)) throw SchemaError(std::string("density matrix: missing '") + key + "'");
  }
  if (j.contains("basis") && j.at("basis") != kDensityBasis) throw SchemaError("density matrix: unknown basis");
  if (!j.at("dim").is_number_integer()) throw SchemaError("density matrix: 'dim' must be an integer");
  const auto d = j.at("dim").get<Index>();
  const auto& re = j.at("real");
  const auto& im = j.at("imag");
  if (d < 2 || !re.is_array() || !im.is_array() || static_cast<Index>(re.size()) != d * d ||
      static_cast<Index>(im.size()) != d * d) {
    throw SchemaError("density matrix: 'real' and 'imag' need dim*dim entries");
  }
  HilbertSpec s;
  if (spec) {
    s = *spec;
  } else {
    int n = 0;
    while ((Index{1} << n) < d) ++n;
    if ((Index{1} << n) != d) throw SchemaError("density matrix: cannot infer the space for dim " + std::to_string(d));
    s = HilbertSpec::qubits_only(n);
  }
  Matrix m(d, d);
  for (Index r = 0; r < d; ++r) {
    for (Index c = 0; c < d; ++c) {
      const auto k = static_cast<std::size_t>(r * d + c);
      if (!re[k].is_number() || !im[k].is_number()) throw SchemaError("density matrix entries must be numbers");
      m(r, c) = Complex(re[k].get<double>(), im[k].get<double>());
    }
  }
  try {
    return DensityMatrix(s, std::move(m));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("density matrix: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV

// Columns: time_ns, p_q<name>..., p_<g...g>, n_cavity.
inline void write_trace_csv(std::ostream& out, const PopulationTrace& trace) {
  out << "time_ns";
  for (const auto& name : trace.qubit_names) out << ",p_q" << name;
  out << ",p_" << std::string(trace.qubit_names.size(), 'g') << ",n_cavity\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out << format_double(trace.times[i] * 1e9);
    for (double p : trace.qubit_excited[i]) out << ',' << format_double(p);
    out << ',' << format_double(trace.ground[i]) << ',' << format_double(trace.cavity[i]) << '\n';
  }
}

inline constexpr const char* kRecordsHeader = "rotation_label_A,rotation_label_B,rotation_label_C,value";

inline void write_records_csv(std::ostream& out, const std::vector<MeasurementRecord>& records) {
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << to_string(r.rotations[0]) << ',' << to_string(r.rotations[1]) << ',' << to_string(r.rotations[2]) << ','
        << format_double(r.noisy) << '\n';
  }
}

// Reads records and checks them against the 64-label schema. Sigma is not
// stored, so records come back with uniform weight.
inline std::vector<MeasurementRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("records file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordsHeader) throw SchemaError("records header must be '" + std::string(kRecordsHeader) + "'");
  std::vector<MeasurementRecord> out;
  std::set<std::string> seen;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw SchemaError("records row " + std::to_string(row) + " needs 4 fields");
    MeasurementRecord r;
    for (int q = 0; q < 3; ++q) {
      const auto rot = parse_pre_rotation(f[q]);
      if (!rot) throw SchemaError("records row " + std::to_string(row) + ": unknown rotation '" + f[q] + "'");
      r.rotations[q] = *rot;
    }
    r.noisy = parse_double(f[3]);
    r.noiseless = r.noisy;
    if (!seen.insert(to_string(r.rotations)).second) {
      throw SchemaError("records row " + std::to_string(row) + ": duplicate label " + to_string(r.rotations));
    }
    out.push_back(r);
  }
  if (out.size() != static_cast<std::size_t>(kPauliCount)) {
    throw SchemaError("records must hold all 64 rotation labels, found " + std::to_string(out.size()));
  }
  return out;
}

inline void write_pauli_csv(std::ostream& out, const std::array<double, kPauliCount>& values) {
  out << "pauli,expectation\n";
  for (int k = 0; k < kPauliCount; ++k) out << pauli_label(k) << ',' << format_double(values[k]) << '\n';
}

// Columns: N, f_hz, f2_hz2.
inline void write_scaling_csv(std::ostream& out, const ScalingReport& s) {
  out << "N,f_hz,f2_hz2\n";
  for (std::size_t i = 0; i < s.n_values.size(); ++i) {
    out << s.n_values[i] << ',' << format_double(s.frequencies[i]) << ','
        << format_double(s.frequencies[i] * s.frequencies[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Reports

inline json fit_to_json(const FitReport& f) {
  return json{{"frequency_hz", f.frequency},     {"amplitude", f.amplitude},
              {"phase_rad", f.phase},            {"decay_rate_per_s", f.decay_rate},
              {"offset", f.offset},              {"residual_rms", f.residual_rms},
              {"frequency_stderr_hz", f.frequency_stderr}, {"jtj_condition", f.jtj_condition},
              {"iterations", f.iterations}};
}

inline json scaling_to_json(const ScalingReport& s) {
  return json{{"n", s.n_values},
              {"frequency_hz", s.frequencies},
              {"slope_hz2", s.slope},
              {"intercept_hz2", s.intercept},
              {"r_squared", s.r_squared}};
}

inline json certification_to_json(const CertificationReport& r, const TangleOptions& options) {
  return json{{"fidelity", r.fidelity},
              {"witness", r.witness},
              {"tangle_bound", r.tangle.value},
              {"classification", to_string(r.classification)},
              {"target", to_string(r.target)},
              {"optimizer_stats",
               {{"kind", r.tangle.kind == TangleKind::pure_exact ? "pure_exact" : "mixed_upper_bound"},
                {"decomposition_size", r.tangle.decomposition_size},
                {"iterations", r.tangle.iterations},
                {"restarts", options.restarts},
                {"budget", options.budget},
                {"seed", options.seed}}}};
}

}  // namespace cqed::io
