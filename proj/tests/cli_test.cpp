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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "cqed/io.hpp"
#include "runner.hpp"
#include "test_support.hpp"

using namespace cqed;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("cqed_cli_test_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(CQED_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Format, shortest_round_trip) {
  for (double v : {0.1, 1.0 / 3.0, -105.4, 1e-300, 6.02214076e23}) {
    EXPECT_EQ(io::parse_double(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_THROW(io::parse_double("1,5"), io::SchemaError);
}

TEST(ConfigJson, preset_round_trip_is_exact) {
  for (const auto& name : preset_names()) {
    const SystemConfig c = preset(name);
    const json j = json::parse(io::config_to_json(c).dump());
    EXPECT_EQ(io::config_from_json(j), c) << name;
  }
}

TEST(ConfigJson, exported_preset_carries_device_constants) {
  const json j = io::config_to_json(paper_preset());
  EXPECT_EQ(j["resonator"]["omega_r_ghz"], 7.023);
  EXPECT_EQ(j["resonator"]["quality_factor"], 14800.0);
  const double ej[] = {26.8, 28.1, 25.7};
  const double ec[] = {459, 359, 358};
  const double bias[] = {6.11, 4.97, 7.82};
  const double g[] = {-105.4, 110.8, 111.6};
  const double t2[] = {100, 140, 440};
  const double t1[] = {2.1, 1.8, 1.0};
  for (int q = 0; q < 3; ++q) {
    const auto& e = j["qubits"][q];
    EXPECT_EQ(e["ej_max_ghz"].get<double>(), ej[q]);
    EXPECT_EQ(e["ec_mhz"].get<double>(), ec[q]);
    EXPECT_EQ(e["bias_ghz"].get<double>(), bias[q]);
    EXPECT_EQ(e["g_over_pi_mhz"].get<double>(), g[q]);
    EXPECT_EQ(e["t2_ns"].get<double>(), t2[q]);
    EXPECT_EQ(e["t1_us"].get<double>(), t1[q]);
  }
  const SystemConfig loaded = io::config_from_json(j);
  EXPECT_NEAR(decoherence_rates(loaded.qubits[0], loaded.resonator).kappa / kTwoPi, 474.5e3, 0.1e3);
}

TEST(ConfigJson, schema_errors) {
  json j = io::config_to_json(paper_preset());
  j["qubits"][1].erase("t1_us");
  EXPECT_THROW(io::config_from_json(j), io::SchemaError);
  j = io::config_to_json(paper_preset());
  j["crosstalk"] = json::array({json::array({1, 0}), json::array({0, 1})});
  EXPECT_THROW(io::config_from_json(j), io::SchemaError);
  EXPECT_THROW(io::config_from_json(json("no-such-preset")), io::SchemaError);
}

TEST(DensityJson, round_trip_and_layout) {
  std::mt19937_64 rng(1);
  const DensityMatrix rho = test_util::random_density(kThreeQubits, 3, rng);
  const json j = io::density_to_json(rho);
  EXPECT_EQ(j.size(), 4u);
  EXPECT_EQ(j["basis"], "CBA-cavity-last");
  EXPECT_EQ(j["real"][1].get<double>(), rho(0, 1).real());
  EXPECT_EQ(j["imag"][8].get<double>(), rho(1, 0).imag());
  const DensityMatrix back = io::density_from_json(json::parse(j.dump()));
  EXPECT_EQ(back.matrix(), rho.matrix());
  json bad = j;
  bad["real"].erase(0);
  EXPECT_THROW(io::density_from_json(bad), io::SchemaError);
}

TEST(RecordsCsv, round_trip_and_missing_row) {
  const TomographySet set = tomography_set(build_readout(kDefaultReadout));
  const auto records = simulate_measurements(DensityMatrix::pure(TargetState::w_paper().vector), set, 0.02, 3);
  std::ostringstream out;
  io::write_records_csv(out, records);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "rotation_label_A,rotation_label_B,rotation_label_C,value");
  std::istringstream in(text);
  const auto back = io::read_records_csv(in);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].rotations, records[i].rotations);
    EXPECT_EQ(back[i].noisy, records[i].noisy);
  }
  std::istringstream truncated(text.substr(0, text.rfind('\n', text.size() - 2) + 1));
  EXPECT_THROW(io::read_records_csv(truncated), io::SchemaError);
}

TEST(TraceCsv, header_and_units) {
  const PopulationTrace t = rabi_scan(paper_preset(), {0}, {0.0, 1e-9});
  std::ostringstream out;
  io::write_trace_csv(out, t);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "time_ns,p_qA,p_qB,p_qC,p_ggg,n_cavity");
  EXPECT_NE(text.find("\n1,"), std::string::npos);
}

TEST(Runner, rabi_scan_three_qubits) {
  TempDir dir;
  spit(dir / "rabi.json", R"({"experiment": "rabi_scan", "participating": ["A", "B", "C"]})");
  const cli::RunResult r = cli::run(dir / "rabi.json", dir / "out");
  ASSERT_EQ(r.exit_code, 0) << r.message;
  const json fit = json::parse(slurp(dir / "out" / "fit.json"));
  EXPECT_NEAR(fit["frequency_hz"].get<double>(), 189.3e6, 0.01 * 189.3e6);
  const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["config_sha256"], cli::sha256_hex(slurp(dir / "rabi.json")));
  for (const auto& a : manifest["artifacts"]) {
    const fs::path p = dir / "out" / a["path"].get<std::string>();
    ASSERT_TRUE(fs::exists(p));
    EXPECT_GT(fs::file_size(p), 0u);
    EXPECT_EQ(a["sha256"], cli::sha256_hex(slurp(p)));
  }
}

TEST(Runner, sha256_known_vector) {
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Runner, config_errors_write_nothing) {
  TempDir dir;
  const std::vector<std::string> bad = {
      "{not json",
      R"({"experiment": "nope"})",
      R"({"experiment": "rabi_scan", "participating": ["D"]})",
      R"({"experiment": "rabi_scan", "tau_grid_ns": [2, 1]})",
      R"({"experiment": "w_collective", "noise": true})",
      R"({"experiment": "rabi_scan", "device": "paper-nope"})",
      R"({"experiment": "rabi_scan", "typo_key": 1})",
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    const fs::path cfg = dir / ("bad" + std::to_string(i) + ".json");
    spit(cfg, bad[i]);
    const fs::path out = dir / ("out" + std::to_string(i));
    EXPECT_EQ(cli::run(cfg, out).exit_code, cli::kExitConfig) << bad[i];
    EXPECT_FALSE(fs::exists(out)) << bad[i];
  }
}

TEST(Runner, certify_ideal_w) {
  TempDir dir;
  spit(dir / "w.json", io::density_to_json(DensityMatrix::pure(TargetState::w_paper().vector)).dump());
  const cli::RunResult r = cli::certify(dir / "w.json", dir / "out", false);
  ASSERT_EQ(r.exit_code, 0) << r.message;
  const json report = json::parse(slurp(dir / "out" / "certification.json"));
  EXPECT_NEAR(report["fidelity"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(report["witness"].get<double>(), -1.0 / 3.0, 1e-12);
  EXPECT_EQ(report["classification"], "W_class");
  for (const char* key : {"fidelity", "witness", "tangle_bound", "classification", "optimizer_stats"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
}

TEST(Runner, reconstruct_round_trip) {
  TempDir dir;
  std::mt19937_64 rng(8);
  const DensityMatrix truth = test_util::random_density(kThreeQubits, 8, rng);
  const TomographySet set = tomography_set(build_readout(kDefaultReadout));
  std::ostringstream csv;
  io::write_records_csv(csv, simulate_measurements(truth, set, 0.0, 0));
  spit(dir / "records.csv", csv.str());
  const cli::RunResult r = cli::reconstruct(dir / "records.csv", std::nullopt, dir / "out");
  ASSERT_EQ(r.exit_code, 0) << r.message;
  const DensityMatrix back = io::density_from_json(json::parse(slurp(dir / "out" / "rho.json")));
  EXPECT_LT((back.matrix() - truth.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(fs::exists(dir / "out" / "pauli_set.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "certification.json"));

  std::string text = csv.str();
  text = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  spit(dir / "short.csv", text);
  EXPECT_EQ(cli::reconstruct(dir / "short.csv", std::nullopt, dir / "out2").exit_code, cli::kExitConfig);
  EXPECT_FALSE(fs::exists(dir / "out2"));
}

TEST(Runner, reconstruct_with_custom_readout) {
  TempDir dir;
  const ReadoutCoefficients c = {0.1, 0.9, 0.7, 0.6, 0.2, 0.15, 0.1, 0.05};
  const TomographySet set = tomography_set(build_readout(c));
  const DensityMatrix truth = DensityMatrix::pure(TargetState::ghz().vector);
  std::ostringstream csv;
  io::write_records_csv(csv, simulate_measurements(truth, set, 0.0, 0));
  spit(dir / "records.csv", csv.str());
  spit(dir / "readout.json", json{{"readout_coefficients", c}}.dump());
  ASSERT_EQ(cli::reconstruct(dir / "records.csv", dir / "readout.json", dir / "out").exit_code, 0);
  const DensityMatrix back = io::density_from_json(json::parse(slurp(dir / "out" / "rho.json")));
  EXPECT_NEAR(fidelity(back, TargetState::ghz()), 1.0, 1e-9);
}

TEST(Runner, noisy_runs_are_bit_identical) {
  TempDir dir;
  spit(dir / "tomo.json",
       R"({"experiment": "tomography", "state": "w_ideal", "sigma": 0.02, "seed": 17, "restarts": 4, "budget": 300})");
  ASSERT_EQ(cli::run(dir / "tomo.json", dir / "a").exit_code, 0);
  ASSERT_EQ(cli::run(dir / "tomo.json", dir / "b").exit_code, 0);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / name)) << name;
  }
  ASSERT_EQ(cli::run(dir / "tomo.json", dir / "c", 18).exit_code, 0);
  EXPECT_NE(slurp(dir / "a" / "records.csv"), slurp(dir / "c" / "records.csv"));
}

TEST(Binary, exit_codes) {
  TempDir dir;
  EXPECT_EQ(run_binary("export-preset paper-default " + (dir / "dev.json").string()), 0);
  const SystemConfig loaded = io::config_from_json(json::parse(slurp(dir / "dev.json")));
  EXPECT_EQ(loaded, paper_preset());
  EXPECT_EQ(run_binary("export-preset paper-nope " + (dir / "x.json").string()), 2);
  spit(dir / "bad.json", "{\"experiment\": 3}");
  EXPECT_EQ(run_binary("run --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "o"));
  EXPECT_EQ(run_binary("frobnicate"), 2);
  spit(dir / "w.json", io::density_to_json(DensityMatrix::pure(TargetState::w_paper().vector)).dump());
  EXPECT_EQ(run_binary("certify --quiet --rho " + (dir / "w.json").string() + " --out " + (dir / "c").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "c" / "certification.json"));
}

TEST(Binary, device_file_config) {
  TempDir dir;
  ASSERT_EQ(cli::export_preset("paper-default", dir / "dev.json").exit_code, 0);
  spit(dir / "run.json", R"({"experiment": "w_sequential", "device": )" + slurp(dir / "dev.json") + "}");
  const cli::RunResult r = cli::run(dir / "run.json", dir / "out");
  ASSERT_EQ(r.exit_code, 0) << r.message;
  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_GT(summary["fidelity_phase_corrected"].get<double>(), 0.999);
}
