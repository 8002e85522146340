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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cavity-QED simulation and entanglement analysis"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "Suppress progress messages");

  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the config)");
  run->add_option("--seed", seed, "Random seed (overrides the config)")->check(CLI::NonNegativeNumber);
  run->add_flag("--quiet", quiet, "Suppress progress messages");

  std::string preset_name;
  std::string preset_path;
  auto* exp = app.add_subcommand("export-preset", "Write a built-in device preset as a config file");
  exp->add_option("name", preset_name, "Preset name")->required();
  exp->add_option("path", preset_path, "Destination file")->required();
  exp->add_flag("--quiet", quiet, "Suppress progress messages");

  std::string records_path;
  std::string readout_path;
  std::string rec_out;
  auto* rec = app.add_subcommand("reconstruct", "Reconstruct a density matrix from measurement records");
  rec->add_option("--records", records_path, "Records CSV")->required();
  rec->add_option("--config", readout_path, "Readout config with readout_coefficients (JSON)");
  rec->add_option("--out", rec_out, "Output directory")->required();
  rec->add_flag("--quiet", quiet, "Suppress progress messages");

  std::string rho_path;
  std::string cert_out;
  bool phase_correct = false;
  auto* cert = app.add_subcommand("certify", "Certify a three-qubit density matrix");
  cert->add_option("--rho", rho_path, "Density matrix (JSON)")->required();
  cert->add_option("--out", cert_out, "Output directory")->required();
  cert->add_flag("--phase-correct", phase_correct, "Apply local Z phase correction first");
  cert->add_flag("--quiet", quiet, "Suppress progress messages");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cqed::cli::kExitConfig;
  }

  cqed::cli::RunResult result;
  if (*run) {
    std::optional<std::filesystem::path> out;
    if (!out_dir.empty()) out = out_dir;
    std::optional<std::uint64_t> s;
    if (seed >= 0) s = static_cast<std::uint64_t>(seed);
    result = cqed::cli::run(config_path, out, s);
  } else if (*exp) {
    result = cqed::cli::export_preset(preset_name, preset_path);
  } else if (*rec) {
    std::optional<std::filesystem::path> readout;
    if (!readout_path.empty()) readout = readout_path;
    result = cqed::cli::reconstruct(records_path, readout, rec_out);
  } else {
    result = cqed::cli::certify(rho_path, cert_out, phase_correct);
  }

  if (result.exit_code != cqed::cli::kExitOk) {
    std::cerr << "error: " << result.message << "\n";
  } else if (!quiet) {
    std::cout << result.message << "\n";
  }
  return result.exit_code;
}
