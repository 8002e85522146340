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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cqed/cqed.hpp"

namespace cqed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr const char* kVersion = "0.1.0";

enum class Experiment { rabi_scan, w_collective, w_sequential, tomography, certify };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

struct ExperimentConfig {
  SystemConfig device;
  Experiment experiment = Experiment::rabi_scan;
  std::vector<std::vector<int>> participating_sets;
  std::vector<double> tau_grid;  // seconds
  std::optional<int> source;
  std::vector<int> order;
  bool noise = false;
  bool couple_parked = false;
  bool phase_correct = true;
  double sigma = 0.0;
  std::optional<std::uint64_t> seed;
  TangleOptions tangle;
  ReadoutCoefficients readout = kDefaultReadout;
  std::string state = "w_collective";  // tomography input state
  std::filesystem::path rho_path;       // certify input
  TargetLabel target = TargetLabel::w_paper;
  std::filesystem::path out_dir;
};

// Parses and validates a config. Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

// In-memory artifact set; written only after the experiment succeeds.
using Artifacts = std::map<std::string, std::string>;

Artifacts run_experiment(const ExperimentConfig& config);

std::string sha256_hex(const std::string& bytes);

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::vector<std::filesystem::path> written;
};

// Writes the artifacts plus manifest.json into `out_dir`.
void write_artifacts(const std::filesystem::path& out_dir, const Artifacts& artifacts, const std::string& input_hash,
                     const std::string& command, double seconds, std::vector<std::filesystem::path>* written = nullptr);

RunResult run(const std::filesystem::path& config_path, std::optional<std::filesystem::path> out_override = {},
              std::optional<std::uint64_t> seed_override = {});
RunResult export_preset(const std::string& name, const std::filesystem::path& path);
RunResult reconstruct(const std::filesystem::path& records_path, const std::optional<std::filesystem::path>& readout_path,
                      const std::filesystem::path& out_dir);
RunResult certify(const std::filesystem::path& rho_path, const std::filesystem::path& out_dir, bool phase_correct);

}  // namespace cqed::cli
