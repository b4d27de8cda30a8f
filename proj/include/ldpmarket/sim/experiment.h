// Copyright 2026 The ldpmarket Authors
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

// Accuracy experiments: a population of simulated operators answers an
// n-choice query with true answers drawn from a rounded normal distribution,
// and the actual histogram is compared to the one recovered from randomized
// reports.
//
// Randomness: trial t uses seed DeriveSeed(seed, kTrial, t). Within a trial,
// operator i owns RandomStream(DeriveSeed(trial_seed, kOperatorResponse, i)),
// draws its true answer from it and then randomizes its report with the same
// stream. Both execution modes follow this, so for equal seeds they produce
// bit-identical estimates.

#ifndef LDPMARKET_SIM_EXPERIMENT_H_
#define LDPMARKET_SIM_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/string_view.h"
#include "absl/status/statusor.h"
#include "ldpmarket/common/random_stream.h"
#include "ldpmarket/ldp/rappor.h"
#include "ldpmarket/ledger/event_log.h"

namespace ldpmarket::sim {

enum class ExperimentMode { kLdpOnly, kFullProtocol };
absl::string_view ModeName(ExperimentMode mode);
absl::StatusOr<ExperimentMode> ParseMode(std::string_view name);

struct ExperimentConfig {
  int64_t population = 500;
  int n_choices = 20;
  double mean = 10.0;
  double sd = 2.0;
  ldp::PrivacyParams privacy = ldp::PrivacyParams::Default();
  uint64_t seed = 42;
  int trials = 1;
  ExperimentMode mode = ExperimentMode::kLdpOnly;
  // Full protocol only; 0 means NR = population.
  int64_t required_responses = 0;
  // Worker threads for independent trials; 0 picks hardware concurrency.
  int threads = 0;
};

absl::Status ValidateConfig(const ExperimentConfig& config);

struct ErrorMetrics {
  double l1 = 0;
  // l1 / (2 N), N = sum of actual counts.
  double l1_normalized = 0;
  double l2 = 0;
  double max_bin_abs = 0;
};

struct ExperimentResult {
  int64_t population = 0;
  int trial = 0;
  uint64_t seed = 0;
  uint64_t trial_seed = 0;
  std::vector<int64_t> actual_counts;
  ldp::FrequencyEstimate estimate;
  ErrorMetrics metrics;
  double runtime_seconds = 0;
};

struct FullProtocolTrial {
  ExperimentResult result;
  ledger::EventLog log;
  std::vector<std::string> trace;
};

// Rounded normal draw clamped to [1, n], returned 0-based.
int64_t SampleTrueChoice(double mean, double sd, int n, RandomStream& rng);
std::vector<int64_t> SampleTrueChoices(int64_t count, double mean, double sd,
                                       int n, RandomStream& rng);

uint64_t TrialSeed(uint64_t seed, int trial);

absl::StatusOr<ExperimentResult> RunLdpTrial(const ExperimentConfig& config,
                                             int trial);
absl::StatusOr<FullProtocolTrial> RunFullProtocolTrial(
    const ExperimentConfig& config, int trial);

// All trials for one population, in trial order, dispatched by mode.
absl::StatusOr<std::vector<ExperimentResult>> RunExperiment(
    const ExperimentConfig& config);

absl::StatusOr<ErrorMetrics> ComputeErrorMetrics(
    std::span<const int64_t> actual, std::span<const double> estimated_raw);

struct PopulationSummary {
  int64_t population = 0;
  int trials = 0;
  double mean_l1_normalized = 0;
  // Sample standard deviation; 0 for a single trial.
  double sd_l1_normalized = 0;
  uint64_t seed = 0;
};

PopulationSummary Summarize(std::span<const ExperimentResult> results);

// choice_index,actual_count,estimated_raw,estimated_clamped
std::string FormatTrialCsv(const ExperimentResult& result);
// N,trials,mean_l1_normalized,sd_l1_normalized,seed
std::string FormatSummaryCsv(std::span<const PopulationSummary> summaries);
// Fixed-width table for terminals.
std::string FormatSummaryTable(std::span<const PopulationSummary> summaries);

// trial_N<population>_t<trial>.csv
std::string TrialFileName(const ExperimentResult& result);

absl::Status WriteFile(const std::filesystem::path& path,
                       std::string_view contents);
absl::Status ExportTrialCsv(const ExperimentResult& result,
                            const std::filesystem::path& dir);
absl::Status ExportSummaryCsv(std::span<const PopulationSummary> summaries,
                              const std::filesystem::path& path);

}  // namespace ldpmarket::sim

#endif  // LDPMARKET_SIM_EXPERIMENT_H_
