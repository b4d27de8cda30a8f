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

#include "ldpmarket/sim/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "ldpmarket/protocol/session.h"

namespace ldpmarket::sim {

namespace {

using Clock = std::chrono::steady_clock;

constexpr int64_t kFeePerResponse = 10;
// Above this many operators the protocol trace is summarized per phase.
constexpr int64_t kDetailedTraceLimit = 100;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RandomStream OperatorStream(uint64_t trial_seed, int64_t i) {
  return RandomStream(DeriveSeed(trial_seed, seed_domain::kOperatorResponse,
                                 static_cast<uint64_t>(i)));
}

absl::StatusOr<ldp::QuerySpec> NumberedQuery(int n) {
  std::vector<std::string> labels;
  for (int i = 1; i <= n; ++i) labels.push_back(absl::StrCat("c", i));
  return ldp::QuerySpec::Create(std::move(labels));
}

absl::Status FillMetrics(ExperimentResult& result) {
  auto metrics =
      ComputeErrorMetrics(result.actual_counts, result.estimate.raw_estimates);
  if (!metrics.ok()) return metrics.status();
  result.metrics = *metrics;
  return absl::OkStatus();
}

}  // namespace

absl::string_view ModeName(ExperimentMode mode) {
  return mode == ExperimentMode::kLdpOnly ? "ldp_only" : "full_protocol";
}

absl::StatusOr<ExperimentMode> ParseMode(std::string_view name) {
  if (name == "ldp_only") return ExperimentMode::kLdpOnly;
  if (name == "full_protocol") return ExperimentMode::kFullProtocol;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown mode '", std::string(name), "' (expected ldp_only or full_protocol)"));
}

absl::Status ValidateConfig(const ExperimentConfig& config) {
  if (config.population < 1) {
    return absl::InvalidArgumentError("population must be >= 1");
  }
  if (config.n_choices < 2) {
    return absl::InvalidArgumentError("need at least 2 choices");
  }
  if (!(config.sd > 0)) {
    return absl::InvalidArgumentError("sd must be > 0");
  }
  if (!std::isfinite(config.mean)) {
    return absl::InvalidArgumentError("mean must be finite");
  }
  if (config.trials < 1) {
    return absl::InvalidArgumentError("trials must be >= 1");
  }
  if (config.required_responses < 0 ||
      config.required_responses > config.population) {
    return absl::InvalidArgumentError(
        "required responses must lie in [0, population]");
  }
  return absl::OkStatus();
}

int64_t SampleTrueChoice(double mean, double sd, int n, RandomStream& rng) {
  const double draw = std::round(rng.Normal(mean, sd));
  const double clamped = std::clamp(draw, 1.0, static_cast<double>(n));
  return static_cast<int64_t>(clamped) - 1;
}

std::vector<int64_t> SampleTrueChoices(int64_t count, double mean, double sd,
                                       int n, RandomStream& rng) {
  std::vector<int64_t> out;
  out.reserve(static_cast<size_t>(std::max<int64_t>(count, 0)));
  for (int64_t i = 0; i < count; ++i) {
    out.push_back(SampleTrueChoice(mean, sd, n, rng));
  }
  return out;
}

uint64_t TrialSeed(uint64_t seed, int trial) {
  return DeriveSeed(seed, seed_domain::kTrial, static_cast<uint64_t>(trial));
}

absl::StatusOr<ExperimentResult> RunLdpTrial(const ExperimentConfig& config,
                                             int trial) {
  if (absl::Status s = ValidateConfig(config); !s.ok()) return s;
  const auto start = Clock::now();
  ExperimentResult result;
  result.population = config.population;
  result.trial = trial;
  result.seed = config.seed;
  result.trial_seed = TrialSeed(config.seed, trial);
  result.actual_counts.assign(static_cast<size_t>(config.n_choices), 0);

  std::vector<ldp::ResponseVector> reports;
  reports.reserve(static_cast<size_t>(config.population));
  for (int64_t i = 0; i < config.population; ++i) {
    RandomStream rng = OperatorStream(result.trial_seed, i);
    const int64_t choice =
        SampleTrueChoice(config.mean, config.sd, config.n_choices, rng);
    ++result.actual_counts[static_cast<size_t>(choice)];
    auto one_hot = ldp::EncodeOneHot(choice, config.n_choices);
    if (!one_hot.ok()) return one_hot.status();
    reports.push_back(ldp::RandomizeResponse(*one_hot, config.privacy, rng));
  }
  auto counts = ldp::AccumulateCounts(reports);
  if (!counts.ok()) return counts.status();
  auto estimate = ldp::EstimateFrequencies(*counts, config.privacy);
  if (!estimate.ok()) return estimate.status();
  result.estimate = *std::move(estimate);
  if (absl::Status s = FillMetrics(result); !s.ok()) return s;
  result.runtime_seconds = SecondsSince(start);
  return result;
}

absl::StatusOr<FullProtocolTrial> RunFullProtocolTrial(
    const ExperimentConfig& config, int trial) {
  if (absl::Status s = ValidateConfig(config); !s.ok()) return s;
  const auto start = Clock::now();
  const uint64_t trial_seed = TrialSeed(config.seed, trial);
  const int64_t required = config.required_responses == 0
                               ? config.population
                               : config.required_responses;

  auto query = NumberedQuery(config.n_choices);
  if (!query.ok()) return query.status();
  auto built = protocol::BuildSurveyConfig(
      *std::move(query), protocol::FilterCriteria(), required,
      required * kFeePerResponse, config.privacy);
  if (!built.ok()) return built.status();

  protocol::SurveyRunOptions options{.config = *std::move(built)};
  options.seed = trial_seed;
  options.summarize_trace = config.population > kDetailedTraceLimit;
  options.operators.reserve(static_cast<size_t>(config.population));
  options.response_streams.reserve(static_cast<size_t>(config.population));
  for (int64_t i = 0; i < config.population; ++i) {
    RandomStream rng = OperatorStream(trial_seed, i);
    protocol::OperatorProfile profile;
    profile.operator_id = absl::StrCat("op-", i);
    profile.addresses = {
        protocol::OperatorAddress(trial_seed, static_cast<uint64_t>(i))};
    profile.true_choice =
        SampleTrueChoice(config.mean, config.sd, config.n_choices, rng);
    options.operators.push_back(std::move(profile));
    // Already advanced past the true-answer draw, exactly as in RunLdpTrial.
    options.response_streams.push_back(rng);
  }

  std::map<protocol::Address, int64_t> choice_by_address;
  for (const auto& p : options.operators) {
    choice_by_address[p.active()] = p.true_choice;
  }

  protocol::SurveyRun run = protocol::RunSurvey(std::move(options));
  if (!run.status.ok()) {
    std::string tail;
    for (const std::string& line : run.trace) absl::StrAppend(&tail, "\n  ", line);
    return absl::Status(run.status.code(),
                        absl::StrCat(run.status.message(), "; trace:", tail));
  }

  FullProtocolTrial out;
  ExperimentResult& result = out.result;
  result.population = config.population;
  result.trial = trial;
  result.seed = config.seed;
  result.trial_seed = trial_seed;
  result.actual_counts.assign(static_cast<size_t>(config.n_choices), 0);
  // Actual histogram over the operators whose responses were bought.
  const ledger::EventLog& log = run.log;
  std::vector<protocol::Address> sorted;
  for (const auto& e : log.events()) {
    if (e.kind != ledger::EventKind::kCommitted) continue;
    auto c = ledger::CommittedPayload::Decode(e.payload);
    if (!c.ok()) return c.status();
    sorted.push_back(c->address);
  }
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < run.filter->bits.size(); ++i) {
    if (!run.filter->selected(i)) continue;
    ++result.actual_counts[static_cast<size_t>(choice_by_address.at(sorted[i]))];
  }
  result.estimate = run.outcome->estimate;
  if (absl::Status s = FillMetrics(result); !s.ok()) return s;
  result.runtime_seconds = SecondsSince(start);
  out.log = std::move(run.log);
  out.trace = std::move(run.trace);
  return out;
}

absl::StatusOr<std::vector<ExperimentResult>> RunExperiment(
    const ExperimentConfig& config) {
  if (absl::Status s = ValidateConfig(config); !s.ok()) return s;
  const size_t trials = static_cast<size_t>(config.trials);
  std::vector<std::optional<absl::StatusOr<ExperimentResult>>> slots(trials);

  auto run_one = [&config](int trial) -> absl::StatusOr<ExperimentResult> {
    if (config.mode == ExperimentMode::kLdpOnly) {
      return RunLdpTrial(config, trial);
    }
    auto full = RunFullProtocolTrial(config, trial);
    if (!full.ok()) return full.status();
    return std::move(full->result);
  };

  unsigned workers = config.threads > 0
                         ? static_cast<unsigned>(config.threads)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(trials));
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t t = next++; t < trials; t = next++) {
      slots[t] = run_one(static_cast<int>(t));
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<ExperimentResult> results;
  results.reserve(trials);
  for (auto& slot : slots) {
    if (!slot->ok()) return slot->status();
    results.push_back(**std::move(slot));
  }
  return results;
}

absl::StatusOr<ErrorMetrics> ComputeErrorMetrics(
    std::span<const int64_t> actual, std::span<const double> estimated_raw) {
  if (actual.size() != estimated_raw.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("length mismatch: ", actual.size(), " actual vs ",
                     estimated_raw.size(), " estimated"));
  }
  ErrorMetrics m;
  int64_t total = 0;
  double squares = 0;
  for (size_t j = 0; j < actual.size(); ++j) {
    const double diff =
        std::abs(static_cast<double>(actual[j]) - estimated_raw[j]);
    m.l1 += diff;
    squares += diff * diff;
    m.max_bin_abs = std::max(m.max_bin_abs, diff);
    total += actual[j];
  }
  m.l2 = std::sqrt(squares);
  m.l1_normalized = total > 0 ? m.l1 / (2.0 * static_cast<double>(total)) : 0.0;
  return m;
}

PopulationSummary Summarize(std::span<const ExperimentResult> results) {
  PopulationSummary s;
  if (results.empty()) return s;
  s.population = results.front().population;
  s.seed = results.front().seed;
  s.trials = static_cast<int>(results.size());
  double sum = 0;
  for (const auto& r : results) sum += r.metrics.l1_normalized;
  s.mean_l1_normalized = sum / static_cast<double>(results.size());
  if (results.size() > 1) {
    double ss = 0;
    for (const auto& r : results) {
      const double d = r.metrics.l1_normalized - s.mean_l1_normalized;
      ss += d * d;
    }
    s.sd_l1_normalized = std::sqrt(ss / static_cast<double>(results.size() - 1));
  }
  return s;
}

std::string FormatTrialCsv(const ExperimentResult& result) {
  std::string out = "choice_index,actual_count,estimated_raw,estimated_clamped\n";
  for (size_t j = 0; j < result.actual_counts.size(); ++j) {
    absl::StrAppendFormat(&out, "%d,%d,%.6f,%.6f\n", j,
                          result.actual_counts[j],
                          result.estimate.raw_estimates[j],
                          result.estimate.clamped_estimates[j]);
  }
  return out;
}

std::string FormatSummaryCsv(std::span<const PopulationSummary> summaries) {
  std::string out = "N,trials,mean_l1_normalized,sd_l1_normalized,seed\n";
  for (const auto& s : summaries) {
    absl::StrAppendFormat(&out, "%d,%d,%.6f,%.6f,%d\n", s.population, s.trials,
                          s.mean_l1_normalized, s.sd_l1_normalized, s.seed);
  }
  return out;
}

std::string FormatSummaryTable(std::span<const PopulationSummary> summaries) {
  std::string out = absl::StrFormat("%10s %7s %20s %18s %20s\n", "N", "trials",
                                    "mean_l1_normalized", "sd_l1_normalized",
                                    "seed");
  for (const auto& s : summaries) {
    absl::StrAppendFormat(&out, "%10d %7d %20.6f %18.6f %20d\n", s.population,
                          s.trials, s.mean_l1_normalized, s.sd_l1_normalized,
                          s.seed);
  }
  return out;
}

std::string TrialFileName(const ExperimentResult& result) {
  return absl::StrFormat("trial_N%d_t%03d.csv", result.population,
                         result.trial);
}

absl::Status WriteFile(const std::filesystem::path& path,
                       std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::UnavailableError(
        absl::StrCat("cannot open ", path.string(), " for writing"));
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    return absl::DataLossError(absl::StrCat("write to ", path.string(), " failed"));
  }
  return absl::OkStatus();
}

absl::Status ExportTrialCsv(const ExperimentResult& result,
                            const std::filesystem::path& dir) {
  return WriteFile(dir / TrialFileName(result), FormatTrialCsv(result));
}

absl::Status ExportSummaryCsv(std::span<const PopulationSummary> summaries,
                              const std::filesystem::path& path) {
  return WriteFile(path, FormatSummaryCsv(summaries));
}

}  // namespace ldpmarket::sim
