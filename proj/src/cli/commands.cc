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

#include "ldpmarket/cli/commands.h"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "ldpmarket/crypto/envelope.h"
#include "ldpmarket/ledger/ledger.h"
#include "ldpmarket/protocol/session.h"
#include "ldpmarket/sim/experiment.h"

namespace ldpmarket::cli {

namespace {

namespace fs = std::filesystem;

struct SimulateFlags {
  std::vector<int64_t> populations{500, 1000, 5000, 10000};
  int choices = 20;
  double mean = 10.0;
  double sd = 2.0;
  double f = ldp::kDefaultFlipProbability;
  uint64_t seed = 42;
  int trials = 1;
  std::string out_dir;
  std::string mode = "ldp_only";
};

struct DemoFlags {
  int64_t operators = 5;
  int64_t nr = 3;
  int64_t fee = 100;
  double f = ldp::kDefaultFlipProbability;
  uint64_t seed = 7;
  std::string criteria_file;
  std::string trace_out;
};

struct InspectFlags {
  std::string log_file;
};

struct EstimateFlags {
  std::string reports_file;
  double f = ldp::kDefaultFlipProbability;
};

constexpr int kDemoChoices = 20;
constexpr double kDemoMean = 10.0;
constexpr double kDemoSd = 2.0;
constexpr const char* kDemoRegions[] = {"NSW", "VIC", "QLD"};

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

absl::Status EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  return absl::OkStatus();
}

int UsageError(const CLI::App& app, absl::string_view message,
               std::ostream& err) {
  err << "error: " << message << "\n" << app.help();
  return kExitUsage;
}

int RunSimulate(const CLI::App& app, const SimulateFlags& flags,
                std::ostream& out, std::ostream& err) {
  auto privacy = ldp::PrivacyParams::Create(flags.f);
  if (!privacy.ok()) return UsageError(app, privacy.status().message(), err);
  auto mode = sim::ParseMode(flags.mode);
  if (!mode.ok()) return UsageError(app, mode.status().message(), err);
  if (flags.populations.empty()) {
    return UsageError(app, "--populations needs at least one value", err);
  }

  std::vector<sim::ExperimentConfig> configs;
  for (int64_t n : flags.populations) {
    sim::ExperimentConfig config;
    config.population = n;
    config.n_choices = flags.choices;
    config.mean = flags.mean;
    config.sd = flags.sd;
    config.privacy = *privacy;
    config.seed = flags.seed;
    config.trials = flags.trials;
    config.mode = *mode;
    if (absl::Status s = sim::ValidateConfig(config); !s.ok()) {
      return UsageError(app, s.message(), err);
    }
    configs.push_back(config);
  }

  if (!flags.out_dir.empty()) {
    if (absl::Status s = EnsureDir(flags.out_dir); !s.ok()) {
      err << "error: " << s.message() << "\n";
      return kExitFailure;
    }
  }

  std::vector<sim::PopulationSummary> summaries;
  for (const sim::ExperimentConfig& config : configs) {
    auto results = sim::RunExperiment(config);
    if (!results.ok()) {
      err << "error: N=" << config.population << ": "
          << results.status().message() << "\n";
      return kExitFailure;
    }
    if (!flags.out_dir.empty()) {
      for (const sim::ExperimentResult& r : *results) {
        if (absl::Status s = sim::ExportTrialCsv(r, flags.out_dir); !s.ok()) {
          err << "error: " << s.message() << "\n";
          return kExitFailure;
        }
      }
    }
    summaries.push_back(sim::Summarize(*results));
  }
  if (!flags.out_dir.empty()) {
    if (absl::Status s = sim::ExportSummaryCsv(
            summaries, fs::path(flags.out_dir) / "summary.csv");
        !s.ok()) {
      err << "error: " << s.message() << "\n";
      return kExitFailure;
    }
  }
  out << "mode=" << flags.mode << " choices=" << flags.choices
      << " f=" << flags.f << " seed=" << flags.seed << "\n"
      << sim::FormatSummaryTable(summaries);
  return kExitOk;
}

std::vector<protocol::OperatorProfile> DemoOperators(int64_t count,
                                                     uint64_t seed) {
  std::vector<protocol::OperatorProfile> out;
  for (int64_t i = 0; i < count; ++i) {
    RandomStream rng(DeriveSeed(seed, seed_domain::kProfiles,
                                static_cast<uint64_t>(i)));
    protocol::OperatorProfile p;
    p.operator_id = absl::StrFormat("drone-%02d", i + 1);
    p.addresses = {protocol::OperatorAddress(seed, static_cast<uint64_t>(i))};
    p.attributes["region"] = kDemoRegions[rng.UniformInt(std::size(kDemoRegions))];
    p.true_choice = sim::SampleTrueChoice(kDemoMean, kDemoSd, kDemoChoices, rng);
    out.push_back(std::move(p));
  }
  return out;
}

int RunDemo(const CLI::App& app, const DemoFlags& flags, std::ostream& out,
            std::ostream& err) {
  auto privacy = ldp::PrivacyParams::Create(flags.f);
  if (!privacy.ok()) return UsageError(app, privacy.status().message(), err);
  if (flags.operators < 1) return UsageError(app, "--operators must be >= 1", err);

  protocol::FilterCriteria criteria;
  if (!flags.criteria_file.empty()) {
    auto text = ReadFile(flags.criteria_file);
    if (!text.ok()) {
      err << "error: " << text.status().message() << "\n";
      return kExitFailure;
    }
    auto parsed = protocol::ParseCriteriaText(*text);
    if (!parsed.ok()) {
      err << "error: " << flags.criteria_file << ": "
          << parsed.status().message() << "\n";
      return kExitFailure;
    }
    criteria = *std::move(parsed);
  }

  std::vector<std::string> labels;
  for (int i = 1; i <= kDemoChoices; ++i) labels.push_back(absl::StrCat("c", i));
  auto query = ldp::QuerySpec::Create(std::move(labels));
  auto built = protocol::BuildSurveyConfig(*std::move(query), criteria,
                                           flags.nr, flags.fee, *privacy);
  if (!built.ok()) return UsageError(app, built.status().message(), err);

  protocol::SurveyRunOptions options{.config = *built};
  options.operators = DemoOperators(flags.operators, flags.seed);
  options.seed = flags.seed;
  const protocol::SurveyRun run = protocol::RunSurvey(std::move(options));

  std::string trace;
  for (const std::string& line : run.trace) absl::StrAppend(&trace, line, "\n");
  const std::string dump = ledger::DumpEventLog(run.log);
  const ledger::ChainVerdict verdict = ledger::VerifyEventChain(run.log);

  out << trace << "--- ledger ---\n" << dump;
  out << "phase: " << ledger::PhaseName(run.final_phase) << "\n";
  out << (verdict.ok ? std::string("chain OK")
                     : absl::StrCat("chain BROKEN at ", *verdict.first_bad_index))
      << "\n";
  if (run.outcome.has_value()) {
    out << "choice_index,ones,estimated_raw,estimated_clamped\n";
    const auto& est = run.outcome->estimate;
    for (size_t j = 0; j < est.raw_estimates.size(); ++j) {
      out << absl::StrFormat("%d,%d,%.6f,%.6f\n", j,
                             run.outcome->counts.ones_per_position[j],
                             est.raw_estimates[j], est.clamped_estimates[j]);
    }
  }

  if (!flags.trace_out.empty()) {
    const fs::path dir(flags.trace_out);
    absl::Status s = EnsureDir(flags.trace_out);
    if (s.ok()) s = sim::WriteFile(dir / "trace.txt", trace);
    if (s.ok()) s = sim::WriteFile(dir / "config.txt", built->file_bytes);
    if (s.ok()) {
      const Bytes exported = run.log.Export();
      s = sim::WriteFile(dir / "ledger.log",
                         std::string_view(reinterpret_cast<const char*>(
                                              exported.data()),
                                          exported.size()));
    }
    if (s.ok()) s = sim::WriteFile(dir / "ledger.txt", dump);
    if (s.ok() && run.outcome.has_value()) {
      Bytes reports;
      for (const auto& rv : run.outcome->decrypted_vectors) {
        Bytes record = crypto::EncodeResponse(rv);
        reports.insert(reports.end(), record.begin(), record.end());
      }
      s = sim::WriteFile(dir / "reports.bin",
                         std::string_view(reinterpret_cast<const char*>(
                                              reports.data()),
                                          reports.size()));
    }
    if (!s.ok()) {
      err << "error: " << s.message() << "\n";
      return kExitFailure;
    }
  }

  if (!run.status.ok()) {
    err << "survey failed: " << run.status.message() << "\n";
    return kExitFailure;
  }
  return run.final_phase == ledger::ContractPhase::kSettled && verdict.ok
             ? kExitOk
             : kExitFailure;
}

int RunInspect(const InspectFlags& flags, std::ostream& out,
               std::ostream& err) {
  auto data = ReadFile(flags.log_file);
  if (!data.ok()) {
    err << "error: " << data.status().message() << "\n";
    return kExitFailure;
  }
  size_t bad_record = 0;
  auto log = ledger::ImportEventLog(AsBytes(*data), &bad_record);
  if (!log.ok()) {
    out << "chain BROKEN at " << bad_record << "\n";
    err << "error: " << log.status().message() << "\n";
    return kExitFailure;
  }
  out << ledger::DumpEventLog(*log);
  const ledger::ChainVerdict verdict = ledger::VerifyEventChain(*log);
  if (!verdict.ok) {
    out << "chain BROKEN at " << *verdict.first_bad_index << "\n";
    return kExitFailure;
  }
  out << "chain OK (" << log->size() << " events)\n";
  return kExitOk;
}

int RunEstimate(const CLI::App& app, const EstimateFlags& flags,
                std::ostream& out, std::ostream& err) {
  auto privacy = ldp::PrivacyParams::Create(flags.f);
  if (!privacy.ok()) return UsageError(app, privacy.status().message(), err);
  auto data = ReadFile(flags.reports_file);
  if (!data.ok()) {
    err << "error: " << data.status().message() << "\n";
    return kExitFailure;
  }
  ByteReader reader(AsBytes(*data));
  std::vector<ldp::ResponseVector> reports;
  while (!reader.done()) {
    auto bits = crypto::ReadBitVector(reader);
    if (!bits.ok()) {
      err << "error: bad record " << reports.size() << ": "
          << bits.status().message() << "\n";
      return kExitFailure;
    }
    reports.push_back(ldp::ResponseVector::FromBits(*bits));
  }
  auto counts = ldp::AccumulateCounts(reports);
  if (!counts.ok()) {
    err << "error: " << counts.status().message() << "\n";
    return kExitFailure;
  }
  auto estimate = ldp::EstimateFrequencies(*counts, *privacy);
  if (!estimate.ok()) {
    err << "error: " << estimate.status().message() << "\n";
    return kExitFailure;
  }
  out << "choice_index,ones,estimated_raw,estimated_clamped\n";
  for (size_t j = 0; j < estimate->raw_estimates.size(); ++j) {
    out << absl::StrFormat("%d,%d,%.6f,%.6f\n", j,
                           counts->ones_per_position[j],
                           estimate->raw_estimates[j],
                           estimate->clamped_estimates[j]);
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Privacy-preserving survey marketplace: simulations, protocol "
               "demo, ledger inspection and offline estimation",
               "ldpmarket"};
  app.require_subcommand(1, 1);

  SimulateFlags sim_flags;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Run accuracy experiments and write CSVs");
  simulate->add_option("--populations", sim_flags.populations,
                       "Comma-separated population sizes")
      ->delimiter(',')
      ->capture_default_str();
  simulate->add_option("--choices", sim_flags.choices, "Number of choices")
      ->capture_default_str();
  simulate->add_option("--mean", sim_flags.mean, "Mean of true answers (1-based)")
      ->capture_default_str();
  simulate->add_option("--sd", sim_flags.sd, "Std. deviation of true answers")
      ->capture_default_str();
  simulate->add_option("--f", sim_flags.f, "Flip probability in [0, 1)")
      ->capture_default_str();
  simulate->add_option("--seed", sim_flags.seed, "Master seed")
      ->capture_default_str();
  simulate->add_option("--trials", sim_flags.trials, "Trials per population")
      ->capture_default_str();
  simulate->add_option("--out", sim_flags.out_dir, "Output directory for CSVs");
  simulate->add_option("--mode", sim_flags.mode, "ldp_only or full_protocol")
      ->capture_default_str();

  DemoFlags demo_flags;
  CLI::App* demo =
      app.add_subcommand("demo", "Run one full survey and print its trace");
  demo->add_option("--operators", demo_flags.operators, "Number of operators")
      ->capture_default_str();
  demo->add_option("--nr", demo_flags.nr, "Required responses")
      ->capture_default_str();
  demo->add_option("--fee", demo_flags.fee, "Service fee")
      ->capture_default_str();
  demo->add_option("--f", demo_flags.f, "Flip probability in [0, 1)")
      ->capture_default_str();
  demo->add_option("--seed", demo_flags.seed, "Seed")->capture_default_str();
  demo->add_option("--criteria-file", demo_flags.criteria_file,
                   "Filter criteria, one 'attribute: v1, v2' per line");
  demo->add_option("--trace-out", demo_flags.trace_out,
                   "Directory for trace, ledger log and decrypted reports");

  InspectFlags inspect_flags;
  CLI::App* inspect = app.add_subcommand(
      "inspect-ledger", "Dump an exported event log and verify its chain");
  inspect->add_option("--log-file", inspect_flags.log_file, "Exported log")
      ->required();

  EstimateFlags estimate_flags;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Estimate frequencies from a file of bit-packed reports");
  estimate->add_option("--reports-file", estimate_flags.reports_file,
                       "Concatenated encoded response vectors")
      ->required();
  estimate->add_option("--f", estimate_flags.f, "Flip probability in [0, 1)")
      ->capture_default_str();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("ldpmarket");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (simulate->parsed()) return RunSimulate(*simulate, sim_flags, out, err);
  if (demo->parsed()) return RunDemo(*demo, demo_flags, out, err);
  if (inspect->parsed()) return RunInspect(inspect_flags, out, err);
  if (estimate->parsed()) return RunEstimate(*estimate, estimate_flags, out, err);
  return kExitUsage;
}

}  // namespace ldpmarket::cli
