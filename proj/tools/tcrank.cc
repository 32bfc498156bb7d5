// Copyright 2026 The tcrank Authors.
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

// Command line front end. State lives in an event log under the data
// directory ($TCRANK_DATA_DIR, default ./tcrank-data); derived files are
// written to stdout or to --out.

#include <pthread.h>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcrank/btrank.h"
#include "tcrank/classifier.h"
#include "tcrank/corpus.h"
#include "tcrank/embeddings.h"
#include "tcrank/error.h"
#include "tcrank/http_api.h"
#include "tcrank/pairing.h"
#include "tcrank/preprocess.h"
#include "tcrank/random.h"
#include "tcrank/sampling.h"
#include "tcrank/service.h"
#include "tcrank/textstats.h"

namespace tcrank {
namespace {

namespace fs = std::filesystem;

fs::path DataDir() {
  const char* env = std::getenv("TCRANK_DATA_DIR");
  fs::path dir = env && *env ? fs::path(env) : fs::path("tcrank-data");
  fs::create_directories(dir);
  return dir;
}

std::unique_ptr<Service> OpenService(std::uint64_t seed = 0) {
  ServiceOptions options;
  options.seed = seed;
  options.log_path = DataDir() / "events.jsonl";
  return std::make_unique<Service>(options);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or to stdout when it is empty.
void WriteOutput(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  fn(out);
  std::cerr << "wrote " << path << "\n";
}

std::map<StatementId, std::string> Texts(const PolicyDocument& doc) {
  std::map<StatementId, std::string> out;
  for (const auto& s : doc.statements) out[s.id] = s.text;
  return out;
}

std::vector<PolicyId> RankablePolicies(const Service& service) {
  std::vector<PolicyId> out;
  for (const auto& p : service.Policies()) {
    if (!service.Comparisons(p).empty()) out.push_back(p);
  }
  return out;
}

ClassifierDataset DatasetFromService(const Service& service, double alpha) {
  ClassifierDataset data;
  FitOptions fit;
  fit.alpha = alpha;
  for (const auto& p : RankablePolicies(service)) {
    const PolicyDocument doc = service.Policy(p);
    data.statements.insert(data.statements.end(), doc.statements.begin(),
                           doc.statements.end());
    data.rankings[p] = RankFromModel(service.FitModel(p, fit));
  }
  return data;
}

EmbeddingTable LoadEmbeddings(const std::string& path, std::uint64_t seed) {
  if (path.empty()) {
    std::cerr << "no --embeddings file; using synthetic fallback vectors\n";
    return EmbeddingTable::Fallback(seed);
  }
  return EmbeddingTable::LoadFile(path);
}

void ServeUntilSignalled(Service& service, const std::string& host, int port) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  // Block before any thread starts so the server threads inherit the mask.
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  HttpServer server(service);
  const int bound = server.Bind(host, port);
  server.Start();
  std::cerr << "listening on http://" << host << ":" << bound << "\n";
  int received = 0;
  sigwait(&signals, &received);
  std::cerr << "shutting down\n";
  server.Stop();
}

int Main(int argc, char** argv) {
  CLI::App app{"Crowd-sourced importance ranking of terms-and-conditions statements"};
  app.require_subcommand(1);

  std::string policy_id, url, input, out, model_path, embeddings_path, host = "127.0.0.1";
  double fraction = 1.0, noise = 0.1, ties = 0.0, spread = 3.0, alpha = 0.01;
  double t_percent = 15;
  std::size_t workers = 6, bootstraps = 10, top_k = 20;
  int port = 8080, simulations = 100, threads = 0;
  std::uint64_t seed = 1;
  bool experiment = false;

  auto* ingest = app.add_subcommand("ingest", "Segment a policy and add it to the store");
  ingest->add_option("file", input, "Plain text, or JSON {policy_id, source_url, raw_text}")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("--policy-id", policy_id, "Id for plain-text input (default: file stem)");
  ingest->add_option("--url", url, "Source URL for plain-text input");

  auto* gen = app.add_subcommand("gen-hits", "Create the comparison Hits of a policy");
  gen->add_option("policy", policy_id)->required();
  gen->add_option("--fraction", fraction, "Share of all pairs to compare")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", seed);

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", host);
  serve->add_option("--seed", seed, "Seed of the task allocation");

  auto* simulate = app.add_subcommand(
      "simulate", "Answer every open Hit of a policy with synthetic workers");
  simulate->add_option("policy", policy_id)->required();
  simulate->add_option("--workers", workers)->check(CLI::PositiveNumber);
  simulate->add_option("--noise", noise, "Probability of voting for the weaker statement")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--ties", ties, "Probability of an 'equal' vote")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--spread", spread, "Planted abilities span [-spread, spread]");
  simulate->add_option("--seed", seed);

  auto* aggregate = app.add_subcommand("aggregate", "Write aggregated comparisons as CSV");
  aggregate->add_option("policy", policy_id)->required();
  aggregate->add_option("--out", out);

  auto* rank = app.add_subcommand("rank", "Fit Bradley-Terry and write the ranking CSV");
  rank->add_option("policy", policy_id, "Default: every policy with comparisons");
  rank->add_option("--alpha", alpha, "Prior strength")->check(CLI::NonNegativeNumber);
  rank->add_option("--out", out);

  auto* scal = app.add_subcommand("scalability", "Refit on random subsets of the comparisons");
  scal->add_option("policy", policy_id)->required();
  scal->add_option("--simulations", simulations)->check(CLI::PositiveNumber);
  scal->add_option("--threads", threads, "0: all hardware threads");
  scal->add_option("--seed", seed);
  scal->add_option("--out", out, "Per-run CSV; the summary JSON goes to stdout");

  auto* stats = app.add_subcommand("stats", "Text and agreement statistics");
  stats->require_subcommand(1);
  auto* readability = stats->add_subcommand("readability", "Flesch scores against rank");
  readability->add_option("--out", out);
  auto* chi2 = stats->add_subcommand("chi2", "Words most associated with important statements");
  chi2->add_option("--T", t_percent, "Top percentage labelled important")
      ->check(CLI::Range(0.0, 100.0));
  chi2->add_option("--top", top_k);
  chi2->add_option("--out", out);
  auto* agreement = stats->add_subcommand("agreement", "Percent-agreement summary");
  agreement->add_option("policy", policy_id);
  auto* correlation = stats->add_subcommand(
      "correlation", "Voting score and agreement against rank distance");
  correlation->add_option("policy", policy_id);

  auto* train = app.add_subcommand("train", "Train the importance classifier");
  train->add_option("--T", t_percent, "Top percentage labelled important")
      ->check(CLI::Range(0.0, 100.0));
  train->add_option("--seed", seed);
  train->add_option("--embeddings", embeddings_path, "Word-vector file");
  train->add_option("--threads", threads);
  train->add_option("--out", out, "Model file (default: <data>/model.json)");
  train->add_flag("--experiment", experiment,
                  "Report bootstrap validation metrics instead of saving a model");
  train->add_option("--bootstraps", bootstraps);

  auto* predict = app.add_subcommand("predict", "Label the statements of a policy text");
  predict->add_option("file", input)->required()->check(CLI::ExistingFile);
  predict->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  predict->add_option("--embeddings", embeddings_path);
  predict->add_option("--policy-id", policy_id);
  predict->add_option("--out", out);

  CLI11_PARSE(app, argc, argv);

  if (*ingest) {
    auto service = OpenService();
    PolicyDocument doc;
    if (fs::path(input).extension() == ".json") {
      doc = ParsePolicyJson(ReadFile(input));
    } else {
      doc.policy_id = PolicyId(policy_id.empty() ? fs::path(input).stem().string() : policy_id);
      doc.source_url = url;
      doc.raw_text = ReadFile(input);
    }
    const auto stored = service->IngestPolicy(doc.policy_id, doc.source_url, doc.raw_text);
    const auto summary = StatementLengthSummary(stored);
    std::cout << stored.policy_id << ": " << stored.statements.size()
              << " statements, words per statement min " << summary.min << " median "
              << summary.median << " max " << summary.max << "\n";
  } else if (*gen) {
    auto service = OpenService();
    const std::size_t hits = service->GenerateHits(PolicyId(policy_id), fraction, seed);
    std::cout << policy_id << ": " << hits << " Hits\n";
  } else if (*serve) {
    auto service = OpenService(seed);
    ServeUntilSignalled(*service, host, port);
  } else if (*simulate) {
    auto service = OpenService(seed);
    const PolicyId p(policy_id);
    std::vector<StatementId> ids;
    for (const auto& s : service->Policy(p).statements) ids.push_back(s.id);
    // Evenly spaced abilities in a seeded random order.
    std::vector<StatementId> order = ids;
    Rng rng(DeriveSeed(seed, 1));
    rng.Shuffle(order);
    std::map<StatementId, double> abilities;
    for (std::size_t i = 0; i < order.size(); ++i) {
      abilities[order[i]] =
          order.size() == 1 ? 0.0
                            : spread - 2 * spread * static_cast<double>(i) /
                                           static_cast<double>(order.size() - 1);
    }
    SimulationOptions options;
    options.workers = workers;
    options.noise = noise;
    options.tie_probability = ties;
    options.seed = seed;
    const auto report = service->SimulateWorkers(p, abilities, options);
    std::cerr << report.votes << " votes from " << report.votes_per_worker.size()
              << " workers\n";
    std::cout << "planted_rank,statement_id,ability\n";
    for (std::size_t i = 0; i < order.size(); ++i) {
      std::cout << i + 1 << "," << order[i] << "," << abilities[order[i]] << "\n";
    }
  } else if (*aggregate) {
    auto service = OpenService();
    const auto comparisons = service->Comparisons(PolicyId(policy_id));
    WriteOutput(out, [&](std::ostream& os) { WriteComparisonsCsv(os, comparisons); });
    const auto dropped = std::count_if(comparisons.begin(), comparisons.end(), [](const auto& c) {
      return c.outcome == Outcome::kDropped;
    });
    std::cerr << comparisons.size() << " comparisons, " << dropped << " dropped as ties\n";
  } else if (*rank) {
    auto service = OpenService();
    const std::vector<PolicyId> policies =
        policy_id.empty() ? RankablePolicies(*service)
                          : std::vector<PolicyId>{PolicyId(policy_id)};
    if (policies.empty()) throw Error(ErrorCode::kNoData, "no policy has comparisons");
    FitOptions fit;
    fit.alpha = alpha;
    WriteOutput(out, [&](std::ostream& os) {
      bool header = true;
      for (const auto& p : policies) {
        const BTModel model = service->FitModel(p, fit);
        if (!model.converged) std::cerr << "warning: " << p << " did not converge\n";
        std::ostringstream csv;
        WriteRankingCsv(csv, model, Texts(service->Policy(p)));
        std::string text = csv.str();
        if (!header) text = text.substr(text.find('\n') + 1);
        os << text;
        header = false;
      }
    });
  } else if (*scal) {
    auto service = OpenService();
    const PolicyId p(policy_id);
    const auto comparisons = service->Comparisons(p);
    std::vector<StatementId> ids;
    for (const auto& s : service->Policy(p).statements) ids.push_back(s.id);
    ScalabilityOptions options;
    options.simulations = simulations;
    options.seed = seed;
    options.threads = threads;
    const auto result = RunScalabilityExperiment(p, comparisons, ids, options);
    if (!out.empty()) {
      WriteOutput(out, [&](std::ostream& os) { WriteSamplingReportCsv(os, result.reports); });
    }
    std::cout << ScalabilitySummaryToJson(result) << "\n";
  } else if (*readability) {
    auto service = OpenService();
    std::map<PolicyId, Ranking> rankings;
    std::vector<ReadabilityScore> scores;
    for (const auto& p : RankablePolicies(*service)) {
      rankings[p] = RankFromModel(service->FitModel(p));
      for (const auto& s : service->Policy(p).statements) {
        scores.push_back(ScoreReadability(s.text, s.id));
      }
    }
    WriteOutput(out, [&](std::ostream& os) { WriteReadabilityCsv(os, scores, rankings); });
    const KendallResult k = ReadabilityVsRank(scores, rankings);
    std::cerr << "Kendall tau(flesch, relative rank) = " << k.tau << " (p = " << k.p_value
              << ", " << AssociationStrength(k.tau) << ")\n";
  } else if (*chi2) {
    auto service = OpenService();
    std::map<PolicyId, Ranking> rankings;
    for (const auto& p : RankablePolicies(*service)) {
      rankings[p] = RankFromModel(service->FitModel(p));
    }
    const auto labels = LabelTopPercent(rankings, t_percent);
    std::vector<LabeledTokens> rows;
    for (const auto& [p, ranking] : rankings) {
      for (const auto& s : service->Policy(p).statements) {
        rows.push_back({Preprocess(s.text), labels.at(s.id)});
      }
    }
    const auto words = ChiSquareWords(rows, top_k);
    WriteOutput(out, [&](std::ostream& os) { WriteChiSquareCsv(os, words); });
  } else if (*agreement || *correlation) {
    auto service = OpenService();
    const std::vector<PolicyId> policies =
        policy_id.empty() ? RankablePolicies(*service)
                          : std::vector<PolicyId>{PolicyId(policy_id)};
    std::vector<AggregatedComparison> pooled;
    for (const auto& p : policies) {
      const auto c = service->Comparisons(p);
      pooled.insert(pooled.end(), c.begin(), c.end());
      if (*correlation) {
        const auto checks = RunCorrelationChecks(c, RankFromModel(service->FitModel(p)));
        std::printf("%s score~rank_diff r=%.4f p=%.3g n=%zu; agreement~|rank_diff| r=%.4f "
                    "p=%.3g\n",
                    p.str().c_str(), checks.score_vs_rank_difference.coefficient,
                    checks.score_vs_rank_difference.p_value,
                    checks.score_vs_rank_difference.n,
                    checks.agreement_vs_abs_rank_difference.coefficient,
                    checks.agreement_vs_abs_rank_difference.p_value);
      }
    }
    if (*agreement) {
      const AgreementSummary s = SummarizeAgreement(pooled);
      std::printf("comparisons %zu\nmean agreement %.4f\n", s.count, s.mean);
      std::printf("min %.4f q1 %.4f median %.4f q3 %.4f max %.4f\n", s.quartiles.min,
                  s.quartiles.q1, s.quartiles.median, s.quartiles.q3, s.quartiles.max);
      for (int k = 3; k <= 6; ++k) {
        std::printf(">= %d/6 agree: %.4f\n", k, s.fraction_at_least[k - 3]);
      }
    }
  } else if (*train) {
    auto service = OpenService();
    const ClassifierDataset data = DatasetFromService(*service, alpha);
    const EmbeddingTable embeddings = LoadEmbeddings(embeddings_path, 0);
    if (experiment) {
      ExperimentOptions options;
      options.thresholds = {t_percent};
      options.bootstraps = bootstraps;
      options.seed = seed;
      options.threads = static_cast<std::size_t>(threads);
      std::cout << ExperimentToJson(RunExperiment(data, embeddings, options)) << "\n";
    } else {
      const ImportanceModel model = TrainImportanceModel(
          data, embeddings, t_percent, seed, Grid::Default(), 5,
          static_cast<std::size_t>(threads));
      const std::string path = out.empty() ? (DataDir() / "model.json").string() : out;
      WriteOutput(path, [&](std::ostream& os) { os << ImportanceModelToJson(model) << "\n"; });
      std::cerr << "cv balanced accuracy " << model.cv_score << "\n";
    }
  } else if (*predict) {
    const ImportanceModel model = ImportanceModelFromJson(ReadFile(model_path));
    const EmbeddingTable embeddings = LoadEmbeddings(embeddings_path, 0);
    const PolicyDocument doc = SegmentPolicy(
        PolicyId(policy_id.empty() ? fs::path(input).stem().string() : policy_id), "",
        ReadFile(input));
    const auto predictions = Predict(model, embeddings, doc.statements);
    WriteOutput(out, [&](std::ostream& os) { WritePredictionsCsv(os, predictions); });
  }
  return 0;
}

}  // namespace
}  // namespace tcrank

int main(int argc, char** argv) {
  try {
    return tcrank::Main(argc, argv);
  } catch (const tcrank::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
