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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "support/synthetic.h"
#include "tcrank/btrank.h"
#include "tcrank/classifier.h"
#include "tcrank/corpus.h"
#include "tcrank/embeddings.h"
#include "tcrank/error.h"
#include "tcrank/pairing.h"
#include "tcrank/random.h"
#include "tcrank/sampling.h"
#include "tcrank/service.h"
#include "tcrank/svm.h"
#include "tcrank/textstats.h"

namespace tcrank {
namespace {

using Seconds = std::chrono::duration<double>;

struct CheckResult {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double Elapsed() const {
    return Seconds(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

// --- aggregation -----------------------------------------------------------

CheckResult AggregationOracle() {
  const Stopwatch clock;
  const PairKey pair = PairKey::Of(StatementId("p-0001"), StatementId("p-0002"));
  int exact = 0;
  for (int code = 0; code < 729; ++code) {
    std::array<int, 6> scores{};
    int c = code;
    for (int& v : scores) {
      v = c % 3 - 1;
      c /= 3;
    }
    // Realize each canonical score as a worker choice, three workers per
    // presentation.
    std::vector<Vote> votes;
    for (int i = 0; i < 6; ++i) {
      Hit h;
      h.slot = i + 1;
      h.id = MakeHitId(pair, h.slot);
      h.pair = pair;
      h.presentation = i < 3 ? Presentation::kAB : Presentation::kBA;
      h.status = HitStatus::kAssigned;
      h.worker = WorkerId("w" + std::to_string(i));
      for (Choice choice : {Choice::kFirst, Choice::kEqual, Choice::kSecond}) {
        if (CanonicalScore(h.presentation, choice) == scores[static_cast<std::size_t>(i)]) {
          votes.push_back(CanonicalizeVote(h, choice, 0));
        }
      }
    }
    const AggregatedComparison got = AggregatePair(PolicyId("p"), votes);
    int counts[3] = {0, 0, 0};
    int sum = 0;
    for (int v : scores) {
      sum += v;
      ++counts[v + 1];
    }
    const int modal = std::max({counts[0], counts[1], counts[2]});
    const Outcome outcome =
        sum > 0 ? Outcome::kAWins : (sum < 0 ? Outcome::kBWins : Outcome::kDropped);
    exact += got.sum_score == sum && got.modal_count == modal &&
             got.outcome == outcome &&
             std::abs(got.percent_agreement() - modal / 6.0) < 1e-15;
  }
  const auto worked = AggregateScores(PolicyId("p"), pair, {1, 1, 1, 1, -1, 0});
  const bool example = worked.sum_score == 3 && worked.outcome == Outcome::kAWins &&
                       std::abs(worked.percent_agreement() - 0.67) < 0.005;
  const double t = clock.Elapsed();
  return {exact == 729 && example && t < 1.0,
          Format("%d/729 exact, [1,1,1,1,-1,0] -> sum %d agreement %.2f, %.3f s", exact,
                 worked.sum_score, worked.percent_agreement(), t)};
}

// --- HIT arithmetic --------------------------------------------------------

std::size_t HitCount(std::size_t statements, double fraction) {
  const auto doc = SegmentPolicy(PolicyId("p"), "", testing::SyntheticPolicyText(statements));
  return GenerateHits(EnumeratePairs(doc), fraction, 1).size();
}

CheckResult HitArithmetic() {
  const std::size_t a = HitCount(39, 1.0), b = HitCount(44, 1.0), c = HitCount(32, 0.5);
  return {a == 4446 && b == 5676 && c == 1488,
          Format("N=39 -> %zu, N=44 -> %zu, N=32 at 0.5 -> %zu", a, b, c)};
}

// --- Bradley-Terry ---------------------------------------------------------

double ThreeItemLogLik(const std::array<double, 3>& p) {
  const int w[3][3] = {{0, 3, 3}, {0, 0, 2}, {0, 1, 0}};
  double ll = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j && w[i][j] > 0) ll += w[i][j] * std::log(p[i] / (p[i] + p[j]));
    }
  }
  return ll;
}

CheckResult BradleyTerryCorrectness() {
  const StatementId a("A"), b("B"), c("C");
  const std::vector<StatementId> ids = {a, b, c};
  std::vector<WinTuple> tuples;
  auto add = [&](const StatementId& w, const StatementId& l, int n) {
    for (int i = 0; i < n; ++i) tuples.push_back({w, l});
  };
  add(a, b, 3);
  add(a, c, 3);
  add(b, c, 2);
  add(c, b, 1);

  const BTModel m = FitBradleyTerry(PolicyId("p"), tuples, ids, {.alpha = 0});
  std::array<double, 3> fit{};
  double total = 0;
  for (int i = 0; i < 3; ++i) total += fit[i] = std::exp(m.theta.at(ids[i]));
  for (double& v : fit) v /= total;

  constexpr double h = 2e-4;
  std::array<double, 3> grid{};
  double best = -INFINITY;
  for (double pa = h; pa <= 1 - 2 * h + 1e-15; pa += h) {
    for (double pb = h; pb <= 1 - pa - h + 1e-15; pb += h) {
      const std::array<double, 3> p = {pa, pb, 1 - pa - pb};
      const double ll = ThreeItemLogLik(p);
      if (ll > best) {
        best = ll;
        grid = p;
      }
    }
  }
  double grid_err = 0;
  for (int i = 0; i < 3; ++i) grid_err = std::max(grid_err, std::abs(fit[i] - grid[i]));

  // MM monotonicity on random instances, pure MM updates.
  bool monotone = true;
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<StatementId> six;
    for (int i = 0; i < 6; ++i) six.emplace_back("s" + std::to_string(i));
    std::vector<WinTuple> t;
    for (int k = 0; k < 25; ++k) {
      const auto i = rng.UniformIndex(6);
      auto j = rng.UniformIndex(5);
      if (j >= i) ++j;
      t.push_back({six[i], six[j]});
    }
    FitOptions o;
    o.alpha = trial % 2 ? 0.0 : 0.01;
    o.max_iterations = 300;
    o.newton_after = 0;
    o.record_trace = true;
    const BTModel fit_t = FitBradleyTerry(PolicyId("p"), t, six, o);
    for (std::size_t k = 1; k < fit_t.trace.size(); ++k) {
      monotone &= fit_t.trace[k] >= fit_t.trace[k - 1] - 1e-12 * std::abs(fit_t.trace[k - 1]);
    }
  }

  std::vector<WinTuple> cycle = {{a, b}, {b, c}, {c, a}};
  const BTModel sym = FitBradleyTerry(PolicyId("p"), cycle, ids, {.alpha = 0});
  const double spread = std::max({sym.theta.at(a), sym.theta.at(b), sym.theta.at(c)}) -
                        std::min({sym.theta.at(a), sym.theta.at(b), sym.theta.at(c)});
  return {grid_err <= 1e-3 && monotone && spread <= 1e-6,
          Format("grid error %.2e, MM monotone %s, cyclic spread %.1e", grid_err,
                 monotone ? "yes" : "no", spread)};
}

// --- planted recovery ------------------------------------------------------

CheckResult PlantedRecovery() {
  const Stopwatch clock;
  int good = 0;
  double worst = 1;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ServiceOptions options;
    options.seed = seed;
    Service service(options);
    const PolicyId p("planted");
    const auto doc =
        service.IngestPolicy(p, "https://example.com/terms", testing::SyntheticPolicyText(20));
    service.GenerateHits(p, 1.0, seed);
    const auto ids = testing::StatementIds(doc);
    const auto abilities = testing::PlantedAbilities(ids, 3.0, seed);
    service.SimulateWorkers(p, abilities, {.workers = 8, .noise = 0.1, .seed = seed});
    const Ranking ranking = RankFromModel(service.FitModel(p));
    std::vector<double> planted, fitted;
    for (const auto& id : ids) {
      planted.push_back(abilities.at(id));
      fitted.push_back(-static_cast<double>(ranking.Rank(id)));
    }
    const double tau = KendallTau(planted, fitted).tau;
    worst = std::min(worst, tau);
    good += tau >= 0.9;
  }
  const double t = clock.Elapsed();
  return {good >= 18 && t < 30,
          Format("%d/20 seeds with tau >= 0.9 (worst %.3f), %.2f s", good, worst, t)};
}

// --- Kendall ---------------------------------------------------------------

CheckResult KendallExactness() {
  double worst = 0;
  std::size_t cases = 0;
  for (int n = 2; n <= 6; ++n) {
    std::vector<double> x(static_cast<std::size_t>(n)), y(x.size());
    std::iota(x.begin(), x.end(), 0.0);
    std::iota(y.begin(), y.end(), 0.0);
    do {
      worst = std::max(worst, std::abs(KendallTau(x, y).tau - testing::BruteForceTauB(x, y)));
      ++cases;
    } while (std::next_permutation(y.begin(), y.end()));
  }
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.UniformIndex(30);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.UniformIndex(4));
      y[i] = static_cast<double>(rng.UniformIndex(5));
    }
    const double tau = KendallTau(x, y).tau;
    const double ref = testing::BruteForceTauB(x, y);
    if (std::isnan(ref)) continue;
    worst = std::max(worst, std::abs(tau - ref));
    ++cases;
  }
  return {worst <= 1e-12, Format("%zu vectors, max error %.1e", cases, worst)};
}

// --- scalability -----------------------------------------------------------

CheckResult ScalabilityShape() {
  const auto doc = SegmentPolicy(PolicyId("p"), "", testing::SyntheticPolicyText(40));
  const auto ids = testing::StatementIds(doc);
  Rng rng(1);
  const auto comparisons = testing::SimulateComparisons(
      PolicyId("p"), EnumeratePairs(doc), testing::PlantedAbilities(ids, 3.0, 1), rng);
  ScalabilityOptions options;
  options.simulations = 100;
  options.seed = 1;
  const auto result = RunScalabilityExperiment(PolicyId("p"), comparisons, ids, options);
  const auto& s = result.summary;
  bool monotone = true;
  for (std::size_t f = 1; f < s.size(); ++f) {
    const double se0 = s[f - 1].similarity_sd / std::sqrt(static_cast<double>(s[f - 1].simulations));
    const double se1 = s[f].similarity_sd / std::sqrt(static_cast<double>(s[f].simulations));
    monotone &= s[f].similarity_mean >= s[f - 1].similarity_mean - std::hypot(se0, se1);
  }
  const double half = s[4].similarity_mean, full = s[9].similarity_mean;
  return {half >= 0.8 && full == 1.0 && monotone,
          Format("similarity %.3f at 0.5, %.3f at 1.0, non-decreasing within SE %s", half,
                 full, monotone ? "yes" : "no")};
}

// --- Flesch ----------------------------------------------------------------

CheckResult FleschExactness() {
  double worst = 0;
  for (std::size_t words = 1; words <= 50; words += 7) {
    for (std::size_t sentences = 1; sentences <= 5; ++sentences) {
      for (std::size_t syllables = words; syllables <= 3 * words; syllables += 3) {
        const double w = static_cast<double>(words), s = static_cast<double>(sentences);
        const double want = 206.835 - 1.015 * (w / s) - 84.6 * (syllables / w);
        worst = std::max(worst, std::abs(FleschReadingEase(words, sentences, syllables) - want));
      }
    }
  }
  const double cat = ScoreReadability("The cat sat on the mat.").flesch;
  return {worst <= 1e-9 && std::abs(cat - 116.145) <= 1e-9,
          Format("formula error %.1e, \"The cat sat on the mat.\" -> %.3f", worst, cat)};
}

// --- chi-square ------------------------------------------------------------

double PearsonSum(const Contingency& t) {
  const double o[2][2] = {{static_cast<double>(t.a), static_cast<double>(t.b)},
                          {static_cast<double>(t.c), static_cast<double>(t.d)}};
  const double n = o[0][0] + o[0][1] + o[1][0] + o[1][1];
  double chi = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double e = (o[i][0] + o[i][1]) * (o[0][j] + o[1][j]) / n;
      if (e > 0) chi += (o[i][j] - e) * (o[i][j] - e) / e;
    }
  }
  return chi;
}

CheckResult ChiSquareExactness() {
  const double perfect = ChiSquare({10, 0, 0, 10});
  const double independent = ChiSquare({5, 10, 15, 30});
  double worst = 0;
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const Contingency t{1 + rng.UniformIndex(40), 1 + rng.UniformIndex(40),
                        1 + rng.UniformIndex(40), 1 + rng.UniformIndex(40)};
    worst = std::max(worst, std::abs(ChiSquare(t) - PearsonSum(t)));
  }
  return {std::abs(perfect - 20.0) <= 1e-9 && std::abs(independent) <= 1e-9 && worst <= 1e-9,
          Format("[[10,0],[0,10]] -> %.6f, independent -> %.1e, vs sum form %.1e", perfect,
                 independent, worst)};
}

// --- SVM -------------------------------------------------------------------

CheckResult SvmOracle() {
  double worst = 0;
  std::size_t n = 0;
  for (const auto& inst : testing::BundledSvmInstances()) {
    if (inst.x.size() > 12) continue;
    const SquareMatrix k = GramMatrix(inst.params.kernel, inst.params.gamma, inst.x);
    const double smo = SolveSmo(k, inst.y, inst.params.c).objective;
    worst = std::max(worst, std::abs(smo - testing::ProjectedGradientDualOptimum(inst)));
    ++n;
  }
  const std::vector<std::vector<double>> x = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> y = {1, 1, -1, -1};
  const TrainedSvm xor_model = TrainSvm(x, y, {.kernel = KernelType::kRbf, .c = 10, .gamma = 1});
  int correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) correct += xor_model.Predict(x[i]) == y[i];
  return {worst <= 1e-4 && correct == 4,
          Format("%zu instances, max dual gap %.1e, XOR accuracy %d/4", n, worst, correct)};
}

// --- classifier ------------------------------------------------------------

CheckResult ClassifierPipeline() {
  const auto data = testing::PlantedSeparationCorpus(27, 20, 3);
  const auto embeddings = EmbeddingTable::Fallback(0);
  ExperimentOptions options;
  options.thresholds = {15};
  options.bootstraps = 10;
  options.seed = 1;
  const auto first = RunExperiment(data, embeddings, options);
  const auto second = RunExperiment(data, embeddings, options);
  const bool deterministic = ExperimentToJson(first) == ExperimentToJson(second);
  const auto& r = first.at(0);
  return {r.mean_balanced_accuracy >= 0.95 && r.runs.size() == 10 && deterministic,
          Format("T=15: balanced accuracy %.3f, recall %.3f, precision %.3f over %zu "
                 "bootstraps, deterministic %s",
                 r.mean_balanced_accuracy, r.mean_recall, r.mean_precision, r.runs.size(),
                 deterministic ? "yes" : "no")};
}

// --- service ---------------------------------------------------------------

std::string StatusLine(const PolicyStatus& s) {
  return Format("%zu %zu %zu %zu %zu %zu %zu", s.statements, s.total_hits, s.completed,
                s.open, s.assigned, s.pairs, s.pairs_fully_voted);
}

CheckResult ServiceInvariants() {
  const auto dir = std::filesystem::temp_directory_path() / "tcrank_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::atomic<std::int64_t> now{1'700'000'000'000};
  const Clock clock = [&now] { return now.load(); };
  ServiceOptions options;
  options.seed = 7;
  options.log_path = dir / "events.jsonl";

  std::atomic<int> requests{0}, violations{0}, unexpected{0};
  std::string live_status;
  {
    Service service(options, clock);
    const PolicyId p("soak");
    service.IngestPolicy(p, "", testing::SyntheticPolicyText(12));
    service.GenerateHits(p, 1.0, 7);
    for (int w = 0; w < 16; ++w) service.RegisterWorker(WorkerId("w" + std::to_string(w)), true);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&, t] {
        Rng rng(DeriveSeed(99, static_cast<std::uint64_t>(t)));
        for (int i = 0; i < 250; ++i) {
          const WorkerId w("w" + std::to_string(rng.UniformIndex(16)));
          ++requests;
          try {
            const TaskAssignment task = service.AssignTask(w);
            if (rng.Bernoulli(0.1)) now += 11 * 60 * 1000;
            if (!rng.Bernoulli(0.15)) {
              const auto choice = static_cast<Choice>(rng.UniformIndex(3));
              service.SubmitVote(w, task.hit_id, choice);
              if (rng.Bernoulli(0.2)) service.SubmitVote(w, task.hit_id, choice);
            }
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kNoTaskAvailable &&
                e.code() != ErrorCode::kStaleAssignment) {
              ++unexpected;
            }
          }
          if (i % 25 == 0 && !service.AuditInvariants().empty()) ++violations;
        }
      });
    }
    for (auto& th : threads) th.join();
    if (!service.AuditInvariants().empty()) ++violations;
    live_status = StatusLine(service.Status(p));
  }
  Service replayed(options, clock);
  const std::string replay_status = StatusLine(replayed.Status(PolicyId("soak")));
  const bool replay_clean = replayed.AuditInvariants().empty();
  std::filesystem::remove_all(dir);
  const bool pass = requests == 1000 && violations == 0 && unexpected == 0 &&
                    replay_clean && live_status == replay_status;
  return {pass, Format("%d requests, %d audit violations, %d unexpected errors, replay %s",
                       requests.load(), violations.load(), unexpected.load(),
                       live_status == replay_status ? "identical" : "differs")};
}

int Run() {
  const std::vector<std::pair<const char*, std::function<CheckResult()>>> criteria = {
      {"aggregation-oracle", AggregationOracle},
      {"hit-arithmetic", HitArithmetic},
      {"bradley-terry-correctness", BradleyTerryCorrectness},
      {"planted-recovery", PlantedRecovery},
      {"kendall-exactness", KendallExactness},
      {"scalability-shape", ScalabilityShape},
      {"flesch-exactness", FleschExactness},
      {"chi-square-exactness", ChiSquareExactness},
      {"svm-oracle", SvmOracle},
      {"classifier-pipeline", ClassifierPipeline},
      {"service-invariants", ServiceInvariants},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    CheckResult r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    failures += !r.pass;
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", name, r.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace tcrank

int main() { return tcrank::Run(); }
