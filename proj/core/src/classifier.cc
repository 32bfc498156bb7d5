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

#include "tcrank/classifier.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "tcrank/csv.h"
#include "tcrank/error.h"
#include "tcrank/preprocess.h"
#include "tcrank/random.h"

namespace tcrank {
namespace {

using nlohmann::json;

std::size_t ResolveThreads(std::size_t threads, std::size_t tasks) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(threads, tasks));
}

// Runs task(0..count-1) on `threads` workers; rethrows the first failure.
void ParallelFor(std::size_t count, std::size_t threads,
                 const std::function<void(std::size_t)>& task) {
  threads = ResolveThreads(threads, count);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double Ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::uint64_t ThresholdKey(double t) {
  return static_cast<std::uint64_t>(std::llround(t * 1000));
}

void CheckBothClasses(std::span<const LabeledStatement> rows,
                      std::size_t minimum) {
  std::size_t pos = 0;
  for (const auto& r : rows) pos += r.important;
  const std::size_t neg = rows.size() - pos;
  if (pos < minimum || neg < minimum) {
    throw Error(ErrorCode::kInsufficientData,
                "need at least " + std::to_string(minimum) +
                    " rows per class, have " + std::to_string(pos) +
                    " important and " + std::to_string(neg) + " unimportant");
  }
}

json GridToJson(const Grid& grid) {
  json kernels = json::array();
  for (auto k : grid.kernels) kernels.push_back(KernelName(k));
  return {{"C", grid.c_values}, {"gamma", grid.gamma_values},
          {"kernels", kernels}};
}

Grid GridFromJson(const json& j) {
  Grid g;
  g.c_values = j.at("C").get<std::vector<double>>();
  g.gamma_values = j.at("gamma").get<std::vector<double>>();
  for (const auto& k : j.at("kernels")) {
    g.kernels.push_back(ParseKernel(k.get<std::string>()));
  }
  return g;
}

json PointToJson(const GridPoint& p) {
  return {{"kernel", KernelName(p.kernel)}, {"C", p.c}, {"gamma", p.gamma}};
}

GridPoint PointFromJson(const json& j) {
  return {ParseKernel(j.at("kernel").get<std::string>()),
          j.at("C").get<double>(), j.at("gamma").get<double>()};
}

}  // namespace

TfIdf TfIdf::Build(std::span<const std::vector<std::string>> corpus) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "empty corpus");
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& doc : corpus) {
    std::vector<std::string_view> distinct(doc.begin(), doc.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    for (auto token : distinct) {
      auto it = df.find(token);
      if (it == df.end()) {
        df.emplace(std::string(token), 1);
      } else {
        ++it->second;
      }
    }
  }
  return FromCounts(corpus.size(), std::move(df));
}

TfIdf TfIdf::FromCounts(std::size_t documents,
                        std::map<std::string, std::size_t, std::less<>> df) {
  TfIdf t;
  t.documents_ = documents;
  t.df_ = std::move(df);
  return t;
}

std::size_t TfIdf::DocumentFrequency(std::string_view token) const {
  const auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

double TfIdf::Idf(std::string_view token) const {
  const double d = static_cast<double>(documents_);
  const double df = static_cast<double>(DocumentFrequency(token));
  return std::log((1 + d) / (1 + df)) + 1;
}

Feature Featurize(std::span<const std::string> tokens, const TfIdf& tfidf,
                  const EmbeddingTable& embeddings) {
  Feature f;
  f.values.assign(embeddings.dimension(), 0.0);
  std::map<std::string_view, std::size_t> tf;
  for (const auto& t : tokens) ++tf[t];
  double total_weight = 0;
  for (const auto& [token, count] : tf) {
    const auto vec = embeddings.Lookup(token);
    if (!vec) continue;
    const double w = tfidf.Weight(token, count);
    for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] += w * (*vec)[i];
    total_weight += w;
  }
  if (total_weight <= 0) return f;
  double norm = 0;
  for (auto& x : f.values) {
    x /= total_weight;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (norm == 0) return f;
  for (auto& x : f.values) x /= norm;
  f.empty = false;
  return f;
}

std::string_view BandName(Band band) {
  switch (band) {
    case Band::kTop:
      return "top_T";
    case Band::kMiddleExcluded:
      return "middle_excluded";
    case Band::kBottomHalf:
      return "bottom_half";
  }
  return "unknown";
}

std::vector<BandAssignment> BinLabels(const Ranking& ranking, double t_percent) {
  if (!(t_percent > 0) || t_percent > 50) {
    throw Error(ErrorCode::kInvalidThreshold, "T must be in (0, 50]");
  }
  const std::size_t n = ranking.size();
  const auto top = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::floor(t_percent * static_cast<double>(n) / 100.0 + 1e-9)));
  const std::size_t bottom = n / 2;
  std::vector<BandAssignment> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    BandAssignment a;
    a.statement_id = ranking.ordered[i];
    a.policy_id = ranking.policy_id;
    a.rank = i + 1;
    if (i >= n - bottom) {
      a.band = Band::kBottomHalf;
    } else if (i < top) {
      a.band = Band::kTop;
    } else {
      a.band = Band::kMiddleExcluded;
    }
    out.push_back(std::move(a));
  }
  return out;
}

SvmParams GridPoint::Params() const {
  SvmParams p;
  p.kernel = kernel;
  p.c = c;
  p.gamma = kernel == KernelType::kRbf ? gamma : 0.0;
  return p;
}

bool PreferGridPoint(const GridPoint& a, const GridPoint& b) {
  if (a.c != b.c) return a.c < b.c;
  if (a.gamma != b.gamma) return a.gamma < b.gamma;
  return a.kernel == KernelType::kLinear && b.kernel == KernelType::kRbf;
}

Grid Grid::Default() {
  return {{0.1, 1, 10, 100, 1000},
          {1e-4, 1e-3, 1e-2, 1e-1},
          {KernelType::kLinear, KernelType::kRbf}};
}

std::vector<GridPoint> Grid::Points() const {
  std::vector<GridPoint> out;
  for (auto kernel : kernels) {
    for (double c : c_values) {
      if (kernel == KernelType::kLinear) {
        out.push_back({kernel, c, 0.0});
        continue;
      }
      for (double g : gamma_values) out.push_back({kernel, c, g});
    }
  }
  return out;
}

GridSearchResult GridSearch(std::span<const LabeledStatement> rows,
                            const Grid& grid, std::size_t folds,
                            std::uint64_t seed, std::size_t threads) {
  const auto points = grid.Points();
  if (points.empty()) throw Error(ErrorCode::kInvalidInput, "empty grid");
  if (folds < 2) throw Error(ErrorCode::kInvalidInput, "need at least 2 folds");
  CheckBothClasses(rows, folds);
  const std::size_t n = rows.size();

  // Stratified fold assignment.
  std::vector<std::size_t> fold_of(n);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].important == (cls == 1)) members.push_back(i);
    }
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(cls)));
    rng.Shuffle(members);
    for (std::size_t p = 0; p < members.size(); ++p) fold_of[members[p]] = p % folds;
  }

  std::vector<int> y(n);
  std::vector<std::vector<double>> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rows[i].important ? 1 : -1;
    x[i] = rows[i].feature;
  }
  const SquareMatrix dot = GramMatrix(KernelType::kLinear, 0, x);
  SquareMatrix dist2(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dist2(i, j) = std::max(0.0, dot(i, i) + dot(j, j) - 2 * dot(i, j));
    }
  }
  std::vector<std::vector<std::size_t>> train(folds), test(folds);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < folds; ++f) {
      (fold_of[i] == f ? test[f] : train[f]).push_back(i);
    }
  }

  GridSearchResult result;
  result.scores.resize(points.size());
  ParallelFor(points.size(), threads, [&](std::size_t p) {
    const GridPoint& point = points[p];
    const SvmParams params = point.Params();
    SquareMatrix gram(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        gram(i, j) = point.kernel == KernelType::kLinear
                         ? dot(i, j)
                         : std::exp(-point.gamma * dist2(i, j));
      }
    }
    double total = 0;
    for (std::size_t f = 0; f < folds; ++f) {
      const auto& tr = train[f];
      SquareMatrix sub(tr.size());
      std::vector<int> sub_y(tr.size());
      for (std::size_t a = 0; a < tr.size(); ++a) {
        sub_y[a] = y[tr[a]];
        for (std::size_t b = 0; b < tr.size(); ++b) sub(a, b) = gram(tr[a], tr[b]);
      }
      const SmoSolution sol =
          SolveSmo(sub, sub_y, params.c, params.tolerance, params.max_iterations);
      std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
      for (std::size_t v : test[f]) {
        double decision = -sol.rho;
        for (std::size_t a = 0; a < tr.size(); ++a) {
          if (sol.alpha[a] > 0) decision += sol.alpha[a] * sub_y[a] * gram(tr[a], v);
        }
        const bool predicted = decision > 0;
        if (y[v] == 1) {
          (predicted ? tp : fn) += 1;
        } else {
          (predicted ? fp : tn) += 1;
        }
      }
      total += MetricsFromCounts(tp, fp, tn, fn).balanced_accuracy;
    }
    result.scores[p] = {point, total / static_cast<double>(folds)};
  });

  std::size_t best = 0;
  for (std::size_t p = 1; p < points.size(); ++p) {
    const double s = result.scores[p].mean_balanced_accuracy;
    const double b = result.scores[best].mean_balanced_accuracy;
    if (s > b || (s == b && PreferGridPoint(points[p], points[best]))) best = p;
  }
  result.best = points[best];
  result.best_score = result.scores[best].mean_balanced_accuracy;
  return result;
}

EvalMetrics MetricsFromCounts(std::size_t tp, std::size_t fp, std::size_t tn,
                              std::size_t fn) {
  EvalMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  m.recall = Ratio(tp, tp + fn);
  m.precision = Ratio(tp, tp + fp);
  m.balanced_accuracy = (m.recall + Ratio(tn, tn + fp)) / 2;
  return m;
}

EvalMetrics Evaluate(const TrainedSvm& model,
                     std::span<const LabeledStatement> rows) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "no validation rows");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::vector<MisclassifiedStatement> fps, fns;
  for (const auto& r : rows) {
    const double d = model.Decision(r.feature);
    const bool predicted = d > 0;
    if (r.important && predicted) {
      ++tp;
    } else if (r.important) {
      ++fn;
      fns.push_back({r.statement_id, r.policy_id, r.text, d});
    } else if (predicted) {
      ++fp;
      fps.push_back({r.statement_id, r.policy_id, r.text, d});
    } else {
      ++tn;
    }
  }
  EvalMetrics m = MetricsFromCounts(tp, fp, tn, fn);
  m.false_positives = std::move(fps);
  m.false_negatives = std::move(fns);
  return m;
}

FeatureSet BuildFeatures(const ClassifierDataset& dataset,
                         const EmbeddingTable& embeddings) {
  if (dataset.statements.empty()) {
    throw Error(ErrorCode::kEmptyInput, "dataset has no statements");
  }
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(dataset.statements.size());
  for (const auto& s : dataset.statements) tokens.push_back(Preprocess(s.text));
  FeatureSet out;
  out.tfidf = TfIdf::Build(tokens);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.features[dataset.statements[i].id] =
        Featurize(tokens[i], out.tfidf, embeddings);
  }
  for (const auto& [policy, ranking] : dataset.rankings) {
    for (const auto& id : ranking.ordered) {
      if (!out.features.contains(id)) {
        throw Error(ErrorCode::kUnknownStatement,
                    "ranked statement " + id.str() + " is not in the dataset");
      }
    }
  }
  return out;
}

std::vector<LabeledStatement> LabeledRows(const ClassifierDataset& dataset,
                                          const FeatureSet& features,
                                          double t_percent) {
  std::map<StatementId, const Statement*> by_id;
  for (const auto& s : dataset.statements) by_id[s.id] = &s;
  std::vector<LabeledStatement> rows;
  for (const auto& [policy, ranking] : dataset.rankings) {
    for (const auto& a : BinLabels(ranking, t_percent)) {
      if (a.band == Band::kMiddleExcluded) continue;
      const auto sit = by_id.find(a.statement_id);
      const auto fit = features.features.find(a.statement_id);
      if (sit == by_id.end() || fit == features.features.end()) {
        throw Error(ErrorCode::kUnknownStatement,
                    "ranked statement " + a.statement_id.str() +
                        " is not in the dataset");
      }
      LabeledStatement row;
      row.statement_id = a.statement_id;
      row.policy_id = a.policy_id;
      row.text = sit->second->text;
      row.feature = fit->second.values;
      row.empty_feature = fit->second.empty;
      row.band = a.band;
      row.important = a.band == Band::kTop;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ThresholdResult> RunExperiment(const ClassifierDataset& dataset,
                                           const EmbeddingTable& embeddings,
                                           const ExperimentOptions& options) {
  if (dataset.rankings.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "the experiment needs at least two ranked policies");
  }
  if (options.bootstraps == 0) {
    throw Error(ErrorCode::kInvalidInput, "need at least one bootstrap");
  }
  if (!(options.validation_fraction > 0) || !(options.validation_fraction < 1)) {
    throw Error(ErrorCode::kInvalidInput, "validation fraction must be in (0, 1)");
  }
  const FeatureSet features = BuildFeatures(dataset, embeddings);

  std::vector<ThresholdResult> results(options.thresholds.size());
  std::vector<std::vector<LabeledStatement>> rows_by_t(options.thresholds.size());
  for (std::size_t t = 0; t < options.thresholds.size(); ++t) {
    results[t].t_percent = options.thresholds[t];
    rows_by_t[t] = LabeledRows(dataset, features, options.thresholds[t]);
    for (const auto& r : rows_by_t[t]) {
      (r.important ? results[t].important_rows : results[t].unimportant_rows) += 1;
    }
    results[t].runs.resize(options.bootstraps);
  }

  const std::size_t tasks = options.thresholds.size() * options.bootstraps;
  ParallelFor(tasks, options.threads, [&](std::size_t task) {
    const std::size_t t = task / options.bootstraps;
    const std::size_t b = task % options.bootstraps;
    const auto& rows = rows_by_t[t];
    const std::uint64_t run_seed =
        DeriveSeed(DeriveSeed(options.seed, ThresholdKey(options.thresholds[t])), b);

    // Stratified split: round(fraction * n_class) rows of each class, at
    // least one, go to validation.
    std::vector<LabeledStatement> train, validation;
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].important == (cls == 1)) members.push_back(i);
      }
      Rng rng(DeriveSeed(run_seed, static_cast<std::uint64_t>(cls)));
      rng.Shuffle(members);
      const auto n_val = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(
                 options.validation_fraction * static_cast<double>(members.size()))));
      for (std::size_t p = 0; p < members.size(); ++p) {
        (p < n_val ? validation : train).push_back(rows[members[p]]);
      }
    }
    const GridSearchResult search =
        GridSearch(train, options.grid, options.folds, DeriveSeed(run_seed, 2), 1);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (const auto& r : train) {
      x.push_back(r.feature);
      y.push_back(r.important ? 1 : -1);
    }
    const TrainedSvm model = TrainSvm(x, y, search.best.Params(), run_seed);
    BootstrapRun& run = results[t].runs[b];
    run.index = b;
    run.chosen = search.best;
    run.cv_score = search.best_score;
    run.metrics = Evaluate(model, validation);
  });

  for (auto& r : results) {
    for (const auto& run : r.runs) {
      r.mean_balanced_accuracy += run.metrics.balanced_accuracy;
      r.mean_recall += run.metrics.recall;
      r.mean_precision += run.metrics.precision;
    }
    const auto k = static_cast<double>(r.runs.size());
    r.mean_balanced_accuracy /= k;
    r.mean_recall /= k;
    r.mean_precision /= k;
  }
  return results;
}

std::string ExperimentToJson(std::span<const ThresholdResult> results) {
  json out = json::array();
  for (const auto& r : results) {
    json runs = json::array();
    for (const auto& run : r.runs) {
      const auto& m = run.metrics;
      runs.push_back({{"bootstrap", run.index},
                      {"chosen", PointToJson(run.chosen)},
                      {"cv_balanced_accuracy", run.cv_score},
                      {"balanced_accuracy", m.balanced_accuracy},
                      {"recall", m.recall},
                      {"precision", m.precision},
                      {"tp", m.tp},
                      {"fp", m.fp},
                      {"tn", m.tn},
                      {"fn", m.fn}});
    }
    out.push_back({{"T", r.t_percent},
                   {"important_rows", r.important_rows},
                   {"unimportant_rows", r.unimportant_rows},
                   {"balanced_accuracy", r.mean_balanced_accuracy},
                   {"recall", r.mean_recall},
                   {"precision", r.mean_precision},
                   {"runs", runs}});
  }
  return out.dump(2);
}

ImportanceModel TrainImportanceModel(const ClassifierDataset& dataset,
                                     const EmbeddingTable& embeddings,
                                     double t_percent, std::uint64_t seed,
                                     const Grid& grid, std::size_t folds,
                                     std::size_t threads) {
  const FeatureSet features = BuildFeatures(dataset, embeddings);
  const auto rows = LabeledRows(dataset, features, t_percent);
  const GridSearchResult search = GridSearch(rows, grid, folds, seed, threads);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (const auto& r : rows) {
    x.push_back(r.feature);
    y.push_back(r.important ? 1 : -1);
  }
  ImportanceModel model;
  model.svm = TrainSvm(x, y, search.best.Params(), seed);
  model.tfidf = features.tfidf;
  model.t_percent = t_percent;
  model.grid = grid;
  model.chosen = search.best;
  model.cv_score = search.best_score;
  model.seed = seed;
  model.preprocessing_version = std::string(kPreprocessingVersion);
  model.embedding_dimension = embeddings.dimension();
  return model;
}

std::string ImportanceModelToJson(const ImportanceModel& model) {
  json j = json::parse(SvmToJson(model.svm));
  j["preprocessing_version"] = model.preprocessing_version;
  j["embedding_dimension"] = model.embedding_dimension;
  j["T"] = model.t_percent;
  j["training_seed"] = model.seed;
  j["grid"] = GridToJson(model.grid);
  j["chosen"] = PointToJson(model.chosen);
  j["cv_balanced_accuracy"] = model.cv_score;
  j["tfidf"] = {{"documents", model.tfidf.document_count()},
                {"df", model.tfidf.document_frequency()}};
  return j.dump();
}

ImportanceModel ImportanceModelFromJson(std::string_view text) {
  ImportanceModel model;
  try {
    const json j = json::parse(text);
    model.preprocessing_version = j.at("preprocessing_version").get<std::string>();
    if (model.preprocessing_version != kPreprocessingVersion) {
      throw Error(ErrorCode::kInvalidInput,
                  "model was trained with preprocessing " +
                      model.preprocessing_version + ", this build uses " +
                      std::string(kPreprocessingVersion));
    }
    model.svm = SvmFromJson(text);
    model.embedding_dimension = j.at("embedding_dimension").get<std::size_t>();
    model.t_percent = j.at("T").get<double>();
    model.seed = j.at("training_seed").get<std::uint64_t>();
    model.grid = GridFromJson(j.at("grid"));
    model.chosen = PointFromJson(j.at("chosen"));
    model.cv_score = j.at("cv_balanced_accuracy").get<double>();
    const auto& t = j.at("tfidf");
    model.tfidf = TfIdf::FromCounts(
        t.at("documents").get<std::size_t>(),
        t.at("df").get<std::map<std::string, std::size_t, std::less<>>>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return model;
}

std::vector<Prediction> Predict(const ImportanceModel& model,
                                const EmbeddingTable& embeddings,
                                std::span<const Statement> statements) {
  if (embeddings.dimension() != model.embedding_dimension) {
    throw Error(ErrorCode::kInvalidInput,
                "model expects " + std::to_string(model.embedding_dimension) +
                    "-dimensional embeddings, got " +
                    std::to_string(embeddings.dimension()));
  }
  std::vector<Prediction> out;
  out.reserve(statements.size());
  for (const auto& s : statements) {
    const Feature f = Featurize(Preprocess(s.text), model.tfidf, embeddings);
    Prediction p;
    p.policy_id = s.policy_id;
    p.statement_id = s.id;
    p.decision_value = model.svm.Decision(f.values);
    p.important = p.decision_value > 0;
    p.empty_feature = f.empty;
    out.push_back(std::move(p));
  }
  return out;
}

void WritePredictionsCsv(std::ostream& os,
                         std::span<const Prediction> predictions) {
  WriteCsvRow(os, {"policy_id", "statement_id", "predicted_label",
                   "decision_value"});
  for (const auto& p : predictions) {
    WriteCsvRow(os, {p.policy_id.str(), p.statement_id.str(),
                     p.important ? "important" : "unimportant",
                     FormatDouble(p.decision_value)});
  }
}

}  // namespace tcrank
