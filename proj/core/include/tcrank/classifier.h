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

// Statement-importance classifier: tf-idf weighted embedding features,
// threshold binning of rankings, kernel SVM with grid search, bootstrap
// evaluation and prediction on unseen policies.

#ifndef TCRANK_CLASSIFIER_H_
#define TCRANK_CLASSIFIER_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcrank/btrank.h"
#include "tcrank/corpus.h"
#include "tcrank/embeddings.h"
#include "tcrank/ids.h"
#include "tcrank/svm.h"

namespace tcrank {

// tf = raw count, idf = ln((1 + D) / (1 + df)) + 1.
class TfIdf {
 public:
  // kEmptyInput for an empty corpus.
  static TfIdf Build(std::span<const std::vector<std::string>> corpus);

  std::size_t document_count() const { return documents_; }
  std::size_t DocumentFrequency(std::string_view token) const;
  // Also defined for unseen tokens (df = 0).
  double Idf(std::string_view token) const;
  double Weight(std::string_view token, std::size_t tf) const {
    return static_cast<double>(tf) * Idf(token);
  }

  const std::map<std::string, std::size_t, std::less<>>& document_frequency()
      const {
    return df_;
  }
  static TfIdf FromCounts(std::size_t documents,
                          std::map<std::string, std::size_t, std::less<>> df);

 private:
  std::size_t documents_ = 0;
  std::map<std::string, std::size_t, std::less<>> df_;
};

struct Feature {
  std::vector<double> values;
  // No token had an embedding; `values` is the zero vector.
  bool empty = true;
};

// sum_t w(t) vec(t) / sum_t w(t) over in-vocabulary tokens, then scaled to
// unit L2 norm.
Feature Featurize(std::span<const std::string> tokens, const TfIdf& tfidf,
                  const EmbeddingTable& embeddings);

enum class Band { kTop, kMiddleExcluded, kBottomHalf };
std::string_view BandName(Band band);

struct BandAssignment {
  StatementId statement_id;
  PolicyId policy_id;
  std::size_t rank = 0;
  Band band = Band::kMiddleExcluded;
};

// Top max(1, floor(T N / 100)) -> kTop, bottom floor(N / 2) -> kBottomHalf,
// the rest kMiddleExcluded. kInvalidThreshold unless 0 < T <= 50.
std::vector<BandAssignment> BinLabels(const Ranking& ranking, double t_percent);

struct LabeledStatement {
  StatementId statement_id;
  PolicyId policy_id;
  std::string text;
  std::vector<double> feature;
  bool important = false;
  Band band = Band::kBottomHalf;
  bool empty_feature = false;
};

// Linear points carry gamma = 0.
struct GridPoint {
  KernelType kernel = KernelType::kRbf;
  double c = 1.0;
  double gamma = 0.0;

  SvmParams Params() const;
  bool operator==(const GridPoint&) const = default;
};

// Tie order: smaller C, then smaller gamma, then linear before RBF.
bool PreferGridPoint(const GridPoint& a, const GridPoint& b);

struct Grid {
  std::vector<double> c_values;
  std::vector<double> gamma_values;
  std::vector<KernelType> kernels;

  // C in {0.1, 1, 10, 100, 1000}, gamma in {1e-4, 1e-3, 1e-2, 1e-1},
  // kernels {linear, RBF}: 5 linear and 20 RBF points.
  static Grid Default();
  std::vector<GridPoint> Points() const;
};

struct GridScore {
  GridPoint point;
  double mean_balanced_accuracy = 0;
};

struct GridSearchResult {
  GridPoint best;
  double best_score = 0;
  std::vector<GridScore> scores;  // in Grid::Points() order
};

// Stratified k-fold cross-validation of every grid point, scored by mean
// balanced accuracy. kInsufficientData when a class has fewer than `folds`
// rows; kInvalidInput for an empty grid. `threads` = 0 uses the hardware
// concurrency; the result does not depend on it.
GridSearchResult GridSearch(std::span<const LabeledStatement> rows,
                            const Grid& grid, std::size_t folds,
                            std::uint64_t seed, std::size_t threads = 1);

struct MisclassifiedStatement {
  StatementId statement_id;
  PolicyId policy_id;
  std::string text;
  double decision_value = 0;
};

struct EvalMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  double balanced_accuracy = 0;
  double recall = 0;
  double precision = 0;
  std::vector<MisclassifiedStatement> false_positives;
  std::vector<MisclassifiedStatement> false_negatives;
};

// Rates with a zero denominator are 0.
EvalMetrics MetricsFromCounts(std::size_t tp, std::size_t fp, std::size_t tn,
                              std::size_t fn);
// kEmptyInput without validation rows.
EvalMetrics Evaluate(const TrainedSvm& model,
                     std::span<const LabeledStatement> rows);

struct ClassifierDataset {
  std::vector<Statement> statements;
  std::map<PolicyId, Ranking> rankings;
};

// Features for every ranked statement, with tf-idf fitted over the tokens of
// all dataset statements. kUnknownStatement when a ranking names a statement
// that is not in the dataset.
struct FeatureSet {
  TfIdf tfidf;
  std::map<StatementId, Feature> features;
};
FeatureSet BuildFeatures(const ClassifierDataset& dataset,
                         const EmbeddingTable& embeddings);

// Binned rows (middle band dropped) at threshold T, in ranking order.
std::vector<LabeledStatement> LabeledRows(const ClassifierDataset& dataset,
                                          const FeatureSet& features,
                                          double t_percent);

struct ExperimentOptions {
  std::vector<double> thresholds = {5, 10, 15, 20, 25};
  std::size_t bootstraps = 10;
  std::size_t folds = 5;
  double validation_fraction = 0.2;
  Grid grid = Grid::Default();
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

struct BootstrapRun {
  std::size_t index = 0;
  GridPoint chosen;
  double cv_score = 0;
  EvalMetrics metrics;
};

struct ThresholdResult {
  double t_percent = 0;
  std::size_t important_rows = 0;
  std::size_t unimportant_rows = 0;
  double mean_balanced_accuracy = 0;
  double mean_recall = 0;
  double mean_precision = 0;
  std::vector<BootstrapRun> runs;
};

// For each threshold and bootstrap: bin, stratified train/validation split,
// grid search on the training part, refit the best point, evaluate on the
// validation part. kInsufficientData for a dataset with fewer than two
// ranked policies.
std::vector<ThresholdResult> RunExperiment(const ClassifierDataset& dataset,
                                           const EmbeddingTable& embeddings,
                                           const ExperimentOptions& options);

std::string ExperimentToJson(std::span<const ThresholdResult> results);

struct ImportanceModel {
  TrainedSvm svm;
  TfIdf tfidf;
  double t_percent = 15;
  Grid grid;
  GridPoint chosen;
  double cv_score = 0;
  std::uint64_t seed = 0;
  std::string preprocessing_version;
  std::size_t embedding_dimension = kEmbeddingDimension;
};

// Grid search over all binned rows, then a refit of the best point.
ImportanceModel TrainImportanceModel(const ClassifierDataset& dataset,
                                     const EmbeddingTable& embeddings,
                                     double t_percent, std::uint64_t seed,
                                     const Grid& grid = Grid::Default(),
                                     std::size_t folds = 5,
                                     std::size_t threads = 0);

std::string ImportanceModelToJson(const ImportanceModel& model);
// kParseError on malformed input, kInvalidInput when the preprocessing
// version differs from this build's.
ImportanceModel ImportanceModelFromJson(std::string_view json);

struct Prediction {
  PolicyId policy_id;
  StatementId statement_id;
  bool important = false;
  double decision_value = 0;
  bool empty_feature = false;
};

// kInvalidInput when the embedding dimension differs from the model's.
std::vector<Prediction> Predict(const ImportanceModel& model,
                                const EmbeddingTable& embeddings,
                                std::span<const Statement> statements);

// policy_id,statement_id,predicted_label,decision_value
void WritePredictionsCsv(std::ostream& os,
                         std::span<const Prediction> predictions);

}  // namespace tcrank

#endif  // TCRANK_CLASSIFIER_H_
