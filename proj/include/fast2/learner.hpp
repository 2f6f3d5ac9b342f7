#pragma once

#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "fast2/corpus.hpp"
#include "fast2/label_state.hpp"
#include "fast2/svm.hpp"

namespace fast2 {

/// Seeded engine shared by every randomized step.
using Rng = std::mt19937_64;

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    /// Relevant-class weight over non-relevant-class weight used to fit this
    /// model; 1.0 for the undersampled model.
    double class_weight_ratio = 1.0;
    /// The same ratio for the balanced first-phase fit, kept even when the
    /// undersampled model is returned.
    double balanced_weight_ratio = 1.0;
    /// True when aggressive undersampling produced this model.
    bool undersampled = false;
    std::size_t training_size = 0;

    double decision(std::span<const SparseMatrix::Entry> row) const { return dot(row, weights) + bias; }
};

void to_json(nlohmann::json& j, const LinearModel& m);
void from_json(const nlohmann::json& j, LinearModel& m);

struct TrainOptions {
    double c = 1.0;
    /// Aggressive undersampling applies once |L_R| reaches this.
    std::size_t undersample_at = 30;
    SvmOptions solver;
    /// Training-only positives (e.g. an Auto-BM25 seed), used in place of L_R
    /// while L_R is empty, whatever their own label.
    std::vector<DocIndex> pseudo_positives;
};

/// Presumptive non-relevant sample: min(|L|, |not L|) unlabeled documents
/// drawn uniformly without replacement. Returned in draw order.
std::vector<DocIndex> presume(const LabelState& state, Rng& rng);

/// Balanced-weight linear SVM on L plus `presumed` (as negatives). With
/// |L_R| >= undersample_at the |L_R| negatives scoring lowest under the
/// balanced model are kept and an unweighted SVM is refit on them plus L_R.
LinearModel train(const Corpus& corpus, const LabelState& state, std::span<const DocIndex> presumed,
                  const TrainOptions& options = {});

enum class QueryRationale { uncertainty, certainty };

struct QueryResult {
    DocIndex doc;
    QueryRationale rationale;
    double decision;
};

/// Uncertainty sampling (argmin |decision|) while |L_R| < uncertainty_until,
/// certainty sampling (argmax decision) afterwards. Ties go to the earliest
/// document in corpus order.
QueryResult query(const LinearModel& model, const Corpus& corpus, const LabelState& state,
                  std::size_t uncertainty_until = 10);

/// Decision value for every document in corpus order.
std::vector<double> decision_scores(const LinearModel& model, const Corpus& corpus);
std::map<DocIndex, double> decision_scores(const LinearModel& model, const Corpus& corpus,
                                           std::span<const DocIndex> docs);

}  // namespace fast2
