#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fast2/corpus.hpp"
#include "fast2/label_state.hpp"
#include "fast2/learner.hpp"
#include "fast2/logistic.hpp"

namespace fast2 {

struct Estimate {
    /// |R_E| = sum of temp_labels.
    double estimated_relevant = 0.0;
    /// Y over the whole pool in corpus order: 1 for L_R and temporarily labeled documents.
    std::vector<unsigned char> temp_labels;
    std::size_t iterations = 0;
    bool converged = false;
    /// Last logistic fit of temp_labels on decision values; maps a decision value to P(relevant).
    LogisticModel calibration;
};

void to_json(nlohmann::json& j, const Estimate& e);
void from_json(const nlohmann::json& j, Estimate& e);

struct SemiOptions {
    std::size_t max_iterations = 100;
};

struct ScoredProbability {
    DocIndex doc;
    double probability;
};

/// Walks `unlabeled` in descending probability (ties: corpus order), summing
/// probabilities into a running count. Each time the count reaches the
/// current integer target, the first document of the group accumulated since
/// the previous hit is marked 1 and the target advances by one. Only entries
/// listed in `unlabeled` are touched.
std::vector<unsigned char> temporary_label(std::span<const ScoredProbability> unlabeled,
                                           std::vector<unsigned char> temp_labels);

/// Semi-supervised estimate of the number of relevant documents: repeatedly
/// fits a logistic regression of the temporary labels on the SVM decision
/// value (strength C = |R_E| / |L_I|) and relabels the unlabeled pool afresh until
/// |R_E| stops changing. Throws UndefinedError when L_I is empty.
Estimate semi_estimate(const LinearModel& model, const Corpus& corpus, const LabelState& state,
                       SemiOptions options = {});
/// Same, from precomputed decision values over the pool.
Estimate semi_estimate(std::span<const double> decisions, const LabelState& state, SemiOptions options = {});

/// |L_R| >= target_recall * |R_E|.
bool stop_semi(const LabelState& state, const Estimate& estimate, double target_recall);

/// True once the last `window` label events are all non-relevant.
bool stop_ros(const LabelState& state, std::size_t window = 50);

/// (papers reviewed, relevant found) pairs in review order.
struct RecallCurve {
    std::vector<std::pair<std::size_t, std::size_t>> points;

    /// Both coordinates non-decreasing and found <= reviewed.
    bool valid() const;
};

/// Curve over the current labels: point k is (k, #{first k reviewed that are labeled relevant now}),
/// starting from the origin.
RecallCurve labeled_curve(const LabelState& state);

struct KneePolicy {
    enum class Rho { fixed, adaptive };
    Rho rho_mode = Rho::fixed;
    double rho = 6.0;
    /// No stop before this many papers have been reviewed.
    std::size_t min_reviewed = 150;

    /// 156 - min(found, 150) in adaptive mode.
    double rho_for(std::size_t found) const;
};

struct KneeResult {
    bool stop = false;
    /// Index into RecallCurve::points.
    std::size_t knee_index = 0;
    double ratio = 0.0;
};

/// Knee = curve point farthest from the chord joining the first and last
/// points. Stops when slope before the knee over slope after it exceeds rho;
/// the slope after is floored at 1 / (reviewed after the knee).
KneeResult stop_knee(const RecallCurve& curve, const KneePolicy& policy = {});

}  // namespace fast2
