#include "fast2/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "fast2/errors.hpp"

namespace fast2 {

void to_json(nlohmann::json& j, const LinearModel& m)
{
    j = nlohmann::json{{"weights", m.weights},
                       {"bias", m.bias},
                       {"class_weight_ratio", m.class_weight_ratio},
                       {"balanced_weight_ratio", m.balanced_weight_ratio},
                       {"undersampled", m.undersampled},
                       {"training_size", m.training_size}};
}

void from_json(const nlohmann::json& j, LinearModel& m)
{
    j.at("weights").get_to(m.weights);
    j.at("bias").get_to(m.bias);
    j.at("class_weight_ratio").get_to(m.class_weight_ratio);
    m.balanced_weight_ratio = j.value("balanced_weight_ratio", m.class_weight_ratio);
    m.undersampled = j.value("undersampled", false);
    m.training_size = j.value("training_size", std::size_t{0});
}

std::vector<DocIndex> presume(const LabelState& state, Rng& rng)
{
    auto pool = state.unlabeled();
    const std::size_t k = std::min(state.labeled_count(), pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(k);
    return pool;
}

namespace {

struct TrainingSet {
    std::vector<DocIndex> positives;
    std::vector<DocIndex> negatives;
};

SvmSolution fit(const Corpus& corpus, const TrainingSet& set, double c, double positive_weight,
                double negative_weight, const SvmOptions& options)
{
    // Examples are visited in corpus order so the fit does not depend on how
    // the caller assembled the set.
    std::vector<std::pair<DocIndex, bool>> members;
    members.reserve(set.positives.size() + set.negatives.size());
    for (auto d : set.positives) {
        members.emplace_back(d, true);
    }
    for (auto d : set.negatives) {
        members.emplace_back(d, false);
    }
    std::sort(members.begin(), members.end());

    std::vector<SvmExample> examples;
    examples.reserve(members.size());
    const auto& features = corpus.features();
    for (auto [d, positive] : members) {
        examples.push_back({features.row(d), positive, c * (positive ? positive_weight : negative_weight)});
    }
    return solve_linear_svm(examples, features.columns(), options);
}

}  // namespace

LinearModel train(const Corpus& corpus, const LabelState& state, std::span<const DocIndex> presumed,
                  const TrainOptions& options)
{
    TrainingSet set;
    set.positives = state.labeled_relevant();
    if (set.positives.empty()) {
        set.positives = options.pseudo_positives;
    }
    auto is_positive = [&](DocIndex d) {
        return std::find(set.positives.begin(), set.positives.end(), d) != set.positives.end();
    };
    for (auto d : state.labeled_irrelevant()) {
        if (!is_positive(d)) {
            set.negatives.push_back(d);
        }
    }
    for (auto d : presumed) {
        if (state.is_labeled(d)) {
            throw StateError("presumed document " + std::to_string(d) + " is already labeled");
        }
        if (!is_positive(d)) {
            set.negatives.push_back(d);
        }
    }
    if (set.positives.empty() || set.negatives.empty()) {
        throw TrainingError("training needs at least one relevant and one non-relevant example; keep seeding");
    }

    const auto n = static_cast<double>(set.positives.size() + set.negatives.size());
    const double positive_weight = n / (2.0 * static_cast<double>(set.positives.size()));
    const double negative_weight = n / (2.0 * static_cast<double>(set.negatives.size()));
    auto balanced = fit(corpus, set, options.c, positive_weight, negative_weight, options.solver);

    LinearModel model;
    model.weights = std::move(balanced.weights);
    model.bias = balanced.bias;
    model.class_weight_ratio = positive_weight / negative_weight;
    model.balanced_weight_ratio = model.class_weight_ratio;
    model.training_size = set.positives.size() + set.negatives.size();

    const std::size_t relevant = state.relevant_count();
    if (relevant < options.undersample_at || relevant == 0) {
        return model;
    }

    const auto& features = corpus.features();
    std::vector<std::pair<double, DocIndex>> ranked;
    ranked.reserve(set.negatives.size());
    for (auto d : set.negatives) {
        ranked.emplace_back(model.decision(features.row(d)), d);
    }
    // Most negative first; equal scores resolve to corpus order.
    std::sort(ranked.begin(), ranked.end());
    TrainingSet reduced;
    reduced.positives = set.positives;
    const std::size_t keep = std::min(set.positives.size(), ranked.size());
    for (std::size_t i = 0; i < keep; ++i) {
        reduced.negatives.push_back(ranked[i].second);
    }
    auto refit = fit(corpus, reduced, options.c, 1.0, 1.0, options.solver);
    model.weights = std::move(refit.weights);
    model.bias = refit.bias;
    model.class_weight_ratio = 1.0;
    model.undersampled = true;
    model.training_size = reduced.positives.size() + reduced.negatives.size();
    return model;
}

QueryResult query(const LinearModel& model, const Corpus& corpus, const LabelState& state,
                  std::size_t uncertainty_until)
{
    const bool certainty = state.relevant_count() >= uncertainty_until;
    const auto& features = corpus.features();
    std::optional<QueryResult> best;
    double best_key = 0.0;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        auto doc = static_cast<DocIndex>(d);
        if (state.is_labeled(doc)) {
            continue;
        }
        const double value = model.decision(features.row(d));
        const double key = certainty ? -value : std::abs(value);
        if (!best || key < best_key) {
            best = QueryResult{doc, certainty ? QueryRationale::certainty : QueryRationale::uncertainty, value};
            best_key = key;
        }
    }
    if (!best) {
        throw ExhaustedError("no unlabeled documents remain");
    }
    return *best;
}

std::vector<double> decision_scores(const LinearModel& model, const Corpus& corpus)
{
    const auto& features = corpus.features();
    std::vector<double> out(corpus.size());
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        out[d] = model.decision(features.row(d));
    }
    return out;
}

std::map<DocIndex, double> decision_scores(const LinearModel& model, const Corpus& corpus,
                                           std::span<const DocIndex> docs)
{
    std::map<DocIndex, double> out;
    for (auto d : docs) {
        if (d >= corpus.size()) {
            throw LookupError("document index " + std::to_string(d) + " outside the corpus");
        }
        out[d] = model.decision(corpus.features().row(d));
    }
    return out;
}

}  // namespace fast2
