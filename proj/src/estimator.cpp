#include "fast2/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "fast2/errors.hpp"

namespace fast2 {

void to_json(nlohmann::json& j, const Estimate& e)
{
    std::vector<int> labels(e.temp_labels.begin(), e.temp_labels.end());
    j = nlohmann::json{{"estimated_relevant", e.estimated_relevant},
                       {"temp_labels", labels},
                       {"iterations", e.iterations},
                       {"converged", e.converged},
                       {"calibration", {{"slope", e.calibration.slope}, {"intercept", e.calibration.intercept}}}};
}

void from_json(const nlohmann::json& j, Estimate& e)
{
    j.at("estimated_relevant").get_to(e.estimated_relevant);
    auto labels = j.at("temp_labels").get<std::vector<int>>();
    e.temp_labels.assign(labels.begin(), labels.end());
    j.at("iterations").get_to(e.iterations);
    j.at("converged").get_to(e.converged);
    j.at("calibration").at("slope").get_to(e.calibration.slope);
    j.at("calibration").at("intercept").get_to(e.calibration.intercept);
}

namespace {

bool by_probability(const ScoredProbability& a, const ScoredProbability& b)
{
    if (a.probability != b.probability) {
        return a.probability > b.probability;
    }
    return a.doc < b.doc;
}

// TemporaryLabel over input already in by_probability order.
std::vector<unsigned char> label_sorted(std::span<const ScoredProbability> order,
                                        std::vector<unsigned char> temp_labels)
{
    double count = 0.0;
    double target = 1.0;
    std::optional<DocIndex> group_head;
    for (const auto& item : order) {
        count += item.probability;
        if (!group_head) {
            group_head = item.doc;
        }
        if (count >= target) {
            temp_labels.at(*group_head) = 1;
            target += 1.0;
            group_head.reset();
        }
    }
    return temp_labels;
}

}  // namespace

std::vector<unsigned char> temporary_label(std::span<const ScoredProbability> unlabeled,
                                           std::vector<unsigned char> temp_labels)
{
    std::vector<ScoredProbability> order(unlabeled.begin(), unlabeled.end());
    std::stable_sort(order.begin(), order.end(), by_probability);
    return label_sorted(order, std::move(temp_labels));
}

Estimate semi_estimate(const LinearModel& model, const Corpus& corpus, const LabelState& state, SemiOptions options)
{
    auto decisions = decision_scores(model, corpus);
    return semi_estimate(decisions, state, options);
}

Estimate semi_estimate(std::span<const double> decisions, const LabelState& state, SemiOptions options)
{
    if (state.irrelevant_count() == 0) {
        throw UndefinedError("SEMI needs at least one document labeled non-relevant");
    }
    const std::size_t n = decisions.size();
    if (n != state.pool_size()) {
        throw Error("decision vector does not cover the pool");
    }
    Estimate est;
    est.temp_labels.assign(n, 0);
    for (auto d : state.labeled()) {
        est.temp_labels[d] = state.is_relevant(d) ? 1 : 0;
    }
    // Every pass relabels the unlabeled pool from scratch; only L_R carries over.
    const auto base = est.temp_labels;
    const auto unlabeled = state.unlabeled();
    const auto irrelevant = static_cast<double>(state.irrelevant_count());

    auto total = [&] {
        return static_cast<double>(std::accumulate(est.temp_labels.begin(), est.temp_labels.end(), std::size_t{0}));
    };
    double estimate = total();
    double last = 0.0;
    std::vector<double> y(n);
    std::vector<ScoredProbability> probs(unlabeled.size());
    // With a positive slope, probability order is decision order. Sorting once
    // here leaves only equal-probability runs to fix on each pass.
    std::vector<DocIndex> by_decision(unlabeled.begin(), unlabeled.end());
    std::sort(by_decision.begin(), by_decision.end(), [&](DocIndex a, DocIndex b) {
        return decisions[a] != decisions[b] ? decisions[a] > decisions[b] : a < b;
    });

    while (estimate != last) {
        if (est.iterations == options.max_iterations) {
            est.estimated_relevant = estimate;
            est.converged = false;
            return est;
        }
        ++est.iterations;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = est.temp_labels[i];
        }
        LogisticProblem problem{decisions, y, estimate / irrelevant};
        // Warm start from the previous pass; the optimum does not depend on it.
        auto fit = fit_logistic(problem, 100, est.calibration);
        est.calibration = fit.model;
        for (std::size_t k = 0; k < by_decision.size(); ++k) {
            probs[k] = {by_decision[k], fit.probabilities[by_decision[k]]};
        }
        for (auto run = probs.begin(); run != probs.end();) {
            auto end = std::find_if(run, probs.end(),
                                    [&](const ScoredProbability& s) { return s.probability != run->probability; });
            std::sort(run, end, [](const ScoredProbability& a, const ScoredProbability& b) { return a.doc < b.doc; });
            run = end;
        }
        if (!std::is_sorted(probs.begin(), probs.end(), by_probability)) {
            std::stable_sort(probs.begin(), probs.end(), by_probability);
        }
        est.temp_labels = label_sorted(probs, base);
        last = estimate;
        estimate = total();
    }
    est.estimated_relevant = estimate;
    est.converged = true;
    return est;
}

bool stop_semi(const LabelState& state, const Estimate& estimate, double target_recall)
{
    return static_cast<double>(state.relevant_count()) >= target_recall * estimate.estimated_relevant;
}

bool stop_ros(const LabelState& state, std::size_t window)
{
    const auto& history = state.history();
    if (window == 0 || history.size() < window) {
        return false;
    }
    return std::none_of(history.end() - static_cast<std::ptrdiff_t>(window), history.end(),
                        [](const LabelEvent& e) { return e.relevant; });
}

bool RecallCurve::valid() const
{
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].second > points[i].first) {
            return false;
        }
        if (i > 0 && (points[i].first < points[i - 1].first || points[i].second < points[i - 1].second)) {
            return false;
        }
    }
    return true;
}

RecallCurve labeled_curve(const LabelState& state)
{
    RecallCurve curve;
    curve.points.reserve(state.labeled_count() + 1);
    curve.points.emplace_back(0, 0);
    std::size_t found = 0;
    for (std::size_t k = 0; k < state.labeled().size(); ++k) {
        found += state.is_relevant(state.labeled()[k]) ? 1 : 0;
        curve.points.emplace_back(k + 1, found);
    }
    return curve;
}

double KneePolicy::rho_for(std::size_t found) const
{
    if (rho_mode == Rho::adaptive) {
        return 156.0 - static_cast<double>(std::min<std::size_t>(found, 150));
    }
    return rho;
}

KneeResult stop_knee(const RecallCurve& curve, const KneePolicy& policy)
{
    KneeResult result;
    const auto& pts = curve.points;
    if (pts.size() < 3) {
        result.knee_index = pts.empty() ? 0 : pts.size() - 1;
        return result;
    }
    const auto [x0, y0] = pts.front();
    const auto [x1, y1] = pts.back();
    const double dx = static_cast<double>(x1) - static_cast<double>(x0);
    const double dy = static_cast<double>(y1) - static_cast<double>(y0);
    const double chord = std::hypot(dx, dy);

    double best = 0.0;
    std::size_t knee = pts.size() - 1;
    if (chord > 0.0) {
        for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
            const double px = static_cast<double>(pts[i].first) - static_cast<double>(x0);
            const double py = static_cast<double>(pts[i].second) - static_cast<double>(y0);
            const double distance = std::abs(dx * py - dy * px) / chord;
            if (distance > best) {
                best = distance;
                knee = i;
            }
        }
    }
    result.knee_index = knee;
    if (best <= 1e-12) {
        result.knee_index = pts.size() - 1;
        return result;
    }

    const auto [reviewed_at_knee, found_at_knee] = pts[knee];
    if (reviewed_at_knee == 0) {
        return result;
    }
    const double slope_before = static_cast<double>(found_at_knee) / static_cast<double>(reviewed_at_knee);
    const double reviewed_after = static_cast<double>(x1 - reviewed_at_knee);
    const double slope_after =
        std::max(static_cast<double>(y1 - found_at_knee) / reviewed_after, 1.0 / reviewed_after);
    result.ratio = slope_before / slope_after;
    result.stop = x1 >= policy.min_reviewed && result.ratio > policy.rho_for(y1);
    return result;
}

}  // namespace fast2
