#include "fast2/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fast2/errors.hpp"

namespace fast2 {

namespace {

std::string topic_word(std::size_t topic, std::size_t k)
{
    return "topic" + std::to_string(topic) + "term" + std::to_string(k);
}

std::string background_word(std::size_t k)
{
    return "common" + std::to_string(k);
}

}  // namespace

SyntheticCorpus make_synthetic(const SyntheticSpec& spec)
{
    if (spec.documents == 0 || spec.topics == 0 || spec.topic_terms == 0 || spec.background_terms == 0) {
        throw UsageError("synthetic corpus needs documents, topics and terms");
    }
    if (!(spec.prevalence >= 0.0 && spec.prevalence <= 1.0)) {
        throw UsageError("prevalence must lie in [0,1]");
    }
    std::mt19937_64 rng(spec.seed);
    const auto relevant =
        static_cast<std::size_t>(std::llround(static_cast<double>(spec.documents) * spec.prevalence));

    std::vector<bool> is_relevant(spec.documents, false);
    std::fill(is_relevant.begin(), is_relevant.begin() + static_cast<std::ptrdiff_t>(relevant), true);
    std::shuffle(is_relevant.begin(), is_relevant.end(), rng);

    // Zipf-like weights so a few words per topic dominate, as in real abstracts.
    std::vector<double> zipf(spec.topic_terms);
    for (std::size_t k = 0; k < zipf.size(); ++k) {
        zipf[k] = 1.0 / static_cast<double>(k + 1);
    }
    std::discrete_distribution<std::size_t> topic_pick(zipf.begin(), zipf.end());
    std::vector<double> bg(spec.background_terms);
    for (std::size_t k = 0; k < bg.size(); ++k) {
        bg[k] = 1.0 / std::sqrt(static_cast<double>(k + 1));
    }
    std::discrete_distribution<std::size_t> background_pick(bg.begin(), bg.end());
    std::uniform_int_distribution<std::size_t> other_topic(1, spec.topics);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto words = [&](std::size_t n, std::size_t topic, double crossover) {
        std::string out;
        for (std::size_t i = 0; i < n; ++i) {
            if (!out.empty()) {
                out += ' ';
            }
            const double u = unit(rng);
            if (u < crossover) {
                out += topic_word(0, topic_pick(rng));
            } else if (u < crossover + spec.topic_share) {
                out += topic_word(topic, topic_pick(rng));
            } else {
                out += background_word(background_pick(rng));
            }
        }
        return out;
    };

    std::vector<Document> docs;
    docs.reserve(spec.documents);
    for (std::size_t i = 0; i < spec.documents; ++i) {
        Document d;
        d.id = "doc" + std::to_string(i + 1);
        d.ground_truth = is_relevant[i];
        std::size_t topic = 0;
        double crossover = 0.0;
        if (!is_relevant[i]) {
            topic = other_topic(rng);
            crossover = unit(rng) < spec.near_miss_share ? spec.near_miss_crossover : spec.crossover;
        }
        d.title = words(spec.title_length, topic, crossover);
        d.abstract = words(spec.abstract_length, topic, crossover);
        docs.push_back(std::move(d));
    }

    std::vector<std::string> query;
    for (std::size_t k = 0; k < std::min(spec.query_terms, spec.topic_terms); ++k) {
        query.push_back(topic_word(0, k));
    }
    return {Corpus(std::move(docs)), Query::from_terms(std::move(query))};
}

}  // namespace fast2
