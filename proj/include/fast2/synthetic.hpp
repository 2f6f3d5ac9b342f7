#pragma once

#include <cstddef>
#include <cstdint>

#include "fast2/corpus.hpp"

namespace fast2 {

/// Topic-mixture generator for test pools with planted ground truth.
/// Relevant documents draw their topical words from topic 0, the others from
/// one of `topics` further topics. Every document also draws background words
/// shared by all topics.
struct SyntheticSpec {
    std::size_t documents = 2000;
    double prevalence = 0.02;
    std::size_t topics = 12;
    std::size_t topic_terms = 40;
    std::size_t background_terms = 400;
    std::size_t title_length = 8;
    std::size_t abstract_length = 70;
    /// Share of words taken from the document's own topic.
    double topic_share = 0.35;
    /// Share of words a non-relevant document borrows from topic 0.
    double crossover = 0.02;
    /// Share of non-relevant documents that borrow heavily from topic 0
    /// (near misses). They use `near_miss_crossover` instead.
    double near_miss_share = 0.05;
    double near_miss_crossover = 0.15;
    std::size_t query_terms = 3;
    std::uint64_t seed = 1;
};

struct SyntheticCorpus {
    /// Raw documents (not featurized). Ids are "doc<N>".
    Corpus corpus;
    /// Topic-0 words suited to BM25 seeding.
    Query query;
};

/// Exactly round(documents * prevalence) documents are relevant; they are
/// scattered uniformly through the pool.
SyntheticCorpus make_synthetic(const SyntheticSpec& spec);

}  // namespace fast2
