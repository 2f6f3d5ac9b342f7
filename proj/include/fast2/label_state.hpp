#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fast2/corpus.hpp"

namespace fast2 {

enum class EventKind {
    review,   // first look at a document
    recheck,  // relabel of an already labeled document
    vote,     // extra majority-vote draw; not a recheck
};

struct LabelEvent {
    DocIndex doc;
    bool relevant;
    /// 1-based position of `doc` in review order (its |L| at first inclusion).
    std::size_t review_ordinal;
    EventKind kind;
};

/// Review bookkeeping: labeled set L (in review order), L_R, the Fixed set of
/// rechecked documents and the full chronological event history.
class LabelState {
  public:
    LabelState() = default;
    explicit LabelState(std::size_t pool_size);

    std::size_t pool_size() const { return label_.size(); }

    /// Records one label event. A first event adds `doc` to L; any later
    /// non-vote event is a recheck and moves it into Fixed. The current label
    /// is always the most recent event's.
    void apply(DocIndex doc, bool relevant, EventKind kind = EventKind::review);

    bool is_labeled(DocIndex doc) const { return label_.at(doc) >= 0; }
    bool is_relevant(DocIndex doc) const { return label_.at(doc) == 1; }
    bool is_fixed(DocIndex doc) const { return fixed_.at(doc); }
    std::optional<bool> label(DocIndex doc) const;
    std::size_t review_ordinal(DocIndex doc) const { return ordinal_.at(doc); }

    /// L in review order.
    const std::vector<DocIndex>& labeled() const { return labeled_; }
    std::vector<DocIndex> labeled_relevant() const;
    std::vector<DocIndex> labeled_irrelevant() const;
    std::vector<DocIndex> unlabeled() const;
    std::vector<DocIndex> fixed() const;

    std::size_t labeled_count() const { return labeled_.size(); }
    std::size_t relevant_count() const { return relevant_count_; }
    std::size_t irrelevant_count() const { return labeled_.size() - relevant_count_; }
    std::size_t unlabeled_count() const { return label_.size() - labeled_.size(); }
    std::size_t fixed_count() const { return fixed_count_; }

    const std::vector<LabelEvent>& history() const { return history_; }
    /// One unit of effort per event.
    std::size_t effort() const { return history_.size(); }

  private:
    std::vector<signed char> label_;  // -1 unlabeled, 0 irrelevant, 1 relevant
    std::vector<bool> fixed_;
    std::vector<std::size_t> ordinal_;
    std::vector<DocIndex> labeled_;
    std::vector<LabelEvent> history_;
    std::size_t relevant_count_ = 0;
    std::size_t fixed_count_ = 0;
};

}  // namespace fast2
