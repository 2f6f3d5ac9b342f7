#include "fast2/label_state.hpp"

#include "fast2/errors.hpp"

namespace fast2 {

LabelState::LabelState(std::size_t pool_size)
    : label_(pool_size, -1), fixed_(pool_size, false), ordinal_(pool_size, 0)
{}

void LabelState::apply(DocIndex doc, bool relevant, EventKind kind)
{
    if (doc >= label_.size()) {
        throw LookupError("document index " + std::to_string(doc) + " outside the pool");
    }
    auto& current = label_[doc];
    if (current < 0) {
        labeled_.push_back(doc);
        ordinal_[doc] = labeled_.size();
        kind = kind == EventKind::vote ? EventKind::vote : EventKind::review;
    } else {
        relevant_count_ -= current == 1 ? 1 : 0;
        if (kind != EventKind::vote) {
            kind = EventKind::recheck;
        }
        if (kind == EventKind::recheck && !fixed_[doc]) {
            fixed_[doc] = true;
            ++fixed_count_;
        }
    }
    current = relevant ? 1 : 0;
    relevant_count_ += relevant ? 1 : 0;
    history_.push_back({doc, relevant, ordinal_[doc], kind});
}

std::optional<bool> LabelState::label(DocIndex doc) const
{
    auto l = label_.at(doc);
    if (l < 0) {
        return std::nullopt;
    }
    return l == 1;
}

std::vector<DocIndex> LabelState::labeled_relevant() const
{
    std::vector<DocIndex> out;
    for (auto d : labeled_) {
        if (label_[d] == 1) {
            out.push_back(d);
        }
    }
    return out;
}

std::vector<DocIndex> LabelState::labeled_irrelevant() const
{
    std::vector<DocIndex> out;
    for (auto d : labeled_) {
        if (label_[d] == 0) {
            out.push_back(d);
        }
    }
    return out;
}

std::vector<DocIndex> LabelState::unlabeled() const
{
    std::vector<DocIndex> out;
    out.reserve(unlabeled_count());
    for (std::size_t d = 0; d < label_.size(); ++d) {
        if (label_[d] < 0) {
            out.push_back(static_cast<DocIndex>(d));
        }
    }
    return out;
}

std::vector<DocIndex> LabelState::fixed() const
{
    std::vector<DocIndex> out;
    for (auto d : labeled_) {
        if (fixed_[d]) {
            out.push_back(d);
        }
    }
    return out;
}

}  // namespace fast2
