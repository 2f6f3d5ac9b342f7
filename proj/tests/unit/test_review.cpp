#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <variant>
#include <vector>

#include "fast2/errors.hpp"
#include "fast2/review.hpp"
#include "fast2/synthetic.hpp"

using namespace fast2;

namespace {

struct Pool {
    std::shared_ptr<const Corpus> corpus;
    Query query;
};

Pool make_pool(std::size_t documents, double prevalence, std::uint64_t seed = 3)
{
    SyntheticSpec spec;
    spec.documents = documents;
    spec.prevalence = prevalence;
    spec.seed = seed;
    auto syn = make_synthetic(spec);
    return {std::make_shared<const Corpus>(build_features(syn.corpus)), syn.query};
}

bool truth(const Corpus& c, DocIndex d)
{
    return c.document(d).ground_truth.value();
}

Candidate candidate(Session& s)
{
    auto step = s.next_candidate();
    REQUIRE(std::holds_alternative<Candidate>(step));
    return std::get<Candidate>(step);
}

/// Answers interactively with the ground truth.
void answer(Session& s, std::size_t count)
{
    for (std::size_t i = 0; i < count; ++i) {
        auto c = candidate(s);
        s.submit_label(c.doc, truth(s.corpus(), c.doc));
    }
}

}  // namespace

TEST_CASE("reviewer error model")
{
    ReviewerModel r{0.7, 0.7};
    CHECK(r.false_positive_probability(104, 8911) == doctest::Approx(104.0 / 8807.0 * 0.3).epsilon(1e-12));
    CHECK(r.false_positive_probability(104, 8911) == doctest::Approx(0.003543).epsilon(1e-3));
    CHECK(ReviewerModel{1.0, 1.0}.false_positive_probability(104, 8911) == 0.0);
    CHECK(r.false_positive_probability(10, 10) == 0.0);
}

TEST_CASE("simulated reviewer draws")
{
    auto pool = make_pool(1000, 0.1);
    SUBCASE("0.7/0.7 over 100000 draws")
    {
        SessionConfig cfg;
        cfg.query = pool.query;
        cfg.mode = Mode::simulated;
        cfg.reviewer = ReviewerModel{0.7, 0.7};
        Session s(pool.corpus, cfg);
        std::size_t tp = 0, fp = 0, fn = 0;
        for (int round = 0; round < 100; ++round) {
            for (DocIndex d = 0; d < pool.corpus->size(); ++d) {
                const bool label = s.simulate_label(d);
                const bool t = truth(*pool.corpus, d);
                tp += label && t;
                fp += label && !t;
                fn += !label && t;
            }
        }
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        CHECK(std::abs(precision - 0.7) <= 0.02);
        CHECK(std::abs(recall - 0.7) <= 0.02);
    }
    SUBCASE("perfect reviewer reports ground truth")
    {
        SessionConfig cfg;
        cfg.query = pool.query;
        cfg.mode = Mode::simulated;
        cfg.reviewer = ReviewerModel{1.0, 1.0};
        Session s(pool.corpus, cfg);
        for (DocIndex d = 0; d < pool.corpus->size(); ++d) {
            CHECK(s.simulate_label(d) == truth(*pool.corpus, d));
        }
    }
    SUBCASE("interactive sessions cannot simulate")
    {
        SessionConfig cfg;
        cfg.query = pool.query;
        Session s(pool.corpus, cfg);
        CHECK_THROWS_AS(s.simulate_label(0), StateError);
    }
    SUBCASE("missing ground truth")
    {
        auto c = std::make_shared<const Corpus>(
            build_features(Corpus({{"a", "alpha beta", "", std::nullopt}, {"b", "gamma", "", true}})));
        SessionConfig cfg;
        cfg.mode = Mode::simulated;
        cfg.seeding = Seeding::random;
        Session s(c, cfg);
        CHECK_THROWS_AS(s.simulate_label(0), SimulationError);
    }
}

TEST_CASE("majority vote")
{
    auto pool = make_pool(3000, 0.5);
    SUBCASE("0.7/0.7 on relevant documents keeps 0.784 of them")
    {
        SessionConfig cfg;
        cfg.query = pool.query;
        cfg.mode = Mode::simulated;
        cfg.correction = Correction::kuhrmann;
        cfg.reviewer = ReviewerModel{0.7, 0.7};
        Session s(pool.corpus, cfg);
        std::size_t relevant = 0, kept = 0;
        for (DocIndex d = 0; d < pool.corpus->size(); ++d) {
            if (truth(*pool.corpus, d)) {
                ++relevant;
                kept += s.kuhrmann_vote(d) ? 1 : 0;
            }
        }
        CHECK(std::abs(static_cast<double>(kept) / static_cast<double>(relevant) - 0.784) <= 0.03);
        CHECK(s.state().labeled_count() == relevant);
        CHECK(s.state().fixed_count() == 0);
    }
    SUBCASE("error-free reviewer always needs two draws")
    {
        SessionConfig cfg;
        cfg.query = pool.query;
        cfg.mode = Mode::simulated;
        cfg.correction = Correction::kuhrmann;
        Session s(pool.corpus, cfg);
        for (DocIndex d = 0; d < 50; ++d) {
            CHECK(s.kuhrmann_vote(d) == truth(*pool.corpus, d));
        }
        CHECK(s.state().effort() == 100);
        // The final label is the majority's.
        for (DocIndex d = 0; d < 50; ++d) {
            CHECK(s.state().is_relevant(d) == truth(*pool.corpus, d));
        }
    }
}

TEST_CASE("recheck batches")
{
    SUBCASE("disagree: threshold 0.5, relevant label at 0.2 is disputed")
    {
        LabelState s(3);
        s.apply(0, true);
        s.apply(1, false);
        std::vector<double> p{0.2, 0.3, 0.9};
        CHECK(disagree_batch(s, p, 0.5) == std::vector<DocIndex>{0});
    }
    SUBCASE("disagree: six documents by hand")
    {
        LabelState s(8);
        // relevant: 0 (0.9), 1 (0.1), 2 (0.45); irrelevant: 3 (0.2), 4 (0.95), 5 (0.6)
        for (DocIndex d = 0; d < 6; ++d) {
            s.apply(d, d < 3);
        }
        std::vector<double> p{0.9, 0.1, 0.45, 0.2, 0.95, 0.6, 0.99, 0.0};
        // Disputed: 1 (0.4 away), 2 (0.05), 4 (0.45), 5 (0.1); ordered by distance.
        CHECK(disagree_batch(s, p, 0.5) == std::vector<DocIndex>{4, 1, 5, 2});
        CHECK(disagree_batch(s, p, 0.5, 2) == std::vector<DocIndex>{4, 1});
        s.apply(4, false, EventKind::recheck);
        CHECK(disagree_batch(s, p, 0.5) == std::vector<DocIndex>{1, 5, 2});
    }
    SUBCASE("disagree: fixed documents never return")
    {
        LabelState s(4);
        for (DocIndex d = 0; d < 4; ++d) {
            s.apply(d, d % 2 == 0);
            s.apply(d, d % 2 == 0, EventKind::recheck);
        }
        std::vector<double> p{0.0, 1.0, 0.0, 1.0};
        CHECK(disagree_batch(s, p, 0.5).empty());
    }
    SUBCASE("cormack17")
    {
        LabelState s(200);
        for (DocIndex d = 0; d < 160; ++d) {
            s.apply(d, d == 49 || d == 149 || d == 20);
        }
        // Ordinals are d + 1: relevant at 50 and 150, knee at 100.
        auto batch = cormack17_batch(s, 100);
        CHECK(std::count(batch.begin(), batch.end(), 149) == 1);
        CHECK(std::count(batch.begin(), batch.end(), 49) == 0);
        CHECK(std::count(batch.begin(), batch.end(), 10) == 1);
        CHECK(std::count(batch.begin(), batch.end(), 120) == 0);
        LabelState late(10);
        late.apply(0, true);
        late.apply(1, false);
        late.apply(2, true);
        CHECK(cormack17_batch(late, 0) == std::vector<DocIndex>{0, 2});
    }
}

TEST_CASE("session configuration")
{
    auto pool = make_pool(300, 0.1);
    auto make = [&](auto edit) {
        SessionConfig cfg;
        cfg.query = pool.query;
        edit(cfg);
        return cfg;
    };
    CHECK_THROWS_AS(make([](auto& c) { c.target_recall = 1.5; }).validate(), UsageError);
    CHECK_THROWS_AS(make([](auto& c) { c.target_recall = 0.0; }).validate(), UsageError);
    CHECK_THROWS_AS(make([](auto& c) { c.query.reset(); }).validate(), UsageError);
    CHECK_THROWS_AS(make([](auto& c) { c.recheck_interval = 0; }).validate(), UsageError);
    CHECK_THROWS_AS(make([](auto& c) { c.reviewer = ReviewerModel{0.7, 0.7}; }).validate(), UsageError);
    CHECK_THROWS_AS(make([](auto& c) { c.correction = Correction::kuhrmann; }).validate(), UsageError);
    CHECK_THROWS_AS(make([](auto& c) {
                        c.mode = Mode::simulated;
                        c.correction = Correction::cormack17;
                    }).validate(),
                    UsageError);
    CHECK_NOTHROW(make([](auto& c) {
                      c.mode = Mode::simulated;
                      c.correction = Correction::cormack17;
                      c.stop = StopRule::parse("knee");
                  }).validate());
    CHECK_NOTHROW(make([](auto& c) { c.query.reset(), c.seeding = Seeding::random; }).validate());

    double t = 0.95;
    CHECK(StopRule::parse("semi:0.9", &t).kind == StopRule::Kind::semi);
    CHECK(t == 0.9);
    CHECK(StopRule::parse("ros:30").ros_window == 30);
    auto knee = StopRule::parse("knee:adaptive:200");
    CHECK(knee.knee.rho_mode == KneePolicy::Rho::adaptive);
    CHECK(knee.knee.min_reviewed == 200);
    CHECK(StopRule::parse("knee:4").to_string(0.95) == "knee:4:150");
    CHECK_THROWS_AS(StopRule::parse("semi:2"), UsageError);
    CHECK_THROWS_AS(StopRule::parse("sometimes"), UsageError);
    CHECK(parse_seeding("rank_bm25") == Seeding::rank_bm25);
    CHECK_THROWS_AS(parse_correction("vote"), UsageError);
}

TEST_CASE("interactive session flow")
{
    auto pool = make_pool(400, 0.1);
    SessionConfig cfg;
    cfg.query = pool.query;
    Session s(pool.corpus, cfg);

    auto first = candidate(s);
    CHECK(first.rationale == Rationale::bm25_seed);
    CHECK(first.doc == bm25_rank(*pool.corpus, pool.query).front().doc);
    CHECK(s.status() == SessionStatus::seeding);
    CHECK(candidate(s).doc == first.doc);

    SUBCASE("labels must be issued")
    {
        DocIndex other = first.doc == 0 ? 1 : 0;
        CHECK_THROWS_AS(s.submit_label(other, true), StateError);
        CHECK_THROWS_AS(s.submit_label(static_cast<DocIndex>(pool.corpus->size()), true), LookupError);
    }
    SUBCASE("first relevant label starts learning; certainty after ten relevants")
    {
        std::size_t guard = 0;
        while (s.state().relevant_count() == 0 && guard++ < 50) {
            answer(s, 1);
        }
        REQUIRE(s.state().relevant_count() == 1);
        auto c = candidate(s);
        CHECK(s.status() == SessionStatus::learning);
        CHECK(c.rationale == Rationale::uncertainty);
        CHECK_THROWS_AS(s.reseed(Query::parse("anything")), StateError);
        guard = 0;
        while (s.state().relevant_count() < 12 && guard++ < 300) {
            answer(s, 1);
        }
        REQUIRE(s.state().relevant_count() >= 12);
        CHECK(candidate(s).rationale == Rationale::certainty);
        CHECK(s.estimate().has_value());
    }
    SUBCASE("relabel moves a document into Fixed")
    {
        s.submit_label(first.doc, true);
        s.submit_label(first.doc, false);
        CHECK(s.state().is_fixed(first.doc));
        CHECK(s.state().effort() == 2);
        CHECK(s.state().labeled_count() == 1);
    }
}

TEST_CASE("reseed advisory after an empty first batch")
{
    // A query that matches only non-relevant vocabulary.
    auto pool = make_pool(400, 0.05);
    SessionConfig cfg;
    cfg.query = Query::parse("common1 common2");
    Session s(pool.corpus, cfg);
    std::size_t guard = 0;
    while (s.state().labeled_count() < 10 && guard++ < 10) {
        auto c = candidate(s);
        s.submit_label(c.doc, false);
    }
    candidate(s);
    CHECK(s.reseed_advisory());
    s.reseed(pool.query);
    CHECK_FALSE(s.reseed_advisory());
    CHECK(candidate(s).doc == bm25_rank(*pool.corpus, pool.query).front().doc);
}

TEST_CASE("auto-bm25 trains before any relevant label")
{
    auto pool = make_pool(300, 0.1);
    SessionConfig cfg;
    cfg.query = pool.query;
    cfg.seeding = Seeding::auto_bm25;
    Session s(pool.corpus, cfg);
    auto c = candidate(s);
    CHECK(c.rationale == Rationale::bm25_seed);
    s.submit_label(c.doc, false);
    auto next = candidate(s);
    CHECK(s.status() == SessionStatus::learning);
    CHECK(next.rationale == Rationale::uncertainty);
    CHECK(s.model().has_value());
}

TEST_CASE("snapshot and restore continue identically")
{
    auto pool = make_pool(400, 0.1);
    SessionConfig cfg;
    cfg.query = pool.query;
    cfg.correction = Correction::disagree;
    cfg.recheck_interval = 20;
    cfg.stop = StopRule::parse("never");
    Session s(pool.corpus, cfg);
    answer(s, 45);
    candidate(s);
    auto snap = s.snapshot();
    Session r = Session::restore(pool.corpus, nlohmann::json::parse(snap.dump()));
    CHECK(r.snapshot() == snap);
    for (int i = 0; i < 30; ++i) {
        auto a = s.next_candidate();
        auto b = r.next_candidate();
        REQUIRE(a.index() == b.index());
        if (std::holds_alternative<StopSignal>(a)) {
            break;
        }
        const auto doc = std::get<Candidate>(a).doc;
        CHECK(doc == std::get<Candidate>(b).doc);
        s.submit_label(doc, truth(*pool.corpus, doc));
        r.submit_label(doc, truth(*pool.corpus, doc));
    }
    CHECK(s.snapshot() == r.snapshot());
}

TEST_CASE("simulated sessions")
{
    auto pool = make_pool(500, 0.04);
    auto run = [&](auto edit) {
        SessionConfig cfg;
        cfg.query = pool.query;
        cfg.mode = Mode::simulated;
        cfg.seed = 11;
        edit(cfg);
        Session s(pool.corpus, cfg);
        s.run_simulation();
        return s.snapshot();
    };
    SUBCASE("deterministic under a fixed seed")
    {
        auto a = run([](auto&) {});
        CHECK(a == run([](auto&) {}));
        CHECK(a["status"] == "stopped");
    }
    SUBCASE("perfect reviewer matches the error-free pipeline")
    {
        auto a = run([](auto&) {});
        auto b = run([](auto& c) { c.reviewer = ReviewerModel{1.0, 1.0}; });
        CHECK(a["history"] == b["history"]);
        CHECK(a["model"] == b["model"]);
        CHECK(a["estimate"] == b["estimate"]);
    }
    SUBCASE("true-recall stop")
    {
        auto snap = run([](auto& c) {
            c.stop = StopRule::parse("true:1.0", &c.target_recall);
        });
        CHECK(snap["stop_reason"] == "true-recall");
    }
    SUBCASE("never stop exhausts the pool")
    {
        auto snap = run([](auto& c) { c.stop = StopRule::parse("never"); });
        CHECK(snap["history"].size() == pool.corpus->size());
        CHECK(snap["stop_reason"] == "exhausted");
    }
}
