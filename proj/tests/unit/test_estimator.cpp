#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "fast2/errors.hpp"
#include "fast2/estimator.hpp"
#include "fast2/logistic.hpp"
#include "fast2/review.hpp"
#include "fast2/stats.hpp"
#include "fast2/synthetic.hpp"

using namespace fast2;

namespace {

std::vector<ScoredProbability> scored(std::vector<double> p)
{
    std::vector<ScoredProbability> out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        out.push_back({static_cast<DocIndex>(i), p[i]});
    }
    return out;
}

RecallCurve curve_from(const std::vector<std::size_t>& found)
{
    RecallCurve c;
    for (std::size_t k = 0; k < found.size(); ++k) {
        c.points.emplace_back(k, found[k]);
    }
    return c;
}

}  // namespace

TEST_CASE("logistic gradient against central differences")
{
    Rng rng(17);
    std::normal_distribution<double> normal(0.0, 1.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + trial % 40;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = normal(rng);
            y[i] = unit(rng) < 0.3 ? 1.0 : 0.0;
        }
        LogisticProblem p{x, y, 0.05 + 5.0 * unit(rng)};
        LogisticModel at{normal(rng), normal(rng)};
        auto g = logistic_gradient(p, at);
        const double h = 1e-5;
        const double fd0 = (logistic_objective(p, {at.slope + h, at.intercept}) -
                            logistic_objective(p, {at.slope - h, at.intercept})) /
                           (2 * h);
        const double fd1 = (logistic_objective(p, {at.slope, at.intercept + h}) -
                            logistic_objective(p, {at.slope, at.intercept - h})) /
                           (2 * h);
        CHECK(std::abs(g[0] - fd0) <= 1e-5 * std::max(1.0, std::abs(fd0)));
        CHECK(std::abs(g[1] - fd1) <= 1e-5 * std::max(1.0, std::abs(fd1)));
    }
}

TEST_CASE("logistic fit reaches a stationary point")
{
    std::vector<double> x{-2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2};
    std::vector<double> y{0, 0, 0, 1, 0, 1, 1, 0, 1};
    LogisticProblem p{x, y, 2.0};
    auto fit = fit_logistic(p);
    CHECK(fit.converged);
    auto g = logistic_gradient(p, fit.model);
    CHECK(std::hypot(g[0], g[1]) < 1e-8);
    CHECK(fit.model.slope > 0.0);
    // A warm start lands on the same optimum.
    auto warm = fit_logistic(p, 100, {3.0, -1.0});
    CHECK(warm.model.slope == doctest::Approx(fit.model.slope).epsilon(1e-9));
    CHECK(warm.model.intercept == doctest::Approx(fit.model.intercept).epsilon(1e-9));
    CHECK_THROWS_AS(logistic_objective({x, y, 0.0}, {}), UndefinedError);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) == 0.0);
}

TEST_CASE("temporary labels")
{
    SUBCASE("0.6 0.5 0.4 0.3: one new label on the first document")
    {
        auto y = temporary_label(scored({0.6, 0.5, 0.4, 0.3}), std::vector<unsigned char>(4, 0));
        CHECK(y == std::vector<unsigned char>{1, 0, 0, 0});
    }
    SUBCASE("input order does not matter")
    {
        auto probs = scored({0.3, 0.5, 0.6, 0.4});
        auto y = temporary_label(probs, std::vector<unsigned char>(4, 0));
        CHECK(y == std::vector<unsigned char>{0, 0, 1, 0});
    }
    SUBCASE("all zero")
    {
        auto y = temporary_label(scored({0, 0, 0}), std::vector<unsigned char>(3, 0));
        CHECK(y == std::vector<unsigned char>(3, 0));
    }
    SUBCASE("all one")
    {
        auto y = temporary_label(scored({1, 1, 1, 1, 1}), std::vector<unsigned char>(5, 0));
        CHECK(y == std::vector<unsigned char>(5, 1));
    }
    SUBCASE("labels outside the unlabeled list are untouched")
    {
        std::vector<ScoredProbability> probs{{1, 0.9}, {3, 0.2}};
        auto y = temporary_label(probs, {1, 0, 0, 0, 1});
        CHECK(y == std::vector<unsigned char>{1, 1, 0, 0, 1});
    }
    SUBCASE("ties resolve in corpus order")
    {
        std::vector<ScoredProbability> probs{{2, 0.5}, {0, 0.5}, {1, 0.5}};
        auto y = temporary_label(probs, std::vector<unsigned char>(3, 0));
        CHECK(y == std::vector<unsigned char>{1, 0, 0});
    }
    SUBCASE("groups restart after each hit")
    {
        // Running sums 0.7, 1.4 (hit on {a,b}), 2.1 (hit on {c}), 2.8, 3.1 (hit on {d,e}).
        auto y = temporary_label(scored({0.7, 0.7, 0.7, 0.7, 0.3}), std::vector<unsigned char>(5, 0));
        CHECK(y == std::vector<unsigned char>{1, 0, 1, 1, 0});
    }
}

TEST_CASE("SEMI estimate")
{
    SUBCASE("fully labeled pool is a fixpoint")
    {
        LabelState s(6);
        for (DocIndex d = 0; d < 6; ++d) {
            s.apply(d, d < 2);
        }
        std::vector<double> dec{1.2, 0.4, -0.3, -1.0, 0.1, -2.0};
        auto e = semi_estimate(dec, s);
        CHECK(e.estimated_relevant == 2.0);
        CHECK(e.converged);
        CHECK(e.temp_labels == std::vector<unsigned char>{1, 1, 0, 0, 0, 0});
    }
    SUBCASE("needs a non-relevant label")
    {
        LabelState s(3);
        s.apply(0, true);
        std::vector<double> dec{1, 0, -1};
        CHECK_THROWS_AS(semi_estimate(dec, s), UndefinedError);
    }
    SUBCASE("labeled relevant documents stay relevant")
    {
        LabelState s(40);
        s.apply(0, true);
        s.apply(1, false);
        s.apply(2, true);
        std::vector<double> dec(40);
        for (std::size_t i = 0; i < 40; ++i) {
            dec[i] = 1.0 - 0.05 * static_cast<double>(i);
        }
        auto e = semi_estimate(dec, s);
        CHECK(e.temp_labels[0] == 1);
        CHECK(e.temp_labels[1] == 0);
        CHECK(e.temp_labels[2] == 1);
        CHECK(e.estimated_relevant >= 2.0);
        CHECK(e.estimated_relevant <= 40.0);
    }
    SUBCASE("200-document pool, 5% prevalence, 50 reviewed: median within 30% of 10")
    {
        std::vector<double> estimates;
        for (std::uint64_t seed = 1; seed <= 30; ++seed) {
            SyntheticSpec spec;
            spec.documents = 200;
            spec.prevalence = 0.05;
            spec.seed = seed;
            auto syn = make_synthetic(spec);
            auto corpus = std::make_shared<const Corpus>(build_features(syn.corpus));
            SessionConfig config;
            config.query = syn.query;
            config.mode = Mode::simulated;
            config.stop = StopRule::parse("never");
            config.seed = seed;
            Session session(corpus, config);
            while (session.state().labeled_count() < 50) {
                const auto doc = std::get<Candidate>(session.next_candidate()).doc;
                session.record_label(doc, session.simulate_label(doc));
            }
            session.next_candidate();
            REQUIRE(session.estimate().has_value());
            estimates.push_back(session.estimate()->estimated_relevant);
        }
        const double m = median(estimates);
        CHECK(m >= 7.0);
        CHECK(m <= 13.0);
    }
}

TEST_CASE("stopping rules")
{
    SUBCASE("semi")
    {
        LabelState s(200);
        for (DocIndex d = 0; d < 59; ++d) {
            s.apply(d, true);
        }
        Estimate e;
        e.estimated_relevant = 62;
        CHECK(stop_semi(s, e, 0.95));
        e.estimated_relevant = 0;
        CHECK(stop_semi(s, e, 0.95));
        LabelState t(200);
        for (DocIndex d = 0; d < 50; ++d) {
            t.apply(d, true);
        }
        e.estimated_relevant = 100;
        CHECK_FALSE(stop_semi(t, e, 0.95));
    }
    SUBCASE("ros")
    {
        LabelState s(200);
        s.apply(0, true);
        for (DocIndex d = 1; d <= 50; ++d) {
            s.apply(d, false);
        }
        CHECK(stop_ros(s, 50));
        LabelState t(200);
        for (DocIndex d = 0; d < 49; ++d) {
            t.apply(d, false);
        }
        t.apply(49, true);
        CHECK_FALSE(stop_ros(t, 50));
        LabelState u(200);
        for (DocIndex d = 0; d < 30; ++d) {
            u.apply(d, false);
        }
        CHECK_FALSE(stop_ros(u, 50));
    }
    SUBCASE("knee on a steep then flat curve")
    {
        std::vector<std::size_t> found;
        for (std::size_t k = 0; k <= 700; ++k) {
            found.push_back(k <= 100 ? (k * 48) / 100 : 48);
        }
        auto r = stop_knee(curve_from(found));
        CHECK(r.stop);
        CHECK(r.knee_index == 100);
        CHECK(r.ratio == doctest::Approx((48.0 / 100.0) / (1.0 / 600.0)));
    }
    SUBCASE("knee on a straight line does not stop")
    {
        std::vector<std::size_t> found;
        for (std::size_t k = 0; k <= 400; ++k) {
            found.push_back(k / 4);
        }
        CHECK_FALSE(stop_knee(curve_from(found)).stop);
    }
    SUBCASE("flat curve is degenerate")
    {
        auto r = stop_knee(curve_from(std::vector<std::size_t>(300, 0)));
        CHECK_FALSE(r.stop);
        CHECK(r.knee_index == 299);
    }
    SUBCASE("minimum reviewed count and adaptive rho")
    {
        std::vector<std::size_t> found;
        for (std::size_t k = 0; k <= 120; ++k) {
            found.push_back(k <= 40 ? k / 2 : 20);
        }
        CHECK_FALSE(stop_knee(curve_from(found)).stop);
        KneePolicy early;
        early.min_reviewed = 0;
        CHECK(stop_knee(curve_from(found), early).stop);
        KneePolicy adaptive;
        adaptive.rho_mode = KneePolicy::Rho::adaptive;
        CHECK(adaptive.rho_for(0) == 156.0);
        CHECK(adaptive.rho_for(400) == 6.0);
    }
    SUBCASE("labeled curve follows review order")
    {
        LabelState s(10);
        s.apply(3, true);
        s.apply(1, false);
        s.apply(7, true);
        s.apply(3, false, EventKind::recheck);
        auto c = labeled_curve(s);
        REQUIRE(c.points.size() == 4);
        CHECK(c.points[3] == std::pair<std::size_t, std::size_t>{3, 1});
        CHECK(c.valid());
    }
}
