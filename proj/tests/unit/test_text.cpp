#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fast2/corpus.hpp"
#include "fast2/csv.hpp"
#include "fast2/errors.hpp"
#include "fast2/text.hpp"

using namespace fast2;

namespace {

Corpus corpus_of(const std::vector<std::string>& texts)
{
    std::vector<Document> docs;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        docs.push_back({"d" + std::to_string(i), texts[i], "", std::nullopt});
    }
    return build_features(Corpus(std::move(docs)));
}

}  // namespace

TEST_CASE("csv reader handles quoting, embedded newlines and BOM")
{
    auto rows = parse_csv("\xEF\xBB\xBFid,title\n1,\"a, \"\"b\"\"\nc\"\n\n2,plain\r\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] == "id");
    CHECK(rows[1][1] == "a, \"b\"\nc");
    CHECK(rows[2][1] == "plain");
    CHECK(csv_escape("x,y") == "\"x,y\"");
    CHECK(csv_escape("plain") == "plain");
    CHECK(parse_csv(csv_line({"a\"b", "c\nd", "e"}))[0] == CsvRow{"a\"b", "c\nd", "e"});
}

TEST_CASE("atomic write replaces content and leaves no temp file")
{
    auto dir = std::filesystem::temp_directory_path() / "fast2_csv_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "f.txt", "one");
    write_file_atomic(dir / "f.txt", "two");
    CHECK(read_file(dir / "f.txt") == "two");
    CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator()) == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("tokenizer")
{
    CHECK(tokenize("Defect prediction") == std::vector<std::string>{"defect", "prediction"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("A systematic review of SVM-based methods") ==
          std::vector<std::string>{"systematic", "review", "svm", "based", "methods"});
    CHECK(tokenize("x y z1 2") == std::vector<std::string>{"z1"});
    CHECK(tokenize("caf\xC3\xA9 na\xC3\xAFve") == std::vector<std::string>{"caf\xC3\xA9", "na\xC3\xAFve"});
    CHECK(stopwords().count("the") == 1);
}

TEST_CASE("dataset loading")
{
    const std::string dir = FAST2_TEST_DATA;
    SUBCASE("native file with labels")
    {
        auto c = load_corpus(dir + "/tiny.csv");
        REQUIRE(c.size() == 4);
        CHECK(c.document(0).id == "p1");
        CHECK(c.document(0).ground_truth == true);
        CHECK(c.document(1).ground_truth == false);
        CHECK(c.relevant_count() == 2);
        CHECK(c.index_of("p3") == 2);
        CHECK_THROWS_AS(c.index_of("nope"), LookupError);
    }
    SUBCASE("fastread layout uses row numbers as ids")
    {
        auto c = load_corpus(dir + "/fastread.csv", DatasetFormat::fastread);
        REQUIRE(c.size() == 3);
        CHECK(c.document(0).id == "1");
        CHECK(c.document(2).ground_truth == true);
    }
    SUBCASE("one row without a label column")
    {
        auto c = parse_corpus("id,title,abstract\nx,t,a\n");
        REQUIRE(c.size() == 1);
        CHECK_FALSE(c.document(0).ground_truth.has_value());
        CHECK_FALSE(c.has_ground_truth());
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(parse_corpus("id,abstract\nx,a\n"), SchemaError);
        CHECK_THROWS_WITH_AS(parse_corpus("id,abstract\nx,a\n"), doctest::Contains("title"), SchemaError);
        CHECK_THROWS_AS(parse_corpus("id,title,abstract\nx,t,a\nx,u,b\n"), IntegrityError);
        CHECK_THROWS_AS(parse_corpus(""), EmptyCorpusError);
        CHECK_THROWS_AS(parse_corpus("id,title,abstract,label\nx,t,a,maybe\n"), IntegrityError);
        CHECK_THROWS_AS(load_corpus(dir + "/missing.csv"), Error);
    }
    SUBCASE("labels are case-insensitive")
    {
        auto c = parse_corpus("id,title,abstract,label\na,t,x,YES\nb,t,x,No\n");
        CHECK(c.document(0).ground_truth == true);
        CHECK(c.document(1).ground_truth == false);
    }
}

TEST_CASE("tf-idf features")
{
    SUBCASE("identical documents give identical unit rows")
    {
        auto c = corpus_of({"defect", "defect"});
        const auto& f = c.features();
        REQUIRE(f.rows() == 2);
        CHECK(f.row(0).size() == 1);
        CHECK(f.row(0)[0].value == doctest::Approx(1.0));
        CHECK(f.row(1)[0].value == doctest::Approx(1.0));
    }
    SUBCASE("three-document corpus against the formula by hand")
    {
        // alpha: d0 x2, d1 x1; beta: d0 x1; gamma: d1, d2.
        auto c = corpus_of({"alpha alpha beta", "alpha gamma", "gamma"});
        const double n = 3.0;
        auto idf = [&](double df) { return 1.0 + std::log((1.0 + n) / (1.0 + df)); };
        const auto a = *c.term_index("alpha");
        const auto b = *c.term_index("beta");
        const auto g = *c.term_index("gamma");
        {
            double wa = 2 * idf(2), wb = 1 * idf(1);
            double norm = std::sqrt(wa * wa + wb * wb);
            CHECK(c.features().at(0, a) == doctest::Approx(wa / norm).epsilon(1e-12));
            CHECK(c.features().at(0, b) == doctest::Approx(wb / norm).epsilon(1e-12));
            CHECK(c.features().at(0, g) == 0.0);
        }
        {
            double wa = idf(2), wg = idf(2);
            double norm = std::sqrt(wa * wa + wg * wg);
            CHECK(c.features().at(1, a) == doctest::Approx(wa / norm).epsilon(1e-12));
            CHECK(c.features().at(1, g) == doctest::Approx(wg / norm).epsilon(1e-12));
        }
        CHECK(c.features().at(2, g) == doctest::Approx(1.0));
        CHECK(c.doc_term_counts().at(0, a) == 2.0);
        CHECK(c.doc_lengths()[0] == 3.0);
        CHECK(c.avg_doc_length() == doctest::Approx(2.0));
    }
    SUBCASE("rarer terms get a larger idf")
    {
        auto c = corpus_of({"common rare", "common", "common"});
        // In document 0 both terms occur once, so the larger weight is the larger idf.
        CHECK(c.features().at(0, *c.term_index("rare")) > c.features().at(0, *c.term_index("common")));
    }
    SUBCASE("vocabulary keeps the heaviest terms, ties broken lexicographically")
    {
        auto c = build_features(Corpus({{"a", "zeta zeta zeta beta", "", std::nullopt},
                                        {"b", "alpha omega", "", std::nullopt}}),
                                2);
        CHECK(c.vocabulary() == std::vector<std::string>{"alpha", "zeta"});
    }
    SUBCASE("empty pool text")
    {
        CHECK_THROWS_AS(build_features(Corpus({{"a", "the of", "", std::nullopt}})), FeaturizationError);
    }
}

TEST_CASE("bm25")
{
    SUBCASE("idf edge cases")
    {
        CHECK(bm25_idf(2, 1) == 0.0);
        CHECK(bm25_idf(10, 0) == doctest::Approx(std::log(10.5 / 0.5)));
        CHECK(bm25_idf(10, 8) < 0.0);
    }
    SUBCASE("absent query term scores zero and keeps corpus order")
    {
        auto c = corpus_of({"alpha", "beta", "gamma"});
        auto r = bm25_rank(c, Query::parse("missing"));
        REQUIRE(r.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(r[i].doc == i);
            CHECK(r[i].score == 0.0);
        }
    }
    SUBCASE("term in half the pool has zero idf")
    {
        auto c = corpus_of({"defect defect", "other words"});
        auto r = bm25_rank(c, Query::parse("defect"));
        CHECK(r[0].score == 0.0);
        CHECK(r[1].score == 0.0);
    }
    SUBCASE("hand computation")
    {
        auto c = corpus_of({"defect prediction model", "defect", "testing tools", "random words sample", "misc"});
        auto r = bm25_rank(c, Query::parse("defect"));
        const double idf = std::log((5 - 2 + 0.5) / (2 + 0.5));
        const double avg = (3 + 1 + 2 + 3 + 1) / 5.0;
        auto term = [&](double f, double len) { return idf * f / (f + 1.5 * (1 - 0.75 + 0.75 * len / avg)); };
        CHECK(r[0].doc == 1);
        CHECK(r[0].score == doctest::Approx(term(1, 1)).epsilon(1e-12));
        CHECK(r[1].doc == 0);
        CHECK(r[1].score == doctest::Approx(term(1, 3)).epsilon(1e-12));
    }
    SUBCASE("query parsing")
    {
        CHECK(Query::parse("  Defect   PREDICTION ").terms == std::vector<std::string>{"defect", "prediction"});
        CHECK_THROWS_AS(Query::parse("   "), UsageError);
    }
}
