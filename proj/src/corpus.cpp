#include "fast2/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fast2/csv.hpp"
#include "fast2/errors.hpp"
#include "fast2/text.hpp"

namespace fast2 {

void SparseMatrix::append_row(std::span<const Entry> entries)
{
    entries_.insert(entries_.end(), entries.begin(), entries.end());
    row_start_.push_back(entries_.size());
}

double SparseMatrix::at(std::size_t r, std::uint32_t c) const
{
    auto entries = row(r);
    auto it = std::lower_bound(entries.begin(), entries.end(), c,
                               [](const Entry& e, std::uint32_t col) { return e.column < col; });
    return (it != entries.end() && it->column == c) ? it->value : 0.0;
}

Query Query::parse(std::string_view text)
{
    std::vector<std::string> terms;
    std::string current;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',') {
            if (!current.empty()) {
                terms.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) {
        terms.push_back(std::move(current));
    }
    return from_terms(std::move(terms));
}

Query Query::from_terms(std::vector<std::string> terms)
{
    Query q;
    for (auto& t : terms) {
        std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) {
            return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
        });
        if (t.empty()) {
            throw UsageError("query terms must be non-empty strings");
        }
        q.terms.push_back(std::move(t));
    }
    if (q.terms.empty()) {
        throw UsageError("query needs at least one term");
    }
    return q;
}

DatasetFormat parse_dataset_format(std::string_view name)
{
    if (name == "native" || name == "csv") {
        return DatasetFormat::native;
    }
    if (name == "fastread") {
        return DatasetFormat::fastread;
    }
    throw UsageError("unknown dataset format '" + std::string(name) + "' (expected native|fastread)");
}

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents))
{
    by_id_.reserve(documents_.size());
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const auto& d = documents_[i];
        if (!by_id_.emplace(d.id, static_cast<DocIndex>(i)).second) {
            throw IntegrityError("duplicate document id '" + d.id + "'");
        }
        auto text = d.text();
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
            throw IntegrityError("document '" + d.id + "' has empty title and abstract");
        }
    }
}

std::optional<DocIndex> Corpus::find(std::string_view id) const
{
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

DocIndex Corpus::index_of(std::string_view id) const
{
    if (auto i = find(id)) {
        return *i;
    }
    throw LookupError("unknown document id '" + std::string(id) + "'");
}

std::optional<std::uint32_t> Corpus::term_index(std::string_view term) const
{
    auto it = term_index_.find(std::string(term));
    if (it == term_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t Corpus::relevant_count() const
{
    return static_cast<std::size_t>(std::count_if(documents_.begin(), documents_.end(), [](const Document& d) {
        return d.ground_truth.value_or(false);
    }));
}

bool Corpus::has_ground_truth() const
{
    return !documents_.empty() && std::all_of(documents_.begin(), documents_.end(), [](const Document& d) {
        return d.ground_truth.has_value();
    });
}

namespace {

std::string lower(std::string s)
{
    for (auto& c : s) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return s;
}

std::string trim(const std::string& s)
{
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::optional<bool> parse_label(const std::string& raw, std::size_t line)
{
    auto v = lower(trim(raw));
    if (v.empty()) {
        return std::nullopt;
    }
    if (v == "yes") {
        return true;
    }
    if (v == "no") {
        return false;
    }
    throw IntegrityError("line " + std::to_string(line) + ": label must be yes or no, got '" + raw + "'");
}

}  // namespace

Corpus parse_corpus(std::string_view csv_text, DatasetFormat format)
{
    auto rows = parse_csv(csv_text);
    if (rows.empty()) {
        throw EmptyCorpusError("dataset is empty");
    }
    const auto& header = rows.front();
    std::map<std::string, std::size_t> columns;
    for (std::size_t i = 0; i < header.size(); ++i) {
        columns.emplace(lower(trim(header[i])), i);
    }
    auto column = [&](const std::string& name) -> std::size_t {
        auto it = columns.find(name);
        if (it == columns.end()) {
            throw SchemaError("missing required column '" + name + "'");
        }
        return it->second;
    };

    std::optional<std::size_t> id_col;
    std::size_t title_col = 0;
    std::size_t abstract_col = 0;
    if (format == DatasetFormat::native) {
        id_col = column("id");
        title_col = column("title");
        abstract_col = column("abstract");
    } else {
        title_col = column("document title");
        abstract_col = column("abstract");
    }
    std::optional<std::size_t> label_col;
    if (auto it = columns.find("label"); it != columns.end()) {
        label_col = it->second;
    }

    if (rows.size() == 1) {
        throw EmptyCorpusError("dataset has a header but no rows");
    }
    std::vector<Document> docs;
    docs.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto cell = [&](std::size_t c) -> std::string { return c < row.size() ? row[c] : std::string(); };
        Document d;
        d.id = id_col ? trim(cell(*id_col)) : std::to_string(r);
        if (d.id.empty()) {
            throw IntegrityError("row " + std::to_string(r) + ": empty id");
        }
        d.title = cell(title_col);
        d.abstract = cell(abstract_col);
        if (label_col) {
            d.ground_truth = parse_label(cell(*label_col), r + 1);
        }
        docs.push_back(std::move(d));
    }
    return Corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path, DatasetFormat format)
{
    return parse_corpus(read_file(path), format);
}

Corpus build_features(const Corpus& corpus, std::size_t max_features)
{
    if (max_features == 0) {
        throw FeaturizationError("max_features must be positive");
    }
    const std::size_t n_docs = corpus.size();
    // Per-document term counts over the full token stream, keyed by a provisional term id.
    std::unordered_map<std::string, std::uint32_t> provisional;
    std::vector<std::string> provisional_terms;
    std::vector<std::map<std::uint32_t, std::uint32_t>> doc_counts(n_docs);
    std::vector<double> lengths(n_docs, 0.0);
    std::size_t non_empty = 0;

    for (std::size_t i = 0; i < n_docs; ++i) {
        auto tokens = tokenize(corpus.documents_[i].text());
        lengths[i] = static_cast<double>(tokens.size());
        non_empty += tokens.empty() ? 0 : 1;
        for (auto& t : tokens) {
            auto [it, inserted] = provisional.try_emplace(t, static_cast<std::uint32_t>(provisional_terms.size()));
            if (inserted) {
                provisional_terms.push_back(t);
            }
            ++doc_counts[i][it->second];
        }
    }
    if (non_empty == 0) {
        throw FeaturizationError("no document contains any token after tokenization");
    }

    const std::size_t n_terms = provisional_terms.size();
    std::vector<std::size_t> df(n_terms, 0);
    std::vector<double> collection_tf(n_terms, 0.0);
    for (const auto& counts : doc_counts) {
        for (auto [t, c] : counts) {
            ++df[t];
            collection_tf[t] += c;
        }
    }
    std::vector<double> idf(n_terms);
    for (std::size_t t = 0; t < n_terms; ++t) {
        idf[t] = 1.0 + std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df[t])));
    }

    std::vector<std::uint32_t> order(n_terms);
    std::iota(order.begin(), order.end(), 0U);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        double wa = collection_tf[a] * idf[a];
        double wb = collection_tf[b] * idf[b];
        if (wa != wb) {
            return wa > wb;
        }
        return provisional_terms[a] < provisional_terms[b];
    });
    order.resize(std::min(max_features, n_terms));
    // Vocabulary is stored in lexicographic order so column ids do not depend on weights.
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return provisional_terms[a] < provisional_terms[b]; });

    Corpus out = corpus;
    out.vocabulary_.clear();
    out.term_index_.clear();
    std::vector<std::int64_t> remap(n_terms, -1);
    for (std::size_t k = 0; k < order.size(); ++k) {
        remap[order[k]] = static_cast<std::int64_t>(k);
        out.vocabulary_.push_back(provisional_terms[order[k]]);
        out.term_index_.emplace(provisional_terms[order[k]], static_cast<std::uint32_t>(k));
    }

    out.counts_ = SparseMatrix(order.size());
    out.features_ = SparseMatrix(order.size());
    std::vector<SparseMatrix::Entry> count_row;
    std::vector<SparseMatrix::Entry> feature_row;
    for (std::size_t i = 0; i < n_docs; ++i) {
        count_row.clear();
        feature_row.clear();
        for (auto [t, c] : doc_counts[i]) {
            if (remap[t] < 0) {
                continue;
            }
            auto col = static_cast<std::uint32_t>(remap[t]);
            count_row.push_back({col, static_cast<double>(c)});
            feature_row.push_back({col, static_cast<double>(c) * idf[t]});
        }
        auto by_column = [](const SparseMatrix::Entry& a, const SparseMatrix::Entry& b) { return a.column < b.column; };
        std::sort(count_row.begin(), count_row.end(), by_column);
        std::sort(feature_row.begin(), feature_row.end(), by_column);
        double norm = 0.0;
        for (const auto& e : feature_row) {
            norm += e.value * e.value;
        }
        norm = std::sqrt(norm);
        if (norm > 0.0) {
            for (auto& e : feature_row) {
                e.value /= norm;
            }
        }
        out.counts_.append_row(count_row);
        out.features_.append_row(feature_row);
    }
    out.doc_lengths_ = std::move(lengths);
    out.avg_doc_length_ =
        std::accumulate(out.doc_lengths_.begin(), out.doc_lengths_.end(), 0.0) / static_cast<double>(n_docs);
    return out;
}

double bm25_idf(std::size_t pool_size, std::size_t doc_freq)
{
    auto n = static_cast<double>(doc_freq);
    return std::log((static_cast<double>(pool_size) - n + 0.5) / (n + 0.5));
}

std::vector<ScoredDoc> bm25_rank(const Corpus& corpus, const Query& query, Bm25Params params)
{
    if (!corpus.featurized()) {
        throw StateError("bm25_rank needs a featurized corpus");
    }
    const auto& counts = corpus.doc_term_counts();
    const std::size_t n_docs = corpus.size();
    const double avgdl = corpus.avg_doc_length();

    std::vector<ScoredDoc> scored(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) {
        scored[i] = {static_cast<DocIndex>(i), 0.0};
    }
    for (const auto& term : query.terms) {
        auto col = corpus.term_index(term);
        if (!col) {
            continue;
        }
        std::size_t n = 0;
        for (std::size_t i = 0; i < n_docs; ++i) {
            n += counts.at(i, *col) > 0.0 ? 1 : 0;
        }
        const double idf = bm25_idf(n_docs, n);
        for (std::size_t i = 0; i < n_docs; ++i) {
            double f = counts.at(i, *col);
            if (f == 0.0) {
                continue;
            }
            double norm = params.k1 * (1.0 - params.b + params.b * corpus.doc_lengths()[i] / avgdl);
            scored[i].score += idf * f / (f + norm);
        }
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredDoc& a, const ScoredDoc& b) { return a.score > b.score; });
    return scored;
}

}  // namespace fast2
