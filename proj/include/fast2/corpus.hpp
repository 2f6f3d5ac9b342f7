#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fast2 {

/// Position of a document within its corpus. All internal bookkeeping uses
/// indices; the external string id is resolved once at the boundary.
using DocIndex = std::uint32_t;

struct Document {
    std::string id;
    std::string title;
    std::string abstract;
    std::optional<bool> ground_truth;

    std::string text() const { return title + " " + abstract; }
};

/// Compressed sparse rows.
class SparseMatrix {
  public:
    struct Entry {
        std::uint32_t column;
        double value;
    };

    SparseMatrix() = default;
    explicit SparseMatrix(std::size_t columns) : columns_(columns) {}

    void append_row(std::span<const Entry> entries);

    std::size_t rows() const { return row_start_.size() - 1; }
    std::size_t columns() const { return columns_; }
    std::span<const Entry> row(std::size_t r) const
    {
        return {entries_.data() + row_start_[r], entries_.data() + row_start_[r + 1]};
    }
    /// Value at (r, c); zero when absent.
    double at(std::size_t r, std::uint32_t c) const;

  private:
    std::size_t columns_ = 0;
    std::vector<std::size_t> row_start_{0};
    std::vector<Entry> entries_;
};

inline double dot(std::span<const SparseMatrix::Entry> row, std::span<const double> dense)
{
    double sum = 0.0;
    for (const auto& e : row) {
        sum += e.value * dense[e.column];
    }
    return sum;
}

struct Query {
    std::vector<std::string> terms;

    /// Lowercases, splits on whitespace and drops empty pieces; throws
    /// UsageError when nothing remains.
    static Query parse(std::string_view text);
    static Query from_terms(std::vector<std::string> terms);
};

enum class DatasetFormat {
    /// Header id,title,abstract[,label].
    native,
    /// FASTREAD-era header "Document Title,Abstract,...,label"; ids are 1-based row numbers.
    fastread,
};

DatasetFormat parse_dataset_format(std::string_view name);

class Corpus {
  public:
    Corpus() = default;
    explicit Corpus(std::vector<Document> documents);

    std::span<const Document> documents() const { return documents_; }
    const Document& document(DocIndex i) const { return documents_.at(i); }
    std::size_t size() const { return documents_.size(); }
    std::optional<DocIndex> find(std::string_view id) const;
    /// Throws LookupError for unknown ids.
    DocIndex index_of(std::string_view id) const;

    bool featurized() const { return !vocabulary_.empty(); }
    const std::vector<std::string>& vocabulary() const { return vocabulary_; }
    std::optional<std::uint32_t> term_index(std::string_view term) const;
    const SparseMatrix& doc_term_counts() const { return counts_; }
    const SparseMatrix& features() const { return features_; }
    std::span<const double> doc_lengths() const { return doc_lengths_; }
    double avg_doc_length() const { return avg_doc_length_; }

    /// Number of documents with ground_truth == true.
    std::size_t relevant_count() const;
    bool has_ground_truth() const;

  private:
    friend Corpus build_features(const Corpus& corpus, std::size_t max_features);

    std::vector<Document> documents_;
    std::unordered_map<std::string, DocIndex> by_id_;
    std::vector<std::string> vocabulary_;
    std::unordered_map<std::string, std::uint32_t> term_index_;
    SparseMatrix counts_;
    SparseMatrix features_;
    std::vector<double> doc_lengths_;
    double avg_doc_length_ = 0.0;
};

inline constexpr std::size_t kDefaultMaxFeatures = 4000;

Corpus load_corpus(const std::filesystem::path& path, DatasetFormat format = DatasetFormat::native);
Corpus parse_corpus(std::string_view csv_text, DatasetFormat format = DatasetFormat::native);

/// Smooth-idf tf-idf over the `max_features` terms with the largest
/// corpus-summed weight, rows L2-normalized. Raw counts over the same
/// vocabulary are kept for BM25.
Corpus build_features(const Corpus& corpus, std::size_t max_features = kDefaultMaxFeatures);

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
};

struct ScoredDoc {
    DocIndex doc;
    double score;
};

/// ln((N - n + 0.5) / (n + 0.5)); negative once a term is in more than half the pool.
double bm25_idf(std::size_t pool_size, std::size_t doc_freq);

/// Okapi BM25 for every document, sorted by score descending; ties keep corpus order.
std::vector<ScoredDoc> bm25_rank(const Corpus& corpus, const Query& query, Bm25Params params = {});

}  // namespace fast2
