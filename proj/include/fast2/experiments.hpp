#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fast2/corpus.hpp"
#include "fast2/estimator.hpp"
#include "fast2/review.hpp"

namespace fast2 {

/// One cell of the treatment matrix.
/// Grammar: comma-separated `key:value` pairs, any order, all optional:
///   seeding:rank-bm25|auto-bm25|random
///   stop:semi[:T]|ros[:window]|knee[:rho|:adaptive][:min_reviewed]|true[:T]|never
///   correct:none|disagree|kuhrmann|cormack17
///   reviewer:<precision>/<recall>
struct TreatmentSpec {
    Seeding seeding = Seeding::rank_bm25;
    StopRule stop;
    double target_recall = 0.95;
    Correction correction = Correction::none;
    std::optional<ReviewerModel> reviewer;

    static TreatmentSpec parse(std::string_view text);
    /// Canonical text form; parse(id()) round-trips.
    std::string id() const;
    /// Throws UsageError for invalid combinations (cormack17 needs knee stopping).
    void validate() const;
};

inline constexpr std::string_view kTreatmentGrammar =
    "seeding:rank-bm25|auto-bm25|random,stop:semi[:T]|ros[:window]|knee[:rho|:adaptive][:min_reviewed]|true[:T]|never,"
    "correct:none|disagree|kuhrmann|cormack17,reviewer:<precision>/<recall>";

struct RunResult {
    std::string treatment;
    std::string dataset;
    std::uint64_t seed = 0;
    /// Reviewed count at which 95% of the truly relevant documents were found.
    std::optional<std::size_t> x95;
    std::optional<double> wss95;
    /// tp / |R| with tp = |L_R intersect R|.
    double recall = 0.0;
    /// tp / |L_R|; 0 when nothing was labeled relevant.
    double precision = 0.0;
    std::size_t effort = 0;
    std::size_t reviewed = 0;
    std::optional<StopReason> stop_reason;
    /// (|L|, truly relevant among the first |L| reviewed and finally labeled relevant).
    RecallCurve curve;
};

/// Smallest |L| on the curve with found >= 0.95 * total_relevant.
/// Throws UndefinedError when total_relevant is 0.
std::optional<std::size_t> x95(const RecallCurve& curve, std::size_t total_relevant);
/// 0.95 - x95 / |E|.
double wss95(std::size_t x95_value, std::size_t pool_size);

/// Ground-truth recall curve of a finished session.
RecallCurve truth_curve(const Corpus& corpus, const LabelState& state);

struct RunContext {
    std::shared_ptr<const Corpus> corpus;
    std::string dataset;
    /// Needed by the BM25 seedings.
    std::optional<Query> query;
};

/// Drives one simulated session to its stopping rule. Pure in (corpus, spec, seed).
RunResult simulate_run(const RunContext& context, const TreatmentSpec& spec, std::uint64_t seed);

/// Order-independent per-run seed: a stable hash of (master seed, treatment id, repeat).
std::uint64_t run_seed(std::uint64_t master_seed, std::string_view treatment, std::size_t repeat);

/// Worker count: FAST2_THREADS when set to a positive integer, else the hardware concurrency.
std::size_t worker_count();

/// Every (treatment, repeat) pair, fanned out over `threads` workers. Results
/// are ordered by treatment (input order) then repeat, whatever the schedule.
std::vector<RunResult> run_experiments(const RunContext& context, const std::vector<TreatmentSpec>& treatments,
                                       std::size_t repeats, std::uint64_t master_seed, std::size_t threads = 0);

/// Header treatment,dataset,seed,x95,wss95,recall,precision,effort. Absent x95 leaves x95 and wss95 empty.
std::string results_csv(const std::vector<RunResult>& results);
/// Reads results written by results_csv (curves are not part of that file).
std::vector<RunResult> parse_results_csv(std::string_view text);
/// Header reviewed,found.
std::string curve_csv(const RecallCurve& curve);

struct RankingRow {
    std::string dataset;
    std::size_t rank = 0;
    std::string treatment;
    std::optional<double> x95_median;
    std::optional<double> x95_iqr;
    std::optional<double> wss95_median;
    std::optional<double> wss95_iqr;
    std::size_t runs = 0;
    /// Runs that never reached 95% recall; they are left out of the X95 statistics.
    std::size_t x95_absent = 0;
};

/// Scott-Knott ranking of X95 per dataset (lower is better). Treatments whose
/// runs never reach 95% recall share the last rank. Rows are sorted by dataset,
/// rank, X95 median and treatment, so input order does not matter.
std::vector<RankingRow> rank_results(std::vector<RunResult> results, std::uint64_t seed = 0);

/// Header dataset,rank,treatment,x95_median,x95_iqr,wss95_median,wss95_iqr,runs,x95_absent.
std::string ranking_csv(const std::vector<RankingRow>& rows);

}  // namespace fast2
