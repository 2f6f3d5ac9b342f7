#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fast2/corpus.hpp"
#include "fast2/estimator.hpp"
#include "fast2/label_state.hpp"
#include "fast2/learner.hpp"

namespace fast2 {

enum class Seeding { rank_bm25, auto_bm25, random };
enum class Correction { none, disagree, kuhrmann, cormack17 };
enum class Mode { interactive, simulated };
enum class SessionStatus { seeding, learning, stopped };
enum class Rationale { bm25_seed, random_seed, uncertainty, certainty };
enum class StopReason { target_recall, ros, knee, true_recall, exhausted };

std::string to_string(Seeding v);
std::string to_string(Correction v);
std::string to_string(Mode v);
std::string to_string(SessionStatus v);
std::string to_string(Rationale v);
std::string to_string(StopReason v);
Seeding parse_seeding(std::string_view s);
Correction parse_correction(std::string_view s);

struct StopRule {
    enum class Kind {
        /// |L_R| >= T_rec * |R_E| from the SEMI estimate.
        semi,
        /// Ros'17: a run of `ros_window` non-relevant labels.
        ros,
        /// Cormack'16 knee.
        knee,
        /// |L_R intersect R| >= T_rec * |R| using ground truth; simulation only.
        true_recall,
        /// Review until the pool is exhausted.
        never,
    };
    Kind kind = Kind::semi;
    std::size_t ros_window = 50;
    KneePolicy knee;

    /// Grammar: semi[:T] | ros[:window] | knee[:rho|:adaptive] | true[:T] | never.
    /// A threshold given with semi or true sets `target_recall` when non-null.
    static StopRule parse(std::string_view text, double* target_recall = nullptr);
    std::string to_string(double target_recall) const;
};

struct ReviewerModel {
    double precision = 1.0;
    double recall = 1.0;

    /// P(label relevant | truly non-relevant) = |R| / (|E| - |R|) * (Rec / Prec - Prec).
    double false_positive_probability(std::size_t relevant, std::size_t pool) const;
};

struct SessionConfig {
    std::optional<Query> query;
    double target_recall = 0.95;
    StopRule stop;
    Correction correction = Correction::none;
    std::size_t recheck_interval = 50;
    /// Largest Disagree batch; unlimited when empty.
    std::optional<std::size_t> recheck_cap;
    std::uint64_t seed = 0;
    Mode mode = Mode::interactive;
    /// Simulated mode only. Absent means the reviewer always reports ground truth.
    std::optional<ReviewerModel> reviewer;
    Seeding seeding = Seeding::rank_bm25;
    std::size_t uncertainty_until = 10;
    /// Size of the first BM25 batch after which a reseed is advised if nothing relevant turned up.
    std::size_t seed_batch = 10;
    /// Interactive retraining cadence in labels.
    std::size_t retrain_every = 1;
    TrainOptions train;
    SemiOptions semi;

    /// Throws UsageError when an invariant is violated.
    void validate() const;
};

void to_json(nlohmann::json& j, const SessionConfig& c);
void from_json(const nlohmann::json& j, SessionConfig& c);

struct Candidate {
    DocIndex doc;
    Rationale rationale;
};

struct StopSignal {
    StopReason reason;
};

using NextStep = std::variant<Candidate, StopSignal>;

/// Disagree batch from explicit per-document relevance probabilities:
/// unfixed L_R members below `threshold` and unfixed L_I members above it,
/// ordered by |probability - threshold| descending (ties: corpus order).
std::vector<DocIndex> disagree_batch(const LabelState& state, std::span<const double> probability, double threshold,
                                     std::optional<std::size_t> cap = std::nullopt);

/// Cormack'17 batch: L_R members reviewed after the knee and L_I members
/// reviewed before it, in review order. `knee_ordinal` is |L| at the knee.
std::vector<DocIndex> cormack17_batch(const LabelState& state, std::size_t knee_ordinal);

/// One review session over a shared, featurized corpus. Not thread-safe;
/// callers serialize access.
class Session {
  public:
    Session(std::shared_ptr<const Corpus> corpus, SessionConfig config);

    const Corpus& corpus() const { return *corpus_; }
    const SessionConfig& config() const { return config_; }
    const LabelState& state() const { return state_; }
    SessionStatus status() const { return status_; }
    const std::optional<Estimate>& estimate() const { return estimate_; }
    const std::optional<LinearModel>& model() const { return model_; }
    const std::vector<DocIndex>& recheck_queue() const { return recheck_queue_; }
    std::optional<StopReason> stop_reason() const { return stop_reason_; }
    /// |L| at the knee found by the last knee evaluation.
    std::optional<std::size_t> knee_ordinal() const { return knee_ordinal_; }
    /// Set when the first BM25 batch held nothing relevant; cleared by reseed().
    bool reseed_advisory() const { return reseed_advisory_; }
    /// Number of times the model was retrained.
    std::size_t trainings() const { return trainings_; }

    /// Next document to review, or a stop signal. Interactive sessions return
    /// the same answer until a label arrives.
    NextStep next_candidate();

    /// Human label. The document must be the pending candidate, a recheck
    /// queue member, or already labeled (a relabel, which moves it into Fixed).
    void submit_label(DocIndex doc, bool relevant);

    /// Simulated reviewer draw for `doc`; does not change the state.
    bool simulate_label(DocIndex doc);

    /// Records a label without issuance checks (simulation driver).
    void record_label(DocIndex doc, bool relevant, EventKind kind = EventKind::review);

    /// Disagree batch from the current model and SEMI calibration. Empty
    /// without a model or estimate.
    std::vector<DocIndex> disagree_recheck() const;

    /// Two simulated votes, a third on disagreement; every vote is a history event.
    bool kuhrmann_vote(DocIndex doc);

    std::vector<DocIndex> cormack17_recheck(std::size_t knee_ordinal) const;

    /// Replace the seeding query while still seeding.
    void reseed(Query query);

    /// Drives a simulated session to its stopping rule, applying the configured correction.
    void run_simulation();

    nlohmann::json snapshot() const;
    static Session restore(std::shared_ptr<const Corpus> corpus, const nlohmann::json& snapshot);

  private:
    bool learning_ready() const;
    NextStep advance();
    NextStep seed_step();
    std::optional<StopReason> check_stop();
    void stop(StopReason reason);
    void maybe_disagree();
    void rank_query();

    std::shared_ptr<const Corpus> corpus_;
    SessionConfig config_;
    LabelState state_;
    SessionStatus status_ = SessionStatus::seeding;
    Rng rng_;
    Rng reviewer_rng_;
    std::vector<DocIndex> bm25_order_;
    std::optional<DocIndex> auto_seed_;
    std::optional<LinearModel> model_;
    std::optional<Estimate> estimate_;
    std::optional<Candidate> pending_;
    std::vector<DocIndex> recheck_queue_;
    std::optional<StopReason> stop_reason_;
    std::optional<std::size_t> knee_ordinal_;
    std::optional<std::size_t> last_disagree_at_;
    std::size_t labels_since_train_ = 0;
    std::size_t trainings_ = 0;
    bool reseed_advisory_ = false;
};

}  // namespace fast2
