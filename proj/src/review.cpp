#include "fast2/review.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "fast2/errors.hpp"

namespace fast2 {

namespace {

std::string format_number(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view s, std::string_view what)
{
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw UsageError("bad number '" + std::string(s) + "' in " + std::string(what));
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    while (true) {
        auto pos = s.find(sep);
        parts.push_back(s.substr(0, pos));
        if (pos == std::string_view::npos) {
            break;
        }
        s.remove_prefix(pos + 1);
    }
    return parts;
}

std::string normalize(std::string_view s)
{
    std::string out(s);
    std::replace(out.begin(), out.end(), '_', '-');
    return out;
}

std::string rng_state(const Rng& rng)
{
    std::ostringstream out;
    out << rng;
    return out.str();
}

void set_rng_state(Rng& rng, const std::string& text)
{
    std::istringstream in(text);
    in >> rng;
    if (!in) {
        throw Error("corrupt rng state in snapshot");
    }
}

Rng make_rng(std::uint64_t seed, std::uint32_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffU), static_cast<std::uint32_t>(seed >> 32U), stream};
    return Rng(seq);
}

EventKind parse_kind(const std::string& s)
{
    if (s == "review") {
        return EventKind::review;
    }
    if (s == "recheck") {
        return EventKind::recheck;
    }
    if (s == "vote") {
        return EventKind::vote;
    }
    throw Error("unknown event kind '" + s + "' in snapshot");
}

std::string kind_name(EventKind k)
{
    switch (k) {
    case EventKind::review:
        return "review";
    case EventKind::recheck:
        return "recheck";
    case EventKind::vote:
        return "vote";
    }
    return "review";
}

}  // namespace

std::string to_string(Seeding v)
{
    switch (v) {
    case Seeding::rank_bm25:
        return "rank-bm25";
    case Seeding::auto_bm25:
        return "auto-bm25";
    case Seeding::random:
        return "random";
    }
    return "?";
}

std::string to_string(Correction v)
{
    switch (v) {
    case Correction::none:
        return "none";
    case Correction::disagree:
        return "disagree";
    case Correction::kuhrmann:
        return "kuhrmann";
    case Correction::cormack17:
        return "cormack17";
    }
    return "?";
}

std::string to_string(Mode v)
{
    return v == Mode::interactive ? "interactive" : "simulated";
}

std::string to_string(SessionStatus v)
{
    switch (v) {
    case SessionStatus::seeding:
        return "seeding";
    case SessionStatus::learning:
        return "learning";
    case SessionStatus::stopped:
        return "stopped";
    }
    return "?";
}

std::string to_string(Rationale v)
{
    switch (v) {
    case Rationale::bm25_seed:
        return "bm25-seed";
    case Rationale::random_seed:
        return "random-seed";
    case Rationale::uncertainty:
        return "uncertainty";
    case Rationale::certainty:
        return "certainty";
    }
    return "?";
}

std::string to_string(StopReason v)
{
    switch (v) {
    case StopReason::target_recall:
        return "target-recall";
    case StopReason::ros:
        return "ros";
    case StopReason::knee:
        return "knee";
    case StopReason::true_recall:
        return "true-recall";
    case StopReason::exhausted:
        return "exhausted";
    }
    return "?";
}

Seeding parse_seeding(std::string_view s)
{
    auto n = normalize(s);
    if (n == "rank-bm25") {
        return Seeding::rank_bm25;
    }
    if (n == "auto-bm25") {
        return Seeding::auto_bm25;
    }
    if (n == "random" || n == "fastread") {
        return Seeding::random;
    }
    throw UsageError("unknown seeding '" + std::string(s) + "' (expected rank-bm25|auto-bm25|random)");
}

Correction parse_correction(std::string_view s)
{
    auto n = normalize(s);
    if (n == "none") {
        return Correction::none;
    }
    if (n == "disagree") {
        return Correction::disagree;
    }
    if (n == "kuhrmann" || n == "kuhrmann17") {
        return Correction::kuhrmann;
    }
    if (n == "cormack17") {
        return Correction::cormack17;
    }
    throw UsageError("unknown correction '" + std::string(s) + "' (expected none|disagree|kuhrmann|cormack17)");
}

StopRule StopRule::parse(std::string_view text, double* target_recall)
{
    auto parts = split(text, ':');
    StopRule rule;
    const auto& kind = parts[0];
    if (kind == "semi" || kind == "true") {
        rule.kind = kind == "semi" ? Kind::semi : Kind::true_recall;
        if (parts.size() > 2) {
            throw UsageError("stop rule '" + std::string(text) + "': expected " + std::string(kind) + "[:T]");
        }
        if (parts.size() == 2) {
            double t = parse_number(parts[1], "stop rule");
            if (!(t > 0.0 && t <= 1.0)) {
                throw UsageError("target recall must lie in (0,1]");
            }
            if (target_recall != nullptr) {
                *target_recall = t;
            }
        }
    } else if (kind == "ros") {
        rule.kind = Kind::ros;
        if (parts.size() > 2) {
            throw UsageError("stop rule '" + std::string(text) + "': expected ros[:window]");
        }
        if (parts.size() == 2) {
            double w = parse_number(parts[1], "stop rule");
            if (w < 1.0 || w != std::floor(w)) {
                throw UsageError("ros window must be a positive integer");
            }
            rule.ros_window = static_cast<std::size_t>(w);
        }
    } else if (kind == "knee") {
        rule.kind = Kind::knee;
        if (parts.size() > 3) {
            throw UsageError("stop rule '" + std::string(text) + "': expected knee[:rho|:adaptive][:min_reviewed]");
        }
        if (parts.size() >= 2) {
            if (parts[1] == "adaptive") {
                rule.knee.rho_mode = KneePolicy::Rho::adaptive;
            } else {
                rule.knee.rho = parse_number(parts[1], "stop rule");
                if (!(rule.knee.rho > 0.0)) {
                    throw UsageError("knee rho must be positive");
                }
            }
        }
        if (parts.size() == 3) {
            double m = parse_number(parts[2], "stop rule");
            if (m < 0.0 || m != std::floor(m)) {
                throw UsageError("knee min_reviewed must be a non-negative integer");
            }
            rule.knee.min_reviewed = static_cast<std::size_t>(m);
        }
    } else if (kind == "never" && parts.size() == 1) {
        rule.kind = Kind::never;
    } else {
        throw UsageError("unknown stop rule '" + std::string(text) +
                         "' (expected semi[:T] | ros[:window] | knee[:rho|:adaptive][:min_reviewed] | true[:T] | never)");
    }
    return rule;
}

std::string StopRule::to_string(double target_recall) const
{
    switch (kind) {
    case Kind::semi:
        return "semi:" + format_number(target_recall);
    case Kind::true_recall:
        return "true:" + format_number(target_recall);
    case Kind::ros:
        return "ros:" + std::to_string(ros_window);
    case Kind::knee:
        return "knee:" + (knee.rho_mode == KneePolicy::Rho::adaptive ? std::string("adaptive") : format_number(knee.rho)) +
               ":" + std::to_string(knee.min_reviewed);
    case Kind::never:
        return "never";
    }
    return "?";
}

double ReviewerModel::false_positive_probability(std::size_t relevant, std::size_t pool) const
{
    if (pool <= relevant) {
        return 0.0;
    }
    return static_cast<double>(relevant) / static_cast<double>(pool - relevant) * (recall / precision - precision);
}

void SessionConfig::validate() const
{
    if (!(target_recall > 0.0 && target_recall <= 1.0)) {
        throw UsageError("target_recall must lie in (0,1]");
    }
    if (recheck_interval < 1) {
        throw UsageError("recheck_interval must be at least 1");
    }
    if (retrain_every < 1) {
        throw UsageError("retrain_every must be at least 1");
    }
    if (mode == Mode::interactive && reviewer) {
        throw UsageError("interactive sessions take labels from a human, not a reviewer model");
    }
    if (reviewer) {
        auto ok = [](double v) { return v > 0.0 && v <= 1.0; };
        if (!ok(reviewer->precision) || !ok(reviewer->recall)) {
            throw UsageError("reviewer precision and recall must lie in (0,1]");
        }
    }
    if (seeding != Seeding::random && !query) {
        throw UsageError("BM25 seeding needs query terms");
    }
    if (correction == Correction::cormack17 && stop.kind != StopRule::Kind::knee) {
        throw UsageError("cormack17 correction requires the knee stopping rule");
    }
    if (mode == Mode::interactive && (correction == Correction::kuhrmann || correction == Correction::cormack17)) {
        throw UsageError("correction '" + to_string(correction) + "' exists only in simulation");
    }
    if (mode == Mode::interactive && stop.kind == StopRule::Kind::true_recall) {
        throw UsageError("the true-recall stop needs ground truth and exists only in simulation");
    }
}

void to_json(nlohmann::json& j, const SessionConfig& c)
{
    j = nlohmann::json::object();
    j["query"] = c.query ? nlohmann::json(c.query->terms) : nlohmann::json(nullptr);
    j["target_recall"] = c.target_recall;
    j["stop"] = c.stop.to_string(c.target_recall);
    j["correction"] = to_string(c.correction);
    j["recheck_interval"] = c.recheck_interval;
    j["recheck_cap"] = c.recheck_cap ? nlohmann::json(*c.recheck_cap) : nlohmann::json(nullptr);
    j["seed"] = c.seed;
    j["mode"] = to_string(c.mode);
    j["reviewer"] = c.reviewer ? nlohmann::json{{"precision", c.reviewer->precision}, {"recall", c.reviewer->recall}}
                               : nlohmann::json(nullptr);
    j["seeding"] = to_string(c.seeding);
    j["uncertainty_until"] = c.uncertainty_until;
    j["seed_batch"] = c.seed_batch;
    j["retrain_every"] = c.retrain_every;
    j["train"] = {{"c", c.train.c},
                  {"undersample_at", c.train.undersample_at},
                  {"tolerance", c.train.solver.tolerance},
                  {"max_epochs", c.train.solver.max_epochs}};
    j["semi"] = {{"max_iterations", c.semi.max_iterations}};
}

void from_json(const nlohmann::json& j, SessionConfig& c)
{
    c = SessionConfig{};
    if (!j.at("query").is_null()) {
        c.query = Query::from_terms(j.at("query").get<std::vector<std::string>>());
    }
    c.target_recall = j.at("target_recall").get<double>();
    double ignored = c.target_recall;
    c.stop = StopRule::parse(j.at("stop").get<std::string>(), &ignored);
    c.correction = parse_correction(j.at("correction").get<std::string>());
    c.recheck_interval = j.at("recheck_interval").get<std::size_t>();
    if (!j.at("recheck_cap").is_null()) {
        c.recheck_cap = j.at("recheck_cap").get<std::size_t>();
    }
    c.seed = j.at("seed").get<std::uint64_t>();
    c.mode = j.at("mode").get<std::string>() == "simulated" ? Mode::simulated : Mode::interactive;
    if (!j.at("reviewer").is_null()) {
        c.reviewer = ReviewerModel{j["reviewer"].at("precision").get<double>(), j["reviewer"].at("recall").get<double>()};
    }
    c.seeding = parse_seeding(j.at("seeding").get<std::string>());
    c.uncertainty_until = j.at("uncertainty_until").get<std::size_t>();
    c.seed_batch = j.at("seed_batch").get<std::size_t>();
    c.retrain_every = j.at("retrain_every").get<std::size_t>();
    const auto& t = j.at("train");
    c.train.c = t.at("c").get<double>();
    c.train.undersample_at = t.at("undersample_at").get<std::size_t>();
    c.train.solver.tolerance = t.at("tolerance").get<double>();
    c.train.solver.max_epochs = t.at("max_epochs").get<std::size_t>();
    c.semi.max_iterations = j.at("semi").at("max_iterations").get<std::size_t>();
}

std::vector<DocIndex> disagree_batch(const LabelState& state, std::span<const double> probability, double threshold,
                                     std::optional<std::size_t> cap)
{
    std::vector<std::pair<double, DocIndex>> flagged;
    for (auto d : state.labeled()) {
        if (state.is_fixed(d)) {
            continue;
        }
        const double p = probability[d];
        const bool disputed = state.is_relevant(d) ? p < threshold : p > threshold;
        if (disputed) {
            flagged.emplace_back(-std::abs(p - threshold), d);
        }
    }
    std::sort(flagged.begin(), flagged.end());
    std::vector<DocIndex> batch;
    for (const auto& [key, d] : flagged) {
        if (cap && batch.size() == *cap) {
            break;
        }
        batch.push_back(d);
    }
    return batch;
}

std::vector<DocIndex> cormack17_batch(const LabelState& state, std::size_t knee_ordinal)
{
    std::vector<DocIndex> batch;
    for (auto d : state.labeled()) {
        const auto ordinal = state.review_ordinal(d);
        if (state.is_relevant(d) ? ordinal > knee_ordinal : ordinal < knee_ordinal) {
            batch.push_back(d);
        }
    }
    return batch;
}

Session::Session(std::shared_ptr<const Corpus> corpus, SessionConfig config)
    : corpus_(std::move(corpus)),
      config_(std::move(config)),
      state_(corpus_->size()),
      rng_(make_rng(config_.seed, 1)),
      reviewer_rng_(make_rng(config_.seed, 2))
{
    config_.validate();
    if (!corpus_->featurized()) {
        throw StateError("sessions need a featurized corpus");
    }
    if (corpus_->size() == 0) {
        throw EmptyCorpusError("corpus has no documents");
    }
    rank_query();
}

void Session::rank_query()
{
    bm25_order_.clear();
    auto_seed_.reset();
    if (!config_.query) {
        return;
    }
    for (const auto& s : bm25_rank(*corpus_, *config_.query)) {
        bm25_order_.push_back(s.doc);
    }
    if (config_.seeding == Seeding::auto_bm25 && !bm25_order_.empty()) {
        auto_seed_ = bm25_order_.front();
    }
}

void Session::reseed(Query query)
{
    if (status_ != SessionStatus::seeding) {
        throw StateError("reseeding is only possible before the first relevant document is found");
    }
    config_.query = std::move(query);
    rank_query();
    reseed_advisory_ = false;
    pending_.reset();
}

bool Session::learning_ready() const
{
    if (state_.relevant_count() > 0) {
        return true;
    }
    return config_.seeding == Seeding::auto_bm25 && auto_seed_ && state_.labeled_count() > 0;
}

NextStep Session::next_candidate()
{
    if (status_ == SessionStatus::stopped) {
        return StopSignal{*stop_reason_};
    }
    if (pending_) {
        return *pending_;
    }
    auto step = advance();
    if (auto* c = std::get_if<Candidate>(&step)) {
        pending_ = *c;
    }
    return step;
}

void Session::stop(StopReason reason)
{
    status_ = SessionStatus::stopped;
    stop_reason_ = reason;
    pending_.reset();
}

std::optional<StopReason> Session::check_stop()
{
    switch (config_.stop.kind) {
    case StopRule::Kind::semi:
        if (estimate_ && stop_semi(state_, *estimate_, config_.target_recall)) {
            return StopReason::target_recall;
        }
        break;
    case StopRule::Kind::ros:
        if (stop_ros(state_, config_.stop.ros_window)) {
            return StopReason::ros;
        }
        break;
    case StopRule::Kind::knee: {
        auto curve = labeled_curve(state_);
        auto knee = stop_knee(curve, config_.stop.knee);
        knee_ordinal_ = curve.points[knee.knee_index].first;
        if (knee.stop) {
            return StopReason::knee;
        }
        break;
    }
    case StopRule::Kind::true_recall: {
        std::size_t tp = 0;
        for (auto d : state_.labeled()) {
            tp += (state_.is_relevant(d) && corpus_->document(d).ground_truth.value_or(false)) ? 1 : 0;
        }
        if (static_cast<double>(tp) >= config_.target_recall * static_cast<double>(corpus_->relevant_count())) {
            return StopReason::true_recall;
        }
        break;
    }
    case StopRule::Kind::never:
        break;
    }
    return std::nullopt;
}

NextStep Session::seed_step()
{
    if (config_.stop.kind == StopRule::Kind::true_recall) {
        if (auto reason = check_stop()) {
            stop(*reason);
            return StopSignal{*reason};
        }
    }
    const bool bm25 = config_.seeding != Seeding::random;
    if (bm25 && state_.relevant_count() == 0 && state_.labeled_count() >= config_.seed_batch) {
        reseed_advisory_ = true;
    }
    if (!bm25) {
        auto pool = state_.unlabeled();
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        return Candidate{pool[pick(rng_)], Rationale::random_seed};
    }
    for (auto d : bm25_order_) {
        if (!state_.is_labeled(d)) {
            return Candidate{d, Rationale::bm25_seed};
        }
    }
    stop(StopReason::exhausted);
    return StopSignal{StopReason::exhausted};
}

void Session::maybe_disagree()
{
    const std::size_t labeled = state_.labeled_count();
    if (labeled == 0 || labeled % config_.recheck_interval != 0 || last_disagree_at_ == labeled) {
        return;
    }
    last_disagree_at_ = labeled;
    auto batch = disagree_recheck();
    if (config_.mode == Mode::simulated) {
        for (auto d : batch) {
            record_label(d, simulate_label(d), EventKind::recheck);
        }
    } else {
        recheck_queue_ = std::move(batch);
    }
}

NextStep Session::advance()
{
    if (state_.unlabeled_count() == 0) {
        stop(StopReason::exhausted);
        return StopSignal{StopReason::exhausted};
    }
    if (!learning_ready()) {
        return seed_step();
    }
    status_ = SessionStatus::learning;

    const bool retrain =
        !model_ || config_.mode == Mode::simulated || labels_since_train_ >= config_.retrain_every;
    if (retrain) {
        auto presumed = presume(state_, rng_);
        TrainOptions options = config_.train;
        if (auto_seed_) {
            options.pseudo_positives = {*auto_seed_};
        }
        try {
            model_ = train(*corpus_, state_, presumed, options);
        } catch (const TrainingError&) {
            return seed_step();
        }
        labels_since_train_ = 0;
        ++trainings_;
        if (state_.relevant_count() > 0 && state_.irrelevant_count() > 0) {
            estimate_ = semi_estimate(*model_, *corpus_, state_, config_.semi);
        }
    }
    if (config_.correction == Correction::disagree) {
        maybe_disagree();
    }
    if (auto reason = check_stop()) {
        stop(*reason);
        return StopSignal{*reason};
    }
    auto q = query(*model_, *corpus_, state_, config_.uncertainty_until);
    return Candidate{q.doc, q.rationale == QueryRationale::certainty ? Rationale::certainty : Rationale::uncertainty};
}

void Session::submit_label(DocIndex doc, bool relevant)
{
    if (config_.mode != Mode::interactive) {
        throw StateError("submit_label is for interactive sessions");
    }
    if (status_ == SessionStatus::stopped) {
        throw StateError("session is closed");
    }
    if (doc >= corpus_->size()) {
        throw LookupError("document index " + std::to_string(doc) + " outside the corpus");
    }
    const bool issued = (pending_ && pending_->doc == doc) || state_.is_labeled(doc) ||
                        std::find(recheck_queue_.begin(), recheck_queue_.end(), doc) != recheck_queue_.end();
    if (!issued) {
        throw StateError("document '" + corpus_->document(doc).id + "' was not issued for review");
    }
    record_label(doc, relevant, state_.is_labeled(doc) ? EventKind::recheck : EventKind::review);
}

void Session::record_label(DocIndex doc, bool relevant, EventKind kind)
{
    state_.apply(doc, relevant, kind);
    pending_.reset();
    std::erase(recheck_queue_, doc);
    ++labels_since_train_;
}

bool Session::simulate_label(DocIndex doc)
{
    if (config_.mode != Mode::simulated) {
        throw StateError("simulate_label needs a simulated session");
    }
    const auto& truth = corpus_->document(doc).ground_truth;
    if (!truth) {
        throw SimulationError("document '" + corpus_->document(doc).id + "' has no ground truth");
    }
    if (!config_.reviewer) {
        return *truth;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(reviewer_rng_);
    if (*truth) {
        return u < config_.reviewer->recall;
    }
    return u < config_.reviewer->false_positive_probability(corpus_->relevant_count(), corpus_->size());
}

std::vector<DocIndex> Session::disagree_recheck() const
{
    if (!model_ || !estimate_ || state_.labeled_count() == 0) {
        return {};
    }
    const auto decisions = decision_scores(*model_, *corpus_);
    std::vector<double> probability(decisions.size());
    for (std::size_t d = 0; d < decisions.size(); ++d) {
        probability[d] = estimate_->calibration.probability(decisions[d]);
    }
    const double threshold = 1.0 / (1.0 + model_->class_weight_ratio);
    return disagree_batch(state_, probability, threshold, config_.recheck_cap);
}

bool Session::kuhrmann_vote(DocIndex doc)
{
    const bool first = simulate_label(doc);
    record_label(doc, first, EventKind::review);
    const bool second = simulate_label(doc);
    record_label(doc, second, EventKind::vote);
    if (first == second) {
        return first;
    }
    const bool third = simulate_label(doc);
    record_label(doc, third, EventKind::vote);
    return third;
}

std::vector<DocIndex> Session::cormack17_recheck(std::size_t knee_ordinal) const
{
    return cormack17_batch(state_, knee_ordinal);
}

void Session::run_simulation()
{
    if (config_.mode != Mode::simulated) {
        throw StateError("run_simulation needs a simulated session");
    }
    while (true) {
        auto step = next_candidate();
        if (std::holds_alternative<StopSignal>(step)) {
            break;
        }
        const auto doc = std::get<Candidate>(step).doc;
        if (config_.correction == Correction::kuhrmann) {
            kuhrmann_vote(doc);
        } else {
            record_label(doc, simulate_label(doc), EventKind::review);
        }
    }
    if (config_.correction == Correction::cormack17 && stop_reason_ == StopReason::knee && knee_ordinal_) {
        for (auto d : cormack17_recheck(*knee_ordinal_)) {
            record_label(d, simulate_label(d), EventKind::recheck);
        }
    }
}

nlohmann::json Session::snapshot() const
{
    nlohmann::json j;
    j["config"] = config_;
    auto& history = j["history"] = nlohmann::json::array();
    for (const auto& e : state_.history()) {
        history.push_back({{"id", corpus_->document(e.doc).id}, {"relevant", e.relevant}, {"kind", kind_name(e.kind)}});
    }
    auto ids = [&](const std::vector<DocIndex>& docs) {
        auto out = nlohmann::json::array();
        for (auto d : docs) {
            out.push_back(corpus_->document(d).id);
        }
        return out;
    };
    j["fixed"] = ids(state_.fixed());
    j["rng_state"] = rng_state(rng_);
    j["reviewer_rng_state"] = rng_state(reviewer_rng_);
    j["status"] = to_string(status_);
    j["estimate"] = estimate_ ? nlohmann::json(*estimate_) : nlohmann::json(nullptr);
    j["model"] = model_ ? nlohmann::json(*model_) : nlohmann::json(nullptr);
    j["pending"] = pending_ ? nlohmann::json{{"id", corpus_->document(pending_->doc).id},
                                             {"rationale", to_string(pending_->rationale)}}
                            : nlohmann::json(nullptr);
    j["recheck_queue"] = ids(recheck_queue_);
    j["stop_reason"] = stop_reason_ ? nlohmann::json(to_string(*stop_reason_)) : nlohmann::json(nullptr);
    j["knee_ordinal"] = knee_ordinal_ ? nlohmann::json(*knee_ordinal_) : nlohmann::json(nullptr);
    j["last_disagree_at"] = last_disagree_at_ ? nlohmann::json(*last_disagree_at_) : nlohmann::json(nullptr);
    j["labels_since_train"] = labels_since_train_;
    j["trainings"] = trainings_;
    j["reseed_advisory"] = reseed_advisory_;
    return j;
}

Session Session::restore(std::shared_ptr<const Corpus> corpus, const nlohmann::json& snapshot)
{
    Session s(corpus, snapshot.at("config").get<SessionConfig>());
    for (const auto& e : snapshot.at("history")) {
        s.state_.apply(s.corpus_->index_of(e.at("id").get<std::string>()), e.at("relevant").get<bool>(),
                       parse_kind(e.at("kind").get<std::string>()));
    }
    set_rng_state(s.rng_, snapshot.at("rng_state").get<std::string>());
    set_rng_state(s.reviewer_rng_, snapshot.at("reviewer_rng_state").get<std::string>());
    const auto status = snapshot.at("status").get<std::string>();
    s.status_ = status == "stopped" ? SessionStatus::stopped
                : status == "learning" ? SessionStatus::learning
                                       : SessionStatus::seeding;
    if (!snapshot.at("estimate").is_null()) {
        s.estimate_ = snapshot["estimate"].get<Estimate>();
    }
    if (!snapshot.at("model").is_null()) {
        s.model_ = snapshot["model"].get<LinearModel>();
    }
    if (!snapshot.at("pending").is_null()) {
        const auto& p = snapshot["pending"];
        const auto r = p.at("rationale").get<std::string>();
        Rationale rationale = r == "certainty"     ? Rationale::certainty
                              : r == "uncertainty" ? Rationale::uncertainty
                              : r == "random-seed" ? Rationale::random_seed
                                                   : Rationale::bm25_seed;
        s.pending_ = Candidate{s.corpus_->index_of(p.at("id").get<std::string>()), rationale};
    }
    for (const auto& id : snapshot.at("recheck_queue")) {
        s.recheck_queue_.push_back(s.corpus_->index_of(id.get<std::string>()));
    }
    if (!snapshot.at("stop_reason").is_null()) {
        const auto r = snapshot["stop_reason"].get<std::string>();
        for (auto reason : {StopReason::target_recall, StopReason::ros, StopReason::knee, StopReason::true_recall,
                            StopReason::exhausted}) {
            if (to_string(reason) == r) {
                s.stop_reason_ = reason;
            }
        }
    }
    if (!snapshot.at("knee_ordinal").is_null()) {
        s.knee_ordinal_ = snapshot["knee_ordinal"].get<std::size_t>();
    }
    if (!snapshot.at("last_disagree_at").is_null()) {
        s.last_disagree_at_ = snapshot["last_disagree_at"].get<std::size_t>();
    }
    s.labels_since_train_ = snapshot.at("labels_since_train").get<std::size_t>();
    s.trainings_ = snapshot.at("trainings").get<std::size_t>();
    s.reseed_advisory_ = snapshot.at("reseed_advisory").get<bool>();
    return s;
}

}  // namespace fast2
