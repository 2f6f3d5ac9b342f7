#include "fast2/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "fast2/csv.hpp"
#include "fast2/errors.hpp"
#include "fast2/stats.hpp"

namespace fast2 {

namespace {

std::string fmt(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt(const std::optional<double>& v)
{
    return v ? fmt(*v) : std::string();
}

double to_double(std::string_view s, std::string_view what)
{
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw UsageError("bad number '" + std::string(s) + "' for " + std::string(what));
    }
    return v;
}

std::uint64_t to_u64(std::string_view s, std::string_view what)
{
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw UsageError("bad integer '" + std::string(s) + "' for " + std::string(what));
    }
    return v;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

}  // namespace

TreatmentSpec TreatmentSpec::parse(std::string_view text)
{
    TreatmentSpec spec;
    auto fail = [&](const std::string& why) {
        return UsageError("bad treatment '" + std::string(text) + "': " + why + "; expected " +
                          std::string(kTreatmentGrammar));
    };
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto part = text.substr(start, end - start);
        start = end + 1;
        if (part.empty()) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        const auto colon = part.find(':');
        if (colon == std::string_view::npos) {
            throw fail("'" + std::string(part) + "' has no key");
        }
        const auto key = part.substr(0, colon);
        const auto value = part.substr(colon + 1);
        try {
            if (key == "seeding") {
                spec.seeding = parse_seeding(value);
            } else if (key == "stop") {
                spec.stop = StopRule::parse(value, &spec.target_recall);
            } else if (key == "correct" || key == "correction") {
                spec.correction = parse_correction(value);
            } else if (key == "reviewer") {
                const auto slash = value.find('/');
                if (slash == std::string_view::npos) {
                    throw UsageError("reviewer needs precision/recall");
                }
                ReviewerModel r{to_double(value.substr(0, slash), "reviewer precision"),
                                to_double(value.substr(slash + 1), "reviewer recall")};
                if (!(r.precision > 0.0 && r.precision <= 1.0 && r.recall > 0.0 && r.recall <= 1.0)) {
                    throw UsageError("reviewer precision and recall must lie in (0,1]");
                }
                spec.reviewer = r;
            } else {
                throw UsageError("unknown key '" + std::string(key) + "'");
            }
        } catch (const UsageError& e) {
            throw fail(e.what());
        }
        if (end == text.size()) {
            break;
        }
    }
    spec.validate();
    return spec;
}

std::string TreatmentSpec::id() const
{
    std::string out = "seeding:" + to_string(seeding) + ",stop:" + stop.to_string(target_recall) +
                      ",correct:" + to_string(correction);
    if (reviewer) {
        out += ",reviewer:" + fmt(reviewer->precision) + "/" + fmt(reviewer->recall);
    }
    return out;
}

void TreatmentSpec::validate() const
{
    if (correction == Correction::cormack17 && stop.kind != StopRule::Kind::knee) {
        throw UsageError("cormack17 correction requires knee stopping");
    }
    if (!(target_recall > 0.0 && target_recall <= 1.0)) {
        throw UsageError("target recall must lie in (0,1]");
    }
}

std::optional<std::size_t> x95(const RecallCurve& curve, std::size_t total_relevant)
{
    if (total_relevant == 0) {
        throw UndefinedError("X95 is undefined without relevant documents");
    }
    const double needed = 0.95 * static_cast<double>(total_relevant);
    for (const auto& [reviewed, found] : curve.points) {
        if (static_cast<double>(found) >= needed) {
            return reviewed;
        }
    }
    return std::nullopt;
}

double wss95(std::size_t x95_value, std::size_t pool_size)
{
    return 0.95 - static_cast<double>(x95_value) / static_cast<double>(pool_size);
}

RecallCurve truth_curve(const Corpus& corpus, const LabelState& state)
{
    RecallCurve curve;
    curve.points.reserve(state.labeled_count() + 1);
    curve.points.emplace_back(0, 0);
    std::size_t found = 0;
    const auto& order = state.labeled();
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto d = order[k];
        found += (state.is_relevant(d) && corpus.document(d).ground_truth.value_or(false)) ? 1 : 0;
        curve.points.emplace_back(k + 1, found);
    }
    return curve;
}

RunResult simulate_run(const RunContext& context, const TreatmentSpec& spec, std::uint64_t seed)
{
    if (!context.corpus || !context.corpus->has_ground_truth()) {
        throw SimulationError("simulation needs ground truth for every document");
    }
    SessionConfig config;
    config.query = context.query;
    config.target_recall = spec.target_recall;
    config.stop = spec.stop;
    config.correction = spec.correction;
    config.seed = seed;
    config.mode = Mode::simulated;
    config.reviewer = spec.reviewer;
    config.seeding = spec.seeding;

    Session session(context.corpus, config);
    session.run_simulation();

    const auto& corpus = *context.corpus;
    const auto& state = session.state();
    RunResult r;
    r.treatment = spec.id();
    r.dataset = context.dataset;
    r.seed = seed;
    r.curve = truth_curve(corpus, state);
    const std::size_t relevant = corpus.relevant_count();
    if (relevant > 0) {
        r.x95 = x95(r.curve, relevant);
        if (r.x95) {
            r.wss95 = wss95(*r.x95, corpus.size());
        }
    }
    const std::size_t tp = r.curve.points.back().second;
    r.recall = relevant > 0 ? static_cast<double>(tp) / static_cast<double>(relevant) : 1.0;
    r.precision =
        state.relevant_count() > 0 ? static_cast<double>(tp) / static_cast<double>(state.relevant_count()) : 0.0;
    r.effort = state.effort();
    r.reviewed = state.labeled_count();
    r.stop_reason = session.stop_reason();
    return r;
}

std::uint64_t run_seed(std::uint64_t master_seed, std::string_view treatment, std::size_t repeat)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : treatment) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(master_seed) ^ splitmix64(h) ^ splitmix64(static_cast<std::uint64_t>(repeat) + 1));
}

std::size_t worker_count()
{
    if (const char* env = std::getenv("FAST2_THREADS")) {
        std::size_t n = 0;
        std::string_view s(env);
        auto res = std::from_chars(s.data(), s.data() + s.size(), n);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size() && n > 0) {
            return n;
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::vector<RunResult> run_experiments(const RunContext& context, const std::vector<TreatmentSpec>& treatments,
                                       std::size_t repeats, std::uint64_t master_seed, std::size_t threads)
{
    if (repeats == 0) {
        throw UsageError("repeats must be at least 1");
    }
    const std::size_t total = treatments.size() * repeats;
    std::vector<RunResult> results(total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        while (true) {
            const std::size_t job = next.fetch_add(1);
            if (job >= total) {
                return;
            }
            const auto& spec = treatments[job / repeats];
            try {
                results[job] = simulate_run(context, spec, run_seed(master_seed, spec.id(), job % repeats));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = total;
            }
        }
    };
    if (threads == 0) {
        threads = worker_count();
    }
    threads = std::min(threads, total);
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(work);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return results;
}

std::string results_csv(const std::vector<RunResult>& results)
{
    std::string out = "treatment,dataset,seed,x95,wss95,recall,precision,effort\n";
    for (const auto& r : results) {
        out += csv_line({r.treatment, r.dataset, std::to_string(r.seed), r.x95 ? std::to_string(*r.x95) : "",
                         fmt(r.wss95), fmt(r.recall), fmt(r.precision), std::to_string(r.effort)});
    }
    return out;
}

std::vector<RunResult> parse_results_csv(std::string_view text)
{
    const auto rows = parse_csv(text);
    if (rows.empty()) {
        throw EmptyCorpusError("results file is empty");
    }
    const CsvRow expected{"treatment", "dataset", "seed", "x95", "wss95", "recall", "precision", "effort"};
    if (rows[0] != expected) {
        throw SchemaError("results header must be treatment,dataset,seed,x95,wss95,recall,precision,effort");
    }
    std::vector<RunResult> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != expected.size()) {
            throw IntegrityError("results row " + std::to_string(i + 1) + " has " + std::to_string(row.size()) +
                                 " fields");
        }
        RunResult r;
        r.treatment = row[0];
        r.dataset = row[1];
        r.seed = to_u64(row[2], "seed");
        if (!row[3].empty()) {
            r.x95 = static_cast<std::size_t>(to_u64(row[3], "x95"));
        }
        if (!row[4].empty()) {
            r.wss95 = to_double(row[4], "wss95");
        }
        r.recall = to_double(row[5], "recall");
        r.precision = to_double(row[6], "precision");
        r.effort = static_cast<std::size_t>(to_u64(row[7], "effort"));
        out.push_back(std::move(r));
    }
    return out;
}

std::string curve_csv(const RecallCurve& curve)
{
    std::string out = "reviewed,found\n";
    for (const auto& [reviewed, found] : curve.points) {
        out += std::to_string(reviewed) + "," + std::to_string(found) + "\n";
    }
    return out;
}

std::vector<RankingRow> rank_results(std::vector<RunResult> results, std::uint64_t seed)
{
    std::sort(results.begin(), results.end(), [](const RunResult& a, const RunResult& b) {
        return std::tie(a.dataset, a.treatment, a.seed) < std::tie(b.dataset, b.treatment, b.seed);
    });
    std::map<std::string, std::map<std::string, std::vector<const RunResult*>>> by_dataset;
    for (const auto& r : results) {
        by_dataset[r.dataset][r.treatment].push_back(&r);
    }

    std::vector<RankingRow> rows;
    for (const auto& [dataset, treatments] : by_dataset) {
        Rng rng(seed);
        std::vector<Group> groups;
        std::vector<RankingRow> never;
        std::map<std::string, RankingRow> row_of;
        for (const auto& [treatment, runs] : treatments) {
            RankingRow row;
            row.dataset = dataset;
            row.treatment = treatment;
            row.runs = runs.size();
            std::vector<double> xs;
            std::vector<double> ws;
            for (const auto* r : runs) {
                if (r->x95) {
                    xs.push_back(static_cast<double>(*r->x95));
                } else {
                    ++row.x95_absent;
                }
                if (r->wss95) {
                    ws.push_back(*r->wss95);
                }
            }
            if (!ws.empty()) {
                row.wss95_median = median(ws);
                row.wss95_iqr = iqr(ws);
            }
            if (xs.empty()) {
                never.push_back(row);
                continue;
            }
            row.x95_median = median(xs);
            row.x95_iqr = iqr(xs);
            row_of[treatment] = row;
            groups.push_back({treatment, std::move(xs)});
        }
        std::size_t last_rank = 0;
        for (const auto& g : scott_knott(std::move(groups), rng)) {
            auto row = row_of.at(g.name);
            row.rank = g.rank;
            last_rank = std::max(last_rank, g.rank);
            rows.push_back(std::move(row));
        }
        for (auto& row : never) {
            row.rank = last_rank + 1;
            rows.push_back(std::move(row));
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) {
        return std::tie(a.dataset, a.rank) < std::tie(b.dataset, b.rank);
    });
    return rows;
}

std::string ranking_csv(const std::vector<RankingRow>& rows)
{
    std::string out = "dataset,rank,treatment,x95_median,x95_iqr,wss95_median,wss95_iqr,runs,x95_absent\n";
    for (const auto& r : rows) {
        out += csv_line({r.dataset, std::to_string(r.rank), r.treatment, fmt(r.x95_median), fmt(r.x95_iqr),
                         fmt(r.wss95_median), fmt(r.wss95_iqr), std::to_string(r.runs), std::to_string(r.x95_absent)});
    }
    return out;
}

}  // namespace fast2
