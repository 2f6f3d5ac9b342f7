#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "fast2/corpus.hpp"
#include "fast2/csv.hpp"
#include "fast2/errors.hpp"
#include "fast2/experiments.hpp"
#include "fast2/review.hpp"
#include "fast2/service.hpp"
#include "fast2/stats.hpp"
#include "fast2/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fast2;

namespace {

std::shared_ptr<const Corpus> load_featurized(const fs::path& path, const std::string& format)
{
    return std::make_shared<const Corpus>(build_features(load_corpus(path, parse_dataset_format(format))));
}

std::string fixed(double v, int digits)
{
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

std::string sanitize(std::string s)
{
    for (auto& c : s) {
        if (c == ':' || c == ',' || c == '/' || c == ' ') {
            c = '_';
        }
    }
    return s;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string data;
    std::string format = "native";
    std::string name;
    std::vector<std::string> treatments;
    std::string seeding = "rank-bm25";
    std::string stop = "semi:0.95";
    std::string correct = "none";
    std::string reviewer;
    std::optional<double> target_recall;
    std::size_t repeats = 30;
    std::uint64_t seed = 1;
    std::string query;
    std::string out = "results";
};

std::vector<TreatmentSpec> treatments_from(const SimulateArgs& a)
{
    std::vector<TreatmentSpec> specs;
    if (a.treatments.empty()) {
        std::string text = "seeding:" + a.seeding + ",stop:" + a.stop + ",correct:" + a.correct;
        if (!a.reviewer.empty()) {
            text += ",reviewer:" + a.reviewer;
        }
        auto spec = TreatmentSpec::parse(text);
        if (a.target_recall) {
            spec.target_recall = *a.target_recall;
        }
        specs.push_back(spec);
    } else {
        for (const auto& t : a.treatments) {
            specs.push_back(TreatmentSpec::parse(t));
        }
    }
    for (const auto& s : specs) {
        s.validate();
        if (s.target_recall <= 0.0 || s.target_recall > 1.0) {
            throw UsageError("target recall must lie in (0, 1]");
        }
        if (s.seeding != Seeding::random && a.query.empty()) {
            throw UsageError("--query is required for BM25 seeding");
        }
    }
    return specs;
}

void print_summary(const std::vector<TreatmentSpec>& specs, const std::vector<RunResult>& results)
{
    std::cout << "treatment\truns\trecall\tprecision\teffort\tx95\twss95\tx95_absent\n";
    for (const auto& spec : specs) {
        const auto id = spec.id();
        std::vector<double> recall, precision, effort, x, wss;
        std::size_t runs = 0;
        for (const auto& r : results) {
            if (r.treatment != id) {
                continue;
            }
            ++runs;
            recall.push_back(r.recall);
            precision.push_back(r.precision);
            effort.push_back(static_cast<double>(r.effort));
            if (r.x95) {
                x.push_back(static_cast<double>(*r.x95));
                wss.push_back(*r.wss95);
            }
        }
        std::cout << id << '\t' << runs << '\t' << fixed(median(recall), 3) << '\t' << fixed(median(precision), 3)
                  << '\t' << fixed(median(effort), 1) << '\t' << (x.empty() ? "-" : fixed(median(x), 1)) << '\t'
                  << (wss.empty() ? "-" : fixed(median(wss), 3)) << '\t' << runs - x.size() << '\n';
    }
}

int cmd_simulate(const SimulateArgs& a)
{
    if (a.repeats < 1) {
        throw UsageError("--repeats must be at least 1");
    }
    const auto specs = treatments_from(a);
    RunContext context;
    context.corpus = load_featurized(a.data, a.format);
    context.dataset = a.name.empty() ? fs::path(a.data).stem().string() : a.name;
    if (!a.query.empty()) {
        context.query = Query::parse(a.query);
    }
    const auto results = run_experiments(context, specs, a.repeats, a.seed, worker_count());

    const fs::path out = a.out;
    fs::create_directories(out / "curves");
    write_file_atomic(out / "results.csv", results_csv(results));
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        const auto file = sanitize(r.treatment) + "__r" + std::to_string(i % a.repeats) + ".csv";
        write_file_atomic(out / "curves" / file, curve_csv(r.curve));
    }
    print_summary(specs, results);
    return 0;
}

// -------------------------------------------------------------------- rank

int cmd_rank(const std::vector<std::string>& files, const std::string& out, std::uint64_t seed)
{
    std::vector<RunResult> all;
    std::optional<std::set<std::string>> datasets;
    for (const auto& f : files) {
        auto rows = parse_results_csv(read_file(f));
        std::set<std::string> names;
        for (const auto& r : rows) {
            names.insert(r.dataset);
        }
        if (datasets && *datasets != names) {
            throw Error("result files cover different datasets: " + f);
        }
        datasets = names;
        all.insert(all.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    }
    std::set<std::tuple<std::string, std::string, std::uint64_t>> seen;
    for (const auto& r : all) {
        if (!seen.emplace(r.dataset, r.treatment, r.seed).second) {
            throw Error("duplicate run " + r.dataset + "/" + r.treatment + "/" + std::to_string(r.seed));
        }
    }
    const auto rows = rank_results(std::move(all), seed);
    write_file_atomic(out, ranking_csv(rows));
    std::cout << "dataset\trank\ttreatment\tx95_median\tx95_iqr\twss95_median\twss95_iqr\truns\n";
    for (const auto& r : rows) {
        auto opt = [](const std::optional<double>& v, int d) { return v ? fixed(*v, d) : std::string("-"); };
        std::cout << r.dataset << '\t' << r.rank << '\t' << r.treatment << '\t' << opt(r.x95_median, 1) << '\t'
                  << opt(r.x95_iqr, 1) << '\t' << opt(r.wss95_median, 3) << '\t' << opt(r.wss95_iqr, 3) << '\t'
                  << r.runs << '\n';
    }
    return 0;
}

// -------------------------------------------------------------------- bm25

int cmd_bm25(const std::string& data, const std::string& format, const std::string& query, std::size_t top)
{
    const auto corpus = load_featurized(data, format);
    const auto ranked = bm25_rank(*corpus, Query::parse(query));
    std::cout << "rank,id,score\n";
    for (std::size_t i = 0; i < std::min(top, ranked.size()); ++i) {
        std::cout << i + 1 << ',' << csv_escape(corpus->document(ranked[i].doc).id) << ',' << ranked[i].score
                  << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
    std::string data;
    std::string format = "native";
    std::string query;
    std::string seeding = "rank-bm25";
    std::string reviewer;
    std::uint64_t seed = 1;
    std::size_t every = 10;
    std::optional<std::size_t> limit;
    std::string out;
};

/// Reviews the whole pool in simulation and traces the SEMI estimate against the truth.
int cmd_estimate(const EstimateArgs& a)
{
    if (a.every < 1) {
        throw UsageError("--every must be at least 1");
    }
    auto corpus = load_featurized(a.data, a.format);
    if (!corpus->has_ground_truth()) {
        throw SimulationError("estimate tracing needs ground truth for every document");
    }
    SessionConfig config;
    if (!a.query.empty()) {
        config.query = Query::parse(a.query);
    }
    config.seeding = parse_seeding(a.seeding);
    config.stop = StopRule::parse("never");
    config.mode = Mode::simulated;
    config.seed = a.seed;
    if (!a.reviewer.empty()) {
        config.reviewer = TreatmentSpec::parse("reviewer:" + a.reviewer).reviewer;
    }
    Session session(corpus, config);

    std::ostringstream csv;
    csv << "reviewed,labeled_relevant,true_found,estimated_relevant,true_relevant\n";
    const auto truth = corpus->relevant_count();
    std::size_t true_found = 0;
    while (!a.limit || session.state().labeled_count() < *a.limit) {
        auto step = session.next_candidate();
        if (std::holds_alternative<StopSignal>(step)) {
            break;
        }
        const auto doc = std::get<Candidate>(step).doc;
        const bool label = session.simulate_label(doc);
        session.record_label(doc, label);
        if (label && corpus->document(doc).ground_truth.value_or(false)) {
            ++true_found;
        }
        const auto reviewed = session.state().labeled_count();
        if (reviewed % a.every == 0 && session.estimate()) {
            csv << reviewed << ',' << session.state().relevant_count() << ',' << true_found << ','
                << fixed(session.estimate()->estimated_relevant, 2) << ',' << truth << '\n';
        }
    }
    if (a.out.empty()) {
        std::cout << csv.str();
    } else {
        write_file_atomic(a.out, csv.str());
    }
    return 0;
}

// ------------------------------------------------------------------- synth

int cmd_synth(const SyntheticSpec& spec, const std::string& out)
{
    const auto synthetic = make_synthetic(spec);
    std::string csv = csv_line({"id", "title", "abstract", "label"});
    for (const auto& d : synthetic.corpus.documents()) {
        csv += csv_line({d.id, d.title, d.abstract, d.ground_truth.value_or(false) ? "yes" : "no"});
    }
    write_file_atomic(out, csv);
    std::string query;
    for (const auto& t : synthetic.query.terms) {
        query += (query.empty() ? "" : " ") + t;
    }
    std::cout << query << '\n';
    return 0;
}

// ------------------------------------------------------------------- serve

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int)
{
    g_interrupted = true;
}

struct ServeArgs {
    std::vector<std::string> data;
    std::string format = "native";
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string state = "fast2-state";
    std::string static_dir;
    std::string cors_origin;
};

int cmd_serve(const ServeArgs& a)
{
    ServiceConfig config;
    config.state_dir = a.state;
    if (!a.static_dir.empty()) {
        config.static_dir = a.static_dir;
    }
    config.cors_origin = a.cors_origin;
    ReviewService service(config);
    for (const auto& d : a.data) {
        const auto eq = d.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == d.size()) {
            throw UsageError("--data expects name=path, got '" + d + "'");
        }
        service.add_dataset(d.substr(0, eq), load_featurized(d.substr(eq + 1), a.format));
    }
    const auto restored = service.load_sessions();

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::jthread watcher([&](std::stop_token token) {
        // Keep asking until listen() returns; a stop issued before the server
        // is up would otherwise be lost.
        while (!token.stop_requested()) {
            if (g_interrupted) {
                service.stop();
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
    });
    std::cout << "serving on http://" << a.host << ':' << a.port << " (" << restored << " sessions restored)"
              << std::endl;
    service.listen(a.host, a.port);
    watcher.request_stop();
    return 0;
}

std::string one_line(std::string s)
{
    std::replace(s.begin(), s.end(), '\n', ' ');
    while (!s.empty() && s.back() == ' ') {
        s.pop_back();
    }
    return s;
}

int fail(int code, const std::string& message)
{
    std::cerr << "fast2: " << one_line(message) << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"FAST2 active-learning literature review engine", "fast2"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run simulated reviews over a labeled dataset");
    simulate->add_option("--data", sim.data, "Dataset CSV")->required();
    simulate->add_option("--format", sim.format, "native or fastread");
    simulate->add_option("--name", sim.name, "Dataset name in the results (default: file stem)");
    simulate->add_option("--treatment,-t", sim.treatments, std::string("Treatment, repeatable: ") +
                                                               std::string(kTreatmentGrammar));
    simulate->add_option("--seeding", sim.seeding, "rank-bm25, auto-bm25 or random");
    simulate->add_option("--stop", sim.stop, "semi[:T], ros[:window], knee[:rho], true[:T] or never");
    simulate->add_option("--correct", sim.correct, "none, disagree, kuhrmann or cormack17");
    simulate->add_option("--reviewer", sim.reviewer, "Simulated reviewer precision/recall, e.g. 0.7/0.7");
    simulate->add_option("--target-recall", sim.target_recall, "Overrides the stop threshold");
    simulate->add_option("--repeats", sim.repeats, "Runs per treatment");
    simulate->add_option("--seed", sim.seed, "Master seed");
    simulate->add_option("--query", sim.query, "Search query for BM25 seeding");
    simulate->add_option("--out", sim.out, "Output directory");

    std::vector<std::string> rank_files;
    std::string rank_out = "ranking.csv";
    std::uint64_t rank_seed = 0;
    auto* rank = app.add_subcommand("rank", "Scott-Knott ranking of result files");
    rank->add_option("results", rank_files, "results.csv files")->required();
    rank->add_option("--out", rank_out, "Ranking CSV path");
    rank->add_option("--seed", rank_seed, "Bootstrap seed");

    std::string bm_data, bm_format = "native", bm_query;
    std::size_t bm_top = 10;
    auto* bm25 = app.add_subcommand("bm25", "Print the BM25 ranking of a query");
    bm25->add_option("--data", bm_data, "Dataset CSV")->required();
    bm25->add_option("--format", bm_format, "native or fastread");
    bm25->add_option("--query", bm_query, "Search query")->required();
    bm25->add_option("--top", bm_top, "Rows to print");

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Trace the SEMI estimate over a simulated full review");
    estimate->add_option("--data", est.data, "Dataset CSV with labels")->required();
    estimate->add_option("--format", est.format, "native or fastread");
    estimate->add_option("--query", est.query, "Search query for BM25 seeding");
    estimate->add_option("--seeding", est.seeding, "rank-bm25, auto-bm25 or random");
    estimate->add_option("--reviewer", est.reviewer, "Simulated reviewer precision/recall");
    estimate->add_option("--seed", est.seed, "Session seed");
    estimate->add_option("--every", est.every, "Emit a row every N reviews");
    estimate->add_option("--limit", est.limit, "Stop after N reviews");
    estimate->add_option("--out", est.out, "CSV path (default: stdout)");

    ServeArgs srv;
    auto* serve = app.add_subcommand("serve", "Serve the review API");
    serve->add_option("--data", srv.data, "Dataset as name=path, repeatable")->required();
    serve->add_option("--format", srv.format, "native or fastread");
    serve->add_option("--host", srv.host, "Bind address");
    serve->add_option("--port", srv.port, "Port");
    serve->add_option("--out,--state", srv.state, "Session state directory");
    serve->add_option("--static", srv.static_dir, "Directory served at /");
    serve->add_option("--cors-origin", srv.cors_origin, "Allowed browser origin");

    SyntheticSpec syn;
    std::string syn_out;
    auto* synth = app.add_subcommand("synth", "Write a synthetic labeled dataset and print its seeding query");
    synth->add_option("--out", syn_out, "Dataset CSV path")->required();
    synth->add_option("--documents", syn.documents, "Pool size");
    synth->add_option("--prevalence", syn.prevalence, "Share of relevant documents");
    synth->add_option("--seed", syn.seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, e.what());
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(sim);
        }
        if (rank->parsed()) {
            return cmd_rank(rank_files, rank_out, rank_seed);
        }
        if (bm25->parsed()) {
            return cmd_bm25(bm_data, bm_format, bm_query, bm_top);
        }
        if (estimate->parsed()) {
            return cmd_estimate(est);
        }
        if (synth->parsed()) {
            return cmd_synth(syn, syn_out);
        }
        return cmd_serve(srv);
    } catch (const UsageError& e) {
        return fail(2, e.what());
    } catch (const std::exception& e) {
        return fail(1, e.what());
    }
}
