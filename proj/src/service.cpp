#include "fast2/service.hpp"

#include <httplib.h>

#include <charconv>

#include "fast2/csv.hpp"
#include "fast2/errors.hpp"

namespace fast2 {

namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";

json error_body(const std::string& message)
{
    return json{{"error", message}};
}

json document_json(const Document& d)
{
    return json{{"id", d.id}, {"title", d.title}, {"abstract", d.abstract}};
}

template <typename T>
T field_or(const json& body, const char* key, T fallback)
{
    if (!body.contains(key) || body[key].is_null()) {
        return fallback;
    }
    try {
        return body[key].get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("field '") + key + "' has the wrong type");
    }
}

json parse_body(const httplib::Request& req)
{
    if (req.body.empty()) {
        return json::object();
    }
    try {
        auto body = json::parse(req.body);
        if (!body.is_object()) {
            throw UsageError("request body must be a JSON object");
        }
        return body;
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("malformed JSON: ") + e.what());
    }
}

Query query_from(const json& value)
{
    if (value.is_string()) {
        return Query::parse(value.get<std::string>());
    }
    if (value.is_array()) {
        std::vector<std::string> terms;
        for (const auto& t : value) {
            if (!t.is_string()) {
                throw UsageError("query terms must be strings");
            }
            terms.push_back(t.get<std::string>());
        }
        return Query::from_terms(std::move(terms));
    }
    throw UsageError("query must be a string or an array of terms");
}

/// Runs `fn` and turns library exceptions into JSON error responses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn)
{
    try {
        fn();
    } catch (const UsageError& e) {
        res.status = 400;
        res.set_content(error_body(e.what()).dump(), kJson);
    } catch (const LookupError& e) {
        res.status = 404;
        res.set_content(error_body(e.what()).dump(), kJson);
    } catch (const StateError& e) {
        res.status = 409;
        res.set_content(error_body(e.what()).dump(), kJson);
    } catch (const json::exception& e) {
        res.status = 400;
        res.set_content(error_body(e.what()).dump(), kJson);
    } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(error_body(e.what()).dump(), kJson);
    }
}

}  // namespace

ReviewService::ReviewService(ServiceConfig config)
    : config_(std::move(config)), server_(std::make_unique<httplib::Server>())
{
    // No SO_REUSEPORT: a second instance on a busy port must fail rather than share it.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
}

ReviewService::~ReviewService() = default;

void ReviewService::add_dataset(const std::string& name, std::shared_ptr<const Corpus> corpus)
{
    if (!corpus || !corpus->featurized()) {
        throw StateError("dataset '" + name + "' must be featurized before serving");
    }
    std::unique_lock lock(registry_mutex_);
    datasets_[name] = std::move(corpus);
}

std::filesystem::path ReviewService::snapshot_path(const std::string& id) const
{
    return config_.state_dir / "sessions" / (id + ".json");
}

void ReviewService::persist(const Entry& entry) const
{
    json file{{"id", entry.id},
              {"dataset", entry.dataset},
              {"event_ids", entry.event_ids},
              {"session", entry.session->snapshot()}};
    write_file_atomic(snapshot_path(entry.id), file.dump());
}

std::size_t ReviewService::load_sessions()
{
    const auto dir = config_.state_dir / "sessions";
    if (!std::filesystem::exists(dir)) {
        return 0;
    }
    std::vector<std::filesystem::path> files;
    for (const auto& item : std::filesystem::directory_iterator(dir)) {
        if (item.is_regular_file() && item.path().extension() == ".json") {
            files.push_back(item.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::unique_lock lock(registry_mutex_);
    std::size_t restored = 0;
    for (const auto& path : files) {
        json file;
        try {
            file = json::parse(read_file(path));
        } catch (const json::exception& e) {
            throw Error("corrupt session snapshot " + path.string() + ": " + e.what());
        }
        auto entry = std::make_shared<Entry>();
        entry->id = file.at("id").get<std::string>();
        entry->dataset = file.at("dataset").get<std::string>();
        auto corpus = datasets_.find(entry->dataset);
        if (corpus == datasets_.end()) {
            throw Error("session " + entry->id + " refers to dataset '" + entry->dataset + "', which is not loaded");
        }
        entry->event_ids = file.at("event_ids").get<std::set<std::string>>();
        entry->session = std::make_unique<Session>(Session::restore(corpus->second, file.at("session")));
        if (entry->id.size() > 1 && entry->id[0] == 's') {
            std::size_t n = 0;
            const auto* first = entry->id.data() + 1;
            const auto* last = entry->id.data() + entry->id.size();
            if (std::from_chars(first, last, n).ptr == last) {
                next_id_ = std::max(next_id_, n + 1);
            }
        }
        sessions_[entry->id] = std::move(entry);
        ++restored;
    }
    return restored;
}

std::shared_ptr<ReviewService::Entry> ReviewService::find(const std::string& id) const
{
    std::shared_lock lock(registry_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw LookupError("no session '" + id + "'");
    }
    return it->second;
}

json ReviewService::resource(const Entry& entry) const
{
    const auto& s = *entry.session;
    const auto& state = s.state();
    const auto& corpus = s.corpus();
    const auto& cfg = s.config();
    json r;
    r["id"] = entry.id;
    r["dataset"] = entry.dataset;
    r["status"] = to_string(s.status());
    r["counts"] = {{"pool", corpus.size()},
                   {"labeled", state.labeled_count()},
                   {"relevant", state.relevant_count()},
                   {"irrelevant", state.irrelevant_count()},
                   {"fixed", state.fixed_count()},
                   {"effort", state.effort()}};
    if (s.status() != SessionStatus::seeding && s.estimate()) {
        const double est = s.estimate()->estimated_relevant;
        const auto found = static_cast<double>(state.relevant_count());
        r["estimate"] = {{"estimated_relevant", est},
                         {"found", state.relevant_count()},
                         {"remaining_fraction", est > 0.0 ? found / est : 0.0}};
    } else {
        r["estimate"] = nullptr;
    }
    auto queue = json::array();
    for (auto d : s.recheck_queue()) {
        queue.push_back(corpus.document(d).id);
    }
    r["recheck_queue"] = queue;
    r["reseed_advisory"] = s.reseed_advisory();
    r["stop_reason"] = s.stop_reason() ? json(to_string(*s.stop_reason())) : json(nullptr);
    r["config"] = {{"query", cfg.query ? json(cfg.query->terms) : json(nullptr)},
                   {"target_recall", cfg.target_recall},
                   {"stop", cfg.stop.to_string(cfg.target_recall)},
                   {"seeding", to_string(cfg.seeding)},
                   {"correction", to_string(cfg.correction)},
                   {"recheck_interval", cfg.recheck_interval},
                   {"retrain_every", cfg.retrain_every}};
    return r;
}

json ReviewService::create_session(const json& body)
{
    const auto dataset = field_or<std::string>(body, "dataset", "");
    if (dataset.empty()) {
        throw UsageError("field 'dataset' is required");
    }
    std::shared_ptr<const Corpus> corpus;
    {
        std::shared_lock lock(registry_mutex_);
        auto it = datasets_.find(dataset);
        if (it == datasets_.end()) {
            throw LookupError("unknown dataset '" + dataset + "'");
        }
        corpus = it->second;
    }

    SessionConfig config;
    config.mode = Mode::interactive;
    config.correction = Correction::disagree;
    config.seeding = parse_seeding(field_or<std::string>(body, "seeding", "rank-bm25"));
    if (body.contains("query") && !body["query"].is_null()) {
        config.query = query_from(body["query"]);
    }
    config.stop = StopRule::parse(field_or<std::string>(body, "stop", "semi"), &config.target_recall);
    config.target_recall = field_or<double>(body, "target_recall", config.target_recall);
    config.correction = parse_correction(field_or<std::string>(body, "correction", "disagree"));
    const auto interval = field_or<long long>(body, "recheck_interval", 50);
    if (interval < 1) {
        throw UsageError("recheck_interval must be at least 1");
    }
    config.recheck_interval = static_cast<std::size_t>(interval);
    if (body.contains("recheck_cap") && !body["recheck_cap"].is_null()) {
        config.recheck_cap = field_or<std::size_t>(body, "recheck_cap", 0);
    }
    const auto retrain = field_or<long long>(body, "retrain_every", 1);
    if (retrain < 1) {
        throw UsageError("retrain_every must be at least 1");
    }
    config.retrain_every = static_cast<std::size_t>(retrain);
    config.seed = field_or<std::uint64_t>(body, "seed", 0);

    auto entry = std::make_shared<Entry>();
    entry->dataset = dataset;
    entry->session = std::make_unique<Session>(corpus, config);
    {
        std::unique_lock lock(registry_mutex_);
        entry->id = "s" + std::to_string(next_id_++);
        sessions_[entry->id] = entry;
    }
    std::lock_guard guard(entry->mutex);
    persist(*entry);
    return resource(*entry);
}

void ReviewService::mount(httplib::Server& server)
{
    if (!config_.cors_origin.empty()) {
        server.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin}});
        server.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.status = 204;
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        });
    }
    if (config_.static_dir && !server.set_mount_point("/", config_.static_dir->string())) {
        throw Error("static directory " + config_.static_dir->string() + " does not exist");
    }

    server.Post("/api/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto r = create_session(parse_body(req));
            res.status = 201;
            res.set_content(r.dump(), kJson);
        });
    });

    server.Get("/api/v1/sessions", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] {
            std::vector<std::shared_ptr<Entry>> entries;
            {
                std::shared_lock lock(registry_mutex_);
                for (const auto& [id, e] : sessions_) {
                    entries.push_back(e);
                }
            }
            auto list = json::array();
            for (const auto& e : entries) {
                std::lock_guard guard(e->mutex);
                list.push_back({{"id", e->id}, {"dataset", e->dataset}, {"status", to_string(e->session->status())}});
            }
            res.set_content(json{{"sessions", list}}.dump(), kJson);
        });
    });

    server.Get(R"(/api/v1/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            std::lock_guard guard(e->mutex);
            res.set_content(resource(*e).dump(), kJson);
        });
    });

    server.Get(R"(/api/v1/sessions/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            std::lock_guard guard(e->mutex);
            auto step = e->session->next_candidate();
            persist(*e);
            json out;
            if (const auto* c = std::get_if<Candidate>(&step)) {
                out = {{"document", document_json(e->session->corpus().document(c->doc))},
                       {"rationale", to_string(c->rationale)}};
            } else {
                out = {{"stopped", true}, {"reason", to_string(std::get<StopSignal>(step).reason)}};
            }
            res.set_content(out.dump(), kJson);
        });
    });

    server.Post(R"(/api/v1/sessions/([^/]+)/labels)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            const auto body = parse_body(req);
            const auto doc_id = field_or<std::string>(body, "document", "");
            if (doc_id.empty()) {
                throw UsageError("field 'document' is required");
            }
            if (!body.contains("relevant") || !body["relevant"].is_boolean()) {
                throw UsageError("field 'relevant' must be true or false");
            }
            const auto event_id = field_or<std::string>(body, "event_id", "");
            std::lock_guard guard(e->mutex);
            if (event_id.empty() || !e->event_ids.contains(event_id)) {
                e->session->submit_label(e->session->corpus().index_of(doc_id), body["relevant"].get<bool>());
                if (!event_id.empty()) {
                    e->event_ids.insert(event_id);
                }
                persist(*e);
            }
            res.set_content(resource(*e).dump(), kJson);
        });
    });

    server.Get(R"(/api/v1/sessions/([^/]+)/estimate)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            std::lock_guard guard(e->mutex);
            auto r = resource(*e);
            if (r["estimate"].is_null()) {
                res.status = 409;
                res.set_content(json{{"error", "estimate not ready"}, {"ready", false}, {"status", r["status"]}}.dump(),
                                kJson);
                return;
            }
            auto out = r["estimate"];
            out["ready"] = true;
            res.set_content(out.dump(), kJson);
        });
    });

    server.Get(R"(/api/v1/sessions/([^/]+)/recheck)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            std::lock_guard guard(e->mutex);
            const auto& s = *e->session;
            auto queue = json::array();
            std::vector<double> decisions;
            if (s.model() && s.estimate() && !s.recheck_queue().empty()) {
                decisions = decision_scores(*s.model(), s.corpus());
            }
            for (auto d : s.recheck_queue()) {
                json item{{"document", document_json(s.corpus().document(d))},
                          {"label", s.state().is_relevant(d)},
                          {"probability", nullptr}};
                if (!decisions.empty()) {
                    item["probability"] = s.estimate()->calibration.probability(decisions[d]);
                }
                queue.push_back(std::move(item));
            }
            res.set_content(json{{"queue", queue}}.dump(), kJson);
        });
    });

    server.Get(R"(/api/v1/sessions/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            std::lock_guard guard(e->mutex);
            const auto& s = *e->session;
            const auto& state = s.state();
            std::string csv;
            if (req.get_param_value("what") == "history") {
                csv = "sequence,id,relevant,kind,review_ordinal\n";
                std::size_t seq = 0;
                for (const auto& ev : state.history()) {
                    const char* kind = ev.kind == EventKind::review    ? "review"
                                       : ev.kind == EventKind::recheck ? "recheck"
                                                                       : "vote";
                    csv += csv_line({std::to_string(++seq), s.corpus().document(ev.doc).id,
                                     ev.relevant ? "yes" : "no", kind, std::to_string(ev.review_ordinal)});
                }
            } else {
                csv = "id,title,review_ordinal,fixed\n";
                for (auto d : state.labeled()) {
                    if (state.is_relevant(d)) {
                        const auto& doc = s.corpus().document(d);
                        csv += csv_line({doc.id, doc.title, std::to_string(state.review_ordinal(d)),
                                         state.is_fixed(d) ? "yes" : "no"});
                    }
                }
            }
            res.set_content(csv, "text/csv");
        });
    });

    server.Post(R"(/api/v1/sessions/([^/]+)/query)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto e = find(req.matches[1]);
            const auto body = parse_body(req);
            if (!body.contains("query")) {
                throw UsageError("field 'query' is required");
            }
            auto query = query_from(body["query"]);
            std::lock_guard guard(e->mutex);
            e->session->reseed(std::move(query));
            persist(*e);
            res.set_content(resource(*e).dump(), kJson);
        });
    });
}

void ReviewService::listen(const std::string& host, int port)
{
    mount(*server_);
    if (!server_->bind_to_port(host, port)) {
        throw Error("cannot listen on " + host + ":" + std::to_string(port) + " (port busy or not permitted)");
    }
    server_->listen_after_bind();
}

void ReviewService::stop()
{
    server_->stop();
}

}  // namespace fast2
