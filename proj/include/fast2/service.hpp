#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "fast2/corpus.hpp"
#include "fast2/review.hpp"

namespace httplib {
class Server;
}

namespace fast2 {

struct ServiceConfig {
    /// Session snapshots live under <state_dir>/sessions.
    std::filesystem::path state_dir = "fast2-state";
    /// Served at "/" when set (the browser bundle).
    std::optional<std::filesystem::path> static_dir;
    /// Value for Access-Control-Allow-Origin; no CORS headers when empty.
    std::string cors_origin;
};

/// HTTP/JSON review API under /api/v1. Every mutation rewrites the session's
/// snapshot file, so a restarted service resumes where it stopped.
class ReviewService {
  public:
    explicit ReviewService(ServiceConfig config);
    ~ReviewService();

    ReviewService(const ReviewService&) = delete;
    ReviewService& operator=(const ReviewService&) = delete;

    /// The corpus must be featurized.
    void add_dataset(const std::string& name, std::shared_ptr<const Corpus> corpus);

    /// Reloads every snapshot under the state directory. Returns the number restored.
    std::size_t load_sessions();

    /// Registers the API routes (and static mount, CORS handling) on `server`.
    void mount(httplib::Server& server);

    /// Blocks serving on host:port. Throws Error when the port cannot be bound.
    /// Call at most once per service.
    void listen(const std::string& host, int port);
    /// Safe from any thread; a no-op until listen() is running.
    void stop();

  private:
    struct Entry {
        std::mutex mutex;
        std::string id;
        std::string dataset;
        std::unique_ptr<Session> session;
        std::set<std::string> event_ids;
    };

    std::shared_ptr<Entry> find(const std::string& id) const;
    nlohmann::json resource(const Entry& entry) const;
    void persist(const Entry& entry) const;
    std::filesystem::path snapshot_path(const std::string& id) const;

    nlohmann::json create_session(const nlohmann::json& body);

    ServiceConfig config_;
    std::map<std::string, std::shared_ptr<const Corpus>> datasets_;
    mutable std::shared_mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::size_t next_id_ = 1;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace fast2
