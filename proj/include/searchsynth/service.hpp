#pragma once

#include "searchsynth/oracle.hpp"
#include "searchsynth/synthesizer.hpp"

#include <json.hpp>

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace searchsynth {

struct ServiceConfig {
    std::string problems_dir = "problems";
    std::chrono::seconds ttl = std::chrono::hours(24);
    /// When set, every mutation writes `<dir>/<id>.json` and sessions found
    /// there are restored on startup.
    std::optional<std::string> snapshot_dir;
    SynthConfig synth;
    std::string cors_origin = "*";
};

/// Plain status + JSON body, independent of the HTTP library.
struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// Session bookkeeping behind the HTTP routes. Thread-safe; each session has
/// a single writer at a time and concurrent writers get 409.
class SessionManager {
public:
    using Clock = std::chrono::system_clock;

    explicit SessionManager(ServiceConfig config);
    ~SessionManager();

    ApiResponse list_specs();
    /// Body: {"spec": name} or {"source": text[, "name": n]}, optional
    /// "mode" ("human" | "demo"), "target" (demo only), "seed".
    ApiResponse create(const nlohmann::json& body);
    /// Body: {"outcome": label[, "round": n]}. In demo mode the label may be
    /// omitted and the hidden target answers.
    ApiResponse answer(const std::string& id, const nlohmann::json& body);
    ApiResponse get(const std::string& id);

    std::size_t session_count();
    /// Replaces the wall clock, for expiry tests.
    void set_clock(std::function<Clock::time_point()> clock);

private:
    struct Session;

    std::shared_ptr<const Problem> corpus_problem(const std::string& name);
    std::shared_ptr<Session> find(const std::string& id);
    void evict_expired();
    void snapshot(const Session& s);
    void restore_snapshots();
    nlohmann::json view(const Session& s) const;
    std::shared_ptr<Session> build(const nlohmann::json& body, std::string id);

    ServiceConfig config_;
    std::function<Clock::time_point()> clock_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::map<std::string, std::shared_ptr<const Problem>> problems_;
    std::uint64_t created_ = 0;
};

/// Wires the manager into `server`: POST /sessions, POST /sessions/{id}/answers,
/// GET /sessions/{id}, GET /specs, plus CORS preflight.
void install_routes(httplib::Server& server, SessionManager& manager,
                    const std::string& cors_origin = "*");

/// Blocking server loop. Returns nonzero when the port cannot be bound.
int serve(const ServiceConfig& config, const std::string& host, int port);

} // namespace searchsynth
