#include "searchsynth/service.hpp"

#include "searchsynth/corpus.hpp"
#include "searchsynth/errors.hpp"
#include "searchsynth/transcript.hpp"

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace searchsynth {

namespace fs = std::filesystem;

struct SessionManager::Session {
    std::string id;
    std::string spec_name;
    std::optional<std::string> source;  // uploaded specs only
    std::string mode;                   // "human" or "demo"
    std::optional<Point> target;        // demo mode
    SessionState state;
    std::optional<InconsistencyReport> inconsistency;
    std::vector<std::string> answers;
    Clock::time_point created;
    Clock::time_point last_activity;

    std::mutex write;
    mutable std::mutex view_mu;
    nlohmann::json cached_view;
};

namespace {

ApiResponse error(int status, const std::string& code, const std::string& message) {
    return {status, {{"error", code}, {"message", message}}};
}

std::string random_id() {
    static std::mutex mu;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mu);
    std::ostringstream out;
    out << std::hex;
    for (int i = 0; i < 2; ++i)
        out << rng();
    return out.str();
}

nlohmann::json decls_json(const std::vector<VarDecl>& decls) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : decls) {
        nlohmann::json bounds = nlohmann::json::array();
        for (const auto& b : d.bounds)
            bounds.push_back({b.lo, b.hi});
        out.push_back({{"name", d.name}, {"array", d.is_array}, {"bounds", bounds}});
    }
    return out;
}

std::int64_t epoch_seconds(std::chrono::system_clock::time_point t) {
    return std::chrono::duration_cast<std::chrono::seconds>(t.time_since_epoch()).count();
}

} // namespace

SessionManager::SessionManager(ServiceConfig config)
    : config_(std::move(config)), clock_([] { return Clock::now(); }) {
    if (config_.snapshot_dir) {
        fs::create_directories(*config_.snapshot_dir);
        restore_snapshots();
    }
}

SessionManager::~SessionManager() = default;

void SessionManager::set_clock(std::function<Clock::time_point()> clock) {
    std::lock_guard lock(mu_);
    clock_ = std::move(clock);
}

std::size_t SessionManager::session_count() {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

void SessionManager::evict_expired() {
    const auto now = clock_();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->last_activity > config_.ttl) {
            if (config_.snapshot_dir)
                fs::remove(fs::path(*config_.snapshot_dir) / (it->first + ".json"));
            it = sessions_.erase(it);
        } else {
            ++it;
        }
    }
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
    std::lock_guard lock(mu_);
    evict_expired();
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        return nullptr;
    it->second->last_activity = clock_();
    return it->second;
}

std::shared_ptr<const Problem> SessionManager::corpus_problem(const std::string& name) {
    std::lock_guard lock(mu_);
    if (auto it = problems_.find(name); it != problems_.end())
        return it->second;
    auto entry = load_entry(config_.problems_dir, name);
    auto problem = analyze(std::move(entry.spec));
    problems_.emplace(name, problem);
    return problem;
}

ApiResponse SessionManager::list_specs() {
    std::vector<CorpusEntry> entries;
    try {
        entries = read_manifest(config_.problems_dir);
    } catch (const CorpusError& e) {
        return error(500, "corpus", e.what());
    }
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json j{{"name", e.name},
                         {"family", e.family},
                         {"params", e.params},
                         {"targets", e.expected_targets},
                         {"queries", e.expected_queries},
                         {"slow", e.slow}};
        try {
            const auto spec = load_spec_file(e.path);
            j["outcomes"] = spec.outcomes;
            j["target_decls"] = decls_json(spec.target_decls);
            j["query_decls"] = decls_json(spec.query_decls);
        } catch (const Error& ex) {
            j["error"] = ex.what();
        }
        specs.push_back(std::move(j));
    }
    return {200, {{"specs", specs}}};
}

nlohmann::json SessionManager::view(const Session& s) const {
    const auto& st = s.state;
    const auto& spec = st.spec();
    nlohmann::json j;
    j["id"] = s.id;
    j["spec"] = s.spec_name;
    j["mode"] = s.mode;
    j["status"] = to_string(st.status);
    j["search_mode"] = to_string(st.mode);
    j["outcomes"] = spec.outcomes;
    j["target_decls"] = decls_json(spec.target_decls);
    j["query_decls"] = decls_json(spec.query_decls);
    j["pending"] = st.pending ? to_json(*st.pending, spec) : nlohmann::json(nullptr);
    j["round"] = st.transcript.size() + (st.pending ? 1 : 0);
    j["candidates"] = st.knowledge.size();
    j["total_targets"] = st.problem->targets.size();
    nlohmann::json rounds = nlohmann::json::array();
    nlohmann::json history = nlohmann::json::array();
    for (const auto& r : st.transcript) {
        rounds.push_back({{"round", r.index},
                          {"query", r.query},
                          {"outcome", spec.outcomes[r.outcome]},
                          {"entropy", r.entropy},
                          {"candidates", r.candidates_after}});
        history.push_back(r.entropy);
    }
    j["transcript"] = rounds;
    j["entropy_history"] = history;
    if (st.status == Status::Converged)
        j["result"] = st.knowledge.candidates();
    else if (st.knowledge.size() <= 64)
        j["candidate_list"] = st.knowledge.candidates();
    j["inconsistency"] = s.inconsistency ? to_json(*s.inconsistency) : nlohmann::json(nullptr);
    j["created"] = epoch_seconds(s.created);
    return j;
}

std::shared_ptr<SessionManager::Session> SessionManager::build(const nlohmann::json& body,
                                                               std::string id) {
    auto s = std::make_shared<Session>();
    s->id = std::move(id);
    s->mode = body.value("mode", "human");
    if (s->mode != "human" && s->mode != "demo")
        throw InvalidOutcome("mode must be \"human\" or \"demo\"");

    std::shared_ptr<const Problem> problem;
    if (body.contains("source")) {
        s->source = body.at("source").get<std::string>();
        s->spec_name = body.value("name", "uploaded");
        problem = analyze(parse_spec(*s->source, s->spec_name));
    } else {
        s->spec_name = body.at("spec").get<std::string>();
        problem = corpus_problem(s->spec_name);
    }

    if (s->mode == "demo") {
        if (body.contains("target")) {
            Point t = body.at("target").get<Point>();
            if (!std::binary_search(problem->targets.begin(), problem->targets.end(), t))
                throw InvalidOutcome("target is not a valid target of the spec");
            s->target = std::move(t);
        } else {
            std::mt19937_64 rng(body.value("seed", std::uint64_t{created_}));
            std::uniform_int_distribution<std::size_t> pick(0, problem->targets.size() - 1);
            s->target = problem->targets[pick(rng)];
        }
    }
    s->state = start_session(std::move(problem), config_.synth);
    s->created = s->last_activity = clock_();
    return s;
}

ApiResponse SessionManager::create(const nlohmann::json& body) {
    if (!body.is_object() || (!body.contains("spec") && !body.contains("source")))
        return error(400, "bad_request", "body needs \"spec\" or \"source\"");
    if (body.contains("spec") && !body.at("spec").is_string())
        return error(400, "bad_request", "\"spec\" must be a string");
    if (body.contains("spec")) {
        const auto name = body.at("spec").get<std::string>();
        bool known = false;
        try {
            for (const auto& e : read_manifest(config_.problems_dir))
                known = known || e.name == name;
        } catch (const CorpusError& e) {
            return error(500, "corpus", e.what());
        }
        if (!known)
            return error(404, "unknown_spec", "no spec named '" + name + "'");
    }

    std::shared_ptr<Session> s;
    try {
        s = build(body, random_id());
    } catch (const ParseError& e) {
        return error(422, "invalid_spec", e.what());
    } catch (const SemanticError& e) {
        return error(422, "invalid_spec", e.what());
    } catch (const InvalidOutcome& e) {
        return error(422, "invalid_request", e.what());
    } catch (const nlohmann::json::exception& e) {
        return error(400, "bad_request", e.what());
    } catch (const Error& e) {
        return error(body.contains("source") ? 422 : 500, "analysis_failed", e.what());
    }

    nlohmann::json v = view(*s);
    {
        std::lock_guard vl(s->view_mu);
        s->cached_view = v;
    }
    {
        std::lock_guard lock(mu_);
        evict_expired();
        ++created_;
        sessions_[s->id] = s;
    }
    snapshot(*s);
    return {201, v};
}

ApiResponse SessionManager::answer(const std::string& id, const nlohmann::json& body) {
    auto s = find(id);
    if (!s)
        return error(404, "unknown_session", "no session '" + id + "'");
    std::unique_lock writer(s->write, std::try_to_lock);
    if (!writer.owns_lock())
        return error(409, "busy", "another answer for this session is being processed");
    if (s->state.status != Status::Running || !s->state.pending)
        return error(409, "no_pending_query", "session has converged");
    if (!body.is_object())
        return error(400, "bad_request", "body must be a JSON object");
    const std::size_t round = s->state.transcript.size() + 1;
    if (body.contains("round") && (!body.at("round").is_number_integer() ||
                                   body.at("round").get<std::size_t>() != round))
        return error(409, "stale_round", "pending query is round " + std::to_string(round));

    std::string label;
    if (body.contains("outcome")) {
        if (!body.at("outcome").is_string())
            return error(422, "invalid_outcome", "\"outcome\" must be a string");
        label = body.at("outcome").get<std::string>();
    } else if (s->mode == "demo") {
        label = HiddenTargetOracle(*s->target).answer(s->state.spec(), s->state.pending->query);
    } else {
        return error(422, "invalid_outcome", "missing \"outcome\"");
    }
    if (!s->state.spec().outcome_index(label))
        return error(422, "invalid_outcome", "'" + label + "' is not a declared outcome");

    try {
        s->state = observe(s->state, label);
        s->inconsistency.reset();
        s->answers.push_back(label);
    } catch (const InconsistentAnswers& e) {
        // The answer is not applied; the same query stays pending.
        s->inconsistency = detect_inconsistency(e.state());
    } catch (const Error& e) {
        return error(500, "internal", e.what());
    }
    nlohmann::json v = view(*s);
    {
        std::lock_guard vl(s->view_mu);
        s->cached_view = v;
    }
    snapshot(*s);
    return {200, v};
}

ApiResponse SessionManager::get(const std::string& id) {
    auto s = find(id);
    if (!s)
        return error(404, "unknown_session", "no session '" + id + "'");
    std::lock_guard vl(s->view_mu);
    return {200, s->cached_view};
}

void SessionManager::snapshot(const Session& s) {
    if (!config_.snapshot_dir)
        return;
    nlohmann::json j{{"id", s.id},
                     {"spec", s.spec_name},
                     {"mode", s.mode},
                     {"answers", s.answers},
                     {"created", epoch_seconds(s.created)}};
    if (s.source)
        j["source"] = *s.source;
    if (s.target)
        j["target"] = *s.target;
    const fs::path dir(*config_.snapshot_dir);
    const fs::path tmp = dir / (s.id + ".json.tmp");
    {
        std::ofstream out(tmp);
        out << j.dump(2) << '\n';
    }
    fs::rename(tmp, dir / (s.id + ".json"));
}

void SessionManager::restore_snapshots() {
    for (const auto& f : fs::directory_iterator(*config_.snapshot_dir)) {
        if (f.path().extension() != ".json")
            continue;
        try {
            std::ifstream in(f.path());
            const auto j = nlohmann::json::parse(in);
            nlohmann::json body{{"mode", j.at("mode")}};
            if (j.contains("source")) {
                body["source"] = j.at("source");
                body["name"] = j.at("spec");
            } else {
                body["spec"] = j.at("spec");
            }
            if (j.contains("target"))
                body["target"] = j.at("target");
            auto s = build(body, j.at("id").get<std::string>());
            for (const auto& a : j.at("answers")) {
                s->answers.push_back(a.get<std::string>());
                s->state = observe(s->state, s->answers.back());
            }
            s->created = Clock::time_point(std::chrono::seconds(j.value("created", 0)));
            s->cached_view = view(*s);
            sessions_[s->id] = s;
        } catch (const std::exception& e) {
            std::cerr << "skipping snapshot " << f.path() << ": " << e.what() << '\n';
        }
    }
}

void install_routes(httplib::Server& server, SessionManager& manager,
                    const std::string& cors_origin) {
    server.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});

    auto reply = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    auto parse_body = [](const httplib::Request& req) -> std::optional<nlohmann::json> {
        if (req.body.empty())
            return nlohmann::json::object();
        try {
            return nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;
        }
    };

    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
    });
    server.Get("/specs", [&manager, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, manager.list_specs());
    });
    server.Post("/sessions", [&manager, reply, parse_body](const httplib::Request& req,
                                                         httplib::Response& res) {
        auto body = parse_body(req);
        if (!body)
            return reply(res, error(400, "bad_request", "body is not valid JSON"));
        reply(res, manager.create(*body));
    });
    server.Post(R"(/sessions/([^/]+)/answers)",
                [&manager, reply, parse_body](const httplib::Request& req,
                                              httplib::Response& res) {
                    auto body = parse_body(req);
                    if (!body)
                        return reply(res, error(400, "bad_request", "body is not valid JSON"));
                    reply(res, manager.answer(req.matches[1], *body));
                });
    server.Get(R"(/sessions/([^/]+))", [&manager, reply](const httplib::Request& req,
                                                         httplib::Response& res) {
        reply(res, manager.get(req.matches[1]));
    });
}

int serve(const ServiceConfig& config, const std::string& host, int port) {
    SessionManager manager(config);
    httplib::Server server;
    install_routes(server, manager, config.cors_origin);
    std::cerr << "listening on " << host << ":" << port << '\n';
    if (!server.listen(host, port)) {
        std::cerr << "cannot listen on " << host << ":" << port << '\n';
        return 1;
    }
    return 0;
}

} // namespace searchsynth
