#include "searchsynth/transcript.hpp"

namespace searchsynth {

nlohmann::json to_json(const OutcomeDistribution& dist, const SearchSpec& spec) {
    nlohmann::json counts = nlohmann::json::object();
    for (std::size_t o = 0; o < dist.counts.size(); ++o)
        counts[spec.outcomes[o]] = dist.counts[o];
    return {{"query", dist.query}, {"counts", counts}, {"total", dist.total}};
}

nlohmann::json to_json(const QueryScore& score, const SearchSpec& spec) {
    return {{"query", score.query},
            {"entropy", score.entropy},
            {"distribution", to_json(score.dist, spec)}};
}

nlohmann::json to_json(const SynthConfig& config) {
    nlohmann::json j{{"scan_cap", config.scan_cap},
                     {"sample_budget", config.sample_budget},
                     {"seed", config.seed}};
    j["max_rounds"] = config.max_rounds ? nlohmann::json(*config.max_rounds) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json transcript_json(const SessionState& state, const TranscriptOptions& options) {
    const auto& spec = state.spec();
    nlohmann::json j;
    j["schema"] = transcript_schema;
    j["spec"] = spec.name;
    j["config"] = to_json(state.config);
    j["mode"] = to_string(state.mode);
    j["outcomes"] = spec.outcomes;
    j["targets"] = state.problem->targets.size();
    j["queries"] = state.problem->queries.size();
    j["paths"] = state.problem->analysis.stats.paths;
    if (options.target)
        j["target"] = *options.target;
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : state.transcript) {
        nlohmann::json counts = nlohmann::json::object();
        for (std::size_t o = 0; o < r.dist.counts.size(); ++o)
            counts[spec.outcomes[o]] = r.dist.counts[o];
        rounds.push_back({{"round", r.index},
                          {"query", r.query},
                          {"entropy", r.entropy},
                          {"counts", counts},
                          {"outcome", spec.outcomes[r.outcome]},
                          {"candidates", r.candidates_after}});
    }
    j["rounds"] = rounds;
    j["status"] = to_string(state.status);
    j["pending"] = state.pending ? to_json(*state.pending, spec) : nlohmann::json(nullptr);
    j["knowledge"] = to_sexpr(state.knowledge.formula());
    j["final_candidates"] = state.knowledge.candidates();
    if (options.timing) {
        const auto& p = *state.problem;
        j["timing"] = {{"enumerate_s", p.enumerate_seconds},
                       {"symexec_s", p.analysis.stats.seconds},
                       {"synthesis_s", state.synth_seconds}};
    }
    return j;
}

} // namespace searchsynth
