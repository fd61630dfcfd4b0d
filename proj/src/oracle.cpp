#include "searchsynth/oracle.hpp"

#include "searchsynth/errors.hpp"

#include <algorithm>

namespace searchsynth {

std::string HiddenTargetOracle::answer(const SearchSpec& spec, PointView query) {
    return evaluate_concrete(spec, query, target_);
}

ReplayOracle ReplayOracle::from_transcript(const nlohmann::json& transcript) {
    std::vector<std::string> answers;
    for (const auto& r : transcript.at("rounds"))
        answers.push_back(r.at("outcome").get<std::string>());
    return ReplayOracle(std::move(answers));
}

std::string ReplayOracle::answer(const SearchSpec&, PointView) {
    if (next_ >= answers_.size())
        throw OracleExhausted("replay ran out of answers after " +
                              std::to_string(answers_.size()));
    return answers_[next_++];
}

std::string ExternalOracle::answer(const SearchSpec& spec, PointView query) {
    std::unique_lock lock(mu_);
    waiting_ = Point(query.begin(), query.end());
    labels_ = spec.outcomes;
    answer_.reset();
    const bool got = cv_.wait_for(lock, timeout_, [&] { return answer_.has_value(); });
    waiting_.reset();
    if (!got)
        throw OracleTimeout("no answer within " + std::to_string(timeout_.count()) + " ms");
    std::string label = std::move(*answer_);
    answer_.reset();
    return label;
}

void ExternalOracle::submit(const std::string& label) {
    {
        std::lock_guard lock(mu_);
        if (!waiting_ || answer_)
            throw Error("no query is waiting for an answer");
        if (std::find(labels_.begin(), labels_.end(), label) == labels_.end())
            throw InvalidOutcome("'" + label + "' is not a declared outcome");
        answer_ = label;
    }
    cv_.notify_all();
}

std::optional<Point> ExternalOracle::waiting() const {
    std::lock_guard lock(mu_);
    return waiting_;
}

std::optional<InconsistencyReport> detect_inconsistency(const SessionState& state) {
    if (!state.knowledge.empty())
        return std::nullopt;
    const auto& phi = state.problem->phi();
    const auto& rounds = state.transcript;
    const auto& targets = state.problem->targets;

    auto consistent = [&](const Point& t, std::size_t r, std::size_t o) {
        return eval_formula(phi[o], t, rounds[r].query);
    };

    InconsistencyReport report;
    for (std::size_t r = 0; r < rounds.size() && !report.round; ++r) {
        for (std::size_t alt = 0; alt < phi.size(); ++alt) {
            if (alt == rounds[r].outcome)
                continue;
            std::size_t n = 0;
            for (const auto& t : targets) {
                bool ok = consistent(t, r, alt);
                for (std::size_t j = 0; ok && j < rounds.size(); ++j)
                    if (j != r)
                        ok = consistent(t, j, rounds[j].outcome);
                n += ok;
            }
            if (n > 0)
                report.alternatives.push_back({state.spec().outcomes[alt], n});
        }
        if (!report.alternatives.empty())
            report.round = rounds[r].index;
    }
    return report;
}

nlohmann::json to_json(const InconsistencyReport& report) {
    nlohmann::json j;
    j["round"] = report.round ? nlohmann::json(*report.round) : nlohmann::json(nullptr);
    j["alternatives"] = nlohmann::json::array();
    for (const auto& a : report.alternatives)
        j["alternatives"].push_back({{"outcome", a.label}, {"candidates", a.candidates}});
    return j;
}

} // namespace searchsynth
