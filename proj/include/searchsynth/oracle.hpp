#pragma once

#include "searchsynth/synthesizer.hpp"

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace searchsynth {

/// Source of outcomes for synthesized queries.
class Oracle {
public:
    virtual ~Oracle() = default;
    /// A declared outcome label for `query`.
    virtual std::string answer(const SearchSpec& spec, PointView query) = 0;
};

/// Simulates the game against a known target.
class HiddenTargetOracle final : public Oracle {
public:
    explicit HiddenTargetOracle(Point target) : target_(std::move(target)) {}
    std::string answer(const SearchSpec& spec, PointView query) override;
    const Point& target() const { return target_; }

private:
    Point target_;
};

/// Plays back a fixed list of answers; throws OracleExhausted past the end.
class ReplayOracle final : public Oracle {
public:
    explicit ReplayOracle(std::vector<std::string> answers) : answers_(std::move(answers)) {}
    /// Answers from the `rounds[].outcome` fields of a transcript.
    static ReplayOracle from_transcript(const nlohmann::json& transcript);

    std::string answer(const SearchSpec& spec, PointView query) override;
    std::size_t used() const { return next_; }

private:
    std::vector<std::string> answers_;
    std::size_t next_ = 0;
};

/// Bridges a blocking `answer` call to answers submitted from elsewhere
/// (another thread, a network handler).
class ExternalOracle final : public Oracle {
public:
    explicit ExternalOracle(std::chrono::milliseconds timeout = std::chrono::minutes(10))
        : timeout_(timeout) {}

    /// Blocks until `submit` supplies a label; OracleTimeout after the idle
    /// timeout.
    std::string answer(const SearchSpec& spec, PointView query) override;

    /// Throws InvalidOutcome for labels the spec does not declare and Error
    /// when nothing is waiting for an answer.
    void submit(const std::string& label);

    /// Query currently awaiting an answer.
    std::optional<Point> waiting() const;

private:
    std::chrono::milliseconds timeout_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::optional<Point> waiting_;
    std::vector<std::string> labels_;
    std::optional<std::string> answer_;
};

struct InconsistencyReport {
    struct Alternative {
        std::string label;
        std::size_t candidates = 0;
    };
    /// Earliest 1-based round whose answer, changed to one of
    /// `alternatives`, leaves some target consistent with every answer.
    /// Unset when no single change suffices.
    std::optional<std::size_t> round;
    std::vector<Alternative> alternatives;
};

/// Empty when the session still has candidates.
std::optional<InconsistencyReport> detect_inconsistency(const SessionState& state);

nlohmann::json to_json(const InconsistencyReport& report);

} // namespace searchsynth
