#pragma once

#include "searchsynth/synthesizer.hpp"

#include <json.hpp>

#include <optional>

namespace searchsynth {

inline constexpr int transcript_schema = 1;

struct TranscriptOptions {
    bool timing = true;
    std::optional<Point> target;  // the hidden target, when known
};

nlohmann::json to_json(const OutcomeDistribution& dist, const SearchSpec& spec);
nlohmann::json to_json(const QueryScore& score, const SearchSpec& spec);
nlohmann::json to_json(const SynthConfig& config);

/// Versioned session record: spec, config, rounds, final candidates.
nlohmann::json transcript_json(const SessionState& state, const TranscriptOptions& options = {});

} // namespace searchsynth
