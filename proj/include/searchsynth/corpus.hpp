#pragma once

#include "searchsynth/spec.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace searchsynth {

/// One problem of the shipped corpus, as listed in manifest.json.
struct CorpusEntry {
    std::string name;
    std::string family;
    std::string path;    // absolute or relative to the working directory
    std::string params;  // human-readable parameter set
    std::uint64_t expected_targets = 0;
    std::uint64_t expected_queries = 0;
    std::optional<std::size_t> expected_outcomes;
    /// Every pair of distinct targets is separated by some query.
    bool identifiable = true;
    /// Too expensive for CI.
    bool slow = false;
    /// Figures reported for the original tool, kept for comparison only.
    nlohmann::json reference;
    std::string notes;
};

struct CorpusOptions {
    bool include_slow = false;
    /// Random valid (query, target) pairs run through the interpreter.
    std::size_t fuzz_pairs = 1000;
    std::uint64_t seed = 7;
};

/// Reads `dir/manifest.json` without loading the specs.
std::vector<CorpusEntry> read_manifest(const std::string& dir);

struct LoadedEntry {
    CorpusEntry entry;
    SearchSpec spec;
};

/// Parses every entry, fuzzes evaluate for totality and checks |T| and |Q|
/// against the manifest. Throws CorpusError naming the failing entry.
std::vector<LoadedEntry> load_corpus(const std::string& dir, const CorpusOptions& options = {});

/// Single entry by name; CorpusError if absent.
LoadedEntry load_entry(const std::string& dir, const std::string& name,
                       const CorpusOptions& options = {});

} // namespace searchsynth
