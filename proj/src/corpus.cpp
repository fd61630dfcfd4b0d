#include "searchsynth/corpus.hpp"

#include "searchsynth/errors.hpp"
#include "searchsynth/interpreter.hpp"

#include <filesystem>
#include <fstream>
#include <random>

namespace searchsynth {

namespace fs = std::filesystem;

std::vector<CorpusEntry> read_manifest(const std::string& dir) {
    const fs::path manifest = fs::path(dir) / "manifest.json";
    std::ifstream in(manifest);
    if (!in)
        throw CorpusError("cannot open " + manifest.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CorpusError(manifest.string() + ": " + e.what());
    }
    std::vector<CorpusEntry> out;
    for (const auto& e : j.at("entries")) {
        CorpusEntry c;
        try {
            c.name = e.at("name").get<std::string>();
            c.family = e.value("family", c.name);
            c.path = (fs::path(dir) / e.at("file").get<std::string>()).string();
            c.params = e.value("params", "");
            c.expected_targets = e.at("targets").get<std::uint64_t>();
            c.expected_queries = e.at("queries").get<std::uint64_t>();
            if (e.contains("outcomes"))
                c.expected_outcomes = e.at("outcomes").get<std::size_t>();
            c.identifiable = e.value("identifiable", true);
            c.slow = e.value("slow", false);
            c.reference = e.value("reference", nlohmann::json::object());
            c.notes = e.value("notes", "");
        } catch (const nlohmann::json::exception& ex) {
            throw CorpusError("manifest entry " + e.dump() + ": " + ex.what());
        }
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

LoadedEntry load_checked(const CorpusEntry& entry, const CorpusOptions& options) {
    auto fail = [&](const std::string& msg) -> CorpusError {
        return CorpusError(entry.name + ": " + msg);
    };
    LoadedEntry out{entry, {}};
    try {
        out.spec = load_spec_file(entry.path);
        out.spec.name = entry.name;
        const auto targets = enumerate_targets(out.spec);
        const auto queries = enumerate_queries(out.spec);
        if (targets.size() != entry.expected_targets)
            throw fail("expected |T| = " + std::to_string(entry.expected_targets) + ", got " +
                       std::to_string(targets.size()));
        if (queries.size() != entry.expected_queries)
            throw fail("expected |Q| = " + std::to_string(entry.expected_queries) + ", got " +
                       std::to_string(queries.size()));
        const Interpreter interp(out.spec);
        std::mt19937_64 rng(options.seed);
        std::uniform_int_distribution<std::size_t> pick_t(0, targets.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_q(0, queries.size() - 1);
        for (std::size_t i = 0; i < options.fuzz_pairs; ++i) {
            const auto& t = targets[pick_t(rng)];
            interp.evaluate(queries[pick_q(rng)], t);
        }
    } catch (const CorpusError&) {
        throw;
    } catch (const Error& e) {
        throw fail(e.what());
    }
    return out;
}

} // namespace

std::vector<LoadedEntry> load_corpus(const std::string& dir, const CorpusOptions& options) {
    std::vector<LoadedEntry> out;
    for (const auto& e : read_manifest(dir))
        if (!e.slow || options.include_slow)
            out.push_back(load_checked(e, options));
    return out;
}

LoadedEntry load_entry(const std::string& dir, const std::string& name,
                       const CorpusOptions& options) {
    for (const auto& e : read_manifest(dir))
        if (e.name == name)
            return load_checked(e, options);
    throw CorpusError("no corpus entry named '" + name + "'");
}

} // namespace searchsynth
