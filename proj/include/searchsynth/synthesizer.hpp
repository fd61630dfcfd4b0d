#pragma once

#include "searchsynth/counting.hpp"
#include "searchsynth/symexec.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace searchsynth {

/// Everything computed once per spec before the first round.
struct Problem {
    SearchSpec spec;
    std::vector<Point> targets;
    /// Valid queries. Complete unless the query box exceeds the enumeration
    /// cap, in which case this is a random sample used for analysis only.
    std::vector<Point> queries;
    bool queries_complete = true;
    SymexecResult analysis;
    double enumerate_seconds = 0.0;

    const OutcomeConstraintMap& phi() const { return analysis.phi; }
};

struct AnalyzeConfig {
    std::uint64_t enumeration_cap = default_enumeration_cap;
    SymexecConfig symexec;
    /// Extra restriction on T (e.g. from `--where`).
    std::optional<FunctionDef> target_filter;
};

std::shared_ptr<const Problem> analyze(SearchSpec spec, const AnalyzeConfig& config = {});

struct SynthConfig {
    /// Valid query sets up to this size are scanned exhaustively.
    std::uint64_t scan_cap = 250'000;
    /// Box draws per round in sampling mode.
    std::uint64_t sample_budget = 20'000;
    /// Safety cap on evaluated queries; unset means 10 * |T|.
    std::optional<std::uint64_t> max_rounds;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct QueryScore {
    Point query;
    OutcomeDistribution dist;
    double entropy = 0.0;
};

/// Shannon entropy in bits; 0 log 0 = 0.
double entropy(const OutcomeDistribution& dist);
double entropy(std::span<const double> probs);

/// Some two candidates disagree on the outcome of `query`.
bool is_worthwhile(const OutcomeConstraintMap& phi, const Knowledge& k, PointView query);

/// Literal form: some outcome is possible but not implied.
bool is_worthwhile_formula(const OutcomeConstraintMap& phi, const Knowledge& k,
                           PointView query);

std::vector<Point> worthwhile_queries(const OutcomeConstraintMap& phi, const Knowledge& k,
                                      std::span<const Point> queries);

/// Highest-entropy worthwhile query among `queries` (smallest vector on
/// ties), skipping anything in `exclude`. Empty when none is worthwhile.
std::optional<QueryScore> best_query(const OutcomeConstraintMap& phi, const Knowledge& k,
                                     std::span<const Point> queries,
                                     const std::set<Point>* exclude = nullptr,
                                     unsigned threads = 1, DistributionCache* cache = nullptr);

/// Throws NoWorthwhileQuery when `best_query` finds nothing.
QueryScore select_query(const OutcomeConstraintMap& phi, const Knowledge& k,
                        std::span<const Point> queries);

enum class Status { Running, Converged };
enum class SearchMode { Scan, Sample };

std::string to_string(Status s);
std::string to_string(SearchMode m);

struct Round {
    std::size_t index = 0;  // 1-based
    Point query;
    OutcomeDistribution dist;
    double entropy = 0.0;
    std::size_t outcome = 0;
    std::size_t candidates_after = 0;
};

struct SessionState {
    std::shared_ptr<const Problem> problem;
    SynthConfig config;
    SearchMode mode = SearchMode::Scan;
    Knowledge knowledge;
    std::vector<Round> transcript;
    Status status = Status::Running;
    /// Next query to ask while Running.
    std::optional<QueryScore> pending;
    std::set<Point> asked;
    double synth_seconds = 0.0;

    const SearchSpec& spec() const { return problem->spec; }
    std::uint64_t max_rounds() const;
};

/// Raised when an answer leaves no consistent candidate. `state` is the
/// session after recording that answer, with empty knowledge.
class InconsistentAnswers : public EmptyKnowledge {
public:
    InconsistentAnswers(const std::string& msg, SessionState state)
        : EmptyKnowledge(msg), state_(std::move(state)) {}
    const SessionState& state() const { return state_; }

private:
    SessionState state_;
};

/// Picks the next query for `k`, scanning or sampling according to config.
std::optional<QueryScore> propose(const Problem& problem, const Knowledge& k,
                                  const SynthConfig& config, std::size_t round,
                                  const std::set<Point>& asked);

/// Fresh session with full knowledge and the first query selected.
SessionState start_session(std::shared_ptr<const Problem> problem, const SynthConfig& config = {});

/// Applies the answer to the pending query and selects the next one.
SessionState observe(const SessionState& state, std::size_t outcome);
SessionState observe(const SessionState& state, const std::string& label);

class Oracle;

/// One round of the loop: ask the oracle and observe.
SessionState step(const SessionState& state, Oracle& oracle);

SessionState run_session(std::shared_ptr<const Problem> problem, Oracle& oracle,
                         const SynthConfig& config = {});

} // namespace searchsynth
