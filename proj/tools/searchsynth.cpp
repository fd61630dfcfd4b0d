// Command-line front end: solve, bench, landscape, replay, serve, parse.

#include "searchsynth/corpus.hpp"
#include "searchsynth/errors.hpp"
#include "searchsynth/oracle.hpp"
#include "searchsynth/service.hpp"
#include "searchsynth/spec_json.hpp"
#include "searchsynth/synthesizer.hpp"
#include "searchsynth/transcript.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#ifndef SEARCHSYNTH_PROBLEMS_DIR
#define SEARCHSYNTH_PROBLEMS_DIR "problems"
#endif

using namespace searchsynth;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string problems = SEARCHSYNTH_PROBLEMS_DIR;
    std::uint64_t scan_cap = SynthConfig{}.scan_cap;
    std::uint64_t sample_budget = SynthConfig{}.sample_budget;
    std::optional<std::uint64_t> max_rounds;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool no_timing = false;
    std::string where;

    SynthConfig synth() const {
        SynthConfig c;
        c.scan_cap = scan_cap;
        c.sample_budget = sample_budget;
        c.max_rounds = max_rounds;
        c.seed = seed;
        c.threads = threads;
        return c;
    }
};

void add_synth_flags(CLI::App* cmd, Common& c) {
    cmd->add_option("--problems", c.problems, "Corpus directory");
    cmd->add_option("--scan-cap", c.scan_cap, "Scan all valid queries up to this many");
    cmd->add_option("--sample-budget", c.sample_budget, "Query draws per round when sampling");
    cmd->add_option("--max-rounds", c.max_rounds, "Safety cap on rounds (default 10*|T|)");
    cmd->add_option("--seed", c.seed, "Seed for target choice and sampling");
    cmd->add_option("--threads", c.threads, "Worker threads for the query scan");
    cmd->add_flag("--no-timing", c.no_timing, "Omit wall-clock figures (byte-stable output)");
}

/// A path to a .search file, or the name of a corpus entry.
SearchSpec load_spec_arg(const std::string& arg, const std::string& problems) {
    if (fs::exists(arg))
        return load_spec_file(arg);
    for (const auto& e : read_manifest(problems))
        if (e.name == arg) {
            auto spec = load_spec_file(e.path);
            spec.name = e.name;
            return spec;
        }
    throw CorpusError("'" + arg + "' is neither a file nor a corpus entry");
}

std::shared_ptr<const Problem> analyze_arg(const std::string& arg, const Common& c) {
    SearchSpec spec = load_spec_arg(arg, c.problems);
    AnalyzeConfig ac;
    if (!c.where.empty())
        ac.target_filter = parse_target_filter(spec, c.where);
    return analyze(std::move(spec), ac);
}

std::string point_str(const Point& p) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < p.size(); ++i)
        out << (i ? "," : "") << p[i];
    out << ')';
    return out.str();
}

Point parse_point(const std::string& s) {
    Point p;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, ','))
        p.push_back(std::stoll(part));
    if (p.empty())
        throw CLI::ValidationError("--target", "empty target");
    return p;
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

void print_rounds(std::ostream& out, const SessionState& s, const std::string& format) {
    const auto& spec = s.spec();
    if (format == "csv") {
        out << "round,query,entropy,outcome,candidates\n";
        for (const auto& r : s.transcript)
            out << r.index << ",\"" << point_str(r.query) << "\"," << fixed(r.entropy, 6) << ','
                << spec.outcomes[r.outcome] << ',' << r.candidates_after << '\n';
        return;
    }
    out << std::left << std::setw(7) << "round" << std::setw(18) << "query" << std::setw(10)
        << "entropy" << std::setw(14) << "outcome" << "candidates\n";
    for (const auto& r : s.transcript)
        out << std::setw(7) << r.index << std::setw(18) << point_str(r.query) << std::setw(10)
            << fixed(r.entropy) << std::setw(14) << spec.outcomes[r.outcome]
            << r.candidates_after << '\n';
}

void dump_constraints(std::ostream& out, const Problem& p) {
    const auto& st = p.analysis.stats;
    out << "; |Psi| = " << st.paths << ", |Phi| = " << st.outcomes << '\n';
    for (std::size_t o = 0; o < p.phi().size(); ++o)
        out << "(phi \"" << p.spec.outcomes[o] << "\" " << to_sexpr(p.phi()[o]) << ")\n";
}

void write_json(const std::string& path, const nlohmann::json& j) {
    if (path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

int cmd_solve(const std::string& spec_arg, Common& c, const std::optional<std::string>& target,
              bool all_targets, bool dump, const std::string& format,
              const std::string& transcript_path) {
    auto problem = analyze_arg(spec_arg, c);
    if (dump)
        dump_constraints(std::cout, *problem);
    const auto config = c.synth();

    std::vector<Point> targets;
    if (all_targets) {
        targets = problem->targets;
    } else if (target) {
        Point t = parse_point(*target);
        if (!std::binary_search(problem->targets.begin(), problem->targets.end(), t))
            throw Error("target " + point_str(t) + " is not a valid target");
        targets.push_back(std::move(t));
    } else {
        std::mt19937_64 rng(c.seed);
        std::uniform_int_distribution<std::size_t> pick(0, problem->targets.size() - 1);
        targets.push_back(problem->targets[pick(rng)]);
    }

    nlohmann::json transcripts = nlohmann::json::array();
    bool all_converged = true;
    if (targets.size() > 1 && format == "csv")
        std::cout << "target,rounds,candidates,identified\n";
    for (const auto& t : targets) {
        HiddenTargetOracle oracle(t);
        SessionState s = run_session(problem, oracle, config);
        const bool singleton = s.knowledge.size() == 1 && s.knowledge.candidates()[0] == t;
        all_converged = all_converged && s.status == Status::Converged;
        TranscriptOptions opts;
        opts.timing = !c.no_timing;
        opts.target = t;
        transcripts.push_back(transcript_json(s, opts));
        if (format == "json")
            continue;
        if (targets.size() > 1 && format == "csv") {
            std::cout << '"' << point_str(t) << "\"," << s.transcript.size() << ','
                      << s.knowledge.size() << ',' << (singleton ? "yes" : "no") << '\n';
            continue;
        }
        if (targets.size() > 1) {
            std::cout << "target " << point_str(t) << ": " << s.transcript.size() << " rounds, "
                      << (singleton ? "identified" : std::to_string(s.knowledge.size()) +
                                                         " candidates left")
                      << '\n';
            continue;
        }
        std::cout << "spec " << problem->spec.name << ": |T| = " << problem->targets.size()
                  << ", |Q| = " << problem->queries.size() << ", |Psi| = "
                  << problem->analysis.stats.paths << ", |Phi| = "
                  << problem->analysis.stats.outcomes << ", mode " << to_string(s.mode) << '\n';
        std::cout << "target " << point_str(t) << '\n';
        print_rounds(std::cout, s, format);
        std::cout << to_string(s.status) << " after " << s.transcript.size() << " rounds;";
        for (const auto& k : s.knowledge.candidates())
            std::cout << ' ' << point_str(k);
        std::cout << '\n';
        if (!c.no_timing)
            std::cout << "time: symexec " << fixed(problem->analysis.stats.seconds) << " s, "
                      << "synthesis " << fixed(s.synth_seconds) << " s\n";
    }
    const nlohmann::json out = targets.size() == 1 ? transcripts[0] : transcripts;
    if (format == "json")
        std::cout << out.dump(2) << '\n';
    if (!transcript_path.empty())
        write_json(transcript_path, out);
    return all_converged ? 0 : 1;
}

struct BenchRow {
    std::string name;
    std::string params;
    std::size_t targets = 0;
    std::size_t queries = 0;
    std::size_t paths = 0;
    std::size_t outcomes = 0;
    double symexec_s = 0.0;
    double solve_s = 0.0;
    double avg_rounds = 0.0;
    std::size_t max_rounds = 0;
    std::size_t runs = 0;
    std::string status = "ok";
};

int cmd_bench(const std::vector<std::string>& names, const std::string& family,
              std::size_t repetitions, bool include_slow, Common& c, const std::string& format,
              const std::string& output) {
    std::vector<CorpusEntry> entries;
    for (auto& e : read_manifest(c.problems)) {
        const bool named = names.empty() ||
                           std::find(names.begin(), names.end(), e.name) != names.end();
        if (!named || (!family.empty() && e.family != family))
            continue;
        if (e.slow && !include_slow && names.empty())
            continue;
        entries.push_back(std::move(e));
    }

    std::vector<BenchRow> rows;
    if (repetitions > 0) {
        for (const auto& e : entries) {
            BenchRow row;
            row.name = e.name;
            row.params = e.params;
            try {
                const auto start = std::chrono::steady_clock::now();
                SearchSpec spec = load_spec_file(e.path);
                spec.name = e.name;
                auto problem = analyze(std::move(spec));
                row.targets = problem->targets.size();
                row.queries = problem->queries.size();
                row.paths = problem->analysis.stats.paths;
                row.outcomes = problem->analysis.stats.outcomes;
                row.symexec_s = std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() - start)
                                    .count();
                std::mt19937_64 rng(c.seed);
                std::uniform_int_distribution<std::size_t> pick(0, problem->targets.size() - 1);
                std::size_t total_rounds = 0;
                for (std::size_t i = 0; i < repetitions; ++i) {
                    HiddenTargetOracle oracle(problem->targets[pick(rng)]);
                    const auto t0 = std::chrono::steady_clock::now();
                    auto s = run_session(problem, oracle, c.synth());
                    row.solve_s +=
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
                    total_rounds += s.transcript.size();
                    row.max_rounds = std::max(row.max_rounds, s.transcript.size());
                    ++row.runs;
                }
                row.avg_rounds = static_cast<double>(total_rounds) / row.runs;
                row.solve_s /= row.runs;
            } catch (const std::exception& ex) {
                row.status = std::string("error: ") + ex.what();
            }
            if (c.no_timing)
                row.symexec_s = row.solve_s = 0.0;
            rows.push_back(std::move(row));
        }
    }

    std::ostringstream csv;
    csv << "name,params,avg_solve_s,avg_rounds,max_rounds,symexec_s,paths,outcomes,queries,"
           "targets,runs,status\n";
    for (const auto& r : rows) {
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        csv << r.name << ",\"" << r.params << "\"," << fixed(r.solve_s) << ','
            << fixed(r.avg_rounds, 2) << ',' << r.max_rounds << ',' << fixed(r.symexec_s) << ','
            << r.paths << ',' << r.outcomes << ',' << r.queries << ',' << r.targets << ','
            << r.runs << ",\"" << status << "\"\n";
    }
    if (!output.empty()) {
        std::ofstream out(output);
        out << csv.str();
    }
    if (format == "csv") {
        std::cout << csv.str();
    } else {
        std::cout << std::left << std::setw(16) << "name" << std::setw(10) << "solve s"
                  << std::setw(8) << "rounds" << std::setw(6) << "max" << std::setw(11)
                  << "symexec s" << std::setw(8) << "|Psi|" << std::setw(7) << "|Phi|"
                  << std::setw(9) << "|Q|" << std::setw(9) << "|T|" << "status\n";
        for (const auto& r : rows)
            std::cout << std::setw(16) << r.name << std::setw(10) << fixed(r.solve_s, 3)
                      << std::setw(8) << fixed(r.avg_rounds, 2) << std::setw(6) << r.max_rounds
                      << std::setw(11) << fixed(r.symexec_s, 3) << std::setw(8) << r.paths
                      << std::setw(7) << r.outcomes << std::setw(9) << r.queries
                      << std::setw(9) << r.targets << r.status << '\n';
    }
    return 0;
}

int cmd_landscape(const std::string& spec_arg, Common& c, bool allow_1d,
                  const std::string& format) {
    auto problem = analyze_arg(spec_arg, c);
    const auto dim = problem->spec.query_dim();
    if (dim != 2 && !(allow_1d && dim == 1))
        throw DimensionError("landscape needs a 2-dimensional query space, '" +
                             problem->spec.name + "' has " + std::to_string(dim) +
                             (dim == 1 ? " (use --allow-1d)" : ""));
    if (!problem->queries_complete || problem->queries.size() > c.scan_cap)
        throw CapacityError("query space too large to scan");
    const Knowledge k(Formula::top(), problem->targets, 0);
    const auto& outcomes = problem->spec.outcomes;
    nlohmann::json rows = nlohmann::json::array();
    if (format == "csv") {
        std::cout << (dim == 2 ? "q0,q1" : "q0") << ",entropy";
        for (const auto& o : outcomes)
            std::cout << ',' << o;
        std::cout << '\n';
    }
    for (const auto& q : problem->queries) {
        const auto dist = outcome_distribution(problem->phi(), k, q);
        const double h = entropy(dist);
        if (format == "csv") {
            for (auto v : q)
                std::cout << v << ',';
            std::cout << fixed(h, 6);
            for (auto n : dist.counts)
                std::cout << ',' << n;
            std::cout << '\n';
        } else {
            rows.push_back({{"query", q}, {"entropy", h}, {"counts", dist.counts}});
        }
    }
    if (format != "csv")
        std::cout << nlohmann::json{{"spec", problem->spec.name}, {"outcomes", outcomes},
                                    {"points", rows}}
                         .dump(2)
                  << '\n';
    return 0;
}

int cmd_replay(const std::string& path, Common& c, const std::string& spec_override) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("schema", 0) != transcript_schema)
        throw Error("unsupported transcript schema");
    const std::string spec_arg =
        spec_override.empty() ? j.at("spec").get<std::string>() : spec_override;
    auto problem = analyze_arg(spec_arg, c);
    SynthConfig config = c.synth();
    const auto& jc = j.at("config");
    config.scan_cap = jc.value("scan_cap", config.scan_cap);
    config.sample_budget = jc.value("sample_budget", config.sample_budget);
    config.seed = jc.value("seed", config.seed);
    if (jc.contains("max_rounds") && !jc.at("max_rounds").is_null())
        config.max_rounds = jc.at("max_rounds").get<std::uint64_t>();

    ReplayOracle oracle = ReplayOracle::from_transcript(j);
    SessionState s = start_session(problem, config);
    while (s.status == Status::Running && oracle.used() < j.at("rounds").size())
        s = step(s, oracle);
    print_rounds(std::cout, s, "table");

    bool same = s.transcript.size() == j.at("rounds").size();
    for (std::size_t i = 0; same && i < s.transcript.size(); ++i)
        same = s.transcript[i].query == j["rounds"][i].at("query").get<Point>();
    std::cout << (same ? "replay matches transcript" : "replay diverges from transcript")
              << '\n';
    return same ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-guided search synthesis over programmatic search specs"};
    app.require_subcommand(1);
    Common c;

    auto* solve = app.add_subcommand("solve", "Play a spec against a hidden target");
    std::string spec_arg;
    std::optional<std::string> target;
    bool all_targets = false;
    bool dump = false;
    std::string format = "table";
    std::string transcript_path;
    solve->add_option("spec", spec_arg, "Spec file or corpus entry")->required();
    solve->add_option("--target", target, "Hidden target, comma separated");
    solve->add_flag("--all-targets", all_targets, "Play every valid target");
    solve->add_flag("--dump-constraints", dump, "Print Phi as s-expressions");
    solve->add_option("--format", format, "table, csv or json")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    solve->add_option("--transcript", transcript_path, "Write transcript JSON here ('-' = stdout)");
    solve->add_option("--where", c.where, "Restrict targets, e.g. 't >= 10 && t <= 18'");
    add_synth_flags(solve, c);

    auto* bench = app.add_subcommand("bench", "Average rounds and timings over corpus entries");
    std::vector<std::string> names;
    std::string family;
    std::size_t repetitions = 10;
    bool include_slow = false;
    std::string bench_format = "table";
    std::string bench_output;
    bench->add_option("entries", names, "Corpus entries (default: all CI-scale)");
    bench->add_option("--family", family, "Only entries of this family");
    bench->add_option("--repetitions,-n", repetitions, "Random targets per entry");
    bench->add_flag("--include-slow", include_slow, "Also run entries marked slow");
    bench->add_option("--format", bench_format, "table or csv")
        ->check(CLI::IsMember({"table", "csv"}));
    bench->add_option("--output", bench_output, "Also write the CSV here");
    add_synth_flags(bench, c);

    auto* landscape = app.add_subcommand("landscape", "Entropy of every query as CSV");
    bool allow_1d = false;
    std::string land_format = "csv";
    landscape->add_option("spec", spec_arg, "Spec file or corpus entry")->required();
    landscape->add_flag("--allow-1d", allow_1d, "Accept one-dimensional query spaces");
    landscape->add_option("--where", c.where, "Knowledge override: restrict targets");
    landscape->add_option("--format", land_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    add_synth_flags(landscape, c);

    auto* replay = app.add_subcommand("replay", "Re-run a transcript's answers");
    std::string replay_path;
    std::string replay_spec;
    replay->add_option("transcript", replay_path, "Transcript JSON")->required();
    replay->add_option("--spec", replay_spec, "Spec file or corpus entry override");
    add_synth_flags(replay, c);

    auto* serve_cmd = app.add_subcommand("serve", "HTTP session service");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string snapshots;
    double ttl_hours = 24;
    serve_cmd->add_option("--host", host);
    serve_cmd->add_option("--port", port);
    serve_cmd->add_option("--snapshots", snapshots, "Directory for session snapshots");
    serve_cmd->add_option("--ttl-hours", ttl_hours, "Idle session lifetime");
    add_synth_flags(serve_cmd, c);

    auto* parse = app.add_subcommand("parse", "Check a spec and print it back");
    bool as_json = false;
    parse->add_option("spec", spec_arg, "Spec file or corpus entry")->required();
    parse->add_flag("--json", as_json, "Print the AST as JSON");
    parse->add_option("--problems", c.problems, "Corpus directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve)
            return cmd_solve(spec_arg, c, target, all_targets, dump, format, transcript_path);
        if (*bench)
            return cmd_bench(names, family, repetitions, include_slow, c, bench_format,
                             bench_output);
        if (*landscape)
            return cmd_landscape(spec_arg, c, allow_1d, land_format);
        if (*replay)
            return cmd_replay(replay_path, c, replay_spec);
        if (*serve_cmd) {
            ServiceConfig sc;
            sc.problems_dir = c.problems;
            sc.synth = c.synth();
            sc.ttl = std::chrono::seconds(static_cast<long long>(ttl_hours * 3600));
            if (!snapshots.empty())
                sc.snapshot_dir = snapshots;
            return serve(sc, host, port);
        }
        if (*parse) {
            const SearchSpec spec = load_spec_arg(spec_arg, c.problems);
            if (as_json)
                std::cout << spec_to_json(spec).dump(2) << '\n';
            else
                std::cout << print_spec(spec);
            return 0;
        }
    } catch (const RoundLimitExceeded& e) {
        std::cerr << "error: round limit exceeded: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
