#pragma once
// Benchmark loading, end-to-end evaluation, metrics, and reporting.
//
// Datasets are CSV with columns (source attr, target attr, description 1,
// description 2, label); a header row is detected and skipped. One run
// record is produced per question; a per-question failure is captured in
// its record and never aborts the run.
//
// Report files: results.jsonl and summary.json hold only deterministic
// fields so replay-mode reruns are byte-identical; wall-clock timings go
// to timings.jsonl and timing_summary.json.

#include "kgrag/csv.hpp"
#include "kgrag/embedding.hpp"
#include "kgrag/errors.hpp"
#include "kgrag/generation.hpp"
#include "kgrag/ranking.hpp"
#include "kgrag/retrieval.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <vector>

namespace kgrag {

// ── Dataset ────────────────────────────────────────────────────────────

inline std::vector<MatchQuestion> load_dataset(const std::string& path) {
    auto rows = read_csv_file(path);
    std::vector<MatchQuestion> out;
    std::size_t ordinal = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const CsvRow& row = rows[i];
        if (row.fields.size() != 5)
            throw FormatError("dataset row has " + std::to_string(row.fields.size()) +
                                  " columns, expected 5 in " + path,
                              row.line);
        const std::string& label_text = row.fields[4];
        if (i == 0 && label_text != "0" && label_text != "1") continue;  // header
        if (label_text != "0" && label_text != "1")
            throw FormatError("bad label value '" + label_text + "' in " + path, row.line);
        ++ordinal;
        char id[16];
        std::snprintf(id, sizeof id, "q%06zu", ordinal);
        out.push_back(build_question(row.fields[0], row.fields[1], row.fields[2], row.fields[3],
                                     label_text == "1" ? 1 : 0, id));
    }
    return out;
}

// ── Run records and metrics ────────────────────────────────────────────

struct PhaseTimings {
    double embed_s = 0.0;
    double retrieval_s = 0.0;
    double generation_s = 0.0;
};

struct RunRecord {
    std::string question_id;
    MatchDecision decision;
    int label = 0;
    PhaseTimings timings;
    std::size_t context_size = 0;  // refined paths placed in the prompt
    bool used_rag = false;         // false -> baseline matcher prompt
    bool failed = false;
    std::string error;
};

struct Metrics {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    double precision = 0.0;  // percent, full precision
    double recall = 0.0;
    double f1 = 0.0;
};

inline Metrics compute_metrics(const std::vector<RunRecord>& records) {
    Metrics m;
    for (const RunRecord& r : records) {
        bool positive = r.decision.verdict == Verdict::Positive;
        if (positive && r.label == 1)
            ++m.tp;
        else if (positive && r.label == 0)
            ++m.fp;
        else if (!positive && r.label == 1)
            ++m.fn;
        else
            ++m.tn;
    }
    m.precision = m.tp + m.fp ? 100.0 * static_cast<double>(m.tp) /
                                    static_cast<double>(m.tp + m.fp)
                              : 0.0;
    m.recall = m.tp + m.fn ? 100.0 * static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn)
                           : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

inline Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                                   std::size_t tn = 0) {
    Metrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    m.precision = tp + fp ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
    return m;
}

inline double round2(double x) { return std::round(x * 100.0) / 100.0; }

// ── Evaluation driver ──────────────────────────────────────────────────

struct EvalContext {
    const KgStore* store = nullptr;
    const VectorIndex* entity_index = nullptr;
    const VectorIndex* relation_index = nullptr;
    const VectorIndex* triple_index = nullptr;
    EmbeddingProvider* embedder = nullptr;
    ChatClient* llm = nullptr;  // drives both LLM retrieval and matching
    const PromptSet* prompts = nullptr;
    std::string model = "gpt-4o-mini";
    SamplingParams sampling;
    RetrievalConfig retrieval;
    Strategy strategy = Strategy::TripleVec;
    RankScheme scheme = RankScheme::Similarity;
    TopN top;  // default: all
    std::size_t parallelism = 1;

    StrategyContext strategy_context(const EmbeddingVector* question_embedding) const {
        StrategyContext s;
        s.store = store;
        s.entity_index = entity_index;
        s.relation_index = relation_index;
        s.triple_index = triple_index;
        s.embedder = embedder;
        s.llm = {llm, prompts, model, sampling};
        s.config = retrieval;
        s.question_embedding = question_embedding;
        return s;
    }

    void validate() const {
        if (!store) throw ConfigError("evaluation requires a loaded KG store (run `ingest` first)");
        if (!llm) throw ConfigError("evaluation requires a chat client");
        if (!prompts) throw ConfigError("evaluation requires prompt templates");
        switch (strategy) {
            case Strategy::TripleVec:
                if (!triple_index || !embedder)
                    throw ConfigError(
                        "triple_vec requires a triple index and an embedding provider (run "
                        "`embed` and `index` first)");
                if (scheme != RankScheme::Similarity)
                    throw ConfigError("triple_vec ranks by similarity; set scheme=similarity");
                break;
            case Strategy::EntityVecBfs:
                if (!entity_index || !embedder)
                    throw ConfigError(
                        "entity_vec_bfs requires an entity index and an embedding provider (run "
                        "`embed` and `index` first)");
                break;
            case Strategy::EntityLlmBfs:
            case Strategy::SubgraphLlm:
                break;
        }
        if (strategy != Strategy::TripleVec && scheme == RankScheme::Similarity)
            throw ConfigError("path strategies rank by frequency or normalized scoring");
    }
};

// Retrieval, refinement, prompting, and answer parsing for one question;
// returns the refined paths so callers can echo the context.
inline RunRecord evaluate_question(const MatchQuestion& q, const EvalContext& ctx,
                                   std::vector<RankedPath>* refined_out = nullptr,
                                   RetrievalOutcome* outcome_out = nullptr) {
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };
    RunRecord rec;
    rec.question_id = q.question_id;
    rec.label = q.label;
    try {
        auto t0 = clock::now();
        std::optional<EmbeddingVector> qvec;
        if (ctx.embedder) qvec = embed(question_text(q), *ctx.embedder);
        auto t1 = clock::now();
        rec.timings.embed_s = seconds(t0, t1);

        StrategyContext sctx = ctx.strategy_context(qvec ? &*qvec : nullptr);
        RetrievalOutcome outcome = run_strategy(q, ctx.strategy, sctx);

        std::vector<RankedPath> refined;
        if (ctx.strategy == Strategy::TripleVec) {
            auto ranked = take_top(rank_triples(outcome.triples), ctx.top);
            for (const ScoredItem& item : ranked) {
                auto t = parse_triple_item_id(item.item_id);
                if (!t) continue;
                Path p{{Hop{t->head, t->relation, t->tail, Direction::Outgoing}},
                       Strategy::TripleVec};
                refined.push_back({std::move(p), item.score, RankScheme::Similarity});
            }
        } else if (outcome.paths.size() > 1) {
            refined = take_top(rank_paths(outcome.paths, outcome.relations, ctx.scheme), ctx.top);
        } else {
            for (const Path& p : outcome.paths) refined.push_back({p, 0.0, ctx.scheme});
        }
        auto t2 = clock::now();
        rec.timings.retrieval_s = seconds(t1, t2);
        rec.context_size = refined.size();

        std::string context = verbalize_paths(refined, *ctx.store);
        PromptPayload payload =
            context.empty()
                ? build_prompt(PromptKind::Matcher, q, *ctx.prompts, nullptr, ctx.sampling)
                : build_prompt(PromptKind::RagMatcher, q, *ctx.prompts, &context, ctx.sampling);
        rec.used_rag = !context.empty();
        std::string raw = complete(*ctx.llm, ctx.model, payload);
        rec.decision = parse_answer(raw);
        rec.timings.generation_s = seconds(t2, clock::now());

        if (refined_out) *refined_out = std::move(refined);
        if (outcome_out) *outcome_out = std::move(outcome);
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.decision = {Verdict::Negative, "", ParseStatus::Unparseable};
    }
    return rec;
}

inline nlohmann::json result_json(const RunRecord& r) {
    return {{"question_id", r.question_id},
            {"verdict", to_string(r.decision.verdict)},
            {"parse_status", to_string(r.decision.parse_status)},
            {"label", r.label},
            {"used_rag", r.used_rag},
            {"context_size", r.context_size},
            {"failed", r.failed},
            {"error", r.error},
            {"raw_text", r.decision.raw_text}};
}

inline nlohmann::json timing_json(const RunRecord& r) {
    return {{"question_id", r.question_id},
            {"embed_s", r.timings.embed_s},
            {"retrieval_s", r.timings.retrieval_s},
            {"generation_s", r.timings.generation_s}};
}

// Evaluates every question; configuration problems abort before the first
// question, per-question failures are recorded and the run continues.
// Records are streamed to the two sinks in question order as they finish.
inline std::vector<RunRecord> run_eval(const std::vector<MatchQuestion>& questions,
                                       const EvalContext& ctx, std::ostream* results_out = nullptr,
                                       std::ostream* timings_out = nullptr) {
    ctx.validate();
    std::vector<RunRecord> records;
    records.reserve(questions.size());
    auto emit = [&](RunRecord rec) {
        if (results_out) *results_out << result_json(rec).dump() << '\n' << std::flush;
        if (timings_out) *timings_out << timing_json(rec).dump() << '\n' << std::flush;
        records.push_back(std::move(rec));
    };
    std::size_t par = std::max<std::size_t>(ctx.parallelism, 1);
    if (par == 1) {
        for (const MatchQuestion& q : questions) emit(evaluate_question(q, ctx));
        return records;
    }
    for (std::size_t base = 0; base < questions.size(); base += par) {
        std::size_t n = std::min(par, questions.size() - base);
        std::vector<std::future<RunRecord>> futs;
        futs.reserve(n);
        for (std::size_t j = 0; j < n; ++j)
            futs.push_back(std::async(std::launch::async, [&, j] {
                return evaluate_question(questions[base + j], ctx);
            }));
        for (auto& f : futs) emit(f.get());
    }
    return records;
}

// ── Reporting ──────────────────────────────────────────────────────────

struct ReportFiles {
    std::string results;
    std::string timings;
    std::string summary;
    std::string timing_summary;
};

inline std::string fnv64_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

// Writes the four report files. config_echo is the effective configuration;
// its hash ties a report to the exact settings that produced it.
inline ReportFiles report(const std::vector<RunRecord>& records, const Metrics& metrics,
                          const std::string& out_dir,
                          const nlohmann::json& config_echo = nlohmann::json::object()) {
    std::filesystem::create_directories(out_dir);
    auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
    ReportFiles files{path("results.jsonl"), path("timings.jsonl"), path("summary.json"),
                      path("timing_summary.json")};

    {
        std::ofstream out(files.results, std::ios::trunc);
        if (!out) throw IoError("cannot write " + files.results);
        for (const RunRecord& r : records) out << result_json(r).dump() << '\n';
    }
    {
        std::ofstream out(files.timings, std::ios::trunc);
        if (!out) throw IoError("cannot write " + files.timings);
        for (const RunRecord& r : records) out << timing_json(r).dump() << '\n';
    }

    std::size_t failed = 0, unparseable = 0, with_context = 0;
    for (const RunRecord& r : records) {
        failed += r.failed;
        unparseable += r.decision.parse_status == ParseStatus::Unparseable;
        with_context += r.used_rag;
    }
    nlohmann::json summary{
        {"questions", records.size()},
        {"failed", failed},
        {"unparseable", unparseable},
        {"with_context", with_context},
        {"metrics",
         {{"tp", metrics.tp},
          {"fp", metrics.fp},
          {"fn", metrics.fn},
          {"tn", metrics.tn},
          {"precision", round2(metrics.precision)},
          {"recall", round2(metrics.recall)},
          {"f1", round2(metrics.f1)}}},
        {"config", config_echo},
        {"config_hash", fnv64_hex(config_echo.dump())},
    };
    {
        std::ofstream out(files.summary, std::ios::trunc);
        if (!out) throw IoError("cannot write " + files.summary);
        out << summary.dump(2) << '\n';
    }

    double embed = 0, retrieval = 0, generation = 0;
    for (const RunRecord& r : records) {
        embed += r.timings.embed_s;
        retrieval += r.timings.retrieval_s;
        generation += r.timings.generation_s;
    }
    double n = records.empty() ? 1.0 : static_cast<double>(records.size());
    nlohmann::json timing_summary{
        {"questions", records.size()},
        {"mean_embed_s", embed / n},
        {"mean_retrieval_s", retrieval / n},
        {"mean_generation_s", generation / n},
    };
    {
        std::ofstream out(files.timing_summary, std::ios::trunc);
        if (!out) throw IoError("cannot write " + files.timing_summary);
        out << timing_summary.dump(2) << '\n';
    }
    return files;
}

}  // namespace kgrag
