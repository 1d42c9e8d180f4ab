// kgrag command-line front end: ingest, embed, index, retrieve, match, eval.
//
// One JSON config file plus flag overrides (flags win). The effective
// configuration is echoed into every report so runs are reproducible.

#include <CLI11.hpp>

#include "kgrag/config.hpp"
#include "kgrag/evaluation.hpp"
#include "kgrag/http_clients.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace kgrag;

namespace {

struct Overrides {
    std::optional<std::string> strategy;
    std::optional<std::string> top;
    std::optional<std::string> scheme;
    std::optional<std::string> replay;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> dataset;

    void apply(AppConfig& cfg) const {
        if (strategy) cfg.strategy = *strategy;
        if (top) cfg.ranking.top = *top;
        if (scheme) cfg.ranking.scheme = *scheme;
        if (replay) cfg.replay = *replay;
        if (seed) {
            cfg.seed = *seed;
            cfg.index.hnsw.seed = *seed;
        }
        if (out) cfg.paths.out_dir = *out;
        if (dataset) cfg.paths.dataset = *dataset;
        cfg.validate();
    }
};

void add_common_flags(CLI::App* cmd, std::string& config_path, Overrides& ov) {
    cmd->add_option("--config", config_path, "JSON config file (defaults used when omitted)");
    cmd->add_option("--strategy", ov.strategy,
                    "retrieval strategy: triple_vec | entity_vec_bfs | entity_llm_bfs | "
                    "subgraph_llm");
    cmd->add_option("--top", ov.top, "refined paths kept for the prompt: 1 | 2 | all");
    cmd->add_option("--scheme", ov.scheme,
                    "ranking scheme: frequency | normalized | similarity | auto");
    cmd->add_option("--replay", ov.replay, "LLM call handling: record | replay | live");
    cmd->add_option("--seed", ov.seed, "RNG seed (HNSW level assignment, hash embedder)");
    cmd->add_option("--out", ov.out, "output directory");
    cmd->add_option("--dataset", ov.dataset, "dataset CSV path");
}

AppConfig effective_config(const std::string& config_path, const Overrides& ov) {
    AppConfig cfg = config_path.empty() ? AppConfig{} : load_config(config_path);
    ov.apply(cfg);
    return cfg;
}

void require_path(const std::string& path, const std::string& what, const std::string& hint) {
    if (path.empty())
        throw ConfigError("config is missing " + what + (hint.empty() ? "" : " (" + hint + ")"));
    if (!fs::exists(path))
        throw ConfigError(what + " not found: " + path + (hint.empty() ? "" : " (" + hint + ")"));
}

KgStore load_store(const AppConfig& cfg, bool verbose = false) {
    KgStore store;
    IngestMode mode = cfg.resolved_ingest_mode();
    auto note = [&](const std::string& what, const IngestReport& r) {
        if (verbose)
            std::cout << what << ": loaded " << r.loaded << ", skipped " << r.skipped << "\n";
    };
    if (!cfg.paths.entities.empty() || !cfg.paths.relations.empty()) {
        require_path(cfg.paths.entities, "paths.entities", "entity alias file");
        require_path(cfg.paths.relations, "paths.relations", "relation alias file");
        note("labels", store.ingest_labels(cfg.paths.entities, cfg.paths.relations, mode));
    }
    if (!cfg.paths.entity_descriptions.empty()) {
        require_path(cfg.paths.entity_descriptions, "paths.entity_descriptions", "");
        note("entity descriptions",
             store.ingest_descriptions(cfg.paths.entity_descriptions, false, mode));
    }
    if (!cfg.paths.relation_descriptions.empty()) {
        require_path(cfg.paths.relation_descriptions, "paths.relation_descriptions", "");
        note("relation descriptions",
             store.ingest_descriptions(cfg.paths.relation_descriptions, true, mode));
    }
    require_path(cfg.paths.triples, "paths.triples", "triples dump file");
    auto started = std::chrono::steady_clock::now();
    IngestReport r = store.ingest_triples(cfg.paths.triples, mode);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    note("triples", r);
    if (verbose) std::cout << "triple ingestion took " << secs << " s\n";
    return store;
}

std::unique_ptr<EmbeddingProvider> make_embedder(const AppConfig& cfg) {
    if (cfg.embedding.provider == "hash")
        return std::make_unique<HashEmbedder>(cfg.embedding.dim, cfg.seed);
    return std::make_unique<HttpEmbedder>(cfg.embedding.endpoint, cfg.embedding.model,
                                          cfg.embedding.api_key_env, cfg.embedding.dim,
                                          cfg.embedding.timeout_s, cfg.embedding.retries);
}

// Owns the chat-client stack for one command.
struct LlmStack {
    std::unique_ptr<ReplayStore> store;
    std::unique_ptr<ChatClient> http;
    std::unique_ptr<ChatClient> client;
};

LlmStack make_llm(const AppConfig& cfg) {
    LlmStack stack;
    ReplayMode mode = parse_replay_mode(cfg.replay);
    if (mode != ReplayMode::Replay)
        stack.http = std::make_unique<HttpChatClient>(cfg.llm.endpoint, cfg.llm.api_key_env,
                                                      cfg.llm.timeout_s, cfg.llm.retries,
                                                      cfg.llm.min_interval_ms);
    if (mode == ReplayMode::Live) {
        stack.client = std::move(stack.http);
        return stack;
    }
    if (mode == ReplayMode::Replay && !fs::exists(cfg.paths.replay_store))
        throw ConfigError("replay store not found: " + cfg.paths.replay_store +
                          " (run with --replay record first)");
    fs::path store_path(cfg.paths.replay_store);
    if (store_path.has_parent_path()) fs::create_directories(store_path.parent_path());
    stack.store = std::make_unique<ReplayStore>(cfg.paths.replay_store);
    stack.client =
        std::make_unique<RecordReplayClient>(mode, stack.store.get(), stack.http.get());
    return stack;
}

PromptSet load_prompts(const AppConfig& cfg) {
    return cfg.paths.templates_dir.empty() ? PromptSet::defaults()
                                           : PromptSet::load_dir(cfg.paths.templates_dir);
}

std::string embeddings_path(const AppConfig& cfg, const std::string& what) {
    return (fs::path(cfg.paths.embeddings_dir) / (what + ".kgem")).string();
}

std::string index_path(const AppConfig& cfg, const std::string& what) {
    return (fs::path(cfg.paths.index_dir) / (what + ".kgix")).string();
}

std::unique_ptr<VectorIndex> load_index_for(const AppConfig& cfg, const std::string& what,
                                            bool required) {
    std::string path = index_path(cfg, what);
    if (!fs::exists(path)) {
        if (required)
            throw ConfigError("missing " + what + " index " + path + " (run `index` first)");
        return nullptr;
    }
    return load_index(path);
}

std::vector<CorpusItem> corpus_for(const std::string& what, const KgStore& store,
                                   const AppConfig& cfg) {
    std::vector<CorpusItem> items;
    if (what == "entities") {
        for (std::size_t i = 0; i < store.entity_count(); ++i) {
            const Entity& e = store.entity_at(static_cast<std::uint32_t>(i));
            items.push_back({e.id, ItemKind::Entity, compose_text(e)});
        }
    } else if (what == "relations") {
        for (std::size_t i = 0; i < store.relation_count(); ++i) {
            const Relation& r = store.relation_at(static_cast<std::uint32_t>(i));
            items.push_back({r.id, ItemKind::Relation, compose_text(r)});
        }
    } else if (what == "triples") {
        for (std::size_t i = 0; i < store.triple_count(); ++i) {
            const auto& t = store.triple_at(i);
            Triple triple{store.entity_at(t[0]).id, store.relation_at(t[1]).id,
                          store.entity_at(t[2]).id};
            items.push_back({triple_item_id(triple), ItemKind::Triple,
                             compose_text(triple, store)});
        }
    } else if (what == "questions") {
        require_path(cfg.paths.dataset, "paths.dataset", "needed to embed questions");
        for (const MatchQuestion& q : load_dataset(cfg.paths.dataset))
            items.push_back({q.question_id, ItemKind::Question, question_text(q)});
    } else {
        throw ConfigError("unknown embed target '" + what +
                          "' (expected entities, relations, triples, questions)");
    }
    return items;
}

EvalContext make_eval_context(const AppConfig& cfg, const KgStore& store,
                              EmbeddingProvider* embedder, ChatClient* llm,
                              const PromptSet* prompts, const VectorIndex* entity_idx,
                              const VectorIndex* relation_idx, const VectorIndex* triple_idx) {
    EvalContext ctx;
    ctx.store = &store;
    ctx.entity_index = entity_idx;
    ctx.relation_index = relation_idx;
    ctx.triple_index = triple_idx;
    ctx.embedder = embedder;
    ctx.llm = llm;
    ctx.prompts = prompts;
    ctx.model = cfg.llm.model;
    ctx.sampling = cfg.llm.sampling;
    ctx.retrieval = cfg.retrieval;
    ctx.strategy = parse_strategy(cfg.strategy);
    ctx.scheme = cfg.resolved_scheme();
    ctx.top = TopN::parse(cfg.ranking.top);
    ctx.parallelism = cfg.parallelism;
    return ctx;
}

// Loads whatever indexes the strategy can use: hard requirements throw,
// the relation index is optional (frequency ranking degrades without it).
struct IndexSet {
    std::unique_ptr<VectorIndex> entities;
    std::unique_ptr<VectorIndex> relations;
    std::unique_ptr<VectorIndex> triples;
};

IndexSet load_strategy_indexes(const AppConfig& cfg, Strategy strategy) {
    IndexSet set;
    switch (strategy) {
        case Strategy::TripleVec:
            set.triples = load_index_for(cfg, "triples", true);
            break;
        case Strategy::EntityVecBfs:
            set.entities = load_index_for(cfg, "entities", true);
            set.relations = load_index_for(cfg, "relations", false);
            break;
        case Strategy::EntityLlmBfs:
        case Strategy::SubgraphLlm:
            set.relations = load_index_for(cfg, "relations", false);
            break;
    }
    return set;
}

int cmd_ingest(const AppConfig& cfg) {
    KgStore store = load_store(cfg, true);
    StoreStats s = store.stats();
    std::cout << "entities:   " << s.entity_count << "\n"
              << "relations:  " << s.relation_count << "\n"
              << "triples:    " << s.triple_count << "\n"
              << "max degree: " << s.max_degree << "\n";
    return 0;
}

int cmd_embed(const AppConfig& cfg, const std::vector<std::string>& what) {
    auto embedder = make_embedder(cfg);
    bool needs_store = false;
    for (const auto& w : what) needs_store |= w != "questions";
    std::optional<KgStore> store;
    if (needs_store) store = load_store(cfg);
    fs::create_directories(cfg.paths.embeddings_dir);
    for (const auto& w : what) {
        static const KgStore empty_store;
        const KgStore& s = store ? *store : empty_store;
        auto items = corpus_for(w, s, cfg);
        std::size_t n = embed_corpus(items, *embedder, cfg.embedding.batch_size,
                                     embeddings_path(cfg, w), cfg.embedding.parallelism);
        std::cout << w << ": " << n << " new embeddings -> " << embeddings_path(cfg, w) << "\n";
    }
    return 0;
}

int cmd_index(const AppConfig& cfg, const std::vector<std::string>& what) {
    fs::create_directories(cfg.paths.index_dir);
    for (const auto& w : what) {
        std::string src = embeddings_path(cfg, w);
        if (!fs::exists(src))
            throw ConfigError("missing embeddings file " + src + " (run `embed` first)");
        auto items = load_embeddings(src);
        auto idx = build_index(items, cfg.resolved_index_mode(), cfg.index.hnsw);
        idx->save(index_path(cfg, w));
        std::cout << w << ": indexed " << idx->size() << " vectors (" << cfg.index.mode
                  << ") -> " << index_path(cfg, w) << "\n";
    }
    return 0;
}

int cmd_retrieve(const AppConfig& cfg) {
    require_path(cfg.paths.dataset, "paths.dataset", "dataset CSV");
    KgStore store = load_store(cfg);
    auto embedder = make_embedder(cfg);
    Strategy strategy = parse_strategy(cfg.strategy);
    IndexSet indexes = load_strategy_indexes(cfg, strategy);
    LlmStack llm;
    PromptSet prompts = load_prompts(cfg);
    bool needs_llm = strategy == Strategy::EntityLlmBfs || strategy == Strategy::SubgraphLlm;
    if (needs_llm) llm = make_llm(cfg);

    StrategyContext ctx;
    ctx.store = &store;
    ctx.entity_index = indexes.entities.get();
    ctx.relation_index = indexes.relations.get();
    ctx.triple_index = indexes.triples.get();
    ctx.embedder = embedder.get();
    ctx.llm = {llm.client.get(), &prompts, cfg.llm.model, cfg.llm.sampling};
    ctx.config = cfg.retrieval;

    fs::create_directories(cfg.paths.out_dir);
    std::string out_path = (fs::path(cfg.paths.out_dir) / "retrieval.jsonl").string();
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + out_path);
    for (const MatchQuestion& q : load_dataset(cfg.paths.dataset))
        out << to_json(run_strategy(q, strategy, ctx)).dump() << '\n';
    std::cout << "retrieval outcomes -> " << out_path << "\n";
    return 0;
}

int cmd_match(const AppConfig& cfg, const std::string& q1, const std::string& q2,
              const std::string& d1, const std::string& d2) {
    KgStore store = load_store(cfg);
    auto embedder = make_embedder(cfg);
    Strategy strategy = parse_strategy(cfg.strategy);
    IndexSet indexes = load_strategy_indexes(cfg, strategy);
    LlmStack llm = make_llm(cfg);
    PromptSet prompts = load_prompts(cfg);
    EvalContext ctx = make_eval_context(cfg, store, embedder.get(), llm.client.get(), &prompts,
                                        indexes.entities.get(), indexes.relations.get(),
                                        indexes.triples.get());
    ctx.validate();

    MatchQuestion q = build_question(q1, q2, d1, d2, 0, "adhoc");
    std::vector<RankedPath> refined;
    RunRecord rec = evaluate_question(q, ctx, &refined);
    if (rec.failed) {
        std::cerr << "error: " << rec.error << "\n";
        return 1;
    }
    std::cout << "question: " << question_text(q) << "\n";
    std::string context = verbalize_paths(refined, store);
    std::cout << "kg context (" << rec.context_size << " paths):"
              << (context.empty() ? " <none - baseline prompt used>" : "") << "\n";
    if (!context.empty()) std::cout << context << "\n";
    std::cout << "verdict: " << to_string(rec.decision.verdict) << " ("
              << to_string(rec.decision.parse_status) << ")\n"
              << "raw: " << rec.decision.raw_text << "\n";
    return 0;
}

int cmd_eval(const AppConfig& cfg) {
    require_path(cfg.paths.dataset, "paths.dataset", "dataset CSV");
    KgStore store = load_store(cfg);
    auto embedder = make_embedder(cfg);
    Strategy strategy = parse_strategy(cfg.strategy);
    IndexSet indexes = load_strategy_indexes(cfg, strategy);
    LlmStack llm = make_llm(cfg);
    PromptSet prompts = load_prompts(cfg);
    EvalContext ctx = make_eval_context(cfg, store, embedder.get(), llm.client.get(), &prompts,
                                        indexes.entities.get(), indexes.relations.get(),
                                        indexes.triples.get());

    auto questions = load_dataset(cfg.paths.dataset);
    fs::create_directories(cfg.paths.out_dir);
    std::ofstream results((fs::path(cfg.paths.out_dir) / "results.jsonl").string(),
                          std::ios::trunc);
    std::ofstream timings((fs::path(cfg.paths.out_dir) / "timings.jsonl").string(),
                          std::ios::trunc);
    auto records = run_eval(questions, ctx, &results, &timings);
    results.close();
    timings.close();

    Metrics m = compute_metrics(records);
    ReportFiles files = report(records, m, cfg.paths.out_dir, config_to_json(cfg));
    std::size_t failed = 0;
    for (const auto& r : records) failed += r.failed;
    std::printf("questions: %zu  failed: %zu\n", records.size(), failed);
    std::printf("P: %.2f  R: %.2f  F1: %.2f  (TP %zu, FP %zu, FN %zu, TN %zu)\n",
                round2(m.precision), round2(m.recall), round2(m.f1), m.tp, m.fp, m.fn, m.tn);
    std::cout << "report -> " << files.summary << "\n";
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kgrag: knowledge-graph retrieval-augmented schema matching"};
    app.require_subcommand(1);
    app.footer("Config keys and defaults (JSON file given via --config):\n" +
               config_reference());

    std::string config_path;
    Overrides ov;
    std::vector<std::string> embed_what{"entities", "relations", "triples"};
    std::vector<std::string> index_what{"entities", "relations", "triples"};
    std::string q1, q2, d1, d2;

    CLI::App* ingest = app.add_subcommand("ingest", "parse KG dump files and print store stats");
    add_common_flags(ingest, config_path, ov);

    CLI::App* embed_cmd =
        app.add_subcommand("embed", "compose item texts and persist their embeddings");
    add_common_flags(embed_cmd, config_path, ov);
    embed_cmd->add_option("--what", embed_what,
                          "entities | relations | triples | questions (repeatable)");

    CLI::App* index_cmd = app.add_subcommand("index", "build vector indexes from embeddings");
    add_common_flags(index_cmd, config_path, ov);
    index_cmd->add_option("--what", index_what, "entities | relations | triples (repeatable)");
    std::string index_mode;
    index_cmd->add_option("--mode", index_mode, "exact | hnsw");

    CLI::App* retrieve =
        app.add_subcommand("retrieve", "run a retrieval strategy over a dataset (audit stream)");
    add_common_flags(retrieve, config_path, ov);

    CLI::App* match = app.add_subcommand("match", "decide one attribute pair");
    add_common_flags(match, config_path, ov);
    match->add_option("--q1", q1, "source attribute (table-attribute)")->required();
    match->add_option("--q2", q2, "target attribute (table-attribute)")->required();
    match->add_option("--d1", d1, "source attribute description");
    match->add_option("--d2", d2, "target attribute description");

    CLI::App* eval = app.add_subcommand("eval", "run the full benchmark and write reports");
    add_common_flags(eval, config_path, ov);

    CLI11_PARSE(app, argc, argv);

    try {
        AppConfig cfg = effective_config(config_path, ov);
        if (ingest->parsed()) return cmd_ingest(cfg);
        if (embed_cmd->parsed()) return cmd_embed(cfg, embed_what);
        if (index_cmd->parsed()) {
            if (!index_mode.empty()) {
                cfg.index.mode = index_mode;
                cfg.validate();
            }
            return cmd_index(cfg, index_what);
        }
        if (retrieve->parsed()) return cmd_retrieve(cfg);
        if (match->parsed()) return cmd_match(cfg, q1, q2, d1, d2);
        if (eval->parsed()) return cmd_eval(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
