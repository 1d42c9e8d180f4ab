#pragma once
// Question construction, path verbalization, prompt assembly, and answer
// parsing for the matcher role.
//
// A retrieved path is rendered as semi-structured text the model can read
// directly: every hop is "head_label (head_id), relation_label
// (relation_id), tail_label (tail_id)", hops are joined by arrows, paths
// separated by newlines. Unparseable model output maps to a negative
// verdict with a status flag rather than being dropped.

#include "kgrag/chat_client.hpp"
#include "kgrag/embedding.hpp"
#include "kgrag/kg_store.hpp"
#include "kgrag/prompts.hpp"
#include "kgrag/ranking.hpp"
#include "kgrag/types.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

namespace kgrag {

struct PromptPayload {
    std::string system_text;
    std::string user_text;
    SamplingParams params;
};

enum class Verdict { Positive, Negative };
enum class ParseStatus { Clean, Fallback, Unparseable };

inline const char* to_string(Verdict v) { return v == Verdict::Positive ? "positive" : "negative"; }
inline const char* to_string(ParseStatus s) {
    switch (s) {
        case ParseStatus::Clean: return "clean";
        case ParseStatus::Fallback: return "fallback";
        case ParseStatus::Unparseable: return "unparseable";
    }
    return "?";
}

struct MatchDecision {
    Verdict verdict = Verdict::Negative;
    std::string raw_text;
    ParseStatus parse_status = ParseStatus::Clean;
};

// ── Question construction ──────────────────────────────────────────────

inline MatchQuestion build_question(const std::string& source_attr, const std::string& target_attr,
                                    const std::string& desc_source, const std::string& desc_target,
                                    int label, const std::string& question_id) {
    if (source_attr.empty() || target_attr.empty())
        throw FormatError("question " + question_id + " is missing an attribute name");
    if (label != 0 && label != 1)
        throw FormatError("question " + question_id + " has label " + std::to_string(label) +
                          ", expected 0 or 1");
    return {question_id, source_attr, target_attr, desc_source, desc_target, label};
}

// The canonical question text fed to both the matcher prompt and the
// question embedder.
inline std::string question_text(const MatchQuestion& q) { return compose_text(q); }

// ── Path verbalization ─────────────────────────────────────────────────

inline std::string verbalize_hop(const Hop& hop, const KgStore& store) {
    auto entity_clause = [&](const std::string& id) {
        const Entity* e = store.lookup_entity(id);
        const std::string& label = (e && !e->label.empty()) ? e->label : id;
        return label + " (" + id + ")";
    };
    const Relation* r = store.lookup_relation(hop.relation);
    const std::string& rel_label = (r && !r->label.empty()) ? r->label : hop.relation;
    return entity_clause(hop.from()) + ", " + rel_label + " (" + hop.relation + "), " +
           entity_clause(hop.to());
}

inline std::string verbalize_path(const Path& path, const KgStore& store) {
    std::string out;
    for (std::size_t i = 0; i < path.hops.size(); ++i) {
        if (i > 0) out += " \xE2\x86\x92 ";  // arrow between hops
        out += verbalize_hop(path.hops[i], store);
    }
    return out;
}

// Empty input gives an empty string; the caller then falls back to the
// baseline matcher prompt.
inline std::string verbalize_paths(const std::vector<RankedPath>& paths, const KgStore& store) {
    std::string out;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (i > 0) out += '\n';
        out += verbalize_path(paths[i].path, store);
    }
    return out;
}

// ── Prompt assembly ────────────────────────────────────────────────────

inline PromptPayload build_prompt(PromptKind kind, const MatchQuestion& q, const PromptSet& prompts,
                                  const std::string* context = nullptr,
                                  SamplingParams params = {}) {
    const PromptTemplate& tmpl = prompts.get(kind);
    std::map<std::string, std::string> subs{{"question", question_text(q)}};
    if (kind == PromptKind::RagMatcher) {
        if (!context || context->empty())
            throw ConfigError("rag_matcher prompt requires retrieved KG context");
        subs["paths"] = *context;
    }
    return {tmpl.system_text, render_template(tmpl.user_template, subs), params};
}

inline std::string complete(ChatClient& client, const std::string& model,
                            const PromptPayload& payload) {
    return client.complete({model, payload.system_text, payload.user_text, payload.params});
}

// ── Answer parsing ─────────────────────────────────────────────────────

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Leading token of the first line: "1"/"yes..." or "0"/"no...".
inline std::optional<Verdict> leading_verdict(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' ||
                               text[i] == '\r' || text[i] == '"' || text[i] == '*' ||
                               text[i] == '#'))
        ++i;
    if (i >= text.size()) return std::nullopt;
    char c = text[i];
    bool last = i + 1 >= text.size();
    char next = last ? '\0' : text[i + 1];
    if (c == '1' && !std::isdigit(static_cast<unsigned char>(next))) return Verdict::Positive;
    if (c == '0' && !std::isdigit(static_cast<unsigned char>(next))) return Verdict::Negative;
    std::string word;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i])))
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++])));
    if (word == "yes") return Verdict::Positive;
    if (word == "no") return Verdict::Negative;
    return std::nullopt;
}

// Whole-text scan for "answer: 1" / "answer: no" style statements.
inline std::optional<Verdict> answer_statement(const std::string& text) {
    std::string low = lower(text);
    std::size_t pos = 0;
    std::optional<Verdict> found;
    while ((pos = low.find("answer", pos)) != std::string::npos) {
        std::size_t i = pos + 6;
        while (i < low.size() && (low[i] == ' ' || low[i] == ':' || low[i] == '=' ||
                                  low[i] == 'i' || low[i] == 's'))
            ++i;
        if (i < low.size()) {
            if (low[i] == '1' || low.compare(i, 3, "yes") == 0)
                found = Verdict::Positive;
            else if (low[i] == '0' || low.compare(i, 2, "no") == 0)
                found = Verdict::Negative;
        }
        pos += 6;
    }
    return found;  // last statement wins
}

}  // namespace detail

// Maps raw model text to a binary verdict. First-line "1"/"yes" or
// "0"/"no" parses clean; otherwise an "answer: ..." statement anywhere in
// the text is used as a fallback; otherwise the verdict defaults to
// negative with the unparseable flag set.
inline MatchDecision parse_answer(const std::string& raw) {
    std::string first_line = raw.substr(0, raw.find('\n'));
    if (auto v = detail::leading_verdict(first_line))
        return {*v, raw, ParseStatus::Clean};
    if (auto v = detail::answer_statement(raw)) return {*v, raw, ParseStatus::Fallback};
    return {Verdict::Negative, raw, ParseStatus::Unparseable};
}

}  // namespace kgrag
