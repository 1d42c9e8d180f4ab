#pragma once
// Prompt templates for the matcher and retriever roles.
//
// Templates are plain text with {question} and, for the KG-augmented
// matcher, {paths} placeholders. Built-in defaults can be overridden by
// files on disk so prompt wording is editable without a rebuild. A template
// file may carry an optional system message above a line containing only
// "---"; the rest is the user message.

#include "kgrag/errors.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace kgrag {

enum class PromptKind {
    Matcher,           // attribute pair only
    RagMatcher,        // attribute pair plus retrieved KG paths
    EntityRetriever,   // ask the model for relevant KG entities
    SubgraphRetriever, // ask the model for relevant KG paths
};

inline const char* to_string(PromptKind k) {
    switch (k) {
        case PromptKind::Matcher: return "matcher";
        case PromptKind::RagMatcher: return "rag_matcher";
        case PromptKind::EntityRetriever: return "entity_retriever";
        case PromptKind::SubgraphRetriever: return "subgraph_retriever";
    }
    return "?";
}

struct PromptTemplate {
    std::string system_text;
    std::string user_template;
};

namespace prompt_defaults {

inline constexpr const char* kMatcherSystem =
    "You are a schema matching assistant. You decide whether two database "
    "attributes are semantically matched. Answer 1 for matched or 0 for not "
    "matched on the first line, then give a short explanation.";

inline constexpr const char* kMatcherUser = R"(Your task is to decide whether two attributes from different database schemas are semantically matched. Two attributes are matched when they describe the same real-world concept, even if their names or wording differ.

Example 1:
Attribute1: person-birth_datetime, Description: the date and time of birth of the person; Attribute2: patient-date_of_birth, Description: the patient's birth date. Are they semantically matched?
Answer: 1
Explanation: Both attributes record the date of birth of a person, so they describe the same concept.

Example 2:
Attribute1: visit-visit_id, Description: a unique identifier for each visit; Attribute2: drug-drug_code, Description: the internal code of the drug. Are they semantically matched?
Answer: 0
Explanation: A visit identifier and a drug code identify different kinds of records, so they are not the same concept.

Question: {question}
Answer: )";

inline constexpr const char* kRagMatcherSystem =
    "You are a schema matching assistant. Knowledge-graph paths relevant to "
    "the question are provided as context. Use them to resolve semantic "
    "ambiguity. Answer 1 for matched or 0 for not matched on the first line, "
    "then give a short explanation.";

inline constexpr const char* kRagMatcherUser = R"(Your task is to decide whether two attributes from different database schemas are semantically matched. Knowledge-graph paths are provided as context; each hop is written as head (ID), relation (ID), tail (ID) and hops are joined by arrows. Use this context to ground your decision.

Example 1:
KG paths: date of death (P570), opposite of (P461), date of birth (P569)
Question: Attribute1: person-death_datetime, Description: the date and time of death of the person; Attribute2: person-birth_datetime, Description: the date and time of birth of the person. Are they semantically matched?
Answer: 0
Explanation: The knowledge graph states that the date of death is the opposite of the date of birth, so despite the similar wording the attributes are not semantically matched.

Example 2:
KG paths: physician (Q39631), subclass of (P279), health professional (Q15924224)
Question: Attribute1: provider-provider_id, Description: a unique identifier for each provider; Attribute2: hun_case-attend_doctor, Description: the doctor attending the case. Are they semantically matched?
Answer: 1
Explanation: The knowledge graph connects physicians to health professionals, which supports that an attending doctor is a provider, so the attributes are semantically matched.

KG paths: {paths}
Question: {question}
Answer: )";

inline constexpr const char* kEntityRetrieverSystem =
    "You retrieve entities from a knowledge graph. Given a schema matching "
    "question, list the knowledge-graph entities most relevant to it.";

inline constexpr const char* kEntityRetrieverUser = R"(Given a schema matching question, list the knowledge-graph entities that are most relevant to the attributes mentioned in it. Write each entity as label (ID) when you know the identifier, otherwise just the label. Separate entities with commas. List at most five entities and nothing else.

Example 1:
Question: Attribute1: provider-provider_id, Description: a unique identifier for each provider; Attribute2: hun_case-attend_doctor, Description: the doctor attending the case. Are they semantically matched?
Entities: physician (Q39631), health professional (Q15924224), patient (Q181600)

Example 2:
Question: Attribute1: person-death_datetime; Attribute2: person-birth_datetime. Are they semantically matched?
Entities: date of death (P570), date of birth (P569)

Question: {question}
Entities: )";

inline constexpr const char* kSubgraphRetrieverSystem =
    "You retrieve paths from a knowledge graph. Given a schema matching "
    "question, return the knowledge-graph paths most relevant to it.";

inline constexpr const char* kSubgraphRetrieverUser = R"(Given a schema matching question, return the knowledge-graph paths that are most relevant to it. Write every hop as head (ID), relation (ID), tail (ID). Join consecutive hops with an arrow. Put each path on its own line and return nothing else.

Example 1:
Question: Attribute1: measurement-measurement_time; Attribute2: hun_case-interventions_date. Are they semantically matched?
Paths: beneficiary (Q2596417), subclass of (Q21514624), customer (Q852835) -> customer (Q852835), subclass of (Q21514624), patient (Q181600)

Example 2:
Question: Attribute1: provider-provider_id; Attribute2: hun_user-external_id. Are they semantically matched?
Paths: physician (Q39631), subclass of (P279), health professional (Q15924224)

Question: {question}
Paths: )";

}  // namespace prompt_defaults

namespace detail {

inline bool contains_placeholder(const std::string& text, const std::string& name) {
    return text.find("{" + name + "}") != std::string::npos;
}

inline void replace_all_placeholder(std::string& text, const std::string& name,
                                    const std::string& value) {
    const std::string token = "{" + name + "}";
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
}

}  // namespace detail

// Substitutes placeholders and verifies none of the known ones survive.
inline std::string render_template(const std::string& tmpl,
                                   const std::map<std::string, std::string>& subs) {
    std::string out = tmpl;
    for (const auto& [name, value] : subs) detail::replace_all_placeholder(out, name, value);
    for (const char* name : {"question", "paths"})
        if (detail::contains_placeholder(out, name))
            throw ConfigError(std::string("unresolved placeholder {") + name + "} after render");
    return out;
}

class PromptSet {
public:
    static PromptSet defaults() {
        PromptSet p;
        p.matcher_ = {prompt_defaults::kMatcherSystem, prompt_defaults::kMatcherUser};
        p.rag_matcher_ = {prompt_defaults::kRagMatcherSystem, prompt_defaults::kRagMatcherUser};
        p.entity_retriever_ = {prompt_defaults::kEntityRetrieverSystem,
                               prompt_defaults::kEntityRetrieverUser};
        p.subgraph_retriever_ = {prompt_defaults::kSubgraphRetrieverSystem,
                                 prompt_defaults::kSubgraphRetrieverUser};
        p.validate();
        return p;
    }

    // Loads <dir>/{matcher,rag_matcher,entity_retriever,subgraph_retriever}.txt,
    // falling back to the built-in default for any missing file.
    static PromptSet load_dir(const std::string& dir) {
        PromptSet p = defaults();
        p.matcher_ = load_file_or(dir, "matcher", p.matcher_);
        p.rag_matcher_ = load_file_or(dir, "rag_matcher", p.rag_matcher_);
        p.entity_retriever_ = load_file_or(dir, "entity_retriever", p.entity_retriever_);
        p.subgraph_retriever_ = load_file_or(dir, "subgraph_retriever", p.subgraph_retriever_);
        p.validate();
        return p;
    }

    const PromptTemplate& get(PromptKind kind) const {
        switch (kind) {
            case PromptKind::Matcher: return matcher_;
            case PromptKind::RagMatcher: return rag_matcher_;
            case PromptKind::EntityRetriever: return entity_retriever_;
            case PromptKind::SubgraphRetriever: return subgraph_retriever_;
        }
        throw ConfigError("unknown prompt kind");
    }

    void set(PromptKind kind, PromptTemplate tmpl) {
        switch (kind) {
            case PromptKind::Matcher: matcher_ = std::move(tmpl); break;
            case PromptKind::RagMatcher: rag_matcher_ = std::move(tmpl); break;
            case PromptKind::EntityRetriever: entity_retriever_ = std::move(tmpl); break;
            case PromptKind::SubgraphRetriever: subgraph_retriever_ = std::move(tmpl); break;
        }
        validate();
    }

    // Every template needs {question}; the KG-augmented matcher also needs
    // {paths}, and only it may carry {paths}.
    void validate() const {
        for (PromptKind kind : {PromptKind::Matcher, PromptKind::RagMatcher,
                                PromptKind::EntityRetriever, PromptKind::SubgraphRetriever}) {
            const PromptTemplate& t = get(kind);
            if (!detail::contains_placeholder(t.user_template, "question"))
                throw ConfigError(std::string(to_string(kind)) +
                                  " template is missing the {question} placeholder");
            bool has_paths = detail::contains_placeholder(t.user_template, "paths");
            if (kind == PromptKind::RagMatcher && !has_paths)
                throw ConfigError("rag_matcher template is missing the {paths} placeholder");
            if (kind != PromptKind::RagMatcher && has_paths)
                throw ConfigError(std::string(to_string(kind)) +
                                  " template must not contain a {paths} placeholder");
        }
    }

private:
    static PromptTemplate load_file_or(const std::string& dir, const std::string& name,
                                       const PromptTemplate& fallback) {
        std::filesystem::path path = std::filesystem::path(dir) / (name + ".txt");
        std::ifstream in(path);
        if (!in) return fallback;
        std::stringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        // Optional "system\n---\nuser" split.
        const std::string sep = "\n---\n";
        auto pos = text.find(sep);
        if (pos != std::string::npos)
            return {text.substr(0, pos), text.substr(pos + sep.size())};
        return {fallback.system_text, text};
    }

    PromptTemplate matcher_;
    PromptTemplate rag_matcher_;
    PromptTemplate entity_retriever_;
    PromptTemplate subgraph_retriever_;
};

}  // namespace kgrag
