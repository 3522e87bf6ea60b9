#include "fcrag/prompts.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fcrag {

const char* variant_kind_name(VariantKind kind) {
    switch (kind) {
        case VariantKind::paraphrase: return "paraphrase";
        case VariantKind::decompose: return "decompose";
        case VariantKind::entity: return "entity";
    }
    return "unknown";
}

namespace {

constexpr const char* kParaphrase =
    "Rewrite the question below as a single fluent paraphrase that keeps its meaning.\n"
    "Reply with the paraphrase only.\n"
    "QUERY: {query}\n"
    "PARAPHRASE:";

constexpr const char* kDecompose =
    "Break the question below into the single most important sub-question a reader\n"
    "would need answered first. Reply with that sub-question only.\n"
    "QUERY: {query}\n"
    "SUB-QUESTION:";

constexpr const char* kEntity =
    "Restate the question below so that it names the key entities explicitly.\n"
    "Reply with the restated question only.\n"
    "QUERY: {query}\n"
    "ENTITY VARIANT:";

constexpr const char* kRerank =
    "Rank the passages below by how well they answer the question. Reply with one\n"
    "line containing the passage ids, best first, separated by spaces.\n"
    "QUERY: {query}\n"
    "CANDIDATES:\n"
    "{candidates}\n"
    "ANSWER WITH IDS:";

constexpr const char* kAnswer =
    "Answer the question using only the context passages below. Be concise.\n"
    "QUESTION: {query}\n"
    "CONTEXT:\n"
    "{context}\n"
    "ANSWER:";

constexpr const char* kSummary =
    "Write a concise summary that captures the shared topic of the passages below.\n"
    "PASSAGES:\n"
    "{passages}\n"
    "SUMMARY:";

std::string replace_all(std::string text, const std::string& needle, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read prompt template: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    std::string text = out.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

std::string bullet_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += '\n';
        out += "- " + items[i];
    }
    return out;
}

}  // namespace

PromptSet PromptSet::builtin() {
    return {kParaphrase, kDecompose, kEntity, kRerank, kAnswer, kSummary};
}

PromptSet PromptSet::load_dir(const std::filesystem::path& dir) {
    PromptSet set;
    set.paraphrase = read_file(dir / "paraphrase.txt");
    set.decompose = read_file(dir / "decompose.txt");
    set.entity = read_file(dir / "entity.txt");
    set.rerank = read_file(dir / "rerank.txt");
    set.answer = read_file(dir / "answer.txt");
    set.summary = read_file(dir / "summary.txt");
    return set;
}

std::string PromptSet::expand_prompt(VariantKind kind, const std::string& query) const {
    const std::string* tpl = nullptr;
    switch (kind) {
        case VariantKind::paraphrase: tpl = &paraphrase; break;
        case VariantKind::decompose: tpl = &decompose; break;
        case VariantKind::entity: tpl = &entity; break;
    }
    return replace_all(*tpl, "{query}", query);
}

std::string PromptSet::rerank_prompt(
    const std::string& query,
    const std::vector<std::pair<std::string, std::string>>& candidates) const {
    std::string listing;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i > 0) listing += '\n';
        listing += "[" + candidates[i].first + "] " + candidates[i].second;
    }
    return replace_all(replace_all(rerank, "{query}", query), "{candidates}", listing);
}

std::string PromptSet::answer_prompt(const std::string& query,
                                     const std::vector<std::string>& contexts) const {
    return replace_all(replace_all(answer, "{query}", query), "{context}", bullet_list(contexts));
}

std::string PromptSet::summary_prompt(const std::vector<std::string>& passages) const {
    return replace_all(summary, "{passages}", bullet_list(passages));
}

}  // namespace fcrag
