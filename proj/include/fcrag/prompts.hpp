#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fcrag {

enum class VariantKind { paraphrase, decompose, entity };

const char* variant_kind_name(VariantKind kind);

/// The fixed prompt templates. Placeholders: {query}, {candidates},
/// {context}, {passages}. The canonical copies live in data/prompts/;
/// the builtins are identical and used when no directory is configured.
struct PromptSet {
    std::string paraphrase;
    std::string decompose;
    std::string entity;
    std::string rerank;
    std::string answer;
    std::string summary;

    static PromptSet builtin();
    static PromptSet load_dir(const std::filesystem::path& dir);

    std::string expand_prompt(VariantKind kind, const std::string& query) const;
    std::string rerank_prompt(const std::string& query,
                              const std::vector<std::pair<std::string, std::string>>& candidates) const;
    std::string answer_prompt(const std::string& query,
                              const std::vector<std::string>& contexts) const;
    std::string summary_prompt(const std::vector<std::string>& passages) const;
};

}  // namespace fcrag
