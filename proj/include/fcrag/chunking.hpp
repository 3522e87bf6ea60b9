#pragma once

#include <string>
#include <vector>

namespace fcrag {

struct CorpusDocument {
    std::string doc_id;
    std::string source_path;
    std::string text;
};

struct Chunk {
    std::string id;  // "<doc_id>#<ordinal>"
    std::string doc_id;
    std::string text;
};

/// Sliding whitespace-token windows of target_tokens with overlap_tokens
/// overlap. Empty documents are skipped with a warning on stderr.
std::vector<Chunk> chunk_corpus(const std::vector<CorpusDocument>& documents, int target_tokens,
                                int overlap_tokens);

std::vector<std::string> whitespace_tokens(const std::string& text);

}  // namespace fcrag
