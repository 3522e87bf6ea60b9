#include "fcrag/chunking.hpp"

#include <iostream>
#include <sstream>
#include <stdexcept>

namespace fcrag {

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

std::vector<Chunk> chunk_corpus(const std::vector<CorpusDocument>& documents, int target_tokens,
                                int overlap_tokens) {
    if (documents.empty()) throw std::invalid_argument("chunk_corpus: no documents");
    if (target_tokens < 1) throw std::invalid_argument("chunk_corpus: target_tokens must be >= 1");
    if (overlap_tokens < 0 || overlap_tokens >= target_tokens)
        throw std::invalid_argument("chunk_corpus: overlap must be in [0, target)");

    const int step = target_tokens - overlap_tokens;
    std::vector<Chunk> chunks;
    for (const CorpusDocument& doc : documents) {
        const std::vector<std::string> tokens = whitespace_tokens(doc.text);
        if (tokens.empty()) {
            std::cerr << "warning: skipping empty document '" << doc.doc_id << "'\n";
            continue;
        }
        int ordinal = 0;
        for (std::size_t start = 0;; start += static_cast<std::size_t>(step)) {
            const std::size_t end = std::min(tokens.size(), start + static_cast<std::size_t>(target_tokens));
            std::string text;
            for (std::size_t t = start; t < end; ++t) {
                if (t > start) text += ' ';
                text += tokens[t];
            }
            chunks.push_back({doc.doc_id + "#" + std::to_string(ordinal), doc.doc_id, std::move(text)});
            ++ordinal;
            if (end == tokens.size()) break;
        }
    }
    return chunks;
}

}  // namespace fcrag
