#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fcrag/accounting.hpp"
#include "fcrag/embedding.hpp"
#include "fcrag/model_client.hpp"
#include "fcrag/prompts.hpp"
#include "fcrag/retrieval.hpp"

namespace fcrag {

struct QueryPlan {
    std::string original;
    std::array<std::string, 3> reformulations;  // paraphrase, decomposed, entity-focused
    std::optional<std::string> doc_filter;
};

struct ExpandOptions {
    bool enabled = true;
    bool concurrent = true;  // the three calls may run in parallel
};

/// Three reformulation calls with fixed templates. A failed or empty
/// reformulation falls back to the original query text; the pipeline
/// always proceeds with exactly three non-empty variants.
QueryPlan expand_query(const std::string& query, ModelClient& client, UsageLedger& ledger,
                       const PromptSet& prompts, const ExpandOptions& options = {});

struct FusedEntry {
    std::string chunk_id;
    double rrf_score = 0.0;
    std::vector<int> per_list_ranks;  // 1-based; 0 where absent
};

struct FusedRanking {
    std::vector<FusedEntry> entries;  // sorted score desc, chunk id asc
};

/// Reciprocal Rank Fusion: score = sum over lists of 1/(k_rrf + rank).
FusedRanking rrf_fuse(const std::vector<std::vector<std::string>>& lists, int k_rrf);

struct RerankResult {
    std::vector<std::string> chunk_ids;
    bool fallback = false;  // client failure or unparsable output
};

/// One rerank call over the fused candidates; emits exactly
/// min(keep, candidates) ids. Unparsable output falls back to fusion
/// order.
RerankResult rerank(const std::vector<std::pair<std::string, std::string>>& candidates,
                    const std::string& query, ModelClient& client, UsageLedger& ledger,
                    const PromptSet& prompts, int keep);

struct AnswerResult {
    std::string text;
    long input_tokens = 0;
    long output_tokens = 0;
};

/// Single answer-synthesis call; client failure propagates to the
/// caller, never a silent empty answer.
AnswerResult answer(const std::string& query, const std::vector<std::string>& context_texts,
                    ModelClient& client, UsageLedger& ledger, const PromptSet& prompts);

struct PipelineOptions {
    ExpandOptions expand;
    bool rerank_enabled = true;
    int k_rrf = 60;
    int initial_k = 25;   // per-reformulation retrieval depth
    int rerank_keep = 12;
    int snippet_tokens = 24;
};

struct QueryOutcome {
    QueryPlan plan;
    FusedRanking fused;
    std::vector<RetrievalCandidate> final_candidates;  // channel scores vs the original query
    bool rerank_fallback = false;
    std::string answer_text;
    long client_calls = 0;
    bool lattice_active = false;  // summary chunk or bridge provenance in the fused top-5
};

/// Full query-time orchestration: expand, per-variant hybrid retrieval,
/// RRF fusion, rerank, answer. Deterministic with the stub client.
QueryOutcome run_query(const RetrievalContext& context, EmbeddingProvider& provider,
                       ModelClient& client, UsageLedger& ledger, const PromptSet& prompts,
                       const PipelineOptions& options, const std::string& query,
                       const std::optional<std::string>& doc_filter);

}  // namespace fcrag
