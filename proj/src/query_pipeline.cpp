#include "fcrag/query_pipeline.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>
#include <sstream>

namespace fcrag {

namespace {

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

QueryPlan expand_query(const std::string& query, ModelClient& client, UsageLedger& ledger,
                       const PromptSet& prompts, const ExpandOptions& options) {
    if (trimmed(query).empty()) throw std::invalid_argument("expand_query: empty query");

    QueryPlan plan;
    plan.original = query;
    plan.reformulations = {query, query, query};
    if (!options.enabled) return plan;

    constexpr std::array<VariantKind, 3> kinds = {VariantKind::paraphrase, VariantKind::decompose,
                                                  VariantKind::entity};
    auto one_call = [&](VariantKind kind) { return client.complete(ModelRole::expand, prompts.expand_prompt(kind, query)); };

    std::array<std::optional<ModelResponse>, 3> responses;
    if (options.concurrent) {
        std::array<std::future<ModelResponse>, 3> futures;
        for (std::size_t i = 0; i < kinds.size(); ++i)
            futures[i] = std::async(std::launch::async, one_call, kinds[i]);
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            try {
                responses[i] = futures[i].get();
            } catch (const std::exception&) {
                responses[i] = std::nullopt;
            }
        }
    } else {
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            try {
                responses[i] = one_call(kinds[i]);
            } catch (const std::exception&) {
                responses[i] = std::nullopt;
            }
        }
    }

    for (std::size_t i = 0; i < responses.size(); ++i) {
        if (!responses[i]) continue;  // slot keeps the original query
        ledger.record(UsageCategory::query_expand, 1, responses[i]->input_tokens,
                      responses[i]->output_tokens);
        const std::string text = trimmed(responses[i]->text);
        if (!text.empty()) plan.reformulations[i] = text;
    }
    return plan;
}

FusedRanking rrf_fuse(const std::vector<std::vector<std::string>>& lists, int k_rrf) {
    if (lists.empty()) throw std::invalid_argument("rrf_fuse: need at least one list");
    if (k_rrf < 0) throw std::invalid_argument("rrf_fuse: k_rrf must be >= 0");

    std::map<std::string, FusedEntry> by_id;
    for (std::size_t l = 0; l < lists.size(); ++l) {
        for (std::size_t r = 0; r < lists[l].size(); ++r) {
            FusedEntry& entry = by_id[lists[l][r]];
            if (entry.per_list_ranks.empty()) {
                entry.chunk_id = lists[l][r];
                entry.per_list_ranks.assign(lists.size(), 0);
            }
            if (entry.per_list_ranks[l] != 0) continue;  // first occurrence counts
            entry.per_list_ranks[l] = static_cast<int>(r + 1);
            entry.rrf_score += 1.0 / static_cast<double>(k_rrf + static_cast<int>(r + 1));
        }
    }

    FusedRanking fused;
    fused.entries.reserve(by_id.size());
    for (auto& [id, entry] : by_id) fused.entries.push_back(std::move(entry));
    std::sort(fused.entries.begin(), fused.entries.end(),
              [](const FusedEntry& a, const FusedEntry& b) {
                  if (a.rrf_score != b.rrf_score) return a.rrf_score > b.rrf_score;
                  return a.chunk_id < b.chunk_id;
              });
    return fused;
}

namespace {

// Parse the last non-empty response line as a permutation/selection of
// candidate ids. Any unknown token means the output is unusable.
std::optional<std::vector<std::string>> parse_rerank_ids(const std::string& response,
                                                         const std::set<std::string>& known) {
    std::string last_line;
    std::istringstream in(response);
    std::string line;
    while (std::getline(in, line)) {
        if (!trimmed(line).empty()) last_line = line;
    }
    for (char& ch : last_line)
        if (ch == ',') ch = ' ';

    std::vector<std::string> ids;
    std::set<std::string> seen;
    std::istringstream tokens(last_line);
    std::string tok;
    while (tokens >> tok) {
        if (!known.count(tok)) return std::nullopt;
        if (seen.insert(tok).second) ids.push_back(tok);
    }
    if (ids.empty()) return std::nullopt;
    return ids;
}

}  // namespace

RerankResult rerank(const std::vector<std::pair<std::string, std::string>>& candidates,
                    const std::string& query, ModelClient& client, UsageLedger& ledger,
                    const PromptSet& prompts, int keep) {
    RerankResult result;
    if (candidates.empty()) return result;
    const auto out_size = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(keep));

    auto fusion_order = [&] {
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < out_size; ++i) ids.push_back(candidates[i].first);
        return ids;
    };

    std::optional<ModelResponse> response;
    try {
        response = client.complete(ModelRole::rerank, prompts.rerank_prompt(query, candidates));
    } catch (const std::exception&) {
        result.fallback = true;
        result.chunk_ids = fusion_order();
        return result;
    }
    ledger.record(UsageCategory::query_rerank, 1, response->input_tokens, response->output_tokens);

    std::set<std::string> known;
    for (const auto& [id, snippet] : candidates) known.insert(id);
    const auto parsed = parse_rerank_ids(response->text, known);
    if (!parsed) {
        result.fallback = true;
        result.chunk_ids = fusion_order();
        return result;
    }

    // Parsed selection first, then fusion order fills any remaining slots.
    std::set<std::string> chosen;
    for (const std::string& id : *parsed) {
        if (result.chunk_ids.size() == out_size) break;
        result.chunk_ids.push_back(id);
        chosen.insert(id);
    }
    for (const auto& [id, snippet] : candidates) {
        if (result.chunk_ids.size() == out_size) break;
        if (!chosen.count(id)) result.chunk_ids.push_back(id);
    }
    return result;
}

AnswerResult answer(const std::string& query, const std::vector<std::string>& context_texts,
                    ModelClient& client, UsageLedger& ledger, const PromptSet& prompts) {
    if (context_texts.empty()) throw std::invalid_argument("answer: no context chunks");
    const ModelResponse response =
        client.complete(ModelRole::answer, prompts.answer_prompt(query, context_texts));
    ledger.record(UsageCategory::query_answer, 1, response.input_tokens, response.output_tokens);
    return {response.text, response.input_tokens, response.output_tokens};
}

namespace {

std::string snippet_of(const std::string& text, int max_tokens) {
    std::istringstream in(text);
    std::string tok, out;
    int kept = 0;
    while (kept < max_tokens && in >> tok) {
        if (kept > 0) out += ' ';
        out += tok;
        ++kept;
    }
    return out;
}

}  // namespace

QueryOutcome run_query(const RetrievalContext& context, EmbeddingProvider& provider,
                       ModelClient& client, UsageLedger& ledger, const PromptSet& prompts,
                       const PipelineOptions& options, const std::string& query,
                       const std::optional<std::string>& doc_filter) {
    QueryOutcome outcome;
    const UsageTotals before = ledger.grand_total();

    outcome.plan = expand_query(query, client, ledger, prompts, options.expand);
    outcome.plan.doc_filter = doc_filter;

    // One scorer per distinct reformulation text; the stub's identity
    // rewrite collapses all three to the original.
    std::map<std::string, QueryScorer> scorers;
    auto scorer_for = [&](const std::string& text) -> QueryScorer& {
        auto it = scorers.find(text);
        if (it == scorers.end()) {
            Eigen::VectorXd vec = provider.embed({EmbeddingKind::query, text, ""});
            it = scorers.emplace(text, QueryScorer(context, text, std::move(vec))).first;
        }
        return it->second;
    };

    std::vector<std::vector<std::string>> lists;
    for (const std::string& variant : outcome.plan.reformulations) {
        std::vector<std::string> ids;
        for (const RetrievalCandidate& c :
             scorer_for(variant).search(doc_filter, options.initial_k))
            ids.push_back(c.chunk_id);
        lists.push_back(std::move(ids));
    }
    outcome.fused = rrf_fuse(lists, options.k_rrf);
    if (static_cast<int>(outcome.fused.entries.size()) > options.initial_k)
        outcome.fused.entries.resize(static_cast<std::size_t>(options.initial_k));

    std::map<std::string, Eigen::Index> chunk_index;
    for (std::size_t i = 0; i < context.chunks->size(); ++i)
        chunk_index[(*context.chunks)[i].id] = static_cast<Eigen::Index>(i);

    // Channel breakdown of the final candidates is reported against the
    // original query.
    QueryScorer& original_scorer = scorer_for(outcome.plan.original);

    std::vector<std::string> final_ids;
    if (options.rerank_enabled && !outcome.fused.entries.empty()) {
        std::vector<std::pair<std::string, std::string>> rerank_input;
        for (const FusedEntry& entry : outcome.fused.entries) {
            const Eigen::Index idx = chunk_index.at(entry.chunk_id);
            rerank_input.emplace_back(
                entry.chunk_id,
                snippet_of((*context.chunks)[static_cast<std::size_t>(idx)].text,
                           options.snippet_tokens));
        }
        RerankResult rr =
            rerank(rerank_input, query, client, ledger, prompts, options.rerank_keep);
        outcome.rerank_fallback = rr.fallback;
        final_ids = std::move(rr.chunk_ids);
    } else {
        for (const FusedEntry& entry : outcome.fused.entries) {
            if (static_cast<int>(final_ids.size()) == options.rerank_keep) break;
            final_ids.push_back(entry.chunk_id);
        }
    }

    for (const std::string& id : final_ids)
        outcome.final_candidates.push_back(original_scorer.score(chunk_index.at(id)));

    // Lattice activation: a summary virtual chunk or bridge-node
    // provenance among the top-5 retrieved (fused) chunks.
    const auto top5 = std::min<std::size_t>(outcome.fused.entries.size(), 5);
    for (std::size_t i = 0; i < top5 && !outcome.lattice_active; ++i) {
        const Eigen::Index idx = chunk_index.at(outcome.fused.entries[i].chunk_id);
        if (idx >= context.real_chunk_count) {
            outcome.lattice_active = true;
            break;
        }
        for (int node_id : original_scorer.score(idx).provenance)
            if (context.graph->node(node_id).bridge) outcome.lattice_active = true;
    }

    std::vector<std::string> context_texts;
    for (const RetrievalCandidate& c : outcome.final_candidates)
        context_texts.push_back((*context.chunks)[static_cast<std::size_t>(c.chunk)].text);
    outcome.answer_text = answer(query, context_texts, client, ledger, prompts).text;

    outcome.client_calls = ledger.grand_total().calls - before.calls;
    return outcome;
}

}  // namespace fcrag
