#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fcrag/accounting.hpp"
#include "fcrag/chunking.hpp"
#include "fcrag/concept_graph.hpp"
#include "fcrag/config.hpp"
#include "fcrag/embedding.hpp"
#include "fcrag/model_client.hpp"
#include "fcrag/prompts.hpp"
#include "fcrag/retrieval.hpp"
#include "fcrag/rq_kmeans.hpp"

namespace fcrag {

class CorruptIndexError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An LLM-written cluster summary inserted into the retrieval corpus as
/// a pseudo-chunk. Retrieval applies the summary boost; the graph
/// artifact itself never contains these.
struct SummaryVirtualChunk {
    std::string chunk_id;  // "summary:<node_id>"; real chunk ids always contain '#'
    int node_id = -1;
    std::string text;
    Eigen::VectorXd embedding;
};

struct BuiltIndex {
    EngineConfig config;
    std::vector<Chunk> chunks;  // real chunks
    Eigen::MatrixXd embeddings;
    CodebookHierarchy hierarchy;
    std::vector<MembershipMatrix> memberships;  // retained levels
    OccupancyReport occupancy_report;
    ConceptGraph graph;
    std::vector<SummaryVirtualChunk> summaries;

    // Runtime view: real chunks followed by summary virtual chunks.
    std::vector<Chunk> all_chunks;
    Eigen::MatrixXd all_vectors;
    Bm25Index bm25;

    RetrievalContext retrieval_context() const;
};

std::vector<CorpusDocument> load_corpus_dir(const std::filesystem::path& dir);

/// One summary call per selected node (largest hard-assignment
/// population first), over the node's highest-extent representative
/// chunks. A failed or empty summary skips the node; the build goes on.
std::vector<SummaryVirtualChunk> generate_summaries(
    const ConceptGraph& graph, const std::vector<Chunk>& chunks,
    const Eigen::Ref<const Eigen::MatrixXd>& embeddings, int budget, int representatives,
    ModelClient& client, EmbeddingProvider& provider, UsageLedger& ledger,
    const PromptSet& prompts);

/// Stages 1-4: chunk, embed, fit the hierarchy, build the graph, then
/// optionally generate summaries. `client` may be null only when
/// summaries are disabled; graph construction itself never touches it.
BuiltIndex build_index(const std::vector<CorpusDocument>& documents, const EngineConfig& config,
                       EmbeddingProvider& provider, ModelClient* client, UsageLedger& ledger,
                       const PromptSet& prompts = PromptSet::builtin());

/// Persists every artifact plus a manifest. Wall time and timestamp live
/// only in the manifest so rebuilds stay byte-identical elsewhere.
void save_index(const BuiltIndex& index, const std::filesystem::path& dir,
                const UsageLedger& build_ledger, double wall_seconds);

BuiltIndex load_index(const std::filesystem::path& dir);

nlohmann::json read_manifest(const std::filesystem::path& dir);

/// Build-time ledger entries persisted beside the index.
std::vector<UsageEntry> read_persisted_ledger(const std::filesystem::path& dir);

std::string corpus_hash(const std::vector<Chunk>& chunks);

/// Sum of the artifact file sizes (manifest excluded).
std::uintmax_t index_bytes_on_disk(const std::filesystem::path& dir);

/// Exclusive build lock: creating the lock file fails if another build
/// holds the directory.
class IndexBuildLock {
public:
    explicit IndexBuildLock(const std::filesystem::path& dir);
    ~IndexBuildLock();

    IndexBuildLock(const IndexBuildLock&) = delete;
    IndexBuildLock& operator=(const IndexBuildLock&) = delete;

private:
    std::filesystem::path path_;
};

struct EvalTask {
    std::string id;
    std::string query;
    std::string gold;
    std::optional<std::string> doc_id;
};

std::vector<EvalTask> load_tasks(const std::filesystem::path& path);

}  // namespace fcrag
