#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "fcrag/bm25.hpp"
#include "fcrag/concept_graph.hpp"
#include "fcrag/retrieval.hpp"

namespace fcrag {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChunkingConfig {
    int target_tokens = 300;
    int overlap_tokens = 50;
};

struct EmbeddingConfig {
    std::string mode = "file";  // "remote" or "file"
    std::string endpoint;
    int dimension = 1024;
    bool cache = true;
};

struct RqConfig {
    std::vector<int> level_sizes{96, 24, 12};
    int max_iters = 100;
    double tol = 1e-6;
};

struct FcmConfig {
    double fuzziness_m = 2.0;
};

struct ClientConfig {
    std::string mode = "stub";  // "remote" or "stub"
    std::string endpoint;
    int timeout_ms = 30000;
};

struct PipelineConfig {
    int k_rrf = 60;
    int initial_k = 25;
    int rerank_keep = 12;
    bool expand_enabled = true;
    bool rerank_enabled = true;
    bool concurrent_expand = true;
    int snippet_tokens = 24;
    std::string prompts_dir;  // empty: builtin templates
};

struct SummaryConfig {
    bool enabled = true;
    int budget = 30;
    int representatives = 5;
};

/// Every tunable named by the engine, with its default. Serialized as a
/// JSON object; unknown keys are rejected.
struct EngineConfig {
    std::uint64_t seed = 42;
    ChunkingConfig chunking;
    EmbeddingConfig embedding;
    RqConfig rq;
    FcmConfig fcm;
    ConceptGraphConfig graph;
    RetrievalSettings retrieval;
    Bm25Params bm25;
    ClientConfig client;
    PipelineConfig pipeline;
    SummaryConfig summaries;

    void validate() const;
};

nlohmann::json to_json(const EngineConfig& config);
EngineConfig config_from_json(const nlohmann::json& j);
EngineConfig load_config_file(const std::filesystem::path& path);

}  // namespace fcrag
