#include "fcrag/config.hpp"

#include <fstream>

namespace fcrag {

namespace {

using nlohmann::json;

// Applies `j` onto `apply` entries, rejecting unknown keys so config
// typos fail loudly.
struct ObjectReader {
    const json& j;
    std::string scope;

    template <typename T>
    void field(const char* key, T& target) const {
        if (!j.contains(key)) return;
        try {
            target = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("config key '" + scope + key + "': " + e.what());
        }
    }

    void check_known(std::initializer_list<const char*> known) const {
        for (const auto& [key, value] : j.items()) {
            bool ok = false;
            for (const char* k : known)
                if (key == k) ok = true;
            if (!ok) throw ConfigError("unknown config key '" + scope + key + "'");
        }
    }
};

}  // namespace

void EngineConfig::validate() const {
    if (chunking.target_tokens < 1) throw ConfigError("chunking.target_tokens must be >= 1");
    if (chunking.overlap_tokens < 0 || chunking.overlap_tokens >= chunking.target_tokens)
        throw ConfigError("chunking.overlap_tokens must be in [0, target_tokens)");
    if (embedding.mode != "remote" && embedding.mode != "file")
        throw ConfigError("embedding.mode must be 'remote' or 'file'");
    if (embedding.dimension < 1) throw ConfigError("embedding.dimension must be >= 1");
    if (rq.level_sizes.empty()) throw ConfigError("rq.level_sizes must be non-empty");
    for (int s : rq.level_sizes)
        if (s < 1) throw ConfigError("rq.level_sizes entries must be >= 1");
    if (rq.max_iters < 1) throw ConfigError("rq.max_iters must be >= 1");
    if (!(rq.tol >= 0.0)) throw ConfigError("rq.tol must be >= 0");
    if (!(fcm.fuzziness_m > 1.0)) throw ConfigError("fcm.fuzziness_m must exceed 1");
    if (graph.cooccurrence.window < 2) throw ConfigError("graph.cooc_window must be >= 2");
    if (retrieval.pool_size < 1) throw ConfigError("retrieval.pool_size must be >= 1");
    for (double t : retrieval.routing.thresholds)
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("routing thresholds must be in [0,1]");
    if (!(retrieval.routing.activation_floor >= 0.0 && retrieval.routing.activation_floor <= 1.0))
        throw ConfigError("routing.activation_floor must be in [0,1]");
    if (client.mode != "remote" && client.mode != "stub")
        throw ConfigError("client.mode must be 'remote' or 'stub'");
    if (pipeline.k_rrf < 0) throw ConfigError("pipeline.k_rrf must be >= 0");
    if (pipeline.initial_k < 1) throw ConfigError("pipeline.initial_k must be >= 1");
    if (pipeline.rerank_keep < 1) throw ConfigError("pipeline.rerank_keep must be >= 1");
    if (summaries.budget < 0) throw ConfigError("summaries.budget must be >= 0");
    if (summaries.representatives < 1) throw ConfigError("summaries.representatives must be >= 1");
}

nlohmann::json to_json(const EngineConfig& c) {
    return json{
        {"seed", c.seed},
        {"chunking",
         {{"target_tokens", c.chunking.target_tokens}, {"overlap_tokens", c.chunking.overlap_tokens}}},
        {"embedding",
         {{"mode", c.embedding.mode},
          {"endpoint", c.embedding.endpoint},
          {"dimension", c.embedding.dimension},
          {"cache", c.embedding.cache}}},
        {"rq",
         {{"level_sizes", c.rq.level_sizes}, {"max_iters", c.rq.max_iters}, {"tol", c.rq.tol}}},
        {"fcm", {{"fuzziness_m", c.fcm.fuzziness_m}}},
        {"graph",
         {{"max_joins", c.graph.pairs.max_joins},
          {"max_meets", c.graph.pairs.max_meets},
          {"min_meet_mass", c.graph.pairs.min_meet_mass},
          {"join_band_lo", c.graph.pairs.join_band_lo},
          {"join_band_hi", c.graph.pairs.join_band_hi},
          {"cooc_window", c.graph.cooccurrence.window},
          {"cooc_theta", c.graph.cooccurrence.theta}}},
        {"retrieval",
         {{"weight_bm25", c.retrieval.weight_bm25},
          {"weight_cosine", c.retrieval.weight_cosine},
          {"weight_fuzzy", c.retrieval.weight_fuzzy},
          {"boost_summary", c.retrieval.boost_summary},
          {"boost_bridge", c.retrieval.boost_bridge},
          {"pool_size", c.retrieval.pool_size},
          {"brute_force", c.retrieval.brute_force},
          {"thresholds", c.retrieval.routing.thresholds},
          {"activation_floor", c.retrieval.routing.activation_floor}}},
        {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}}},
        {"client",
         {{"mode", c.client.mode},
          {"endpoint", c.client.endpoint},
          {"timeout_ms", c.client.timeout_ms}}},
        {"pipeline",
         {{"k_rrf", c.pipeline.k_rrf},
          {"initial_k", c.pipeline.initial_k},
          {"rerank_keep", c.pipeline.rerank_keep},
          {"expand_enabled", c.pipeline.expand_enabled},
          {"rerank_enabled", c.pipeline.rerank_enabled},
          {"concurrent_expand", c.pipeline.concurrent_expand},
          {"snippet_tokens", c.pipeline.snippet_tokens},
          {"prompts_dir", c.pipeline.prompts_dir}}},
        {"summaries",
         {{"enabled", c.summaries.enabled},
          {"budget", c.summaries.budget},
          {"representatives", c.summaries.representatives}}},
    };
}

EngineConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    EngineConfig c;

    ObjectReader top{j, ""};
    top.check_known({"seed", "chunking", "embedding", "rq", "fcm", "graph", "retrieval", "bm25",
                     "client", "pipeline", "summaries"});
    top.field("seed", c.seed);

    if (j.contains("chunking")) {
        ObjectReader r{j.at("chunking"), "chunking."};
        r.check_known({"target_tokens", "overlap_tokens"});
        r.field("target_tokens", c.chunking.target_tokens);
        r.field("overlap_tokens", c.chunking.overlap_tokens);
    }
    if (j.contains("embedding")) {
        ObjectReader r{j.at("embedding"), "embedding."};
        r.check_known({"mode", "endpoint", "dimension", "cache"});
        r.field("mode", c.embedding.mode);
        r.field("endpoint", c.embedding.endpoint);
        r.field("dimension", c.embedding.dimension);
        r.field("cache", c.embedding.cache);
    }
    if (j.contains("rq")) {
        ObjectReader r{j.at("rq"), "rq."};
        r.check_known({"level_sizes", "max_iters", "tol"});
        r.field("level_sizes", c.rq.level_sizes);
        r.field("max_iters", c.rq.max_iters);
        r.field("tol", c.rq.tol);
    }
    if (j.contains("fcm")) {
        ObjectReader r{j.at("fcm"), "fcm."};
        r.check_known({"fuzziness_m"});
        r.field("fuzziness_m", c.fcm.fuzziness_m);
    }
    if (j.contains("graph")) {
        ObjectReader r{j.at("graph"), "graph."};
        r.check_known({"max_joins", "max_meets", "min_meet_mass", "join_band_lo", "join_band_hi",
                       "cooc_window", "cooc_theta"});
        r.field("max_joins", c.graph.pairs.max_joins);
        r.field("max_meets", c.graph.pairs.max_meets);
        r.field("min_meet_mass", c.graph.pairs.min_meet_mass);
        r.field("join_band_lo", c.graph.pairs.join_band_lo);
        r.field("join_band_hi", c.graph.pairs.join_band_hi);
        r.field("cooc_window", c.graph.cooccurrence.window);
        r.field("cooc_theta", c.graph.cooccurrence.theta);
    }
    if (j.contains("retrieval")) {
        ObjectReader r{j.at("retrieval"), "retrieval."};
        r.check_known({"weight_bm25", "weight_cosine", "weight_fuzzy", "boost_summary",
                       "boost_bridge", "pool_size", "brute_force", "thresholds",
                       "activation_floor"});
        r.field("weight_bm25", c.retrieval.weight_bm25);
        r.field("weight_cosine", c.retrieval.weight_cosine);
        r.field("weight_fuzzy", c.retrieval.weight_fuzzy);
        r.field("boost_summary", c.retrieval.boost_summary);
        r.field("boost_bridge", c.retrieval.boost_bridge);
        r.field("pool_size", c.retrieval.pool_size);
        r.field("brute_force", c.retrieval.brute_force);
        r.field("thresholds", c.retrieval.routing.thresholds);
        r.field("activation_floor", c.retrieval.routing.activation_floor);
    }
    if (j.contains("bm25")) {
        ObjectReader r{j.at("bm25"), "bm25."};
        r.check_known({"k1", "b"});
        r.field("k1", c.bm25.k1);
        r.field("b", c.bm25.b);
    }
    if (j.contains("client")) {
        ObjectReader r{j.at("client"), "client."};
        r.check_known({"mode", "endpoint", "timeout_ms"});
        r.field("mode", c.client.mode);
        r.field("endpoint", c.client.endpoint);
        r.field("timeout_ms", c.client.timeout_ms);
    }
    if (j.contains("pipeline")) {
        ObjectReader r{j.at("pipeline"), "pipeline."};
        r.check_known({"k_rrf", "initial_k", "rerank_keep", "expand_enabled", "rerank_enabled",
                       "concurrent_expand", "snippet_tokens", "prompts_dir"});
        r.field("k_rrf", c.pipeline.k_rrf);
        r.field("initial_k", c.pipeline.initial_k);
        r.field("rerank_keep", c.pipeline.rerank_keep);
        r.field("expand_enabled", c.pipeline.expand_enabled);
        r.field("rerank_enabled", c.pipeline.rerank_enabled);
        r.field("concurrent_expand", c.pipeline.concurrent_expand);
        r.field("snippet_tokens", c.pipeline.snippet_tokens);
        r.field("prompts_dir", c.pipeline.prompts_dir);
    }
    if (j.contains("summaries")) {
        ObjectReader r{j.at("summaries"), "summaries."};
        r.check_known({"enabled", "budget", "representatives"});
        r.field("enabled", c.summaries.enabled);
        r.field("budget", c.summaries.budget);
        r.field("representatives", c.summaries.representatives);
    }

    c.validate();
    return c;
}

EngineConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace fcrag
