#include "fcrag/index_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fcrag {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;
constexpr const char* kVectorMagic = "FCRGVEC1";

const std::vector<std::string>& artifact_names() {
    static const std::vector<std::string> names = {
        "chunks.jsonl", "embeddings.bin", "hierarchy.json", "memberships.json",
        "graph.json",   "bm25.json",      "summaries.json", "ledger.json",
    };
    return names;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index expected_cols = -1) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    Eigen::Index c = expected_cols;
    if (c < 0) c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != c)
            throw CorruptIndexError("ragged matrix row in index artifact");
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("short write to " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptIndexError("missing index artifact: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json parse_artifact(const std::filesystem::path& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw CorruptIndexError("corrupt index artifact " + path.string() + ": " + e.what());
    }
}

void write_embeddings_bin(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(kVectorMagic, 8);
    const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
    if (!out) throw std::runtime_error("short write to " + path.string());
}

Eigen::MatrixXd read_embeddings_bin(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptIndexError("missing index artifact: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string_view(magic, 8) != kVectorMagic)
        throw CorruptIndexError("bad magic in " + path.string());
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t i = 0; i < rows; ++i)
        for (std::uint64_t j = 0; j < cols; ++j) {
            double v = 0.0;
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    if (!in) throw CorruptIndexError("truncated embeddings file: " + path.string());
    return m;
}

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json graph_to_json(const ConceptGraph& graph) {
    json nodes = json::array();
    for (const ConceptNode& n : graph.nodes()) {
        json centroids = json::object();
        for (const auto& [level, centroid] : n.centroid_per_level)
            centroids[std::to_string(level)] = vector_to_json(centroid);
        json parents = json::array();
        if (n.parents[0] >= 0) parents = {n.parents[0], n.parents[1]};
        nodes.push_back({
            {"id", n.id},
            {"kind", node_kind_name(n.kind)},
            {"level", n.level},
            {"cluster", n.cluster},
            {"parents", parents},
            {"centroids", centroids},
            {"extent", vector_to_json(n.extent.values())},
            {"bridge", n.bridge},
            {"meet_mass", n.meet_mass},
        });
    }
    json edges = json::array();
    for (const GraphEdge& e : graph.edges())
        edges.push_back({{"a", e.a},
                         {"b", e.b},
                         {"kind", e.kind == EdgeKind::lattice ? "lattice" : "cooccurrence"},
                         {"weight", e.weight}});
    return json{{"nodes", nodes}, {"edges", edges}};
}

ConceptGraph graph_from_json(const json& j) {
    ConceptGraph graph;
    for (const json& nj : j.at("nodes")) {
        ConceptNode n;
        n.id = nj.at("id").get<int>();
        n.kind = node_kind_from_name(nj.at("kind").get<std::string>());
        n.level = nj.at("level").get<int>();
        n.cluster = nj.at("cluster").get<int>();
        const json& parents = nj.at("parents");
        if (parents.size() == 2) n.parents = {parents[0].get<int>(), parents[1].get<int>()};
        for (const auto& [key, value] : nj.at("centroids").items())
            n.centroid_per_level[std::stoi(key)] = vector_from_json(value);
        n.extent = FuzzySet(vector_from_json(nj.at("extent")));
        n.bridge = nj.at("bridge").get<bool>();
        n.meet_mass = nj.at("meet_mass").get<double>();
        graph.add_node(std::move(n));
    }
    for (const json& ej : j.at("edges")) {
        graph.add_edge({ej.at("a").get<int>(), ej.at("b").get<int>(),
                        ej.at("kind").get<std::string>() == "lattice" ? EdgeKind::lattice
                                                                      : EdgeKind::cooccurrence,
                        ej.at("weight").get<double>()});
    }
    return graph;
}

void assemble_runtime(BuiltIndex& index) {
    index.all_chunks = index.chunks;
    for (const SummaryVirtualChunk& s : index.summaries)
        index.all_chunks.push_back({s.chunk_id, "", s.text});

    const Eigen::Index total = static_cast<Eigen::Index>(index.all_chunks.size());
    index.all_vectors.resize(total, index.embeddings.cols());
    index.all_vectors.topRows(index.embeddings.rows()) = index.embeddings;
    for (std::size_t s = 0; s < index.summaries.size(); ++s)
        index.all_vectors.row(index.embeddings.rows() + static_cast<Eigen::Index>(s)) =
            index.summaries[s].embedding.transpose();
}

}  // namespace

RetrievalContext BuiltIndex::retrieval_context() const {
    RetrievalContext ctx;
    ctx.chunks = &all_chunks;
    ctx.vectors = &all_vectors;
    ctx.real_chunk_count = static_cast<Eigen::Index>(chunks.size());
    ctx.graph = &graph;
    ctx.bm25 = &bm25;
    ctx.settings = config.retrieval;
    return ctx;
}

std::vector<CorpusDocument> load_corpus_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw std::invalid_argument("corpus directory does not exist: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<CorpusDocument> docs;
    for (const auto& path : files)
        docs.push_back({path.stem().string(), path.string(), read_text_file(path)});
    if (docs.empty())
        throw std::invalid_argument("no .txt documents in corpus directory: " + dir.string());
    return docs;
}

std::string corpus_hash(const std::vector<Chunk>& chunks) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::string_view s) {
        for (const char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        h ^= 0x1f;
        h *= 1099511628211ull;
    };
    for (const Chunk& c : chunks) {
        mix(c.id);
        mix(c.doc_id);
        mix(c.text);
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<SummaryVirtualChunk> generate_summaries(
    const ConceptGraph& graph, const std::vector<Chunk>& chunks,
    const Eigen::Ref<const Eigen::MatrixXd>& embeddings, int budget, int representatives,
    ModelClient& client, EmbeddingProvider& provider, UsageLedger& ledger,
    const PromptSet& prompts) {
    if (budget < 0) throw std::invalid_argument("generate_summaries: negative budget");
    if (budget == 0) return {};

    // Hard-assignment population per seed: count chunks whose argmax
    // among the seeds of that level is this node.
    std::map<int, std::vector<const ConceptNode*>> seeds_by_level;
    for (const ConceptNode& n : graph.nodes())
        if (n.kind == NodeKind::seed) seeds_by_level[n.level].push_back(&n);

    std::map<int, long> population;
    const Eigen::Index n_chunks = static_cast<Eigen::Index>(chunks.size());
    for (const auto& [level, seeds] : seeds_by_level) {
        for (Eigen::Index g = 0; g < n_chunks; ++g) {
            const ConceptNode* best = nullptr;
            double best_v = -1.0;
            for (const ConceptNode* s : seeds) {
                const double v = s->extent(g);
                if (v > best_v) {
                    best_v = v;
                    best = s;
                }
            }
            if (best) population[best->id] += 1;
        }
    }

    std::vector<std::pair<long, int>> ranked;  // (population, node id)
    for (const auto& [level, seeds] : seeds_by_level)
        for (const ConceptNode* s : seeds) ranked.emplace_back(population[s->id], s->id);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (static_cast<int>(ranked.size()) > budget) ranked.resize(static_cast<std::size_t>(budget));

    std::vector<SummaryVirtualChunk> out;
    for (const auto& [pop, node_id] : ranked) {
        const ConceptNode& node = graph.node(node_id);

        std::vector<std::pair<double, Eigen::Index>> by_extent;
        for (Eigen::Index g = 0; g < n_chunks; ++g)
            if (node.extent(g) > 0.0) by_extent.emplace_back(node.extent(g), g);
        std::sort(by_extent.begin(), by_extent.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        std::vector<std::string> passages;
        for (std::size_t r = 0; r < by_extent.size() && r < static_cast<std::size_t>(representatives); ++r)
            passages.push_back(chunks[static_cast<std::size_t>(by_extent[r].second)].text);
        if (passages.empty()) continue;

        ModelResponse response;
        try {
            response = client.complete(ModelRole::summary, prompts.summary_prompt(passages));
        } catch (const std::exception& e) {
            std::cerr << "warning: summary call failed for node " << node_id << ": " << e.what()
                      << "\n";
            continue;
        }
        ledger.record(UsageCategory::indexing_summary, 1, response.input_tokens,
                      response.output_tokens);
        if (response.text.empty()) {
            std::cerr << "warning: empty summary for node " << node_id << ", skipped\n";
            continue;
        }

        SummaryVirtualChunk s;
        s.chunk_id = "summary:" + std::to_string(node_id);
        s.node_id = node_id;
        s.text = response.text;
        s.embedding = provider.embed({EmbeddingKind::passage, s.text, s.chunk_id});
        out.push_back(std::move(s));
    }
    return out;
}

BuiltIndex build_index(const std::vector<CorpusDocument>& documents, const EngineConfig& config,
                       EmbeddingProvider& provider, ModelClient* client, UsageLedger& ledger,
                       const PromptSet& prompts) {
    config.validate();
    if (config.summaries.enabled && config.summaries.budget > 0 && client == nullptr)
        throw std::invalid_argument("build_index: summaries enabled but no model client");

    BuiltIndex index;
    index.config = config;

    // Stage 1: chunk and embed.
    index.chunks =
        chunk_corpus(documents, config.chunking.target_tokens, config.chunking.overlap_tokens);
    if (index.chunks.empty()) throw std::invalid_argument("build_index: corpus produced no chunks");

    CachingEmbeddingProvider cached(provider);
    EmbeddingProvider& source = config.embedding.cache
                                    ? static_cast<EmbeddingProvider&>(cached)
                                    : provider;
    Eigen::Index dim = -1;
    for (std::size_t i = 0; i < index.chunks.size(); ++i) {
        const Eigen::VectorXd v =
            source.embed({EmbeddingKind::passage, index.chunks[i].text, index.chunks[i].id});
        if (dim < 0) {
            dim = v.size();
            index.embeddings.resize(static_cast<Eigen::Index>(index.chunks.size()), dim);
        }
        if (v.size() != dim)
            throw ProviderError("embedding dimension changed mid-corpus: " +
                                std::to_string(v.size()) + " vs " + std::to_string(dim));
        if (!v.allFinite())
            throw ProviderError("non-finite embedding for chunk " + index.chunks[i].id);
        if (v.norm() == 0.0)
            throw ProviderError("zero-norm embedding for chunk " + index.chunks[i].id);
        index.embeddings.row(static_cast<Eigen::Index>(i)) = v.transpose();
    }
    index.config.embedding.dimension = static_cast<int>(dim);

    // Stage 2: residual-quantization hierarchy.
    index.hierarchy = fit_rq_kmeans(index.embeddings, config.rq.level_sizes, config.seed,
                                    config.rq.max_iters, config.rq.tol);
    index.occupancy_report = occupancy(index.hierarchy);

    for (const LevelOccupancy& lo : index.occupancy_report.per_level) {
        if (lo.level == 0 || lo.interpretation != "degenerate") {
            const Eigen::MatrixXd inputs = residual_inputs(index.hierarchy, index.embeddings, lo.level);
            index.memberships.push_back(fcm_memberships(
                inputs, index.hierarchy.codebooks[static_cast<std::size_t>(lo.level)].centroids,
                config.fcm.fuzziness_m, lo.level));
        } else {
            std::cerr << "note: level " << lo.level << " is degenerate (occupancy " << lo.occupancy
                      << "), dropped from the concept graph\n";
        }
    }

    // Stage 3: concept graph (extraction-free; no model calls).
    index.graph = build_concept_graph(index.hierarchy, index.memberships, index.occupancy_report,
                                      index.embeddings, config.graph);

    // Stage 4: optional cluster-summary virtual chunks.
    if (config.summaries.enabled && config.summaries.budget > 0)
        index.summaries = generate_summaries(index.graph, index.chunks, index.embeddings,
                                             config.summaries.budget,
                                             config.summaries.representatives, *client, source,
                                             ledger, prompts);

    assemble_runtime(index);
    std::vector<std::string> texts;
    texts.reserve(index.all_chunks.size());
    for (const Chunk& c : index.all_chunks) texts.push_back(c.text);
    index.bm25 = Bm25Index::build(texts, config.bm25);
    return index;
}

void save_index(const BuiltIndex& index, const std::filesystem::path& dir,
                const UsageLedger& build_ledger, double wall_seconds) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    try {
        // chunks.jsonl
        {
            std::ostringstream out;
            for (const Chunk& c : index.chunks)
                out << json{{"id", c.id}, {"doc", c.doc_id}, {"text", c.text}}.dump() << "\n";
            write_text_file(dir / "chunks.jsonl", out.str());
            written.push_back(dir / "chunks.jsonl");
        }

        write_embeddings_bin(dir / "embeddings.bin", index.embeddings);
        written.push_back(dir / "embeddings.bin");

        {
            json levels = json::array();
            for (const Codebook& cb : index.hierarchy.codebooks)
                levels.push_back({{"level", cb.level},
                                  {"requested_size", cb.requested_size},
                                  {"centroids", matrix_to_json(cb.centroids)}});
            json assignments = json::array();
            for (Eigen::Index i = 0; i < index.hierarchy.assignments.rows(); ++i) {
                json row = json::array();
                for (Eigen::Index l = 0; l < index.hierarchy.assignments.cols(); ++l)
                    row.push_back(index.hierarchy.assignments(i, l));
                assignments.push_back(row);
            }
            write_text_file(dir / "hierarchy.json",
                            json{{"levels", levels}, {"assignments", assignments}}.dump(1));
            written.push_back(dir / "hierarchy.json");
        }

        {
            json arr = json::array();
            for (const MembershipMatrix& mm : index.memberships)
                arr.push_back({{"level", mm.level},
                               {"fuzziness_m", mm.fuzziness_m},
                               {"values", matrix_to_json(mm.values)}});
            write_text_file(dir / "memberships.json", arr.dump(1));
            written.push_back(dir / "memberships.json");
        }

        write_text_file(dir / "graph.json", graph_to_json(index.graph).dump(1));
        written.push_back(dir / "graph.json");

        {
            json postings = json::object();
            for (const auto& [term, list] : index.bm25.postings()) {
                json entries = json::array();
                for (const auto& [chunk, tf] : list) entries.push_back({chunk, tf});
                postings[term] = entries;
            }
            write_text_file(dir / "bm25.json",
                            json{{"k1", index.bm25.params().k1},
                                 {"b", index.bm25.params().b},
                                 {"doc_lengths", index.bm25.doc_lengths()},
                                 {"average_doc_length", index.bm25.average_doc_length()},
                                 {"postings", postings}}
                                .dump(1));
            written.push_back(dir / "bm25.json");
        }

        {
            json arr = json::array();
            for (const SummaryVirtualChunk& s : index.summaries)
                arr.push_back({{"chunk_id", s.chunk_id},
                               {"node_id", s.node_id},
                               {"text", s.text},
                               {"embedding", vector_to_json(s.embedding)}});
            write_text_file(dir / "summaries.json", arr.dump(1));
            written.push_back(dir / "summaries.json");
        }

        {
            json categories = json::object();
            for (UsageCategory c : kAllUsageCategories) {
                const UsageTotals t = build_ledger.totals(c);
                categories[category_name(c)] = {{"calls", t.calls},
                                                {"input_tokens", t.input_tokens},
                                                {"output_tokens", t.output_tokens}};
            }
            write_text_file(dir / "ledger.json", json{{"categories", categories}}.dump(1));
            written.push_back(dir / "ledger.json");
        }

        std::uintmax_t artifact_bytes = 0;
        for (const auto& path : written) artifact_bytes += std::filesystem::file_size(path);

        const json manifest{
            {"format_version", kFormatVersion},
            {"corpus_hash", corpus_hash(index.chunks)},
            {"embedding_dimension", index.embeddings.cols()},
            {"level_sizes", index.config.rq.level_sizes},
            {"chunk_count", index.chunks.size()},
            {"summary_count", index.summaries.size()},
            {"node_count", index.graph.nodes().size()},
            {"edge_count", index.graph.edges().size()},
            {"built_at", now_iso8601()},
            {"build_wall_seconds", wall_seconds},
            {"total_index_bytes", artifact_bytes},
            {"config", to_json(index.config)},
        };
        write_text_file(dir / "manifest.json", manifest.dump(1));
    } catch (...) {
        for (const auto& path : written) {
            std::error_code ec;
            std::filesystem::remove(path, ec);
        }
        throw;
    }
}

nlohmann::json read_manifest(const std::filesystem::path& dir) {
    return parse_artifact(dir / "manifest.json");
}

std::vector<UsageEntry> read_persisted_ledger(const std::filesystem::path& dir) {
    const json j = parse_artifact(dir / "ledger.json");
    std::vector<UsageEntry> entries;
    for (const auto& [name, totals] : j.at("categories").items()) {
        UsageEntry e;
        e.category = category_from_name(name);
        e.calls = totals.at("calls").get<long>();
        e.input_tokens = totals.at("input_tokens").get<long>();
        e.output_tokens = totals.at("output_tokens").get<long>();
        if (e.calls != 0 || e.input_tokens != 0 || e.output_tokens != 0) entries.push_back(e);
    }
    return entries;
}

BuiltIndex load_index(const std::filesystem::path& dir) {
    const json manifest = read_manifest(dir);
    if (manifest.at("format_version").get<int>() != kFormatVersion)
        throw CorruptIndexError("unsupported index format version " +
                                manifest.at("format_version").dump());

    BuiltIndex index;
    try {
        index.config = config_from_json(manifest.at("config"));
    } catch (const ConfigError& e) {
        throw CorruptIndexError(std::string("manifest config invalid: ") + e.what());
    }

    for (const std::string& line : [&] {
             std::vector<std::string> lines;
             std::istringstream in(read_text_file(dir / "chunks.jsonl"));
             std::string l;
             while (std::getline(in, l))
                 if (!l.empty()) lines.push_back(l);
             return lines;
         }()) {
        json cj;
        try {
            cj = json::parse(line);
        } catch (const json::exception& e) {
            throw CorruptIndexError(std::string("corrupt chunks.jsonl: ") + e.what());
        }
        index.chunks.push_back({cj.at("id").get<std::string>(), cj.at("doc").get<std::string>(),
                                cj.at("text").get<std::string>()});
    }
    if (index.chunks.size() != manifest.at("chunk_count").get<std::size_t>())
        throw CorruptIndexError("chunk count does not match manifest");
    if (corpus_hash(index.chunks) != manifest.at("corpus_hash").get<std::string>())
        throw CorruptIndexError("corpus hash does not match manifest");

    index.embeddings = read_embeddings_bin(dir / "embeddings.bin");
    if (index.embeddings.rows() != static_cast<Eigen::Index>(index.chunks.size()))
        throw CorruptIndexError("embedding row count does not match chunks");
    if (index.embeddings.cols() != manifest.at("embedding_dimension").get<Eigen::Index>())
        throw CorruptIndexError("embedding dimension does not match manifest");

    {
        const json hj = parse_artifact(dir / "hierarchy.json");
        for (const json& lj : hj.at("levels")) {
            Codebook cb;
            cb.level = lj.at("level").get<int>();
            cb.requested_size = lj.at("requested_size").get<int>();
            cb.centroids = matrix_from_json(lj.at("centroids"), index.embeddings.cols());
            index.hierarchy.codebooks.push_back(std::move(cb));
        }
        const json& aj = hj.at("assignments");
        index.hierarchy.assignments.resize(static_cast<Eigen::Index>(aj.size()),
                                           index.hierarchy.levels());
        for (Eigen::Index i = 0; i < index.hierarchy.assignments.rows(); ++i)
            for (Eigen::Index l = 0; l < index.hierarchy.assignments.cols(); ++l)
                index.hierarchy.assignments(i, l) =
                    aj[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)].get<int>();

        // Residuals are derived data; recompute them exactly.
        index.hierarchy.final_residuals = index.embeddings;
        for (Eigen::Index l = 0; l < index.hierarchy.levels(); ++l) {
            const Eigen::MatrixXd& centroids =
                index.hierarchy.codebooks[static_cast<std::size_t>(l)].centroids;
            for (Eigen::Index i = 0; i < index.hierarchy.final_residuals.rows(); ++i)
                index.hierarchy.final_residuals.row(i) -=
                    centroids.row(index.hierarchy.assignments(i, l));
        }
    }
    index.occupancy_report = occupancy(index.hierarchy);

    for (const json& mj : parse_artifact(dir / "memberships.json")) {
        MembershipMatrix mm;
        mm.level = mj.at("level").get<int>();
        mm.fuzziness_m = mj.at("fuzziness_m").get<double>();
        mm.values = matrix_from_json(mj.at("values"));
        index.memberships.push_back(std::move(mm));
    }

    index.graph = graph_from_json(parse_artifact(dir / "graph.json"));
    if (index.graph.nodes().size() != manifest.at("node_count").get<std::size_t>() ||
        index.graph.edges().size() != manifest.at("edge_count").get<std::size_t>())
        throw CorruptIndexError("graph census does not match manifest");

    for (const json& sj : parse_artifact(dir / "summaries.json")) {
        SummaryVirtualChunk s;
        s.chunk_id = sj.at("chunk_id").get<std::string>();
        s.node_id = sj.at("node_id").get<int>();
        s.text = sj.at("text").get<std::string>();
        s.embedding = vector_from_json(sj.at("embedding"));
        index.summaries.push_back(std::move(s));
    }
    if (index.summaries.size() != manifest.at("summary_count").get<std::size_t>())
        throw CorruptIndexError("summary count does not match manifest");

    {
        const json bj = parse_artifact(dir / "bm25.json");
        std::map<std::string, Bm25Index::PostingList> postings;
        for (const auto& [term, entries] : bj.at("postings").items()) {
            Bm25Index::PostingList list;
            for (const json& e : entries) list.emplace_back(e[0].get<int>(), e[1].get<int>());
            postings[term] = std::move(list);
        }
        index.bm25 = Bm25Index::from_parts(
            std::move(postings), bj.at("doc_lengths").get<std::vector<int>>(),
            bj.at("average_doc_length").get<double>(),
            Bm25Params{bj.at("k1").get<double>(), bj.at("b").get<double>()});
    }

    assemble_runtime(index);
    if (index.bm25.doc_count() != static_cast<Eigen::Index>(index.all_chunks.size()))
        throw CorruptIndexError("bm25 document count does not match chunks");
    return index;
}

std::uintmax_t index_bytes_on_disk(const std::filesystem::path& dir) {
    std::uintmax_t total = 0;
    for (const std::string& name : artifact_names()) {
        std::error_code ec;
        const auto size = std::filesystem::file_size(dir / name, ec);
        if (!ec) total += size;
    }
    return total;
}

IndexBuildLock::IndexBuildLock(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    path_ = dir / ".build.lock";
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
        throw std::runtime_error("index directory is locked by another build: " + path_.string());
    ::close(fd);
}

IndexBuildLock::~IndexBuildLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
}

std::vector<EvalTask> load_tasks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open task file: " + path.string());
    std::vector<EvalTask> tasks;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::invalid_argument("task file line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
        EvalTask t;
        t.id = j.value("id", "task" + std::to_string(line_no));
        t.query = j.at("query").get<std::string>();
        t.gold = j.at("gold").get<std::string>();
        if (j.contains("doc_id")) t.doc_id = j.at("doc_id").get<std::string>();
        tasks.push_back(std::move(t));
    }
    if (tasks.empty()) throw std::invalid_argument("task file is empty: " + path.string());
    return tasks;
}

}  // namespace fcrag
