#include "fcrag/embedding.hpp"

#include <httplib.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace fcrag {

namespace {

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

void validate_request(const EmbeddingRequest& request) {
    if (trimmed(request.text).empty())
        throw std::invalid_argument("embedding request text is empty");
}

// Splits "http://host:port/path" into client base and path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const auto scheme = endpoint.find("://");
    if (scheme == std::string::npos)
        throw std::invalid_argument("endpoint must include a scheme: " + endpoint);
    const auto path = endpoint.find('/', scheme + 3);
    if (path == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path), endpoint.substr(path)};
}

}  // namespace

std::string prefixed_text(const EmbeddingRequest& request) {
    return (request.kind == EmbeddingKind::passage ? "passage: " : "query: ") + request.text;
}

std::map<std::string, Eigen::VectorXd> load_vector_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ProviderError("cannot open vector file: " + path.string());

    std::map<std::string, Eigen::VectorXd> vectors;
    std::string line;
    long line_no = 0;
    Eigen::Index dim = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ProviderError("vector file " + path.string() + " line " +
                                std::to_string(line_no) + ": missing tab separator");
        const std::string id = line.substr(0, tab);
        if (id.empty())
            throw ProviderError("vector file " + path.string() + " line " +
                                std::to_string(line_no) + ": empty id");
        if (vectors.count(id))
            throw ProviderError("vector file " + path.string() + " line " +
                                std::to_string(line_no) + ": duplicate id '" + id + "'");

        std::istringstream nums(line.substr(tab + 1));
        std::vector<double> values;
        double v = 0.0;
        while (nums >> v) values.push_back(v);
        if (!nums.eof())
            throw ProviderError("vector file " + path.string() + " line " +
                                std::to_string(line_no) + ": malformed number");
        if (values.empty())
            throw ProviderError("vector file " + path.string() + " line " +
                                std::to_string(line_no) + ": no values");
        if (dim < 0) dim = static_cast<Eigen::Index>(values.size());
        if (static_cast<Eigen::Index>(values.size()) != dim)
            throw ProviderError("vector file " + path.string() + " line " +
                                std::to_string(line_no) + ": dimension " +
                                std::to_string(values.size()) + " does not match earlier dimension " +
                                std::to_string(dim));
        vectors[id] = Eigen::Map<Eigen::VectorXd>(values.data(),
                                                  static_cast<Eigen::Index>(values.size()));
    }
    return vectors;
}

void save_vector_file(const std::filesystem::path& path,
                      const std::map<std::string, Eigen::VectorXd>& vectors) {
    std::ofstream out(path);
    if (!out) throw ProviderError("cannot write vector file: " + path.string());
    out.precision(17);
    for (const auto& [id, vec] : vectors) {
        out << id << '\t';
        for (Eigen::Index i = 0; i < vec.size(); ++i) {
            if (i > 0) out << ' ';
            out << vec[i];
        }
        out << '\n';
    }
}

FileEmbeddingProvider::FileEmbeddingProvider(std::map<std::string, Eigen::VectorXd> vectors)
    : vectors_(std::move(vectors)) {
    if (!vectors_.empty()) dimension_ = static_cast<int>(vectors_.begin()->second.size());
}

std::string FileEmbeddingProvider::lookup_key(const EmbeddingRequest& request) {
    return request.id.empty() ? prefixed_text(request) : request.id;
}

Eigen::VectorXd FileEmbeddingProvider::embed(const EmbeddingRequest& request) {
    validate_request(request);
    count_call();
    const std::string key = lookup_key(request);
    const auto it = vectors_.find(key);
    if (it == vectors_.end())
        throw ProviderError("unknown embedding key in file mode: '" + key + "'");
    return it->second;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::string endpoint, int expected_dimension,
                                                 int timeout_ms)
    : endpoint_(std::move(endpoint)), dimension_(expected_dimension), timeout_ms_(timeout_ms) {}

Eigen::VectorXd RemoteEmbeddingProvider::embed(const EmbeddingRequest& request) {
    validate_request(request);
    count_call();

    const auto [base, path] = split_endpoint(endpoint_);
    httplib::Client client(base);
    client.set_connection_timeout(0, timeout_ms_ * 1000);
    client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

    nlohmann::json body{
        {"kind", request.kind == EmbeddingKind::passage ? "passage" : "query"},
        {"text", prefixed_text(request)},
    };
    const httplib::Result res = client.Post(path, body.dump(), "application/json");
    if (!res)
        throw ProviderError("embedding provider unreachable: " + endpoint_);
    if (res->status != 200)
        throw ProviderError("embedding provider returned status " + std::to_string(res->status));

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("embedding provider sent invalid JSON: ") + e.what());
    }
    if (!parsed.contains("vector") || !parsed["vector"].is_array())
        throw ProviderError("embedding provider response lacks a vector field");

    const auto& arr = parsed["vector"];
    Eigen::VectorXd vec(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) vec[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    if (dimension_ > 0 && vec.size() != dimension_)
        throw ProviderError("embedding dimension mismatch: got " + std::to_string(vec.size()) +
                            ", expected " + std::to_string(dimension_));
    return vec;
}

Eigen::VectorXd CachingEmbeddingProvider::embed(const EmbeddingRequest& request) {
    validate_request(request);
    count_call();
    const std::string key = FileEmbeddingProvider::lookup_key(request);
    {
        std::lock_guard lock(mutex_);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    Eigen::VectorXd vec = inner_.embed(request);
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(vec)).first->second;
}

}  // namespace fcrag
