#pragma once

#include <stdexcept>
#include <string>

namespace fcrag {

enum class ModelRole { expand, rerank, answer, summary };

const char* model_role_name(ModelRole role);

struct ModelResponse {
    std::string text;
    long input_tokens = 0;
    long output_tokens = 0;
};

class ClientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A text-completion client. Every call reports token counts.
class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual ModelResponse complete(ModelRole role, const std::string& prompt) = 0;
};

/// Deterministic offline client. Expansion is an identity rewrite of the
/// QUERY: line, rerank echoes the candidate ids in input order, answer
/// concatenates the context lines, summary digests the passage lines.
/// Token counts are whitespace token counts of prompt and response.
class StubModelClient : public ModelClient {
public:
    ModelResponse complete(ModelRole role, const std::string& prompt) override;
};

/// Remote completion service: POST {"role", "prompt"}, response carries
/// {"text", "input_tokens", "output_tokens"}.
class RemoteModelClient : public ModelClient {
public:
    RemoteModelClient(std::string endpoint, int timeout_ms = 30000);

    ModelResponse complete(ModelRole role, const std::string& prompt) override;

private:
    std::string endpoint_;
    int timeout_ms_;
};

}  // namespace fcrag
