#include "fcrag/model_client.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <sstream>
#include <vector>

namespace fcrag {

const char* model_role_name(ModelRole role) {
    switch (role) {
        case ModelRole::expand: return "expand";
        case ModelRole::rerank: return "rerank";
        case ModelRole::answer: return "answer";
        case ModelRole::summary: return "summary";
    }
    return "unknown";
}

namespace {

long token_count(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    long n = 0;
    while (in >> tok) ++n;
    return n;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::string after_marker(const std::string& prompt, const std::string& marker) {
    std::string found;
    for (const std::string& line : lines_of(prompt))
        if (line.rfind(marker, 0) == 0) found = line.substr(marker.size());
    return found;
}

// Items listed as "- text" after a section header line.
std::vector<std::string> items_after(const std::string& prompt, const std::string& header) {
    std::vector<std::string> items;
    bool in_section = false;
    for (const std::string& line : lines_of(prompt)) {
        if (line == header) {
            in_section = true;
            continue;
        }
        if (!in_section) continue;
        if (line.rfind("- ", 0) == 0)
            items.push_back(line.substr(2));
        else if (!line.empty())
            in_section = false;
    }
    return items;
}

std::string stub_expand(const std::string& prompt) {
    const std::string q = after_marker(prompt, "QUERY: ");
    return q.empty() ? prompt : q;
}

std::string stub_rerank(const std::string& prompt) {
    std::string out;
    for (const std::string& line : lines_of(prompt)) {
        if (line.rfind("[", 0) != 0) continue;
        const auto close = line.find(']');
        if (close == std::string::npos) continue;
        if (!out.empty()) out += ' ';
        out += line.substr(1, close - 1);
    }
    return out;
}

std::string stub_answer(const std::string& prompt) {
    std::string out;
    for (const std::string& item : items_after(prompt, "CONTEXT:")) {
        if (!out.empty()) out += ' ';
        out += item;
    }
    return out;
}

std::string stub_summary(const std::string& prompt) {
    std::string joined;
    for (const std::string& item : items_after(prompt, "PASSAGES:")) {
        if (!joined.empty()) joined += ' ';
        joined += item;
    }
    std::istringstream in(joined);
    std::string tok, out;
    int kept = 0;
    while (kept < 48 && in >> tok) {
        if (kept > 0) out += ' ';
        out += tok;
        ++kept;
    }
    return out;
}

}  // namespace

ModelResponse StubModelClient::complete(ModelRole role, const std::string& prompt) {
    std::string text;
    switch (role) {
        case ModelRole::expand: text = stub_expand(prompt); break;
        case ModelRole::rerank: text = stub_rerank(prompt); break;
        case ModelRole::answer: text = stub_answer(prompt); break;
        case ModelRole::summary: text = stub_summary(prompt); break;
    }
    return {text, token_count(prompt), token_count(text)};
}

RemoteModelClient::RemoteModelClient(std::string endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

ModelResponse RemoteModelClient::complete(ModelRole role, const std::string& prompt) {
    const auto scheme = endpoint_.find("://");
    if (scheme == std::string::npos)
        throw ClientError("model endpoint must include a scheme: " + endpoint_);
    const auto slash = endpoint_.find('/', scheme + 3);
    const std::string base = slash == std::string::npos ? endpoint_ : endpoint_.substr(0, slash);
    const std::string path = slash == std::string::npos ? "/" : endpoint_.substr(slash);

    httplib::Client client(base);
    client.set_connection_timeout(0, timeout_ms_ * 1000);
    client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

    const nlohmann::json body{{"role", model_role_name(role)}, {"prompt", prompt}};
    const httplib::Result res = client.Post(path, body.dump(), "application/json");
    if (!res) throw ClientError("model client unreachable: " + endpoint_);
    if (res->status != 200)
        throw ClientError("model client returned status " + std::to_string(res->status));

    try {
        const nlohmann::json parsed = nlohmann::json::parse(res->body);
        ModelResponse out;
        out.text = parsed.at("text").get<std::string>();
        out.input_tokens = parsed.value("input_tokens", 0L);
        out.output_tokens = parsed.value("output_tokens", 0L);
        if (out.input_tokens < 0 || out.output_tokens < 0)
            throw ClientError("model client reported negative token counts");
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ClientError(std::string("model client sent invalid JSON: ") + e.what());
    }
}

}  // namespace fcrag
