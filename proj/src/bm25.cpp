#include "fcrag/bm25.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace fcrag {

std::vector<std::string> Bm25Index::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            current += static_cast<char>(std::tolower(u));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Bm25Index Bm25Index::build(const std::vector<std::string>& texts, Bm25Params params) {
    if (texts.empty()) throw std::invalid_argument("Bm25Index: empty corpus");

    Bm25Index index;
    index.params_ = params;
    index.doc_lengths_.reserve(texts.size());

    long total_length = 0;
    for (std::size_t d = 0; d < texts.size(); ++d) {
        const std::vector<std::string> tokens = tokenize(texts[d]);
        if (tokens.empty())
            throw std::invalid_argument("Bm25Index: document " + std::to_string(d) +
                                        " has no tokens");
        index.doc_lengths_.push_back(static_cast<int>(tokens.size()));
        total_length += static_cast<long>(tokens.size());

        std::map<std::string, int> tf;
        for (const std::string& t : tokens) tf[t] += 1;
        for (const auto& [term, freq] : tf)
            index.postings_[term].emplace_back(static_cast<int>(d), freq);
    }
    index.average_doc_length_ = static_cast<double>(total_length) / static_cast<double>(texts.size());
    return index;
}

Bm25Index Bm25Index::from_parts(std::map<std::string, PostingList> postings,
                                std::vector<int> doc_lengths, double average_doc_length,
                                Bm25Params params) {
    Bm25Index index;
    index.postings_ = std::move(postings);
    index.doc_lengths_ = std::move(doc_lengths);
    index.average_doc_length_ = average_doc_length;
    index.params_ = params;
    return index;
}

double Bm25Index::idf(const PostingList& list) const {
    const double n = static_cast<double>(doc_lengths_.size());
    const double df = static_cast<double>(list.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::score(const std::vector<std::string>& query_terms, Eigen::Index chunk) const {
    double total = 0.0;
    for (const std::string& term : query_terms) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const PostingList& list = it->second;
        const auto entry = std::lower_bound(list.begin(), list.end(),
                                            std::pair<int, int>{static_cast<int>(chunk), 0});
        if (entry == list.end() || entry->first != static_cast<int>(chunk)) continue;
        const double tf = entry->second;
        const double norm_len =
            static_cast<double>(doc_lengths_[static_cast<std::size_t>(chunk)]) / average_doc_length_;
        // Same association order as score_all so both paths agree bitwise.
        const double w = idf(list) * (params_.k1 + 1.0);
        total += w * tf / (tf + params_.k1 * (1.0 - params_.b + params_.b * norm_len));
    }
    return total;
}

Eigen::VectorXd Bm25Index::score_all(const std::vector<std::string>& query_terms) const {
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(doc_count());
    for (const std::string& term : query_terms) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double w = idf(it->second) * (params_.k1 + 1.0);
        for (const auto& [chunk, tf] : it->second) {
            const double norm_len =
                static_cast<double>(doc_lengths_[static_cast<std::size_t>(chunk)]) / average_doc_length_;
            scores[chunk] += w * static_cast<double>(tf) /
                             (static_cast<double>(tf) +
                              params_.k1 * (1.0 - params_.b + params_.b * norm_len));
        }
    }
    return scores;
}

}  // namespace fcrag
