#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fcrag {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Okapi BM25 over an in-memory corpus. The IDF uses the +1-inside-log
/// smoothing so terms keep a positive weight even in single-document
/// corpora.
class Bm25Index {
public:
    using PostingList = std::vector<std::pair<int, int>>;  // (chunk, tf), sorted by chunk

    Bm25Index() = default;

    static Bm25Index build(const std::vector<std::string>& texts, Bm25Params params);

    /// Restores a persisted index without re-tokenizing.
    static Bm25Index from_parts(std::map<std::string, PostingList> postings,
                                std::vector<int> doc_lengths, double average_doc_length,
                                Bm25Params params);

    double score(const std::vector<std::string>& query_terms, Eigen::Index chunk) const;

    /// Raw scores for every chunk at once (zero where no term matches).
    Eigen::VectorXd score_all(const std::vector<std::string>& query_terms) const;

    /// Lower-cases and splits on non-alphanumeric bytes.
    static std::vector<std::string> tokenize(std::string_view text);

    Eigen::Index doc_count() const { return static_cast<Eigen::Index>(doc_lengths_.size()); }
    const std::map<std::string, PostingList>& postings() const { return postings_; }
    const std::vector<int>& doc_lengths() const { return doc_lengths_; }
    double average_doc_length() const { return average_doc_length_; }
    const Bm25Params& params() const { return params_; }

private:
    double idf(const PostingList& list) const;

    std::map<std::string, PostingList> postings_;
    std::vector<int> doc_lengths_;
    double average_doc_length_ = 0.0;
    Bm25Params params_;
};

}  // namespace fcrag
