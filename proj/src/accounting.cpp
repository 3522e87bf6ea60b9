#include "fcrag/accounting.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fcrag {

const char* category_name(UsageCategory category) {
    switch (category) {
        case UsageCategory::indexing_summary: return "indexing.summary";
        case UsageCategory::query_expand: return "query.expand";
        case UsageCategory::query_rerank: return "query.rerank";
        case UsageCategory::query_answer: return "query.answer";
    }
    return "unknown";
}

UsageCategory category_from_name(const std::string& name) {
    for (UsageCategory c : kAllUsageCategories)
        if (name == category_name(c)) return c;
    throw std::invalid_argument("unknown usage category: " + name);
}

void UsageLedger::record(UsageCategory category, long calls, long input_tokens,
                         long output_tokens, double wall_seconds) {
    if (calls < 0 || input_tokens < 0 || output_tokens < 0)
        throw std::invalid_argument("UsageLedger: negative counts");
    std::lock_guard lock(mutex_);
    entries_.push_back({category, calls, input_tokens, output_tokens, wall_seconds});
}

UsageTotals UsageLedger::totals(UsageCategory category) const {
    std::lock_guard lock(mutex_);
    UsageTotals t;
    for (const UsageEntry& e : entries_) {
        if (e.category != category) continue;
        t.calls += e.calls;
        t.input_tokens += e.input_tokens;
        t.output_tokens += e.output_tokens;
        t.wall_seconds += e.wall_seconds;
    }
    return t;
}

UsageTotals UsageLedger::grand_total() const {
    std::lock_guard lock(mutex_);
    UsageTotals t;
    for (const UsageEntry& e : entries_) {
        t.calls += e.calls;
        t.input_tokens += e.input_tokens;
        t.output_tokens += e.output_tokens;
        t.wall_seconds += e.wall_seconds;
    }
    return t;
}

std::vector<UsageEntry> UsageLedger::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::vector<std::string> normalize_tokens(std::string_view text) {
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

double token_f1(std::string_view predicted, std::string_view gold) {
    const std::vector<std::string> p = normalize_tokens(predicted);
    const std::vector<std::string> g = normalize_tokens(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;

    std::map<std::string, long> gold_counts;
    for (const std::string& t : g) gold_counts[t] += 1;
    long overlap = 0;
    for (const std::string& t : p) {
        const auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            ++overlap;
            --it->second;
        }
    }
    if (overlap == 0) return 0.0;
    // 2PR/(P+R) simplified; keeps hand cases like 4/5 bit-exact.
    return 2.0 * static_cast<double>(overlap) /
           static_cast<double>(p.size() + g.size());
}

ActivationPartition activation_partition(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw std::invalid_argument("activation_partition: no records");

    ActivationPartition part;
    double active_sum = 0.0, inactive_sum = 0.0;
    for (const EvalRecord& r : records) {
        if (r.lattice_active) {
            ++part.active_count;
            active_sum += r.f1;
        } else {
            ++part.inactive_count;
            inactive_sum += r.f1;
        }
    }
    if (part.active_count > 0)
        part.active_mean_f1 = active_sum / static_cast<double>(part.active_count);
    if (part.inactive_count > 0)
        part.inactive_mean_f1 = inactive_sum / static_cast<double>(part.inactive_count);
    if (part.active_mean_f1 && part.inactive_mean_f1)
        part.delta_pp = (*part.active_mean_f1 - *part.inactive_mean_f1) * 100.0;
    return part;
}

CostReport cost_report(const UsageLedger& ledger, long query_count,
                       const std::vector<long>& snapshot_query_counts) {
    CostReport report;
    report.query_count = query_count;
    report.indexing = ledger.totals(UsageCategory::indexing_summary);
    for (UsageCategory c : {UsageCategory::query_expand, UsageCategory::query_rerank,
                            UsageCategory::query_answer}) {
        const UsageTotals t = ledger.totals(c);
        report.querying.calls += t.calls;
        report.querying.input_tokens += t.input_tokens;
        report.querying.output_tokens += t.output_tokens;
        report.querying.wall_seconds += t.wall_seconds;
    }
    if (query_count > 0) {
        report.calls_per_query =
            static_cast<double>(report.querying.calls) / static_cast<double>(query_count);
        report.tokens_per_query =
            static_cast<double>(report.querying.total_tokens()) / static_cast<double>(query_count);
    }
    for (long q : snapshot_query_counts) {
        const double per_query = report.tokens_per_query.value_or(0.0);
        report.amortization.push_back(
            {q, static_cast<double>(report.indexing.total_tokens()) + per_query * static_cast<double>(q)});
    }
    return report;
}

std::string format_cost_report(const CostReport& report) {
    std::ostringstream out;
    out << "category            calls   in_tokens  out_tokens  total\n";
    out << "indexing           " << report.indexing.calls << "  " << report.indexing.input_tokens
        << "  " << report.indexing.output_tokens << "  " << report.indexing.total_tokens() << "\n";
    out << "querying           " << report.querying.calls << "  " << report.querying.input_tokens
        << "  " << report.querying.output_tokens << "  " << report.querying.total_tokens() << "\n";
    out << "grand total tokens " << report.indexing.total_tokens() + report.querying.total_tokens()
        << "\n";
    if (report.calls_per_query)
        out << "calls/query        " << *report.calls_per_query << " over " << report.query_count
            << " queries\n";
    if (report.tokens_per_query) out << "tokens/query       " << *report.tokens_per_query << "\n";
    if (!report.amortization.empty()) {
        out << "re-index amortization (tokens per corpus snapshot):\n";
        for (const auto& row : report.amortization)
            out << "  " << row.queries_per_snapshot << " queries -> " << row.tokens_per_snapshot
                << " tokens\n";
    }
    return out.str();
}

}  // namespace fcrag
