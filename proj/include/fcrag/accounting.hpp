#pragma once

#include <array>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fcrag {

enum class UsageCategory { indexing_summary, query_expand, query_rerank, query_answer };

inline constexpr std::array<UsageCategory, 4> kAllUsageCategories = {
    UsageCategory::indexing_summary,
    UsageCategory::query_expand,
    UsageCategory::query_rerank,
    UsageCategory::query_answer,
};

const char* category_name(UsageCategory category);
UsageCategory category_from_name(const std::string& name);

struct UsageEntry {
    UsageCategory category = UsageCategory::indexing_summary;
    long calls = 0;
    long input_tokens = 0;
    long output_tokens = 0;
    double wall_seconds = 0.0;
};

struct UsageTotals {
    long calls = 0;
    long input_tokens = 0;
    long output_tokens = 0;
    double wall_seconds = 0.0;

    long total_tokens() const { return input_tokens + output_tokens; }
};

/// Append-only token/call ledger. Appends are thread-safe; reads see a
/// consistent snapshot.
class UsageLedger {
public:
    void record(UsageCategory category, long calls, long input_tokens, long output_tokens,
                double wall_seconds = 0.0);

    UsageTotals totals(UsageCategory category) const;
    UsageTotals grand_total() const;
    std::vector<UsageEntry> entries() const;

private:
    mutable std::mutex mutex_;
    std::vector<UsageEntry> entries_;
};

/// Lower-cases, strips punctuation, splits on whitespace.
std::vector<std::string> normalize_tokens(std::string_view text);

/// Token-level F1 with multiset overlap. Both sides empty after
/// normalization scores 1; exactly one empty scores 0.
double token_f1(std::string_view predicted, std::string_view gold);

struct EvalRecord {
    std::string query_id;
    std::string predicted;
    std::string gold;
    double f1 = 0.0;
    bool lattice_active = false;  // lattice-derived item in top-5 retrieval
};

/// Correlational diagnostic, not a causal ablation: mean F1 with and
/// without lattice-derived items in the top-5, and the delta in
/// percentage points. Empty partitions report an absent mean.
struct ActivationPartition {
    std::optional<double> active_mean_f1;
    std::optional<double> inactive_mean_f1;
    std::optional<double> delta_pp;
    long active_count = 0;
    long inactive_count = 0;
};

ActivationPartition activation_partition(const std::vector<EvalRecord>& records);

struct CostReport {
    UsageTotals indexing;
    UsageTotals querying;
    long query_count = 0;
    std::optional<double> calls_per_query;
    std::optional<double> tokens_per_query;

    struct AmortizationRow {
        long queries_per_snapshot = 0;
        double tokens_per_snapshot = 0.0;  // indexing cost re-paid per snapshot
    };
    std::vector<AmortizationRow> amortization;
};

/// Indexing vs querying subtotals, per-query averages, and the re-index
/// amortization table for the given queries-per-snapshot workloads.
CostReport cost_report(const UsageLedger& ledger, long query_count,
                       const std::vector<long>& snapshot_query_counts = {});

std::string format_cost_report(const CostReport& report);

}  // namespace fcrag
