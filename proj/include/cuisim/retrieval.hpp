#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cuisim/cuiset.hpp"
#include "cuisim/graph.hpp"
#include "cuisim/similarity.hpp"

namespace cuisim::retrieval {

/// Reports keyed by id plus the CUI -> report inverted lists.
class ReportIndex {
public:
    /// Throws DomainError on duplicate ids or an empty input.
    static ReportIndex build(std::vector<CuiSet> reports);

    const CuiSet* find(const std::string& id) const;
    const std::map<std::string, CuiSet>& reports() const { return reports_; }
    const std::map<Cui, std::set<std::string>>& inverted() const { return inverted_; }
    std::size_t size() const { return reports_.size(); }

    std::map<std::string, std::string> class_labels;

    /// True when `inverted` is exactly the transpose of the report sets.
    bool verify_transpose() const;
    /// Index restricted to `ids`; unknown ids are ignored.
    ReportIndex subset(const std::set<std::string>& ids) const;

private:
    std::map<std::string, CuiSet> reports_;
    std::map<Cui, std::set<std::string>> inverted_;
};

/// Reads a CuiSet JSON-lines file into an index. With `strict` unset,
/// malformed lines are skipped and counted.
ReportIndex build_index(std::istream& in, bool strict = true, std::size_t* malformed = nullptr);

struct DiscoveryOptions {
    bool enabled = true;
    std::size_t depth = 10;
    graph::TraversalEdges edges = graph::TraversalEdges::Both;
};

/// Reports sharing at least one CUI with `result.reached`. A null result
/// means discovery is disabled and every report id is returned.
std::set<std::string> discover_candidate_reports(const graph::DiscoveryResult* result, const ReportIndex& index);

struct RankedEntry {
    std::string report_id;
    double score = 0.0;
    similarity::ComparisonBreakdown breakdown;
};

struct RankedResult {
    std::string query_id;
    std::size_t pool_size = 0;
    /// Score descending, ties by report id ascending.
    std::vector<RankedEntry> entries;
};

void to_json(nlohmann::json& j, const RankedResult& r);

struct SearchContext {
    const ReportIndex* index = nullptr;
    const graph::ConceptGraph* graph = nullptr;      // needed when discovery is enabled
    const graph::SynonymIndex* synonyms = nullptr;   // null disables synonym expansion
    similarity::DistanceConfig config;
    DiscoveryOptions discovery;
    unsigned workers = 1;
};

/// Top-k reports for `query`. Throws ConfigError when k is 0 or discovery
/// is enabled without a graph.
RankedResult search(const CuiSet& query, const SearchContext& ctx, std::size_t k);

inline constexpr std::size_t kBalancedDatasetSize = 706;

struct HarnessPlan {
    std::vector<std::string> classes;
    std::size_t queries_per_class = 10;
    /// Ordered query ids per class; the first queries_per_class are used.
    std::map<std::string, std::vector<std::string>> class_queries;
    std::set<std::string> balanced_ids;
    std::set<std::string> retrieval_ids;
    /// Per-class retrieval budget; defaults to ceil(706 / class count).
    std::optional<std::size_t> per_class_budget;
    /// Ranked list length per query; 0 ranks the whole retrieval pool.
    std::size_t per_query_k = 0;
    /// A report is attributed to at most one query in the whole run.
    bool without_replacement = true;

    std::set<std::string> query_ids() const;
    std::size_t budget() const;
    /// Throws DomainError when Q is not a subset of B or (B \ Q) is not a
    /// subset of R; ConfigError for structural problems.
    void validate() const;
};

HarnessPlan parse_plan(const nlohmann::json& j);

struct SearchLogEntry {
    std::size_t round = 0;  // 1-based
    std::string class_name;
    std::string query_id;

    bool operator==(const SearchLogEntry&) const = default;
};

struct ManifestEntry {
    std::string report_id;
    std::string class_name;
    std::string query_id;
    std::size_t round = 0;  // 1-based
    std::size_t rank = 0;   // 1-based position in that query's ranking
    double score = 0.0;
    similarity::ComparisonBreakdown breakdown;
};

struct HarnessResult {
    std::vector<SearchLogEntry> searches;
    std::vector<ManifestEntry> manifest;
    std::map<std::string, std::size_t> per_class_counts;
};

/// Round-robin retrieval: round r issues the r-th query of every class in
/// class order. `dataset` must hold the query reports; the search pool is
/// the plan's retrieval ids. Searches within a round run on ctx.workers
/// threads; accumulation is sequential in class order.
HarnessResult run_harness(const HarnessPlan& plan, const ReportIndex& dataset, const SearchContext& ctx);

/// CSV: report_id,class,query_id,round,rank,score
void write_manifest_csv(std::ostream& out, const HarnessResult& result);
/// One JSON object per manifest entry, including the breakdown.
void write_manifest_jsonl(std::ostream& out, const HarnessResult& result);

/// Shortest round-tripping decimal form.
std::string format_score(double v);

}  // namespace cuisim::retrieval
