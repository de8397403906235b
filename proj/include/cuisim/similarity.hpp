#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "cuisim/cuiset.hpp"
#include "cuisim/graph.hpp"

namespace cuisim::similarity {

enum class Measure { Tversky, Symmetric, Prototypical, Weighted };
enum class WeightAggregate { Max, Sum };

std::string_view to_string(Measure m);
Measure parse_measure(std::string_view s);

/// Per-semantic-type weights. Types without an entry use `default_weight`.
struct PreferenceVector {
    std::map<std::string, double> weights;
    double default_weight = 1.0;

    /// Throws ConfigError on a negative weight or when no effective weight is positive.
    void validate() const;
    double weight_of(const std::set<std::string>& semantic_types,
                     WeightAggregate aggregate = WeightAggregate::Max) const;
    PreferenceVector scaled(double factor) const;
};

struct DistanceConfig {
    Measure measure = Measure::Weighted;
    double alpha = 0.0;
    double beta = 1.0;
    bool contradictions_enabled = true;
    bool synonym_expansion_enabled = true;
    /// Expand both sides instead of only the query side.
    bool expand_both = false;
    /// Count contradicted CUIs in the difference tallies as well as in the
    /// contradiction term.
    bool double_count_contradictions = false;
    WeightAggregate aggregate = WeightAggregate::Max;
    PreferenceVector preference;

    void validate() const;
};

struct ComparisonBreakdown {
    Measure measure = Measure::Weighted;
    double intersection_weight = 0.0;
    double query_only_weight = 0.0;      // A \ B
    double candidate_only_weight = 0.0;  // B \ A
    double max_difference_weight = 0.0;
    double min_difference_weight = 0.0;
    double contradiction_weight = 0.0;
    double score = 0.0;
    std::set<Cui> contradicted_cuis;
    bool degenerate = false;
};

void to_json(nlohmann::json& j, const ComparisonBreakdown& b);

// Unweighted forms over (cui, assertion) pairs. Both sets empty scores 1;
// any other zero denominator scores 0.
double tversky(const CuiSet& a, const CuiSet& b, double alpha, double beta);
double symmetric_tversky(const CuiSet& a, const CuiSet& b, double alpha, double beta);
double prototypical(const CuiSet& a, const CuiSet& b, double beta = 1.0);

struct Contradictions {
    std::size_t count = 0;
    std::set<Cui> cuis;
};

/// CUIs asserted Present on one side and Absent on the other.
Contradictions count_contradictions(const CuiSet& a, const CuiSet& b);

/// Preference-weighted score with contradiction term:
///   I / (I + max(W(A\B), W(B\A)) + W_contr)
/// `a` is the query. Synonym expansion needs `synonyms`; it is skipped when
/// null. Throws ConfigError for an invalid config.
ComparisonBreakdown weighted_distance(const CuiSet& a, const CuiSet& b, const DistanceConfig& config,
                                      const graph::SynonymIndex* synonyms = nullptr);

/// Scores with the measure named in `config`, always returning a breakdown.
ComparisonBreakdown compare(const CuiSet& a, const CuiSet& b, const DistanceConfig& config,
                            const graph::SynonymIndex* synonyms = nullptr);

}  // namespace cuisim::similarity
