#include "cuisim/similarity.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace cuisim::similarity {

std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::Tversky: return "tversky";
        case Measure::Symmetric: return "symmetric";
        case Measure::Prototypical: return "prototypical";
        case Measure::Weighted: return "weighted";
    }
    return "weighted";
}

Measure parse_measure(std::string_view s) {
    if (s == "tversky") return Measure::Tversky;
    if (s == "symmetric") return Measure::Symmetric;
    if (s == "prototypical") return Measure::Prototypical;
    if (s == "weighted") return Measure::Weighted;
    throw ConfigError("unknown measure '" + std::string(s) + "'");
}

void PreferenceVector::validate() const {
    bool any_positive = default_weight > 0.0;
    if (default_weight < 0.0) throw ConfigError("preference: negative default weight");
    for (const auto& [type, w] : weights) {
        if (!(w >= 0.0)) throw ConfigError("preference: negative weight for '" + type + "'");
        any_positive |= w > 0.0;
    }
    if (!any_positive) throw ConfigError("preference: all weights are zero");
}

double PreferenceVector::weight_of(const std::set<std::string>& semantic_types,
                                   WeightAggregate aggregate) const {
    if (semantic_types.empty()) return default_weight;
    double acc = 0.0;
    for (const auto& type : semantic_types) {
        auto it = weights.find(type);
        const double w = it == weights.end() ? default_weight : it->second;
        acc = aggregate == WeightAggregate::Max ? std::max(acc, w) : acc + w;
    }
    return acc;
}

PreferenceVector PreferenceVector::scaled(double factor) const {
    PreferenceVector out = *this;
    out.default_weight *= factor;
    for (auto& [type, w] : out.weights) w *= factor;
    return out;
}

void DistanceConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("distance: alpha must lie in [0,1]");
    if (!(beta > 0.0)) throw ConfigError("distance: beta must be > 0");
    preference.validate();
}

void to_json(nlohmann::json& j, const ComparisonBreakdown& b) {
    j = nlohmann::json{{"measure", to_string(b.measure)},
                       {"score", b.score},
                       {"intersection_weight", b.intersection_weight},
                       {"query_only_weight", b.query_only_weight},
                       {"candidate_only_weight", b.candidate_only_weight},
                       {"max_difference_weight", b.max_difference_weight},
                       {"min_difference_weight", b.min_difference_weight},
                       {"contradiction_weight", b.contradiction_weight},
                       {"contradicted_cuis", b.contradicted_cuis},
                       {"degenerate", b.degenerate}};
}

namespace {

struct PairCounts {
    std::size_t shared = 0;
    std::size_t a_only = 0;
    std::size_t b_only = 0;
};

PairCounts count_pairs(const CuiSet& a, const CuiSet& b) {
    PairCounts c;
    for (const auto& [cui, assertion] : a.elements) {
        auto it = b.elements.find(cui);
        if (it != b.elements.end() && it->second == assertion)
            ++c.shared;
        else
            ++c.a_only;
    }
    c.b_only = b.size() - c.shared;
    return c;
}

double quotient(double numerator, double denominator, bool both_empty) {
    if (both_empty) return 1.0;
    if (denominator <= 0.0) return 0.0;
    return numerator / denominator;
}

bool contradicts(Assertion x, Assertion y) {
    return (x == Assertion::Present && y == Assertion::Absent) ||
           (x == Assertion::Absent && y == Assertion::Present);
}

}  // namespace

double tversky(const CuiSet& a, const CuiSet& b, double alpha, double beta) {
    const auto c = count_pairs(a, b);
    const double shared = static_cast<double>(c.shared);
    return quotient(shared, shared + alpha * static_cast<double>(c.a_only) + beta * static_cast<double>(c.b_only),
                    a.empty() && b.empty());
}

double symmetric_tversky(const CuiSet& a, const CuiSet& b, double alpha, double beta) {
    const auto c = count_pairs(a, b);
    const double shared = static_cast<double>(c.shared);
    const double lo = static_cast<double>(std::min(c.a_only, c.b_only));
    const double hi = static_cast<double>(std::max(c.a_only, c.b_only));
    return quotient(shared, shared + beta * (alpha * lo + (1.0 - alpha) * hi), a.empty() && b.empty());
}

double prototypical(const CuiSet& a, const CuiSet& b, double beta) {
    const auto c = count_pairs(a, b);
    const double shared = static_cast<double>(c.shared);
    const double hi = static_cast<double>(std::max(c.a_only, c.b_only));
    return quotient(shared, shared + beta * hi, a.empty() && b.empty());
}

Contradictions count_contradictions(const CuiSet& a, const CuiSet& b) {
    Contradictions out;
    for (const auto& [cui, assertion] : a.elements) {
        auto it = b.elements.find(cui);
        if (it != b.elements.end() && contradicts(assertion, it->second)) out.cuis.insert(cui);
    }
    out.count = out.cuis.size();
    return out;
}

namespace {

double element_weight(const Cui& cui, const CuiSet& a, const CuiSet& b, const DistanceConfig& config) {
    const auto* meta_a = a.concept_meta.contains(cui) ? &a.concept_meta.at(cui) : nullptr;
    const auto* meta_b = b.concept_meta.contains(cui) ? &b.concept_meta.at(cui) : nullptr;
    const auto& pref = config.preference;
    if (meta_a == nullptr && meta_b == nullptr) return pref.default_weight;
    double w = 0.0;
    if (meta_a != nullptr) w = std::max(w, pref.weight_of(meta_a->semantic_types, config.aggregate));
    if (meta_b != nullptr) w = std::max(w, pref.weight_of(meta_b->semantic_types, config.aggregate));
    return w;
}

struct Expanded {
    CuiSet a;
    CuiSet b;
};

Expanded expand(const CuiSet& a, const CuiSet& b, const DistanceConfig& config,
                const graph::SynonymIndex* synonyms) {
    if (!config.synonym_expansion_enabled || synonyms == nullptr) return {a, b};
    Expanded out{graph::synonym_expand(a, b, *synonyms), b};
    if (config.expand_both) out.b = graph::synonym_expand(b, a, *synonyms);
    return out;
}

ComparisonBreakdown weighted_core(const CuiSet& a, const CuiSet& b, const DistanceConfig& config) {
    ComparisonBreakdown out;
    out.measure = Measure::Weighted;
    // Iterating in CUI order keeps every sum independent of argument order.
    for (const auto& [cui, assertion] : a.elements) {
        const double w = element_weight(cui, a, b, config);
        auto it = b.elements.find(cui);
        if (it == b.elements.end()) {
            out.query_only_weight += w;
        } else if (it->second == assertion) {
            out.intersection_weight += w;
        } else if (contradicts(assertion, it->second)) {
            out.contradicted_cuis.insert(cui);
            if (config.contradictions_enabled) out.contradiction_weight += w;
            if (config.double_count_contradictions) out.query_only_weight += w;
        } else {
            out.query_only_weight += w;
        }
    }
    for (const auto& [cui, assertion] : b.elements) {
        auto it = a.elements.find(cui);
        if (it != a.elements.end() && it->second == assertion) continue;
        const double w = element_weight(cui, a, b, config);
        if (it != a.elements.end() && contradicts(assertion, it->second)) {
            if (config.double_count_contradictions) out.candidate_only_weight += w;
            continue;
        }
        out.candidate_only_weight += w;
    }
    out.max_difference_weight = std::max(out.query_only_weight, out.candidate_only_weight);
    out.min_difference_weight = std::min(out.query_only_weight, out.candidate_only_weight);
    const double denominator = out.intersection_weight + out.max_difference_weight + out.contradiction_weight;
    if (a.empty() && b.empty()) {
        out.score = 1.0;
    } else if (denominator <= 0.0) {
        out.score = 0.0;
        out.degenerate = true;
    } else {
        out.score = out.intersection_weight / denominator;
    }
    return out;
}

}  // namespace

ComparisonBreakdown weighted_distance(const CuiSet& a, const CuiSet& b, const DistanceConfig& config,
                                      const graph::SynonymIndex* synonyms) {
    config.validate();
    const auto sets = expand(a, b, config, synonyms);
    return weighted_core(sets.a, sets.b, config);
}

ComparisonBreakdown compare(const CuiSet& a, const CuiSet& b, const DistanceConfig& config,
                            const graph::SynonymIndex* synonyms) {
    if (config.measure == Measure::Weighted) return weighted_distance(a, b, config, synonyms);
    config.validate();
    const auto sets = expand(a, b, config, synonyms);
    const auto counts = count_pairs(sets.a, sets.b);
    ComparisonBreakdown out;
    out.measure = config.measure;
    out.intersection_weight = static_cast<double>(counts.shared);
    out.query_only_weight = static_cast<double>(counts.a_only);
    out.candidate_only_weight = static_cast<double>(counts.b_only);
    out.max_difference_weight = std::max(out.query_only_weight, out.candidate_only_weight);
    out.min_difference_weight = std::min(out.query_only_weight, out.candidate_only_weight);
    out.contradicted_cuis = count_contradictions(sets.a, sets.b).cuis;
    switch (config.measure) {
        case Measure::Tversky: out.score = tversky(sets.a, sets.b, config.alpha, config.beta); break;
        case Measure::Symmetric: out.score = symmetric_tversky(sets.a, sets.b, config.alpha, config.beta); break;
        default: out.score = prototypical(sets.a, sets.b, config.beta); break;
    }
    out.degenerate = out.score == 0.0 && counts.shared == 0 && out.max_difference_weight == 0.0 &&
                     !(sets.a.empty() && sets.b.empty());
    return out;
}

}  // namespace cuisim::similarity
