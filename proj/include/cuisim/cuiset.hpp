#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cuisim/types.hpp"

namespace cuisim {

enum class Provenance { Isolated, Context };

std::string_view to_string(Provenance p);

struct ScoredCui {
    Cui cui;
    double score = 0.0;

    bool operator==(const ScoredCui&) const = default;
};

struct ConceptMeta {
    EntityKind kind = EntityKind::Observation;
    std::set<std::string> semantic_types;
    double score = 0.0;

    bool operator==(const ConceptMeta&) const = default;
};

/// One linked mention and the two heads it was chosen from.
struct MentionLink {
    std::size_t mention = 0;
    Cui cui;
    Assertion assertion = Assertion::Present;
    EntityKind kind = EntityKind::Observation;
    double score = 0.0;
    Provenance provenance = Provenance::Isolated;
    std::optional<ScoredCui> isolated;
    std::optional<ScoredCui> context;

    bool operator==(const MentionLink&) const = default;
};

/// Ranks assertions for collision resolution: Present > Uncertain > Absent.
int assertion_rank(Assertion a);

/// A report as a set of asserted concepts.
struct CuiSet {
    std::string report_id;
    std::map<Cui, Assertion> elements;
    std::map<Cui, ConceptMeta> concept_meta;
    std::vector<MentionLink> links;

    /// Inserts (cui, assertion); an existing element keeps the higher-ranked
    /// assertion.
    void insert(const Cui& cui, Assertion a);
    bool contains(const Cui& cui) const { return elements.contains(cui); }
    std::size_t size() const { return elements.size(); }
    bool empty() const { return elements.empty(); }

    bool operator==(const CuiSet&) const = default;
};

void to_json(nlohmann::json& j, const CuiSet& s);
void from_json(const nlohmann::json& j, CuiSet& s);

/// Reads a CuiSet JSON-lines file. Malformed lines throw when `strict`,
/// otherwise they are skipped and counted in `*malformed`.
std::vector<CuiSet> read_cuiset_lines(std::istream& in, bool strict = true,
                                      std::size_t* malformed = nullptr);
void write_cuiset_lines(std::ostream& out, const std::vector<CuiSet>& sets);

}  // namespace cuisim
