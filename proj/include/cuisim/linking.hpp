#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cuisim/cuiset.hpp"
#include "cuisim/report.hpp"
#include "cuisim/umls.hpp"

namespace cuisim::linking {

inline constexpr std::size_t kMaxCandidates = 128;

struct LinkCandidate {
    Cui cui;
    double score = 0.0;  // cosine similarity in [-1, 1]
    std::set<std::string> semantic_types;

    bool operator==(const LinkCandidate&) const = default;
};

struct MentionCandidates {
    report::Mention mention;
    std::vector<LinkCandidate> isolated_candidates;
    std::vector<LinkCandidate> context_candidates;
};

struct LinkedConcept {
    Cui cui;
    Assertion assertion = Assertion::Present;
    EntityKind kind = EntityKind::Observation;
    double score = 0.0;
    Provenance provenance = Provenance::Isolated;
    std::size_t mention_ref = 0;
    std::set<std::string> semantic_types;
    /// Best surviving candidate of each list, kept for the labeler.
    std::optional<ScoredCui> isolated_head;
    std::optional<ScoredCui> context_head;
};

/// Semantic-type allow-lists per entity kind.
struct TypeConfig {
    std::set<std::string> observation_types;
    std::set<std::string> anatomy_types;

    /// Four observation and five anatomy types; a reconstruction, since the
    /// source method does not name them.
    static TypeConfig defaults();
    const std::set<std::string>& allowed(EntityKind kind) const;
};

/// Sorts by descending score, ties by ascending CUI.
void sort_candidates(std::vector<LinkCandidate>& candidates);

std::vector<LinkCandidate> filter_candidates(const std::vector<LinkCandidate>& candidates, EntityKind kind,
                                             const TypeConfig& types);

/// Highest-scoring candidate across both lists (ties: smaller CUI, then
/// the isolated list). Assertion, kind and mention_ref are left for the
/// caller. Returns nullopt when both lists are empty.
std::optional<LinkedConcept> select_best(const std::vector<LinkCandidate>& filtered_isolated,
                                         const std::vector<LinkCandidate>& filtered_context);

CuiSet report_to_cui_set(const std::vector<LinkedConcept>& links, const std::string& report_id);

struct ReportCandidates {
    std::string report_id;
    std::vector<MentionCandidates> mentions;
};

struct LinkStats {
    std::size_t reports = 0;
    std::size_t mentions = 0;
    std::size_t linked = 0;
    std::size_t unlinked = 0;
    std::size_t invalid_candidates = 0;
    std::size_t unknown_cuis = 0;
};

/// Parses the adapter's candidate JSON lines. Semantic types come from the
/// catalog; candidates with an invalid CUI or a score outside [-1, 1] are
/// dropped and counted. Lists are sorted and clamped to kMaxCandidates.
std::vector<ReportCandidates> read_candidate_lines(std::istream& in, const umls::ConceptCatalog& catalog,
                                                   LinkStats& stats);

CuiSet link_report(const ReportCandidates& report, const TypeConfig& types, LinkStats& stats);

}  // namespace cuisim::linking
