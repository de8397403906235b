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
#include "cuisim/umls.hpp"

namespace cuisim::labeler {

/// CheXpert-style label values.
enum class LabelValue { Positive, Negative, Uncertain, Unmentioned };

/// 1 > -1 > 0 > unmentioned.
int value_rank(LabelValue v);
LabelValue value_from_assertion(Assertion a);
std::string_view csv_value(LabelValue v);
LabelValue parse_csv_value(std::string_view s);

struct LabelVocabulary {
    std::vector<std::string> labels;
    std::map<std::string, std::set<Cui>> label_cuis;

    std::set<Cui> cuis_of(const std::set<std::string>& labels) const;
};

/// Lower-case, punctuation to spaces, whitespace collapsed.
std::string normalize_name(std::string_view s);

/// Matches label names against catalog strings. `overrides` replace the
/// matched set verbatim. Throws ConfigError for a label with no CUI.
LabelVocabulary build_label_vocabulary(const std::vector<std::string>& label_names,
                                       const umls::ConceptCatalog& catalog,
                                       const std::map<std::string, std::set<Cui>>& overrides = {});

struct LabelAssignment {
    std::string report_id;
    /// Labels absent from the map are unmentioned.
    std::map<std::string, LabelValue> values;
    /// Mention (link) index -> the single label it produced.
    std::map<std::size_t, std::string> attributions;

    LabelValue value(const std::string& label) const;
    std::set<std::string> positives() const;
    bool operator==(const LabelAssignment& o) const { return report_id == o.report_id && values == o.values; }
};

struct Phase1Options {
    /// How many parent levels to climb when no head CUI matches a label.
    std::size_t parent_depth = 1;
};

LabelAssignment phase1_label(const CuiSet& report, const LabelVocabulary& vocab, const graph::ConceptGraph& graph,
                             const Phase1Options& options = {});

struct SetScore {
    double score = 0.0;
    bool degenerate = false;
};

/// |R ∩ L| / |R| over CUIs; an empty R scores 0 and is flagged.
SetScore containment_index(const std::set<Cui>& report, const std::set<Cui>& label);
SetScore containment_index(const CuiSet& report, const std::set<Cui>& label);
/// |R ∩ L| / |R ∪ L|; both empty scores 0 and is flagged.
SetScore jaccard_index(const std::set<Cui>& report, const std::set<Cui>& label);

enum class SetMeasure { Containment, Jaccard };
SetMeasure parse_set_measure(std::string_view s);

enum class Candidate { Intersection, Old, New, Union };  // tie-break order
std::string_view to_string(Candidate c);

struct CandidateSet {
    std::set<std::string> labels;
    std::set<Cui> cuis;
    double score = 0.0;
};

struct LabelComparison {
    std::map<Candidate, CandidateSet> candidates;
    Candidate selected = Candidate::Intersection;
    bool degenerate = false;
    LabelAssignment final_labels;
};

void to_json(nlohmann::json& j, const LabelComparison& c);

/// Scores the four candidate label sets against the report and keeps the
/// best one (ties broken intersection > old > new > union).
LabelComparison phase2_select(const CuiSet& report, const LabelAssignment& old_labels,
                              const LabelAssignment& new_labels, const LabelVocabulary& vocab,
                              SetMeasure measure = SetMeasure::Containment);

struct OldLabels {
    std::string id_column = "report_id";
    std::vector<std::string> columns;
    std::map<std::string, LabelAssignment> rows;
};

OldLabels read_label_csv(std::istream& in);
void write_label_csv(std::ostream& out, const std::vector<std::string>& labels,
                     const std::vector<LabelAssignment>& rows, const std::string& id_column = "report_id");

struct LabelOptions {
    SetMeasure measure = SetMeasure::Containment;
    Phase1Options phase1;
    bool strict = false;
    unsigned workers = 1;
};

struct LabeledReport {
    LabelAssignment labels;
    std::optional<LabelComparison> comparison;
    bool missing_old = false;
};

struct LabelSummary {
    std::size_t reports = 0;
    std::size_t missing_old = 0;
    std::size_t unknown_old = 0;  // old-label rows without a report
    std::map<std::string, std::size_t> changed;  // per label, final != old
    std::map<std::string, std::size_t> selected;  // per candidate name
};

struct LabelRun {
    std::vector<LabeledReport> reports;  // input order
    LabelSummary summary;
};

/// Phase 1 for every report, then phase 2 where old labels exist. Without
/// `old_labels` the output is phase 1 only. Strict mode throws DomainError
/// on any id mismatch.
LabelRun label_dataset(const std::vector<CuiSet>& reports, const OldLabels* old_labels,
                       const LabelVocabulary& vocab, const graph::ConceptGraph& graph, const LabelOptions& options);

}  // namespace cuisim::labeler
