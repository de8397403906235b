#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cuisim/types.hpp"

namespace cuisim::report {

struct Relation {
    std::string type;  // e.g. modify, located_at, suggestive_of
    std::size_t target = 0;

    bool operator==(const Relation&) const = default;
};

struct AnnotatedEntity {
    std::string tokens;
    std::size_t start = 0;  // inclusive token index
    std::size_t end = 0;    // inclusive token index
    EntityKind kind = EntityKind::Observation;
    Assertion assertion = Assertion::Present;
    std::vector<Relation> relations;

    std::size_t token_count() const { return end - start + 1; }
    bool operator==(const AnnotatedEntity&) const = default;
};

struct SentenceAnnotation {
    std::string text;
    /// Index of the sentence's first token in the whole-report token stream.
    std::size_t token_offset = 0;
    std::vector<AnnotatedEntity> entities;

    bool operator==(const SentenceAnnotation&) const = default;
};

struct ReportAnnotation {
    std::string report_id;
    std::string text;
    std::vector<AnnotatedEntity> report_level;
    std::vector<SentenceAnnotation> sentences;

    bool operator==(const ReportAnnotation&) const = default;
};

enum class MentionSource { ReportLevel, SentenceLevel, Merged };

std::string_view to_string(MentionSource s);

struct Mention {
    std::string isolated_text;
    std::string context_text;
    EntityKind kind = EntityKind::Observation;
    Assertion assertion = Assertion::Present;
    MentionSource source = MentionSource::ReportLevel;
    std::size_t start = 0;  // report token offsets, inclusive
    std::size_t end = 0;

    bool operator==(const Mention&) const = default;
};

void to_json(nlohmann::json& j, const Mention& m);
void from_json(const nlohmann::json& j, Mention& m);

/// Whitespace tokenization used for all span arithmetic.
std::vector<std::string> whitespace_tokens(std::string_view text);

/// Parses one annotation object (see README for the schema). Missing
/// sentence `token_offset` values are filled by cumulative token counts.
/// Throws DomainError on out-of-range spans or relation targets.
ReportAnnotation parse_annotation(const nlohmann::json& j);
std::vector<ReportAnnotation> read_annotation_lines(std::istream& in);

/// Multi-word negation cues, matched as whole lower-cased word sequences.
class CueLexicon {
public:
    CueLexicon() = default;
    explicit CueLexicon(std::vector<std::string> cues);

    /// The lexicon shipped in data/negation_cues.txt.
    static const CueLexicon& builtin();
    static CueLexicon load(const std::filesystem::path& path);

    bool matches(std::string_view sentence) const;
    const std::vector<std::string>& cues() const { return cues_; }

private:
    std::vector<std::string> cues_;
    std::vector<std::vector<std::string>> cue_words_;
};

enum class NegationScope { Component, OneHop };

struct AssertionConfig {
    NegationScope negation_scope = NegationScope::Component;
    /// Anatomies without any observation relation stay Present.
    bool bare_anatomy_present = true;
    std::size_t short_phrase_max_entities = 2;
    std::size_t short_phrase_max_head_tokens = 3;
    /// On a merge conflict the sentence-level assertion is kept.
    bool sentence_wins = true;
    CueLexicon cues = CueLexicon::builtin();
};

ReportAnnotation propagate_negations(const ReportAnnotation& annotation, const AssertionConfig& config = {});
ReportAnnotation negate_orphan_anatomies(const ReportAnnotation& annotation, const AssertionConfig& config = {});
ReportAnnotation fix_short_phrase_assertions(const ReportAnnotation& annotation,
                                             const AssertionConfig& config = {});
std::vector<Mention> merge_granularities(const ReportAnnotation& annotation, const AssertionConfig& config = {});

/// Runs the three assertion rules in order, then merges.
std::vector<Mention> extract_mentions(const ReportAnnotation& annotation, const AssertionConfig& config = {});

}  // namespace cuisim::report
