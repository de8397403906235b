#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cuisim/types.hpp"

namespace cuisim::umls {

struct ConceptRecord {
    Cui cui;
    std::string preferred_name;
    std::vector<std::string> strings;  // sorted, unique
    std::set<std::string> source_vocabularies;

    bool operator==(const ConceptRecord&) const = default;
};

struct SemanticTypeAssignment {
    Cui cui;
    std::string tui;
    std::string semantic_type;

    auto operator<=>(const SemanticTypeAssignment&) const = default;
};

struct RelationRecord {
    Cui cui1;
    Cui cui2;
    std::string rel;

    bool operator==(const RelationRecord&) const = default;
};

/// Row-level counters for one parsed file.
struct ParseStats {
    std::size_t rows = 0;
    std::size_t malformed = 0;
    std::size_t filtered = 0;
    std::size_t duplicates = 0;

    bool operator==(const ParseStats&) const = default;
};

template <typename T>
struct Parsed {
    std::vector<T> items;
    ParseStats stats;
};

struct ConceptCatalog {
    std::map<Cui, ConceptRecord> records;
    std::map<Cui, std::set<SemanticTypeAssignment>> semantic_types;
    std::vector<RelationRecord> relations;

    /// Semantic-type names of a concept; empty when unknown.
    std::set<std::string> type_names(const Cui& cui) const;

    bool operator==(const ConceptCatalog&) const = default;
};

struct IngestSummary {
    std::size_t records = 0;
    std::size_t semantic_types = 0;
    std::size_t relations = 0;
    std::size_t dropped_semantic_types = 0;
    std::size_t dropped_relations = 0;
};

struct BuildResult {
    ConceptCatalog catalog;
    IngestSummary summary;
};

/// Default vocabulary restriction.
inline const std::set<std::string> kDefaultVocabularies{"SNOMEDCT_US"};
/// Default relation allow-list.
inline const std::set<std::string> kDefaultRelations{"PAR", "CHD", "RB", "RN", "SY"};

inline constexpr std::size_t kMrconsoColumns = 18;
inline constexpr std::size_t kMrrelColumns = 16;
inline constexpr std::size_t kMrstyColumns = 6;

/// Splits one RRF line on '|'. The trailing field produced by the final
/// delimiter is dropped.
std::vector<std::string_view> split_rrf(std::string_view line);

// Stream variants parse already-open input; path variants throw DomainError
// when the file cannot be read. `workers` > 1 shards rows across threads;
// output does not depend on it.
Parsed<ConceptRecord> parse_mrconso(std::istream& in, const std::set<std::string>& vocab_filter,
                                    unsigned workers = 1);
Parsed<ConceptRecord> parse_mrconso(const std::filesystem::path& path,
                                    const std::set<std::string>& vocab_filter,
                                    unsigned workers = 1);

Parsed<SemanticTypeAssignment> parse_mrsty(std::istream& in, unsigned workers = 1);
Parsed<SemanticTypeAssignment> parse_mrsty(const std::filesystem::path& path,
                                           unsigned workers = 1);

Parsed<RelationRecord> parse_mrrel(std::istream& in, const std::set<std::string>& rel_allowlist,
                                   unsigned workers = 1);
Parsed<RelationRecord> parse_mrrel(const std::filesystem::path& path,
                                   const std::set<std::string>& rel_allowlist,
                                   unsigned workers = 1);

BuildResult build_catalog(std::vector<ConceptRecord> records,
                          const std::vector<SemanticTypeAssignment>& assignments,
                          const std::vector<RelationRecord>& relations);

// Snapshot: line-oriented text, first line `#cuisim-catalog v1`, then one
// record per line with '|' separated fields:
//   R|cui|preferred_name|vocab,vocab
//   S|cui|string
//   T|cui|tui|semantic type
//   L|cui1|cui2|rel
void write_snapshot(std::ostream& out, const ConceptCatalog& catalog);
ConceptCatalog read_snapshot(std::istream& in);
void save_snapshot(const std::filesystem::path& path, const ConceptCatalog& catalog);
ConceptCatalog load_snapshot(const std::filesystem::path& path);

/// TSV of (cui, string), one row per catalog string, sorted.
void write_string_dump(std::ostream& out, const ConceptCatalog& catalog);

}  // namespace cuisim::umls
