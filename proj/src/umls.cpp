#include "cuisim/umls.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "parallel.hpp"

namespace cuisim::umls {

namespace {

std::vector<std::string> read_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lines.push_back(std::move(line));
    }
    return lines;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read " + path.string());
    return in;
}

enum class RowStatus { Ok, Malformed, Filtered };

template <typename Row>
struct RowResult {
    RowStatus status = RowStatus::Malformed;
    Row row{};
};

/// Parses every line with `parse_row` (possibly in parallel) and returns the
/// accepted rows in file order.
template <typename Row, typename ParseRow>
std::vector<Row> parse_rows(std::istream& in, unsigned workers, ParseStats& stats,
                            ParseRow parse_row) {
    const auto lines = read_lines(in);
    auto results = detail::parallel_map<RowResult<Row>>(
        lines.size(), workers, [&](std::size_t i) { return parse_row(lines[i]); });
    std::vector<Row> rows;
    rows.reserve(results.size());
    stats.rows += lines.size();
    for (auto& r : results) {
        switch (r.status) {
            case RowStatus::Ok: rows.push_back(std::move(r.row)); break;
            case RowStatus::Malformed: ++stats.malformed; break;
            case RowStatus::Filtered: ++stats.filtered; break;
        }
    }
    return rows;
}

struct ConsoRow {
    Cui cui;
    bool preferred = false;
    std::string sab;
    std::string str;
};

void check_field(std::string_view field, std::string_view what) {
    if (field.find_first_of("|\n\r") != std::string_view::npos)
        throw DomainError("snapshot field for " + std::string(what) + " contains a delimiter");
}

}  // namespace

std::vector<std::string_view> split_rrf(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto bar = line.find('|', start);
        if (bar == std::string_view::npos) {
            if (start < line.size()) fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, bar - start));
        start = bar + 1;
    }
    return fields;
}

std::set<std::string> ConceptCatalog::type_names(const Cui& cui) const {
    std::set<std::string> names;
    if (auto it = semantic_types.find(cui); it != semantic_types.end())
        for (const auto& a : it->second) names.insert(a.semantic_type);
    return names;
}

Parsed<ConceptRecord> parse_mrconso(std::istream& in, const std::set<std::string>& vocab_filter,
                                    unsigned workers) {
    Parsed<ConceptRecord> out;
    auto rows = parse_rows<ConsoRow>(in, workers, out.stats, [&](const std::string& line) {
        RowResult<ConsoRow> r;
        const auto f = split_rrf(line);
        if (f.size() < kMrconsoColumns || !is_valid_cui(f[0]) || f[14].empty()) return r;
        if (f[1] != "ENG" || !vocab_filter.contains(std::string(f[11]))) {
            r.status = RowStatus::Filtered;
            return r;
        }
        r.status = RowStatus::Ok;
        r.row = ConsoRow{std::string(f[0]), f[2] == "P", std::string(f[11]), std::string(f[14])};
        return r;
    });

    std::map<Cui, ConceptRecord> by_cui;
    std::map<Cui, std::set<std::string>> strings;
    for (const auto& row : rows) {
        auto& rec = by_cui[row.cui];
        rec.cui = row.cui;
        rec.source_vocabularies.insert(row.sab);
        if (row.preferred && rec.preferred_name.empty()) rec.preferred_name = row.str;
        if (!strings[row.cui].insert(row.str).second) ++out.stats.duplicates;
    }
    for (auto& [cui, rec] : by_cui) {
        auto& strs = strings[cui];
        rec.strings.assign(strs.begin(), strs.end());
        if (rec.preferred_name.empty()) rec.preferred_name = rec.strings.front();
        out.items.push_back(std::move(rec));
    }
    if (out.items.empty()) throw DomainError("MRCONSO: no records survived filtering");
    return out;
}

Parsed<ConceptRecord> parse_mrconso(const std::filesystem::path& path,
                                    const std::set<std::string>& vocab_filter, unsigned workers) {
    auto in = open_or_throw(path);
    return parse_mrconso(in, vocab_filter, workers);
}

Parsed<SemanticTypeAssignment> parse_mrsty(std::istream& in, unsigned workers) {
    Parsed<SemanticTypeAssignment> out;
    auto rows = parse_rows<SemanticTypeAssignment>(in, workers, out.stats,
                                                   [](const std::string& line) {
        RowResult<SemanticTypeAssignment> r;
        const auto f = split_rrf(line);
        if (f.size() < kMrstyColumns || !is_valid_cui(f[0]) || !is_valid_tui(f[1]) || f[3].empty())
            return r;
        r.status = RowStatus::Ok;
        r.row = {std::string(f[0]), std::string(f[1]), std::string(f[3])};
        return r;
    });
    std::set<SemanticTypeAssignment> seen;
    for (auto& row : rows) {
        if (!seen.insert(row).second) {
            ++out.stats.duplicates;
            continue;
        }
        out.items.push_back(std::move(row));
    }
    return out;
}

Parsed<SemanticTypeAssignment> parse_mrsty(const std::filesystem::path& path, unsigned workers) {
    auto in = open_or_throw(path);
    return parse_mrsty(in, workers);
}

Parsed<RelationRecord> parse_mrrel(std::istream& in, const std::set<std::string>& rel_allowlist,
                                   unsigned workers) {
    Parsed<RelationRecord> out;
    auto rows = parse_rows<RelationRecord>(in, workers, out.stats, [&](const std::string& line) {
        RowResult<RelationRecord> r;
        const auto f = split_rrf(line);
        if (f.size() < kMrrelColumns || !is_valid_cui(f[0]) || !is_valid_cui(f[4]) || f[3].empty())
            return r;
        if (!rel_allowlist.contains(std::string(f[3])) || f[0] == f[4]) {
            r.status = RowStatus::Filtered;
            return r;
        }
        r.status = RowStatus::Ok;
        r.row = {std::string(f[0]), std::string(f[4]), std::string(f[3])};
        return r;
    });
    std::set<std::tuple<Cui, Cui, std::string>> seen;
    for (auto& row : rows) {
        const auto& [lo, hi] = std::minmax(row.cui1, row.cui2);
        if (!seen.emplace(lo, hi, row.rel).second) {
            ++out.stats.duplicates;
            continue;
        }
        out.items.push_back(std::move(row));
    }
    return out;
}

Parsed<RelationRecord> parse_mrrel(const std::filesystem::path& path,
                                   const std::set<std::string>& rel_allowlist, unsigned workers) {
    auto in = open_or_throw(path);
    return parse_mrrel(in, rel_allowlist, workers);
}

BuildResult build_catalog(std::vector<ConceptRecord> records,
                          const std::vector<SemanticTypeAssignment>& assignments,
                          const std::vector<RelationRecord>& relations) {
    BuildResult out;
    auto& cat = out.catalog;
    for (auto& rec : records) {
        const Cui cui = rec.cui;
        cat.records.insert_or_assign(cui, std::move(rec));
    }
    for (const auto& a : assignments) {
        if (!cat.records.contains(a.cui)) {
            ++out.summary.dropped_semantic_types;
            continue;
        }
        if (cat.semantic_types[a.cui].insert(a).second) ++out.summary.semantic_types;
    }
    for (const auto& rel : relations) {
        if (!cat.records.contains(rel.cui1) || !cat.records.contains(rel.cui2)) {
            ++out.summary.dropped_relations;
            continue;
        }
        cat.relations.push_back(rel);
    }
    out.summary.records = cat.records.size();
    out.summary.relations = cat.relations.size();
    return out;
}

void write_snapshot(std::ostream& out, const ConceptCatalog& catalog) {
    out << "#cuisim-catalog v1\n";
    for (const auto& [cui, rec] : catalog.records) {
        check_field(rec.preferred_name, cui);
        std::string vocabs;
        for (const auto& v : rec.source_vocabularies) {
            check_field(v, cui);
            if (!vocabs.empty()) vocabs += ',';
            vocabs += v;
        }
        out << "R|" << cui << '|' << rec.preferred_name << '|' << vocabs << '\n';
        for (const auto& s : rec.strings) {
            check_field(s, cui);
            out << "S|" << cui << '|' << s << '\n';
        }
    }
    for (const auto& [cui, types] : catalog.semantic_types)
        for (const auto& t : types) out << "T|" << cui << '|' << t.tui << '|' << t.semantic_type << '\n';
    for (const auto& r : catalog.relations)
        out << "L|" << r.cui1 << '|' << r.cui2 << '|' << r.rel << '\n';
}

ConceptCatalog read_snapshot(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "#cuisim-catalog v1")
        throw DomainError("not a catalog snapshot (bad header)");
    ConceptCatalog cat;
    std::size_t lineno = 1;
    auto bad = [&] { return DomainError("catalog snapshot: bad line " + std::to_string(lineno)); };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::size_t start = 0;
        for (auto bar = line.find('|'); bar != std::string::npos; bar = line.find('|', start)) {
            f.emplace_back(line.data() + start, bar - start);
            start = bar + 1;
        }
        f.emplace_back(line.data() + start, line.size() - start);
        const std::string_view tag = f[0];
        if (tag == "R" && f.size() == 4) {
            ConceptRecord rec;
            rec.cui = f[1];
            rec.preferred_name = f[2];
            std::string_view v = f[3];
            while (!v.empty()) {
                const auto comma = v.find(',');
                rec.source_vocabularies.emplace(v.substr(0, comma));
                if (comma == std::string_view::npos) break;
                v.remove_prefix(comma + 1);
            }
            cat.records.emplace(rec.cui, std::move(rec));
        } else if (tag == "S" && f.size() == 3) {
            auto it = cat.records.find(std::string(f[1]));
            if (it == cat.records.end()) throw bad();
            it->second.strings.emplace_back(f[2]);
        } else if (tag == "T" && f.size() == 4) {
            cat.semantic_types[std::string(f[1])].insert(
                {std::string(f[1]), std::string(f[2]), std::string(f[3])});
        } else if (tag == "L" && f.size() == 4) {
            cat.relations.push_back({std::string(f[1]), std::string(f[2]), std::string(f[3])});
        } else {
            throw bad();
        }
    }
    return cat;
}

void save_snapshot(const std::filesystem::path& path, const ConceptCatalog& catalog) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write " + path.string());
    write_snapshot(out, catalog);
}

ConceptCatalog load_snapshot(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return read_snapshot(in);
}

void write_string_dump(std::ostream& out, const ConceptCatalog& catalog) {
    for (const auto& [cui, rec] : catalog.records)
        for (const auto& s : rec.strings) out << cui << '\t' << s << '\n';
}

}  // namespace cuisim::umls
