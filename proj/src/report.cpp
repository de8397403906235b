#include "cuisim/report.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <istream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cuisim::report {

using nlohmann::json;

std::string_view to_string(MentionSource s) {
    switch (s) {
        case MentionSource::ReportLevel: return "report";
        case MentionSource::SentenceLevel: return "sentence";
        case MentionSource::Merged: return "merged";
    }
    return "report";
}

void to_json(json& j, const Mention& m) {
    j = json{{"isolated_text", m.isolated_text}, {"context_text", m.context_text},
             {"kind", to_string(m.kind)},        {"assertion", to_string(m.assertion)},
             {"source", to_string(m.source)},    {"start", m.start},
             {"end", m.end}};
}

void from_json(const json& j, Mention& m) {
    m.isolated_text = j.at("isolated_text").get<std::string>();
    m.context_text = j.value("context_text", m.isolated_text);
    m.kind = parse_entity_kind(j.at("kind").get<std::string>());
    m.assertion = parse_assertion(j.at("assertion").get<std::string>());
    const auto source = j.value("source", std::string("report"));
    m.source = source == "sentence" ? MentionSource::SentenceLevel
               : source == "merged" ? MentionSource::Merged
                                    : MentionSource::ReportLevel;
    m.start = j.value("start", std::size_t{0});
    m.end = j.value("end", m.start);
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string tok;
    while (in >> tok) out.push_back(std::move(tok));
    return out;
}

namespace {

std::pair<EntityKind, Assertion> parse_label(const std::string& label) {
    const auto dash = label.find('-');
    if (dash == std::string::npos) throw DomainError("bad entity label '" + label + "'");
    const auto prefix = label.substr(0, dash);
    const auto suffix = label.substr(dash + 1);
    EntityKind kind;
    if (prefix == "ANAT")
        kind = EntityKind::Anatomy;
    else if (prefix == "OBS")
        kind = EntityKind::Observation;
    else
        throw DomainError("bad entity label '" + label + "'");
    Assertion a;
    if (suffix == "DP")
        a = Assertion::Present;
    else if (suffix == "DA")
        a = Assertion::Absent;
    else if (suffix == "U")
        a = Assertion::Uncertain;
    else
        throw DomainError("bad entity label '" + label + "'");
    return {kind, a};
}

std::vector<AnnotatedEntity> parse_entities(const json& arr, std::size_t token_count, const std::string& where) {
    std::vector<AnnotatedEntity> out;
    for (const auto& e : arr) {
        AnnotatedEntity ent;
        ent.tokens = e.at("tokens").get<std::string>();
        ent.start = e.at("start_ix").get<std::size_t>();
        ent.end = e.at("end_ix").get<std::size_t>();
        std::tie(ent.kind, ent.assertion) = parse_label(e.at("label").get<std::string>());
        if (ent.start > ent.end || ent.end >= token_count)
            throw DomainError(where + ": entity span out of range");
        if (e.contains("relations"))
            for (const auto& r : e.at("relations"))
                ent.relations.push_back({r.at(0).get<std::string>(), r.at(1).get<std::size_t>()});
        out.push_back(std::move(ent));
    }
    for (const auto& ent : out)
        for (const auto& r : ent.relations)
            if (r.target >= out.size()) throw DomainError(where + ": relation target out of range");
    return out;
}

/// Undirected relation adjacency over one entity list.
std::vector<std::vector<std::size_t>> relation_graph(const std::vector<AnnotatedEntity>& entities) {
    std::vector<std::vector<std::size_t>> adj(entities.size());
    for (std::size_t i = 0; i < entities.size(); ++i)
        for (const auto& r : entities[i].relations) {
            if (r.target == i) continue;
            adj[i].push_back(r.target);
            adj[r.target].push_back(i);
        }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return adj;
}

bool has_present_observation(std::size_t i, const std::vector<AnnotatedEntity>& entities,
                             const std::vector<std::vector<std::size_t>>& adj) {
    return std::any_of(adj[i].begin(), adj[i].end(), [&](std::size_t j) {
        return entities[j].kind == EntityKind::Observation && entities[j].assertion == Assertion::Present;
    });
}

void propagate_in(std::vector<AnnotatedEntity>& entities, NegationScope scope) {
    const auto adj = relation_graph(entities);
    auto blocked = [&](std::size_t i) {
        const auto& e = entities[i];
        if (e.kind == EntityKind::Observation) return e.assertion != Assertion::Absent;
        return has_present_observation(i, entities, adj);
    };
    std::vector<char> visited(entities.size(), 0);
    std::deque<std::pair<std::size_t, std::size_t>> queue;  // (entity, hops)
    for (std::size_t i = 0; i < entities.size(); ++i)
        if (entities[i].kind == EntityKind::Observation && entities[i].assertion == Assertion::Absent) {
            visited[i] = 1;
            queue.emplace_back(i, 0);
        }
    std::vector<std::size_t> flip;
    while (!queue.empty()) {
        const auto [cur, hops] = queue.front();
        queue.pop_front();
        if (scope == NegationScope::OneHop && hops >= 1) continue;
        for (std::size_t n : adj[cur]) {
            if (visited[n] || blocked(n)) continue;
            visited[n] = 1;
            flip.push_back(n);
            queue.emplace_back(n, hops + 1);
        }
    }
    for (std::size_t i : flip) entities[i].assertion = Assertion::Absent;
}

void negate_orphans_in(std::vector<AnnotatedEntity>& entities, bool bare_anatomy_present) {
    const auto adj = relation_graph(entities);
    std::vector<std::size_t> flip;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (entities[i].kind != EntityKind::Anatomy) continue;
        const bool any_observation = std::any_of(adj[i].begin(), adj[i].end(), [&](std::size_t j) {
            return entities[j].kind == EntityKind::Observation;
        });
        if (!any_observation) {
            if (!bare_anatomy_present) flip.push_back(i);
            continue;
        }
        if (!has_present_observation(i, entities, adj)) flip.push_back(i);
    }
    for (std::size_t i : flip) entities[i].assertion = Assertion::Absent;
}

/// Applies the short-phrase rule to the entities `members` (indices into
/// `entities`) that make up one sentence.
void fix_short_group(std::vector<AnnotatedEntity>& entities, const std::vector<std::size_t>& members,
                     std::string_view sentence_text, const AssertionConfig& config) {
    if (members.empty() || members.size() > config.short_phrase_max_entities) return;
    std::size_t head = members.front();
    if (members.size() == 2) {
        const std::size_t x = members[0], y = members[1];
        auto points_to = [&](std::size_t from, std::size_t to) {
            return std::any_of(entities[from].relations.begin(), entities[from].relations.end(),
                               [&](const Relation& r) { return r.target == to; });
        };
        const bool xy = points_to(x, y), yx = points_to(y, x);
        if (!xy && !yx) return;
        if (entities[x].kind != entities[y].kind)
            head = entities[x].kind == EntityKind::Observation ? x : y;
        else
            head = xy ? y : x;
    } else if (members.size() > 2) {
        return;
    }
    if (entities[head].token_count() > config.short_phrase_max_head_tokens) return;
    const bool negated = config.cues.matches(sentence_text);
    for (std::size_t i : members) {
        auto& a = entities[i].assertion;
        if (negated)
            a = Assertion::Absent;
        else if (a == Assertion::Absent)
            a = Assertion::Present;
    }
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string normalize_text(std::string_view s) {
    std::string out;
    for (const auto& w : words(s)) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

std::vector<Mention> mentions_of(const std::vector<AnnotatedEntity>& entities, std::size_t offset,
                                 MentionSource source) {
    std::vector<Mention> out;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        std::vector<std::size_t> ctx{i};
        for (const auto& r : entities[i].relations)
            if (r.type == "modify" && r.target != i) ctx.push_back(r.target);
        for (std::size_t j = 0; j < entities.size(); ++j)
            if (j != i)
                for (const auto& r : entities[j].relations)
                    if (r.type == "modify" && r.target == i) ctx.push_back(j);
        std::sort(ctx.begin(), ctx.end(), [&](std::size_t x, std::size_t y) {
            return std::tie(entities[x].start, x) < std::tie(entities[y].start, y);
        });
        ctx.erase(std::unique(ctx.begin(), ctx.end()), ctx.end());
        std::string context;
        for (std::size_t j : ctx) {
            if (!context.empty()) context.push_back(' ');
            context += entities[j].tokens;
        }
        const auto& e = entities[i];
        out.push_back({e.tokens, context, e.kind, e.assertion, source, offset + e.start, offset + e.end});
    }
    return out;
}

}  // namespace

ReportAnnotation parse_annotation(const json& j) {
    ReportAnnotation a;
    a.report_id = j.at("report_id").get<std::string>();
    a.text = j.value("text", std::string());
    const auto report_tokens = whitespace_tokens(a.text);
    if (j.contains("report_level"))
        a.report_level = parse_entities(j.at("report_level").at("entities"), report_tokens.size(),
                                        a.report_id + " report level");
    std::size_t offset = 0;
    if (j.contains("sentences")) {
        for (const auto& s : j.at("sentences")) {
            SentenceAnnotation sent;
            sent.text = s.at("text").get<std::string>();
            const auto n = whitespace_tokens(sent.text).size();
            sent.token_offset = s.value("token_offset", offset);
            sent.entities = parse_entities(s.at("entities"), n,
                                           a.report_id + " sentence " + std::to_string(a.sentences.size()));
            offset = sent.token_offset + n;
            a.sentences.push_back(std::move(sent));
        }
    }
    return a;
}

std::vector<ReportAnnotation> read_annotation_lines(std::istream& in) {
    std::vector<ReportAnnotation> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_annotation(json::parse(line)));
        } catch (const json::exception& e) {
            throw DomainError("annotation line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

CueLexicon::CueLexicon(std::vector<std::string> cues) {
    for (auto& c : cues) {
        auto w = words(c);
        if (w.empty()) continue;
        cues_.push_back(lower(c));
        cue_words_.push_back(std::move(w));
    }
}

const CueLexicon& CueLexicon::builtin() {
    static const CueLexicon lexicon({"no", "not", "without", "absent", "absence of", "negative for", "free of",
                                     "resolved", "no evidence of", "no signs of", "clear of", "rather than"});
    return lexicon;
}

CueLexicon CueLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read cue lexicon " + path.string());
    std::vector<std::string> cues;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
        cues.push_back(line);
    }
    return CueLexicon(std::move(cues));
}

bool CueLexicon::matches(std::string_view sentence) const {
    const auto w = words(sentence);
    for (const auto& cue : cue_words_) {
        if (cue.size() > w.size()) continue;
        for (std::size_t i = 0; i + cue.size() <= w.size(); ++i)
            if (std::equal(cue.begin(), cue.end(), w.begin() + static_cast<std::ptrdiff_t>(i))) return true;
    }
    return false;
}

ReportAnnotation propagate_negations(const ReportAnnotation& annotation, const AssertionConfig& config) {
    ReportAnnotation out = annotation;
    propagate_in(out.report_level, config.negation_scope);
    for (auto& s : out.sentences) propagate_in(s.entities, config.negation_scope);
    return out;
}

ReportAnnotation negate_orphan_anatomies(const ReportAnnotation& annotation, const AssertionConfig& config) {
    ReportAnnotation out = annotation;
    negate_orphans_in(out.report_level, config.bare_anatomy_present);
    for (auto& s : out.sentences) negate_orphans_in(s.entities, config.bare_anatomy_present);
    return out;
}

ReportAnnotation fix_short_phrase_assertions(const ReportAnnotation& annotation, const AssertionConfig& config) {
    ReportAnnotation out = annotation;
    for (auto& s : out.sentences) {
        std::vector<std::size_t> all(s.entities.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        fix_short_group(s.entities, all, s.text, config);
    }
    // Whole-report entities are grouped by the sentence their span starts in.
    // A sentence counts as short only if its sentence-level annotation is.
    for (const auto& s : annotation.sentences) {
        if (s.entities.size() > config.short_phrase_max_entities) continue;
        const std::size_t begin = s.token_offset;
        const std::size_t end = begin + whitespace_tokens(s.text).size();
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < out.report_level.size(); ++i)
            if (out.report_level[i].start >= begin && out.report_level[i].start < end) members.push_back(i);
        fix_short_group(out.report_level, members, s.text, config);
    }
    return out;
}

std::vector<Mention> merge_granularities(const ReportAnnotation& annotation, const AssertionConfig& config) {
    auto merged = mentions_of(annotation.report_level, 0, MentionSource::ReportLevel);
    const std::size_t report_count = merged.size();
    std::vector<char> taken(report_count, 0);
    for (const auto& s : annotation.sentences) {
        for (auto& m : mentions_of(s.entities, s.token_offset, MentionSource::SentenceLevel)) {
            const auto key = normalize_text(m.isolated_text);
            bool matched = false;
            for (std::size_t i = 0; i < report_count && !matched; ++i) {
                auto& r = merged[i];
                if (taken[i] || r.kind != m.kind || normalize_text(r.isolated_text) != key) continue;
                if (r.end < m.start || m.end < r.start) continue;
                taken[i] = 1;
                matched = true;
                r.source = MentionSource::Merged;
                if (config.sentence_wins) {
                    r.assertion = m.assertion;
                    r.context_text = m.context_text;
                }
            }
            if (!matched) merged.push_back(std::move(m));
        }
    }
    std::stable_sort(merged.begin(), merged.end(), [](const Mention& x, const Mention& y) {
        return std::tie(x.start, x.end, x.kind, x.isolated_text) < std::tie(y.start, y.end, y.kind, y.isolated_text);
    });
    return merged;
}

std::vector<Mention> extract_mentions(const ReportAnnotation& annotation, const AssertionConfig& config) {
    auto a = propagate_negations(annotation, config);
    a = negate_orphan_anatomies(a, config);
    a = fix_short_phrase_assertions(a, config);
    return merge_granularities(a, config);
}

}  // namespace cuisim::report
