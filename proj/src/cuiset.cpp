#include "cuisim/cuiset.hpp"

#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace cuisim {

using nlohmann::json;

std::string_view to_string(Provenance p) {
    return p == Provenance::Isolated ? "isolated" : "context";
}

int assertion_rank(Assertion a) {
    switch (a) {
        case Assertion::Present: return 2;
        case Assertion::Uncertain: return 1;
        case Assertion::Absent: return 0;
    }
    return 0;
}

void CuiSet::insert(const Cui& cui, Assertion a) {
    auto [it, inserted] = elements.emplace(cui, a);
    if (!inserted && assertion_rank(a) > assertion_rank(it->second)) it->second = a;
}

namespace {

json scored_to_json(const std::optional<ScoredCui>& s) {
    if (!s) return nullptr;
    return json{{"cui", s->cui}, {"score", s->score}};
}

std::optional<ScoredCui> scored_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return ScoredCui{j.at("cui").get<std::string>(), j.at("score").get<double>()};
}

}  // namespace

void to_json(json& j, const CuiSet& s) {
    json elements = json::array();
    for (const auto& [cui, a] : s.elements) {
        json e{{"cui", cui}, {"assertion", to_string(a)}};
        if (auto it = s.concept_meta.find(cui); it != s.concept_meta.end()) {
            e["kind"] = to_string(it->second.kind);
            e["semantic_types"] = it->second.semantic_types;
            e["score"] = it->second.score;
        }
        elements.push_back(std::move(e));
    }
    json links = json::array();
    for (const auto& l : s.links) {
        links.push_back({{"mention", l.mention},
                         {"cui", l.cui},
                         {"assertion", to_string(l.assertion)},
                         {"kind", to_string(l.kind)},
                         {"score", l.score},
                         {"provenance", to_string(l.provenance)},
                         {"isolated", scored_to_json(l.isolated)},
                         {"context", scored_to_json(l.context)}});
    }
    j = json{{"report_id", s.report_id}, {"elements", std::move(elements)}, {"links", std::move(links)}};
}

void from_json(const json& j, CuiSet& s) {
    s = CuiSet{};
    s.report_id = j.at("report_id").get<std::string>();
    for (const auto& e : j.at("elements")) {
        const auto cui = e.at("cui").get<std::string>();
        if (!is_valid_cui(cui)) throw DomainError("invalid CUI '" + cui + "'");
        s.insert(cui, parse_assertion(e.at("assertion").get<std::string>()));
        if (e.contains("kind")) {
            ConceptMeta meta;
            meta.kind = parse_entity_kind(e.at("kind").get<std::string>());
            meta.semantic_types = e.value("semantic_types", std::set<std::string>{});
            meta.score = e.value("score", 0.0);
            s.concept_meta[cui] = std::move(meta);
        }
    }
    if (j.contains("links")) {
        for (const auto& l : j.at("links")) {
            MentionLink link;
            link.mention = l.at("mention").get<std::size_t>();
            link.cui = l.at("cui").get<std::string>();
            link.assertion = parse_assertion(l.at("assertion").get<std::string>());
            link.kind = parse_entity_kind(l.at("kind").get<std::string>());
            link.score = l.at("score").get<double>();
            link.provenance =
                l.at("provenance").get<std::string>() == "context" ? Provenance::Context : Provenance::Isolated;
            link.isolated = scored_from_json(l.value("isolated", json()));
            link.context = scored_from_json(l.value("context", json()));
            s.links.push_back(std::move(link));
        }
    }
}

std::vector<CuiSet> read_cuiset_lines(std::istream& in, bool strict, std::size_t* malformed) {
    std::vector<CuiSet> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line).get<CuiSet>());
        } catch (const std::exception& e) {
            if (strict)
                throw DomainError("CuiSet line " + std::to_string(lineno) + ": " + e.what());
            if (malformed) ++*malformed;
        }
    }
    return out;
}

void write_cuiset_lines(std::ostream& out, const std::vector<CuiSet>& sets) {
    for (const auto& s : sets) out << json(s).dump() << '\n';
}

}  // namespace cuisim
