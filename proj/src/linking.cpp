#include "cuisim/linking.hpp"

#include <algorithm>
#include <istream>

#include <nlohmann/json.hpp>

namespace cuisim::linking {

using nlohmann::json;

TypeConfig TypeConfig::defaults() {
    return TypeConfig{
        {"Disease or Syndrome", "Sign or Symptom", "Pathologic Function", "Finding"},
        {"Body Part, Organ, or Organ Component", "Body Location or Region", "Body Space or Junction", "Tissue",
         "Body System"}};
}

const std::set<std::string>& TypeConfig::allowed(EntityKind kind) const {
    return kind == EntityKind::Anatomy ? anatomy_types : observation_types;
}

void sort_candidates(std::vector<LinkCandidate>& candidates) {
    std::stable_sort(candidates.begin(), candidates.end(), [](const LinkCandidate& x, const LinkCandidate& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.cui < y.cui;
    });
}

std::vector<LinkCandidate> filter_candidates(const std::vector<LinkCandidate>& candidates, EntityKind kind,
                                             const TypeConfig& types) {
    const auto& allowed = types.allowed(kind);
    std::vector<LinkCandidate> out;
    std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(out), [&](const LinkCandidate& c) {
        return std::any_of(c.semantic_types.begin(), c.semantic_types.end(),
                           [&](const std::string& t) { return allowed.contains(t); });
    });
    return out;
}

namespace {

const LinkCandidate* best_of(const std::vector<LinkCandidate>& list) {
    const LinkCandidate* best = nullptr;
    for (const auto& c : list)
        if (best == nullptr || c.score > best->score || (c.score == best->score && c.cui < best->cui)) best = &c;
    return best;
}

}  // namespace

std::optional<LinkedConcept> select_best(const std::vector<LinkCandidate>& filtered_isolated,
                                         const std::vector<LinkCandidate>& filtered_context) {
    const auto* iso = best_of(filtered_isolated);
    const auto* ctx = best_of(filtered_context);
    if (iso == nullptr && ctx == nullptr) return std::nullopt;
    LinkedConcept out;
    if (iso != nullptr) out.isolated_head = ScoredCui{iso->cui, iso->score};
    if (ctx != nullptr) out.context_head = ScoredCui{ctx->cui, ctx->score};
    const bool take_context =
        iso == nullptr || (ctx != nullptr && (ctx->score > iso->score || (ctx->score == iso->score && ctx->cui < iso->cui)));
    const auto* winner = take_context ? ctx : iso;
    out.cui = winner->cui;
    out.score = winner->score;
    out.semantic_types = winner->semantic_types;
    out.provenance = take_context ? Provenance::Context : Provenance::Isolated;
    return out;
}

CuiSet report_to_cui_set(const std::vector<LinkedConcept>& links, const std::string& report_id) {
    CuiSet set;
    set.report_id = report_id;
    for (const auto& l : links) {
        set.insert(l.cui, l.assertion);
        auto [it, inserted] = set.concept_meta.try_emplace(l.cui, ConceptMeta{l.kind, l.semantic_types, l.score});
        if (!inserted && l.score > it->second.score) it->second.score = l.score;
        set.links.push_back({l.mention_ref, l.cui, l.assertion, l.kind, l.score, l.provenance, l.isolated_head,
                             l.context_head});
    }
    return set;
}

namespace {

std::vector<LinkCandidate> parse_list(const json& arr, const umls::ConceptCatalog& catalog, LinkStats& stats) {
    std::vector<LinkCandidate> out;
    for (const auto& c : arr) {
        const auto cui = c.at("cui").get<std::string>();
        const double score = c.at("score").get<double>();
        if (!is_valid_cui(cui) || !(score >= -1.0 && score <= 1.0)) {
            ++stats.invalid_candidates;
            continue;
        }
        if (!catalog.records.contains(cui)) ++stats.unknown_cuis;
        out.push_back({cui, score, catalog.type_names(cui)});
    }
    sort_candidates(out);
    if (out.size() > kMaxCandidates) out.resize(kMaxCandidates);
    return out;
}

}  // namespace

std::vector<ReportCandidates> read_candidate_lines(std::istream& in, const umls::ConceptCatalog& catalog,
                                                   LinkStats& stats) {
    std::vector<ReportCandidates> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = json::parse(line);
            ReportCandidates rc;
            rc.report_id = j.at("report_id").get<std::string>();
            for (const auto& m : j.at("mentions")) {
                MentionCandidates mc;
                mc.mention = m.get<report::Mention>();
                mc.isolated_candidates = parse_list(m.value("isolated_candidates", json::array()), catalog, stats);
                mc.context_candidates = parse_list(m.value("context_candidates", json::array()), catalog, stats);
                rc.mentions.push_back(std::move(mc));
            }
            out.push_back(std::move(rc));
        } catch (const json::exception& e) {
            throw DomainError("candidate line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

CuiSet link_report(const ReportCandidates& report, const TypeConfig& types, LinkStats& stats) {
    ++stats.reports;
    std::vector<LinkedConcept> links;
    for (std::size_t i = 0; i < report.mentions.size(); ++i) {
        const auto& m = report.mentions[i];
        ++stats.mentions;
        auto best = select_best(filter_candidates(m.isolated_candidates, m.mention.kind, types),
                                filter_candidates(m.context_candidates, m.mention.kind, types));
        if (!best) {
            ++stats.unlinked;
            continue;
        }
        ++stats.linked;
        best->assertion = m.mention.assertion;
        best->kind = m.mention.kind;
        best->mention_ref = i;
        links.push_back(std::move(*best));
    }
    return report_to_cui_set(links, report.report_id);
}

}  // namespace cuisim::linking
