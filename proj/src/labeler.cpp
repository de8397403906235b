#include "cuisim/labeler.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "parallel.hpp"

namespace cuisim::labeler {

using nlohmann::json;

int value_rank(LabelValue v) {
    switch (v) {
        case LabelValue::Positive: return 3;
        case LabelValue::Uncertain: return 2;
        case LabelValue::Negative: return 1;
        case LabelValue::Unmentioned: return 0;
    }
    return 0;
}

LabelValue value_from_assertion(Assertion a) {
    switch (a) {
        case Assertion::Present: return LabelValue::Positive;
        case Assertion::Absent: return LabelValue::Negative;
        case Assertion::Uncertain: return LabelValue::Uncertain;
    }
    return LabelValue::Unmentioned;
}

std::string_view csv_value(LabelValue v) {
    switch (v) {
        case LabelValue::Positive: return "1.0";
        case LabelValue::Negative: return "0.0";
        case LabelValue::Uncertain: return "-1.0";
        case LabelValue::Unmentioned: return "";
    }
    return "";
}

LabelValue parse_csv_value(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    if (s.empty()) return LabelValue::Unmentioned;
    if (s == "1.0" || s == "1") return LabelValue::Positive;
    if (s == "0.0" || s == "0") return LabelValue::Negative;
    if (s == "-1.0" || s == "-1") return LabelValue::Uncertain;
    throw DomainError("bad label value '" + std::string(s) + "'");
}

std::set<Cui> LabelVocabulary::cuis_of(const std::set<std::string>& names) const {
    std::set<Cui> out;
    for (const auto& n : names)
        if (auto it = label_cuis.find(n); it != label_cuis.end()) out.insert(it->second.begin(), it->second.end());
    return out;
}

std::string normalize_name(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isalnum(c)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_space = true;
        }
    }
    return out;
}

LabelVocabulary build_label_vocabulary(const std::vector<std::string>& label_names,
                                       const umls::ConceptCatalog& catalog,
                                       const std::map<std::string, std::set<Cui>>& overrides) {
    LabelVocabulary vocab;
    vocab.labels = label_names;
    std::map<std::string, std::vector<std::string>> wanted;  // normalized -> labels
    for (const auto& label : label_names) {
        if (vocab.label_cuis.contains(label)) throw ConfigError("duplicate label '" + label + "'");
        vocab.label_cuis[label];
        if (auto it = overrides.find(label); it != overrides.end())
            vocab.label_cuis[label] = it->second;
        else
            wanted[normalize_name(label)].push_back(label);
    }
    if (!wanted.empty())
        for (const auto& [cui, rec] : catalog.records)
            for (const auto& s : rec.strings)
                if (auto it = wanted.find(normalize_name(s)); it != wanted.end())
                    for (const auto& label : it->second) vocab.label_cuis[label].insert(cui);
    for (const auto& label : label_names)
        if (vocab.label_cuis[label].empty()) throw ConfigError("label '" + label + "' matches no concept");
    return vocab;
}

LabelValue LabelAssignment::value(const std::string& label) const {
    auto it = values.find(label);
    return it == values.end() ? LabelValue::Unmentioned : it->second;
}

std::set<std::string> LabelAssignment::positives() const {
    std::set<std::string> out;
    for (const auto& [label, v] : values)
        if (v == LabelValue::Positive) out.insert(label);
    return out;
}

namespace {

std::optional<std::string> first_label_of(const Cui& cui, const LabelVocabulary& vocab) {
    for (const auto& label : vocab.labels)
        if (vocab.label_cuis.at(label).contains(cui)) return label;
    return std::nullopt;
}

std::vector<ScoredCui> heads_of(const MentionLink& link) {
    std::vector<ScoredCui> heads;
    if (link.context) heads.push_back(*link.context);
    if (link.isolated) heads.push_back(*link.isolated);
    if (heads.empty()) heads.push_back({link.cui, link.score});
    std::sort(heads.begin(), heads.end(), [](const ScoredCui& x, const ScoredCui& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.cui < y.cui;
    });
    heads.erase(std::unique(heads.begin(), heads.end(), [](const ScoredCui& x, const ScoredCui& y) { return x.cui == y.cui; }),
                heads.end());
    return heads;
}

std::optional<std::string> label_for_mention(const MentionLink& link, const LabelVocabulary& vocab,
                                             const graph::ConceptGraph& graph, const Phase1Options& options) {
    const auto heads = heads_of(link);
    for (const auto& h : heads)
        if (auto label = first_label_of(h.cui, vocab)) return label;
    // Parent fallback, one level at a time; within a level heads keep score
    // order and parents are tried in CUI order.
    std::vector<std::vector<Cui>> frontier;
    for (const auto& h : heads) frontier.push_back({h.cui});
    for (std::size_t level = 0; level < options.parent_depth; ++level) {
        for (auto& cuis : frontier) {
            std::set<Cui> next;
            for (const auto& c : cuis) next.insert(graph.parents(c).begin(), graph.parents(c).end());
            cuis.assign(next.begin(), next.end());
            for (const auto& p : cuis)
                if (auto label = first_label_of(p, vocab)) return label;
        }
    }
    return std::nullopt;
}

}  // namespace

LabelAssignment phase1_label(const CuiSet& report, const LabelVocabulary& vocab, const graph::ConceptGraph& graph,
                             const Phase1Options& options) {
    LabelAssignment out;
    out.report_id = report.report_id;
    for (std::size_t i = 0; i < report.links.size(); ++i) {
        const auto& link = report.links[i];
        const auto label = label_for_mention(link, vocab, graph, options);
        if (!label) continue;
        out.attributions[i] = *label;
        const auto v = value_from_assertion(link.assertion);
        auto [it, inserted] = out.values.emplace(*label, v);
        if (!inserted && value_rank(v) > value_rank(it->second)) it->second = v;
    }
    return out;
}

SetScore containment_index(const std::set<Cui>& report, const std::set<Cui>& label) {
    if (report.empty()) return {0.0, true};
    std::size_t shared = 0;
    for (const auto& c : report) shared += label.contains(c) ? 1 : 0;
    return {static_cast<double>(shared) / static_cast<double>(report.size()), false};
}

SetScore containment_index(const CuiSet& report, const std::set<Cui>& label) {
    std::set<Cui> cuis;
    for (const auto& [cui, a] : report.elements) cuis.insert(cui);
    return containment_index(cuis, label);
}

SetScore jaccard_index(const std::set<Cui>& report, const std::set<Cui>& label) {
    std::size_t shared = 0;
    for (const auto& c : report) shared += label.contains(c) ? 1 : 0;
    const std::size_t unioned = report.size() + label.size() - shared;
    if (unioned == 0) return {0.0, true};
    return {static_cast<double>(shared) / static_cast<double>(unioned), false};
}

SetMeasure parse_set_measure(std::string_view s) {
    if (s == "containment") return SetMeasure::Containment;
    if (s == "jaccard") return SetMeasure::Jaccard;
    throw ConfigError("unknown label measure '" + std::string(s) + "'");
}

std::string_view to_string(Candidate c) {
    switch (c) {
        case Candidate::Intersection: return "intersection";
        case Candidate::Old: return "old";
        case Candidate::New: return "new";
        case Candidate::Union: return "union";
    }
    return "intersection";
}

void to_json(json& j, const LabelComparison& c) {
    json candidates = json::object();
    for (const auto& [which, set] : c.candidates)
        candidates[std::string(to_string(which))] = {{"labels", set.labels}, {"score", set.score}};
    json final_labels = json::object();
    for (const auto& [label, v] : c.final_labels.values) final_labels[label] = std::string(csv_value(v));
    j = json{{"report_id", c.final_labels.report_id},
             {"candidates", std::move(candidates)},
             {"selected", to_string(c.selected)},
             {"degenerate", c.degenerate},
             {"final_labels", std::move(final_labels)}};
}

namespace {

LabelValue non_positive(LabelValue v) { return v == LabelValue::Positive ? LabelValue::Unmentioned : v; }

LabelAssignment materialize(Candidate which, const std::set<std::string>& positives, const LabelAssignment& old_labels,
                            const LabelAssignment& new_labels, const LabelVocabulary& vocab) {
    if (which == Candidate::Old) return old_labels;
    if (which == Candidate::New) return new_labels;
    LabelAssignment out;
    out.report_id = new_labels.report_id;
    out.attributions = new_labels.attributions;
    for (const auto& label : vocab.labels) {
        LabelValue v = LabelValue::Unmentioned;
        if (positives.contains(label)) {
            v = LabelValue::Positive;
        } else {
            v = non_positive(new_labels.value(label));
            if (v == LabelValue::Unmentioned) v = non_positive(old_labels.value(label));
        }
        if (v != LabelValue::Unmentioned) out.values[label] = v;
    }
    return out;
}

}  // namespace

LabelComparison phase2_select(const CuiSet& report, const LabelAssignment& old_labels,
                              const LabelAssignment& new_labels, const LabelVocabulary& vocab, SetMeasure measure) {
    std::set<Cui> report_cuis;
    for (const auto& [cui, a] : report.elements) report_cuis.insert(cui);

    const auto old_pos = old_labels.positives();
    const auto new_pos = new_labels.positives();
    std::set<std::string> inter, uni;
    std::set_intersection(old_pos.begin(), old_pos.end(), new_pos.begin(), new_pos.end(),
                          std::inserter(inter, inter.end()));
    std::set_union(old_pos.begin(), old_pos.end(), new_pos.begin(), new_pos.end(), std::inserter(uni, uni.end()));

    LabelComparison out;
    out.degenerate = report_cuis.empty();
    const std::pair<Candidate, const std::set<std::string>*> order[] = {
        {Candidate::Intersection, &inter}, {Candidate::Old, &old_pos}, {Candidate::New, &new_pos}, {Candidate::Union, &uni}};
    double best = -1.0;
    for (const auto& [which, labels] : order) {
        CandidateSet cs;
        cs.labels = *labels;
        cs.cuis = vocab.cuis_of(cs.labels);
        cs.score = measure == SetMeasure::Containment ? containment_index(report_cuis, cs.cuis).score
                                                      : jaccard_index(report_cuis, cs.cuis).score;
        if (cs.score > best) {
            best = cs.score;
            out.selected = which;
        }
        out.candidates.emplace(which, std::move(cs));
    }
    out.final_labels = materialize(out.selected, out.candidates.at(out.selected).labels, old_labels, new_labels, vocab);
    out.final_labels.report_id = report.report_id;
    return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

}  // namespace

OldLabels read_label_csv(std::istream& in) {
    OldLabels out;
    std::string line;
    if (!std::getline(in, line)) throw DomainError("label CSV is empty");
    auto header = split_csv(line);
    if (header.size() < 2) throw DomainError("label CSV needs an id column and at least one label");
    out.id_column = header.front();
    out.columns.assign(header.begin() + 1, header.end());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size())
            throw DomainError("label CSV line " + std::to_string(lineno) + ": wrong column count");
        LabelAssignment a;
        a.report_id = f[0];
        for (std::size_t c = 1; c < f.size(); ++c) {
            const auto v = parse_csv_value(f[c]);
            if (v != LabelValue::Unmentioned) a.values[header[c]] = v;
        }
        if (!out.rows.emplace(a.report_id, a).second)
            throw DomainError("label CSV: duplicate report id '" + a.report_id + "'");
    }
    return out;
}

void write_label_csv(std::ostream& out, const std::vector<std::string>& labels, const std::vector<LabelAssignment>& rows,
                     const std::string& id_column) {
    out << id_column;
    for (const auto& l : labels) out << ',' << l;
    out << '\n';
    for (const auto& r : rows) {
        out << r.report_id;
        for (const auto& l : labels) out << ',' << csv_value(r.value(l));
        out << '\n';
    }
}

LabelRun label_dataset(const std::vector<CuiSet>& reports, const OldLabels* old_labels, const LabelVocabulary& vocab,
                       const graph::ConceptGraph& graph, const LabelOptions& options) {
    LabelRun run;
    run.summary.reports = reports.size();
    if (old_labels != nullptr) {
        std::set<std::string> ids;
        for (const auto& r : reports) ids.insert(r.report_id);
        for (const auto& [id, row] : old_labels->rows)
            if (!ids.contains(id)) ++run.summary.unknown_old;
        if (options.strict && run.summary.unknown_old > 0)
            throw DomainError(std::to_string(run.summary.unknown_old) + " old-label rows have no report");
    }

    run.reports = detail::parallel_map<LabeledReport>(reports.size(), options.workers, [&](std::size_t i) {
        const auto& report = reports[i];
        LabeledReport out;
        auto fresh = phase1_label(report, vocab, graph, options.phase1);
        if (old_labels == nullptr) {
            out.labels = std::move(fresh);
            return out;
        }
        auto it = old_labels->rows.find(report.report_id);
        if (it == old_labels->rows.end()) {
            out.missing_old = true;
            out.labels = std::move(fresh);
            return out;
        }
        out.comparison = phase2_select(report, it->second, fresh, vocab, options.measure);
        out.labels = out.comparison->final_labels;
        return out;
    });

    for (const auto& r : run.reports) {
        if (r.missing_old) {
            ++run.summary.missing_old;
            if (options.strict) throw DomainError("report '" + r.labels.report_id + "' has no old labels");
        }
        if (!r.comparison) continue;
        ++run.summary.selected[std::string(to_string(r.comparison->selected))];
        const auto& old = old_labels->rows.at(r.labels.report_id);
        for (const auto& label : vocab.labels)
            if (r.labels.value(label) != old.value(label)) ++run.summary.changed[label];
    }
    return run;
}

}  // namespace cuisim::labeler
