// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cuisim/graph.hpp"
#include "cuisim/labeler.hpp"
#include "cuisim/report.hpp"
#include "cuisim/retrieval.hpp"
#include "cuisim/similarity.hpp"
#include "cuisim/umls.hpp"
#include "oracles.hpp"

using namespace cuisim;
namespace t = cuisim::testing;
using similarity::DistanceConfig;
using similarity::Measure;

namespace {

/// Collects the first failure of a criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (!ok && failure_.empty()) failure_ = what;
    }
    bool ok() const { return failure_.empty(); }
    const std::string& failure() const { return failure_; }
    std::size_t checks() const { return checks_; }

private:
    std::string failure_;
    std::size_t checks_ = 0;
};

DistanceConfig unexpanded() {
    DistanceConfig c;
    c.synonym_expansion_enabled = false;
    return c;
}

umls::ConceptCatalog fixture_catalog(Check* check = nullptr) {
    const auto conso = umls::parse_mrconso(t::fixture("umls/MRCONSO.RRF"), umls::kDefaultVocabularies);
    const auto sty = umls::parse_mrsty(t::fixture("umls/MRSTY.RRF"));
    const auto rel = umls::parse_mrrel(t::fixture("umls/MRREL.RRF"), umls::kDefaultRelations);
    if (check) {
        check->expect(conso.stats.malformed == 2, "MRCONSO malformed count");
        check->expect(sty.stats.malformed == 2, "MRSTY malformed count");
        check->expect(rel.stats.malformed == 2, "MRREL malformed count");
    }
    return umls::build_catalog(conso.items, sty.items, rel.items).catalog;
}

retrieval::ReportIndex load_index(const std::string& rel) {
    std::ifstream in(t::fixture(rel));
    return retrieval::build_index(in);
}

void distance_identities(Check& c) {
    t::Rng rng(1001);
    for (int trial = 0; trial < 1500; ++trial) {
        const auto a = t::random_cuiset(rng, 20, 12);
        const auto b = t::random_cuiset(rng, 20, 12);
        c.expect(similarity::tversky(a, b, 1.0, 1.0) == t::jaccard(a, b).nearest(), "tversky(1,1) != Jaccard");
        c.expect(similarity::tversky(a, b, 0.5, 0.5) == t::dice(a, b).nearest(), "tversky(.5,.5) != Dice");
        c.expect(similarity::prototypical(a, b) == similarity::symmetric_tversky(a, b, 0.0, 1.0),
                 "prototypical != symmetric(alpha=0)");
        c.expect(similarity::prototypical(a, b) == t::prototypical_fraction(a, b).nearest(),
                 "prototypical != oracle fraction");
    }
}

void symmetry_and_bounds(Check& c) {
    t::Rng rng(1002);
    auto cfg = unexpanded();
    cfg.preference.weights = {{"Finding", 0.75}, {"Spatial Concept", 3.0}};
    std::size_t injected = 0;
    for (int trial = 0; trial < 1500; ++trial) {
        const auto a = t::random_cuiset(rng, 20, 12);
        const auto b = t::random_cuiset(rng, 20, 12);
        const double alpha = static_cast<double>(rng.below(5)) / 4.0;
        const double s_ab = similarity::symmetric_tversky(a, b, alpha, 1.0);
        c.expect(s_ab == similarity::symmetric_tversky(b, a, alpha, 1.0), "symmetric tversky not symmetric");
        c.expect(s_ab >= 0.0 && s_ab <= 1.0, "symmetric tversky out of [0,1]");
        const auto w_ab = similarity::weighted_distance(a, b, cfg).score;
        c.expect(w_ab == similarity::weighted_distance(b, a, cfg).score, "weighted score not symmetric");
        c.expect(w_ab >= 0.0 && w_ab <= 1.0, "weighted score out of [0,1]");
        if (w_ab > 0.0) {
            auto ca = a, cb = b;
            const auto cui = t::cui_of(900 + rng.below(50));
            ca.elements[cui] = Assertion::Present;
            cb.elements[cui] = Assertion::Absent;
            ca.concept_meta[cui] = cb.concept_meta[cui] = t::meta_for(1);
            const auto after = similarity::weighted_distance(ca, cb, cfg);
            c.expect(!after.contradicted_cuis.empty(), "injected contradiction not detected");
            c.expect(after.score < w_ab, "contradiction did not lower the weighted score");
            ++injected;
        }
    }
    c.expect(injected >= 500, "too few contradiction injections");
}

void preference_laws(Check& c) {
    t::Rng rng(1003);
    auto cfg = unexpanded();
    cfg.preference.weights = {{"Finding", 0.3}, {"Spatial Concept", 2.5}, {"Disease or Syndrome", 1.25}};
    for (int trial = 0; trial < 600; ++trial) {
        const auto a = t::random_cuiset(rng, 30, 12);
        const auto b = t::random_cuiset(rng, 30, 12);
        const auto base = similarity::weighted_distance(a, b, cfg).score;
        for (double lambda : {0.0625, 0.5, 2.0, 8.0, 4096.0}) {
            auto scaled = cfg;
            scaled.preference = cfg.preference.scaled(lambda);
            c.expect(similarity::weighted_distance(a, b, scaled).score == base, "scaling changed the score");
        }
    }
    auto zcfg = unexpanded();
    zcfg.preference.weights = {{"Zeroed", 0.0}, {"Finding", 2.0}};
    std::size_t zero_trials = 0;
    for (int trial = 0; trial < 700; ++trial) {
        const auto a = t::random_cuiset(rng, 30, 10);
        const auto b = t::random_cuiset(rng, 30, 10);
        // Empty versus empty scores 1 by convention, while a comparison whose
        // weights are all filtered scores 0, so that pair is excluded.
        if (a.empty() && b.empty()) continue;
        ++zero_trials;
        const auto base = similarity::weighted_distance(a, b, zcfg).score;
        auto za = a, zb = b;
        const auto extra = 1 + rng.below(4);
        for (std::size_t i = 0; i < extra; ++i) {
            const auto cui = t::cui_of(500 + rng.below(100));
            auto& target = rng.chance(50) ? za : zb;
            target.elements[cui] = t::random_assertion(rng);
            target.concept_meta[cui] = ConceptMeta{EntityKind::Observation, {"Zeroed"}, 0.9};
        }
        c.expect(similarity::weighted_distance(za, zb, zcfg).score == base, "zero-weight element changed the score");
    }
    c.expect(zero_trials >= 500, "too few zero-weight trials");
}

void bfs_oracle(Check& c) {
    t::Rng rng(1004);
    for (int g = 0; g < 100; ++g) {
        const auto n = 1 + rng.below(50);
        const auto rg = t::random_graph(rng, n, static_cast<unsigned>(1 + rng.below(12)), 30);
        const auto dist = t::all_pairs(rg);
        std::set<Cui> seeds;
        for (std::size_t s = 0, m = 1 + rng.below(3); s < m; ++s) seeds.insert(rg.nodes[rng.below(n)]);
        for (std::size_t depth = 0; depth <= 10; ++depth)
            c.expect(graph::bfs_discover(rg.graph, seeds, depth).reached == t::distance_filter(rg, dist, seeds, depth),
                     "bfs disagrees with distance filtering");
    }
}

void search_oracle(Check& c) {
    const auto index = load_index("retrieval/reports30.jsonl");
    c.expect(index.size() == 30, "fixture does not hold 30 reports");
    struct Case {
        Measure measure;
        double alpha, beta;
        std::function<t::Rational(const CuiSet&, const CuiSet&)> exact;
    };
    const std::vector<Case> cases{
        {Measure::Tversky, 1.0, 0.5, [](const CuiSet& a, const CuiSet& b) { return t::tversky_exact(a, b, {1, 1}, {1, 2}); }},
        {Measure::Symmetric, 0.25, 2.0,
         [](const CuiSet& a, const CuiSet& b) { return t::symmetric_exact(a, b, {1, 4}, {2, 1}); }},
        {Measure::Prototypical, 0.0, 1.0, [](const CuiSet& a, const CuiSet& b) { return t::prototypical_exact(a, b, {1, 1}); }},
        {Measure::Weighted, 0.0, 1.0, t::unit_weighted},
    };
    for (const auto& cs : cases) {
        retrieval::SearchContext ctx;
        ctx.index = &index;
        ctx.discovery.enabled = false;
        ctx.config = unexpanded();
        ctx.config.measure = cs.measure;
        ctx.config.alpha = cs.alpha;
        ctx.config.beta = cs.beta;
        for (const auto& [qid, q] : index.reports()) {
            const auto expected = t::exhaustive_ranking(q, index.reports(), cs.exact);
            const auto got = retrieval::search(q, ctx, index.size());
            c.expect(got.entries.size() == expected.size(), "ranking length");
            for (std::size_t i = 0; i < got.entries.size() && i < expected.size(); ++i) {
                c.expect(got.entries[i].report_id == expected[i].first,
                         std::string(similarity::to_string(cs.measure)) + " ordering differs for " + qid);
                c.expect(got.entries[i].score == expected[i].second.nearest(), "score differs");
            }
        }
    }
}

void assertion_rules(Check& c) {
    using report::AnnotatedEntity;
    report::ReportAnnotation r;
    r.report_id = "example";
    r.text = "No consolidations in the lung.";
    r.sentences.push_back({r.text, 0,
                           {AnnotatedEntity{"consolidations", 1, 1, EntityKind::Observation, Assertion::Absent, {{"located_at", 1}}},
                            AnnotatedEntity{"lung", 4, 4, EntityKind::Anatomy, Assertion::Present, {}}}});
    const auto ms = report::extract_mentions(r);
    c.expect(ms.size() == 2 && ms[0].assertion == Assertion::Absent && ms[1].assertion == Assertion::Absent,
             "consolidation and lung are not both absent");

    std::ifstream in(t::fixture("reports/annotations.jsonl"));
    const auto all = report::read_annotation_lines(in);
    std::size_t sentences = 0;
    for (const auto& a : all) sentences += a.sentences.size();
    c.expect(sentences == 20, "fixture does not hold 20 sentences");
    const auto& r1 = all.at(0);
    const auto& planted = r1.sentences.at(1).entities.at(1);
    c.expect(planted.tokens == "effusion" && planted.assertion == Assertion::Absent, "planted misassertion missing");
    const auto fixed = report::fix_short_phrase_assertions(r1);
    c.expect(fixed.sentences.at(1).entities.at(1).assertion == Assertion::Present, "planted misassertion not flipped");

    for (const auto& a : all) {
        const auto p = report::propagate_negations(a);
        c.expect(report::propagate_negations(p) == p, "propagation not idempotent");
        const auto o = report::negate_orphan_anatomies(a);
        c.expect(report::negate_orphan_anatomies(o) == o, "orphan rule not idempotent");
        const auto f = report::fix_short_phrase_assertions(a);
        c.expect(report::fix_short_phrase_assertions(f) == f, "short-phrase rule not idempotent");
    }
}

std::string label_csv(const labeler::LabelVocabulary& vocab, const labeler::LabelRun& run) {
    std::vector<labeler::LabelAssignment> rows;
    for (const auto& r : run.reports) rows.push_back(r.labels);
    std::ostringstream out;
    labeler::write_label_csv(out, vocab.labels, rows);
    return out.str();
}

void labeler_oracle(Check& c) {
    const auto catalog = fixture_catalog();
    const auto g = graph::build_graph(catalog);
    std::ifstream cfg_in(t::fixture("labeler/config.json"));
    const auto cfg = nlohmann::json::parse(cfg_in).at("labeler");
    const auto vocab = labeler::build_label_vocabulary(cfg.at("labels").get<std::vector<std::string>>(), catalog,
                                                       cfg.at("overrides").get<std::map<std::string, std::set<Cui>>>());
    std::ifstream reports_in(t::fixture("labeler/reports.jsonl"));
    const auto reports = read_cuiset_lines(reports_in);
    std::ifstream old_in(t::fixture("labeler/old_labels.csv"));
    const auto old = labeler::read_label_csv(old_in);

    const auto phase1 = labeler::label_dataset(reports, nullptr, vocab, g, {});
    c.expect(label_csv(vocab, phase1) == t::read_file(t::fixture("labeler/expected_phase1.csv")), "phase 1 labels");
    const auto final_run = labeler::label_dataset(reports, &old, vocab, g, {});
    c.expect(label_csv(vocab, final_run) == t::read_file(t::fixture("labeler/expected_final.csv")), "phase 2 labels");
    std::ostringstream selected;
    for (const auto& r : final_run.reports)
        selected << r.labels.report_id << ' '
                 << (r.comparison ? std::string(labeler::to_string(r.comparison->selected)) : "-") << '\n';
    c.expect(selected.str() == t::read_file(t::fixture("labeler/expected_selected.txt")), "phase 2 selections");

    // L05 labels Cardiomegaly only through the parent of C0000021.
    labeler::Phase1Options no_parents;
    no_parents.parent_depth = 0;
    c.expect(labeler::phase1_label(reports.at(4), vocab, g, no_parents).value("Cardiomegaly") ==
                 labeler::LabelValue::Unmentioned,
             "parent fallback case is not a fallback");
    std::set<std::string> kinds;
    for (const auto& r : final_run.reports)
        if (r.comparison) kinds.insert(std::string(labeler::to_string(r.comparison->selected)));
    c.expect(kinds.size() >= 3, "phase 2 decisions do not exercise the candidates");

    const std::set<Cui> one{"C0000001"}, two{"C0000001", "C0000002"}, other{"C0000003"};
    c.expect(labeler::containment_index(two, one).score == 0.5, "containment 0.5 case");
    c.expect(labeler::containment_index(one, two).score == 1.0, "containment 1.0 case");
    c.expect(labeler::containment_index(one, other).score == 0.0, "containment 0.0 case");
}

void harness_shape(Check& c) {
    const auto dataset = load_index("harness/dataset.jsonl");
    std::ifstream plan_in(t::fixture("harness/plan.json"));
    const auto plan = retrieval::parse_plan(nlohmann::json::parse(plan_in));
    retrieval::SearchContext ctx;
    ctx.discovery.enabled = false;
    ctx.config = unexpanded();
    const auto serial = retrieval::run_harness(plan, dataset, ctx);
    c.expect(plan.classes.size() == 8 && plan.queries_per_class == 10, "plan is not 8 x 10");
    c.expect(serial.searches.size() == 80, "expected 80 searches");
    for (std::size_t i = 0; i < serial.searches.size(); ++i) {
        const auto& s = serial.searches[i];
        c.expect(s.round == i / 8 + 1 && s.class_name == plan.classes[i % 8] &&
                     s.query_id == plan.class_queries.at(s.class_name)[s.round - 1],
                 "searches not in round-robin order");
    }
    std::ostringstream golden;
    retrieval::write_manifest_csv(golden, serial);
    c.expect(golden.str() == t::read_file(t::fixture("harness/golden_manifest.csv")), "golden manifest differs");
    for (unsigned w : {2u, 4u, 8u}) {
        auto par = ctx;
        par.workers = w;
        std::ostringstream out;
        retrieval::write_manifest_csv(out, retrieval::run_harness(plan, dataset, par));
        c.expect(out.str() == golden.str(), "manifest depends on worker count");
    }
    auto broken = plan;
    broken.balanced_ids.insert("NOT-IN-R");
    bool rejected = false;
    try {
        broken.validate();
    } catch (const DomainError&) {
        rejected = true;
    }
    c.expect(rejected, "(B \\ Q) outside R was accepted");
}

void ingest_round_trip(Check& c) {
    const auto catalog = fixture_catalog(&c);
    c.expect(catalog.records.size() == 23, "catalog record count");
    std::stringstream buf;
    umls::write_snapshot(buf, catalog);
    c.expect(umls::read_snapshot(buf) == catalog, "snapshot reload differs");
    const auto path = std::filesystem::temp_directory_path() / "cuisim_acceptance_catalog.snap";
    umls::save_snapshot(path, catalog);
    c.expect(umls::load_snapshot(path) == catalog, "file snapshot reload differs");
    std::filesystem::remove(path);
}

}  // namespace

int main() {
    const auto started = std::chrono::steady_clock::now();
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
        {"distance-family identities", distance_identities},
        {"symmetry and bounds", symmetry_and_bounds},
        {"preference-vector laws", preference_laws},
        {"BFS oracle", bfs_oracle},
        {"search oracle", search_oracle},
        {"assertion rules", assertion_rules},
        {"labeler oracle", labeler_oracle},
        {"harness shape", harness_shape},
        {"ingest round-trip", ingest_round_trip},
    };
    bool all = true;
    for (const auto& [name, run] : criteria) {
        Check c;
        try {
            run(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        all = all && c.ok();
        std::cout << (c.ok() ? "PASS " : "FAIL ") << name << " (" << c.checks() << " checks)";
        if (!c.ok()) std::cout << ": " << c.failure();
        std::cout << '\n';
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const bool fast = seconds < 60.0;
    all = all && fast;
    std::cout << (fast ? "PASS " : "FAIL ") << "suite runtime under 60 s (" << seconds << " s)\n";
    return all ? 0 : 1;
}
