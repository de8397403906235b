#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "cuisim/linking.hpp"
#include "oracles.hpp"

using namespace cuisim;
using namespace cuisim::linking;

namespace {

const std::string kDisease = "Disease or Syndrome";
const std::string kBodyPart = "Body Part, Organ, or Organ Component";
const std::string kDrug = "Pharmacologic Substance";

LinkCandidate cand(const char* cui, double score, std::string type) { return {cui, score, {std::move(type)}}; }

umls::ConceptCatalog fixture_catalog() {
    const auto conso = umls::parse_mrconso(testing::fixture("umls/MRCONSO.RRF"), umls::kDefaultVocabularies);
    const auto sty = umls::parse_mrsty(testing::fixture("umls/MRSTY.RRF"));
    const auto rel = umls::parse_mrrel(testing::fixture("umls/MRREL.RRF"), umls::kDefaultRelations);
    return umls::build_catalog(conso.items, sty.items, rel.items).catalog;
}

}  // namespace

TEST_SUITE("linking") {
    TEST_CASE("type filter by entity kind") {
        const auto types = TypeConfig::defaults();
        CHECK(types.observation_types.size() == 4);
        CHECK(types.anatomy_types.size() == 5);
        const std::vector<LinkCandidate> list{cand("C0000001", 0.9, kDisease), cand("C0000011", 0.8, kBodyPart),
                                              cand("C0000019", 0.99, kDrug)};
        const auto obs = filter_candidates(list, EntityKind::Observation, types);
        REQUIRE(obs.size() == 1);
        CHECK(obs[0].cui == "C0000001");
        const auto anat = filter_candidates(list, EntityKind::Anatomy, types);
        REQUIRE(anat.size() == 1);
        CHECK(anat[0].cui == "C0000011");
    }

    TEST_CASE("select_best worked examples") {
        SUBCASE("context head wins on score") {
            const auto b = select_best({cand("C0000002", 0.80, kDisease)}, {cand("C0000009", 0.90, kDisease)});
            REQUIRE(b);
            CHECK(b->cui == "C0000009");
            CHECK(b->provenance == Provenance::Context);
            CHECK(b->isolated_head == ScoredCui{"C0000002", 0.80});
            CHECK(b->context_head == ScoredCui{"C0000009", 0.90});
        }
        SUBCASE("equal scores prefer the smaller CUI") {
            const auto b = select_best({cand("C0000009", 0.9, kDisease)}, {cand("C0000002", 0.9, kDisease)});
            CHECK(b->cui == "C0000002");
        }
        SUBCASE("same CUI and score goes to the isolated list") {
            const auto b = select_best({cand("C0000002", 0.9, kDisease)}, {cand("C0000002", 0.9, kDisease)});
            CHECK(b->provenance == Provenance::Isolated);
        }
        SUBCASE("one empty list") {
            const auto b = select_best({}, {cand("C0000003", -0.2, kDisease)});
            CHECK(b->cui == "C0000003");
            CHECK_FALSE(b->isolated_head);
        }
        SUBCASE("both empty") { CHECK_FALSE(select_best({}, {})); }
    }

    TEST_CASE("select_best matches a brute-force maximum") {
        testing::Rng rng(41);
        for (int trial = 0; trial < 2000; ++trial) {
            std::vector<LinkCandidate> iso, ctx;
            for (auto* list : {&iso, &ctx}) {
                const auto n = rng.below(5);
                for (std::size_t i = 0; i < n; ++i)
                    list->push_back({testing::cui_of(1 + rng.below(6)), static_cast<double>(rng.below(5)) / 4.0, {}});
            }
            // Oracle: lexicographic max of (score, -cui, isolated first).
            std::optional<std::tuple<double, std::string, int>> best;
            auto better = [](const std::tuple<double, std::string, int>& x, const std::tuple<double, std::string, int>& y) {
                if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
                if (std::get<1>(x) != std::get<1>(y)) return std::get<1>(x) < std::get<1>(y);
                return std::get<2>(x) < std::get<2>(y);
            };
            for (int side = 0; side < 2; ++side)
                for (const auto& c : side == 0 ? iso : ctx) {
                    std::tuple<double, std::string, int> t{c.score, c.cui, side};
                    if (!best || better(t, *best)) best = t;
                }
            const auto got = select_best(iso, ctx);
            REQUIRE(got.has_value() == best.has_value());
            if (!best) continue;
            CHECK(got->cui == std::get<1>(*best));
            CHECK(got->score == std::get<0>(*best));
            CHECK(got->provenance == (std::get<2>(*best) == 0 ? Provenance::Isolated : Provenance::Context));
        }
    }

    TEST_CASE("sorting and clamping") {
        std::vector<LinkCandidate> list{cand("C0000003", 0.5, ""), cand("C0000001", 0.5, ""), cand("C0000002", 0.7, "")};
        sort_candidates(list);
        CHECK(list[0].cui == "C0000002");
        CHECK(list[1].cui == "C0000001");
        nlohmann::json mention{{"isolated_text", "x"}, {"kind", "observation"}, {"assertion", "present"}};
        mention["isolated_candidates"] = nlohmann::json::array();
        for (std::size_t i = 0; i < 200; ++i)
            mention["isolated_candidates"].push_back({{"cui", testing::cui_of(i + 1)}, {"score", 0.001 * i}});
        std::istringstream in(nlohmann::json{{"report_id", "Z"}, {"mentions", {mention}}}.dump() + "\n");
        LinkStats stats;
        const auto reports = read_candidate_lines(in, umls::ConceptCatalog{}, stats);
        REQUIRE(reports.size() == 1);
        CHECK(reports[0].mentions[0].isolated_candidates.size() == kMaxCandidates);
        CHECK(reports[0].mentions[0].isolated_candidates[0].cui == testing::cui_of(200));
        CHECK(stats.unknown_cuis == 200);
    }

    TEST_CASE("cui set collisions keep the strongest assertion") {
        LinkedConcept a;
        a.cui = "C0000001";
        a.assertion = Assertion::Absent;
        a.score = 0.6;
        LinkedConcept b = a;
        b.assertion = Assertion::Present;
        b.score = 0.9;
        b.mention_ref = 1;
        const auto set = report_to_cui_set({a, b}, "R");
        CHECK(set.elements.at("C0000001") == Assertion::Present);
        CHECK(set.concept_meta.at("C0000001").score == 0.9);
        CHECK(set.links.size() == 2);
        CHECK(report_to_cui_set({b, a}, "R").elements == set.elements);
    }

    TEST_CASE("fixture candidates link to the expected concepts") {
        const auto catalog = fixture_catalog();
        std::ifstream raw(testing::fixture("linking/candidates.jsonl"));
        std::vector<nlohmann::json> lines;
        for (std::string line; std::getline(raw, line);)
            if (!line.empty()) lines.push_back(nlohmann::json::parse(line));
        std::ifstream in(testing::fixture("linking/candidates.jsonl"));
        LinkStats stats;
        const auto reports = read_candidate_lines(in, catalog, stats);
        REQUIRE(reports.size() == lines.size());
        const auto types = TypeConfig::defaults();
        for (std::size_t r = 0; r < reports.size(); ++r) {
            const auto set = link_report(reports[r], types, stats);
            const auto& mentions = lines[r].at("mentions");
            for (std::size_t i = 0; i < mentions.size(); ++i) {
                CAPTURE(reports[r].report_id);
                CAPTURE(i);
                const auto& expected = mentions[i].at("expected_cui");
                const auto it = std::find_if(set.links.begin(), set.links.end(),
                                             [&](const MentionLink& l) { return l.mention == i; });
                if (expected.is_null()) {
                    CHECK(it == set.links.end());
                } else {
                    REQUIRE(it != set.links.end());
                    CHECK(it->cui == expected.get<std::string>());
                    CHECK(set.contains(it->cui));
                }
            }
        }
        CHECK(stats.reports == 4);
        CHECK(stats.mentions == 20);
        CHECK(stats.linked == 17);
        CHECK(stats.unlinked == 3);
        CHECK(stats.invalid_candidates == 2);
    }
}
