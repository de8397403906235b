#include <doctest.h>

#include <fstream>

#include "cuisim/config.hpp"
#include "cuisim/run_manifest.hpp"
#include "oracles.hpp"

using namespace cuisim;
using namespace cuisim::config;
using nlohmann::json;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "cuisim_config_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("defaults") {
        const auto cfg = parse_config(json::object(), ".");
        CHECK(cfg.vocabularies == umls::kDefaultVocabularies);
        CHECK(cfg.distance.measure == similarity::Measure::Weighted);
        CHECK(cfg.distance.contradictions_enabled);
        CHECK(cfg.k == 10);
        CHECK(cfg.discovery.depth == 10);
        CHECK(cfg.workers == 1);
        CHECK(cfg.paths.empty());
        CHECK(cfg.effective.contains("distance"));
    }

    TEST_CASE("file values are applied") {
        const auto doc = json::parse(R"({
            "distance": {"measure": "prototypical", "contradictions": false,
                         "preference": {"weights": {"Finding": 2.0}}},
            "retrieval": {"k": 3},
            "assertion": {"negation_scope": "one_hop"},
            "paths": {"plan": "harness/plan.json"}
        })");
        const auto cfg = parse_config(doc, CUISIM_FIXTURES);
        CHECK(cfg.distance.measure == similarity::Measure::Prototypical);
        CHECK_FALSE(cfg.distance.contradictions_enabled);
        CHECK(cfg.distance.preference.weights.at("Finding") == 2.0);
        CHECK(cfg.k == 3);
        CHECK(cfg.assertion.negation_scope == report::NegationScope::OneHop);
        CHECK(cfg.require("plan") == testing::fixture("harness/plan.json"));
        CHECK_FALSE(cfg.path("graph"));
        CHECK_THROWS_AS(cfg.require("graph"), ConfigError);
    }

    TEST_CASE("unknown sections and keys are rejected") {
        CHECK_THROWS_AS(parse_config(json::parse(R"({"bogus": {}})"), "."), ConfigError);
        CHECK_THROWS_AS(parse_config(json::parse(R"({"distance": {"gamma": 1}})"), "."), ConfigError);
        CHECK_THROWS_AS(parse_config(json::parse(R"({"paths": {"nope": "x"}})"), "."), ConfigError);
        CHECK_THROWS_AS(parse_config(json::parse(R"({"retrieval": {"k": "ten"}})"), "."), ConfigError);
        CHECK_THROWS_AS(parse_config(json::parse(R"({"retrieval": {"k": 0}})"), "."), ConfigError);
        CHECK_THROWS_AS(parse_config(json::parse(R"({"distance": {"preference": {"default_weight": -1}}})"), "."),
                        ConfigError);
    }

    TEST_CASE("missing input paths are rejected with the path named") {
        try {
            parse_config(json::parse(R"({"paths": {"catalog": "no/such/catalog.snap"}})"), "/tmp");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("no/such/catalog.snap") != std::string::npos);
        }
        CHECK_THROWS_AS(load_config("/nonexistent/cuisim.json"), ConfigError);
    }

    TEST_CASE("environment overrides file values") {
        const auto doc = json::parse(R"({"retrieval": {"k": 3}})");
        const auto cfg = parse_config(doc, CUISIM_FIXTURES,
                                      env_of({{"CUISIM_RETRIEVAL_K", "7"},
                                              {"CUISIM_DISTANCE_MEASURE", "symmetric"},
                                              {"CUISIM_PATHS_PLAN", "harness/plan.json"}}));
        CHECK(cfg.k == 7);
        CHECK(cfg.distance.measure == similarity::Measure::Symmetric);
        CHECK(cfg.path("plan"));
        CHECK(cfg.effective["retrieval"]["k"] == 7);
    }

    TEST_CASE("cue lexicon path replaces the builtin cues") {
        const auto p = scratch("cues.txt");
        std::ofstream(p) << "# comment\nruled out\n";
        const auto cfg = parse_config(json{{"paths", {{"cue_lexicon", p.string()}}}}, ".");
        CHECK(cfg.assertion.cues.cues() == std::vector<std::string>{"ruled out"});
    }

    TEST_CASE("load_config resolves paths against the file") {
        const auto p = scratch("cfg.json");
        std::ofstream(p) << R"({"paths": {"cue_lexicon": "cues.txt"}})";
        std::ofstream(scratch("cues.txt")) << "no\n";
        CHECK(load_config(p).require("cue_lexicon") == scratch("cues.txt"));
        std::ofstream(p) << "{ not json";
        CHECK_THROWS_AS(load_config(p), ConfigError);
    }

    TEST_CASE("plan files with id lists") {
        const auto dir = scratch("plan");
        std::filesystem::create_directories(dir);
        std::ofstream(dir / "b.txt") << "q1\nx\n";
        std::ofstream(dir / "r.txt") << "x\ny\n";
        std::ofstream(dir / "plan.json")
            << R"({"classes": ["A"], "queries_per_class": 1, "queries": {"A": ["q1"]},
                  "balanced_file": "b.txt", "retrieval_file": "r.txt", "budget": 2})";
        const auto plan = load_plan(dir / "plan.json");
        CHECK(plan.balanced_ids == std::set<std::string>{"q1", "x"});
        CHECK(plan.retrieval_ids == std::set<std::string>{"x", "y"});
        CHECK(plan.budget() == 2);
        CHECK_NOTHROW(plan.validate());
        CHECK_THROWS_AS(load_plan(dir / "missing.json"), ConfigError);
    }

    TEST_CASE("sha256 known answers") {
        CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        const auto p = scratch("abc.txt");
        std::ofstream(p, std::ios::binary) << "abc";
        CHECK(sha256_file(p) == sha256_hex("abc"));
        CHECK_THROWS_AS(sha256_file("/nonexistent/file"), DomainError);
    }

    TEST_CASE("run manifest contents") {
        const auto cfg = parse_config(json::object(), ".");
        RunManifest m("score", cfg.effective);
        const auto in = scratch("input.txt");
        std::ofstream(in) << "abc";
        m.add_input(in);
        m.add_output(scratch("out.json"));
        m.set_counter("pairs", 3);
        m.set_status(1, "bad input");
        const auto j = m.to_json();
        CHECK(j["command"] == "score");
        CHECK(j["config_sha256"] == sha256_hex(cfg.effective.dump()));
        CHECK(j["inputs"][in.string()] == sha256_hex("abc"));
        CHECK(j["counters"]["pairs"] == 3);
        CHECK(j["exit_code"] == 1);
        CHECK(j["message"] == "bad input");
        const auto out = scratch("run.json");
        m.write(out);
        std::ifstream back(out);
        CHECK(json::parse(back)["command"] == "score");
    }
}
