#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuisim/graph.hpp"
#include "cuisim/labeler.hpp"
#include "cuisim/linking.hpp"
#include "cuisim/report.hpp"
#include "cuisim/retrieval.hpp"
#include "cuisim/similarity.hpp"

namespace cuisim::config {

/// Effective configuration for one CLI run. The file is JSON with one
/// object per section; see README for every key and its default.
struct RunConfig {
    /// Input files by name (mrconso, mrrel, mrsty, catalog, graph,
    /// annotations, candidates, cuisets, old_labels, cue_lexicon, plan).
    std::map<std::string, std::filesystem::path> paths;

    std::set<std::string> vocabularies = umls::kDefaultVocabularies;
    std::set<std::string> relations = umls::kDefaultRelations;

    std::set<std::string> synonym_relations = graph::kDefaultSynonymRelations;
    graph::SynonymReach synonym_reach = graph::SynonymReach::MultiHop;

    report::AssertionConfig assertion;
    linking::TypeConfig types = linking::TypeConfig::defaults();
    similarity::DistanceConfig distance;

    std::size_t k = 10;
    retrieval::DiscoveryOptions discovery;

    std::vector<std::string> labels;
    std::map<std::string, std::set<Cui>> label_overrides;
    labeler::SetMeasure label_measure = labeler::SetMeasure::Containment;
    std::size_t parent_depth = 1;

    unsigned workers = 1;
    bool strict = false;

    /// Effective configuration after defaults and overrides, for hashing.
    nlohmann::json effective;

    std::optional<std::filesystem::path> path(const std::string& name) const;
    /// Returns the named path or throws ConfigError.
    const std::filesystem::path& require(const std::string& name) const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Environment variables named CUISIM_<SECTION>_<KEY> override file values.
inline constexpr const char* kEnvPrefix = "CUISIM_";
EnvLookup process_env();

/// Parses a config document. Unknown sections or keys and missing input
/// paths throw ConfigError. Relative paths resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                       const EnvLookup& env = {});
RunConfig load_config(const std::filesystem::path& file, const EnvLookup& env = {});
RunConfig default_config(const EnvLookup& env = {});

/// Reads a harness plan file. `balanced_file` / `retrieval_file` keys name
/// id lists (one id per line) relative to the plan file.
retrieval::HarnessPlan load_plan(const std::filesystem::path& file);

}  // namespace cuisim::config
