#include "cuisim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>

namespace cuisim::config {

using nlohmann::json;

namespace {

const std::vector<std::string> kPathKeys{"mrconso", "mrrel",     "mrsty",       "catalog",    "graph", "annotations",
                                         "candidates", "cuisets", "old_labels", "cue_lexicon", "plan"};

json defaults() {
    const auto types = linking::TypeConfig::defaults();
    return json{
        {"paths", json::object()},
        {"ingest", {{"vocabularies", umls::kDefaultVocabularies}, {"relations", umls::kDefaultRelations}}},
        {"graph",
         {{"synonym_relations", graph::kDefaultSynonymRelations},
          {"synonym_reach", "multi"},
          {"discovery_edges", "both"}}},
        {"assertion",
         {{"negation_scope", "component"},
          {"bare_anatomy_present", true},
          {"short_phrase_max_entities", 2},
          {"short_phrase_max_head_tokens", 3},
          {"sentence_wins", true}}},
        {"linking", {{"observation_types", types.observation_types}, {"anatomy_types", types.anatomy_types}}},
        {"distance",
         {{"measure", "weighted"},
          {"alpha", 0.0},
          {"beta", 1.0},
          {"contradictions", true},
          {"synonym_expansion", true},
          {"expand_both", false},
          {"double_count_contradictions", false},
          {"weight_aggregate", "max"},
          {"preference", {{"default_weight", 1.0}, {"weights", json::object()}}}}},
        {"retrieval", {{"k", 10}, {"discovery", true}, {"discovery_depth", 10}}},
        {"labeler", {{"labels", json::array()}, {"overrides", json::object()}, {"measure", "containment"}, {"parent_depth", 1}}},
        {"run", {{"workers", 1}, {"strict", false}}},
    };
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

json parse_env_value(const std::string& raw) {
    try {
        return json::parse(raw);
    } catch (const json::exception&) {
        return raw;
    }
}

void merge_section(json& target, const json& source, const std::string& section) {
    if (!source.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : source.items()) {
        if (section == "paths") {
            if (std::find(kPathKeys.begin(), kPathKeys.end(), key) == kPathKeys.end())
                throw ConfigError("unknown config key 'paths." + key + "'");
            if (!value.is_string()) throw ConfigError("config key 'paths." + key + "' must be a string");
            target[key] = value;
            continue;
        }
        if (!target.contains(key)) throw ConfigError("unknown config key '" + section + "." + key + "'");
        if (key == "preference") {
            for (const auto& [pk, pv] : value.items())
                if (pk != "default_weight" && pk != "weights")
                    throw ConfigError("unknown config key 'distance.preference." + pk + "'");
            json merged = target[key];
            merged.update(value);
            target[key] = merged;
            continue;
        }
        target[key] = value;
    }
}

template <typename T>
T get(const json& section, const std::string& name, const std::string& key) {
    try {
        return section.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + name + "." + key + "' has the wrong type");
    }
}

RunConfig materialize(json effective, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    for (const auto& [key, value] : effective["paths"].items()) {
        std::filesystem::path p = value.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        if (!std::filesystem::exists(p)) throw ConfigError("config path '" + key + "' does not exist: " + p.string());
        cfg.paths[key] = p;
    }

    const auto& ingest = effective["ingest"];
    cfg.vocabularies = get<std::set<std::string>>(ingest, "ingest", "vocabularies");
    cfg.relations = get<std::set<std::string>>(ingest, "ingest", "relations");

    const auto& g = effective["graph"];
    cfg.synonym_relations = get<std::set<std::string>>(g, "graph", "synonym_relations");
    const auto reach = get<std::string>(g, "graph", "synonym_reach");
    if (reach != "multi" && reach != "single") throw ConfigError("graph.synonym_reach must be multi or single");
    cfg.synonym_reach = reach == "multi" ? graph::SynonymReach::MultiHop : graph::SynonymReach::SingleHop;
    const auto edges = get<std::string>(g, "graph", "discovery_edges");
    if (edges == "both")
        cfg.discovery.edges = graph::TraversalEdges::Both;
    else if (edges == "hierarchy")
        cfg.discovery.edges = graph::TraversalEdges::HierarchyOnly;
    else if (edges == "synonym")
        cfg.discovery.edges = graph::TraversalEdges::SynonymOnly;
    else
        throw ConfigError("graph.discovery_edges must be both, hierarchy or synonym");

    const auto& a = effective["assertion"];
    const auto scope = get<std::string>(a, "assertion", "negation_scope");
    if (scope != "component" && scope != "one_hop")
        throw ConfigError("assertion.negation_scope must be component or one_hop");
    cfg.assertion.negation_scope = scope == "component" ? report::NegationScope::Component : report::NegationScope::OneHop;
    cfg.assertion.bare_anatomy_present = get<bool>(a, "assertion", "bare_anatomy_present");
    cfg.assertion.short_phrase_max_entities = get<std::size_t>(a, "assertion", "short_phrase_max_entities");
    cfg.assertion.short_phrase_max_head_tokens = get<std::size_t>(a, "assertion", "short_phrase_max_head_tokens");
    cfg.assertion.sentence_wins = get<bool>(a, "assertion", "sentence_wins");
    if (auto it = cfg.paths.find("cue_lexicon"); it != cfg.paths.end())
        cfg.assertion.cues = report::CueLexicon::load(it->second);

    const auto& l = effective["linking"];
    cfg.types.observation_types = get<std::set<std::string>>(l, "linking", "observation_types");
    cfg.types.anatomy_types = get<std::set<std::string>>(l, "linking", "anatomy_types");

    const auto& d = effective["distance"];
    cfg.distance.measure = similarity::parse_measure(get<std::string>(d, "distance", "measure"));
    cfg.distance.alpha = get<double>(d, "distance", "alpha");
    cfg.distance.beta = get<double>(d, "distance", "beta");
    cfg.distance.contradictions_enabled = get<bool>(d, "distance", "contradictions");
    cfg.distance.synonym_expansion_enabled = get<bool>(d, "distance", "synonym_expansion");
    cfg.distance.expand_both = get<bool>(d, "distance", "expand_both");
    cfg.distance.double_count_contradictions = get<bool>(d, "distance", "double_count_contradictions");
    const auto agg = get<std::string>(d, "distance", "weight_aggregate");
    if (agg != "max" && agg != "sum") throw ConfigError("distance.weight_aggregate must be max or sum");
    cfg.distance.aggregate = agg == "max" ? similarity::WeightAggregate::Max : similarity::WeightAggregate::Sum;
    const auto& pref = d["preference"];
    cfg.distance.preference.default_weight = get<double>(pref, "distance.preference", "default_weight");
    cfg.distance.preference.weights = get<std::map<std::string, double>>(pref, "distance.preference", "weights");
    cfg.distance.validate();

    const auto& r = effective["retrieval"];
    cfg.k = get<std::size_t>(r, "retrieval", "k");
    if (cfg.k == 0) throw ConfigError("retrieval.k must be >= 1");
    cfg.discovery.enabled = get<bool>(r, "retrieval", "discovery");
    cfg.discovery.depth = get<std::size_t>(r, "retrieval", "discovery_depth");

    const auto& lab = effective["labeler"];
    cfg.labels = get<std::vector<std::string>>(lab, "labeler", "labels");
    cfg.label_overrides = get<std::map<std::string, std::set<Cui>>>(lab, "labeler", "overrides");
    cfg.label_measure = labeler::parse_set_measure(get<std::string>(lab, "labeler", "measure"));
    cfg.parent_depth = get<std::size_t>(lab, "labeler", "parent_depth");

    const auto& run = effective["run"];
    cfg.workers = std::max(1u, get<unsigned>(run, "run", "workers"));
    cfg.strict = get<bool>(run, "run", "strict");

    cfg.effective = std::move(effective);
    return cfg;
}

}  // namespace

std::optional<std::filesystem::path> RunConfig::path(const std::string& name) const {
    auto it = paths.find(name);
    if (it == paths.end()) return std::nullopt;
    return it->second;
}

const std::filesystem::path& RunConfig::require(const std::string& name) const {
    auto it = paths.find(name);
    if (it == paths.end()) throw ConfigError("missing required path '" + name + "'");
    return it->second;
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) return std::string(v);
        return std::nullopt;
    };
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir, const EnvLookup& env) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    json effective = defaults();
    for (const auto& [section, body] : doc.items()) {
        if (!effective.contains(section)) throw ConfigError("unknown config section '" + section + "'");
        merge_section(effective[section], body, section);
    }
    if (env) {
        for (auto& [section, body] : effective.items()) {
            const std::vector<std::string> keys =
                section == "paths" ? kPathKeys : [&] {
                    std::vector<std::string> k;
                    for (const auto& [key, v] : body.items()) k.push_back(key);
                    return k;
                }();
            for (const auto& key : keys) {
                if (auto v = env(std::string(kEnvPrefix) + upper(section) + "_" + upper(key)))
                    body[key] = section == "paths" ? json(*v) : parse_env_value(*v);
            }
        }
    }
    return materialize(std::move(effective), base_dir);
}

RunConfig load_config(const std::filesystem::path& file, const EnvLookup& env) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + file.string() + ": " + e.what());
    }
    return parse_config(doc, file.parent_path(), env);
}

RunConfig default_config(const EnvLookup& env) {
    return parse_config(json::object(), std::filesystem::current_path(), env);
}

namespace {

std::vector<std::string> read_id_list(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot read id list " + p.string());
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

}  // namespace

retrieval::HarnessPlan load_plan(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read plan file " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("plan file " + file.string() + ": " + e.what());
    }
    for (const auto* key : {"balanced", "retrieval"}) {
        const std::string file_key = std::string(key) + "_file";
        if (!doc.contains(file_key)) continue;
        auto p = std::filesystem::path(doc[file_key].get<std::string>());
        if (p.is_relative()) p = file.parent_path() / p;
        doc[std::string(key) + "_ids"] = read_id_list(p);
        doc.erase(file_key);
    }
    try {
        return retrieval::parse_plan(doc);
    } catch (const json::exception& e) {
        throw ConfigError("plan file " + file.string() + ": " + e.what());
    }
}

}  // namespace cuisim::config
