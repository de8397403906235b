// cuisim: command-line front end for ingest, graph building, linking,
// scoring, search, the retrieval harness and labeling.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cuisim/config.hpp"
#include "cuisim/cuiset.hpp"
#include "cuisim/graph.hpp"
#include "cuisim/labeler.hpp"
#include "cuisim/linking.hpp"
#include "cuisim/report.hpp"
#include "cuisim/retrieval.hpp"
#include "cuisim/run_manifest.hpp"
#include "cuisim/similarity.hpp"
#include "cuisim/umls.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cuisim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
    std::string config_file;
    unsigned workers = 0;
    bool strict = false;
    std::string manifest;
};

/// Paths given on the command line; empty means "use the config value".
struct PathFlags {
    std::map<std::string, std::string> values;

    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        app->add_option(flag, values[key], help);
    }
};

class Runner {
public:
    Runner(const GlobalOptions& global, std::string command, const PathFlags& flags)
        : command_(std::move(command)) {
        if (!global.config_file.empty() && !fs::exists(global.config_file))
            throw ConfigError("config file does not exist: " + global.config_file);
        cfg_ = global.config_file.empty() ? config::default_config(config::process_env())
                                          : config::load_config(global.config_file, config::process_env());
        for (const auto& [key, value] : flags.values) {
            if (value.empty()) continue;
            if (!fs::exists(value)) throw ConfigError("input path does not exist: " + value);
            cfg_.paths[key] = value;
            cfg_.effective["paths"][key] = value;
            if (key == "cue_lexicon") cfg_.assertion.cues = report::CueLexicon::load(value);
        }
        if (global.workers > 0) cfg_.workers = global.workers;
        if (global.strict) cfg_.strict = true;
        cfg_.effective["run"]["workers"] = cfg_.workers;
        cfg_.effective["run"]["strict"] = cfg_.strict;
        manifest_path_ = global.manifest;
        manifest_.emplace(command_, cfg_.effective);
    }

    config::RunConfig& cfg() { return cfg_; }
    RunManifest& manifest() { return *manifest_; }

    const fs::path& input(const std::string& key) {
        const auto& p = cfg_.require(key);
        manifest_->add_input(p);
        return p;
    }

    umls::ConceptCatalog catalog() { return umls::load_snapshot(input("catalog")); }

    graph::ConceptGraph graph() {
        if (cfg_.path("graph")) return graph::load_snapshot(input("graph"));
        return graph::build_graph(catalog(), cfg_.synonym_relations);
    }

    bool has_graph_source() const { return cfg_.path("graph") || cfg_.path("catalog"); }

    std::vector<CuiSet> cuisets() {
        std::ifstream in(input("cuisets"));
        std::size_t malformed = 0;
        auto sets = read_cuiset_lines(in, cfg_.strict, &malformed);
        manifest_->set_counter("malformed_cuiset_lines", malformed);
        return sets;
    }

    std::ofstream open_output(const fs::path& p) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw DomainError("cannot write " + p.string());
        manifest_->add_output(p);
        return out;
    }

    void set_default_manifest(const fs::path& primary_output) {
        if (manifest_path_.empty()) manifest_path_ = primary_output.string() + ".run.json";
    }

    void finish(int code, const std::string& message = {}) {
        if (!manifest_) return;
        manifest_->set_status(code, message);
        manifest_->write(manifest_path_.empty() ? fs::path("cuisim_run.json") : fs::path(manifest_path_));
    }

private:
    std::string command_;
    config::RunConfig cfg_;
    std::optional<RunManifest> manifest_;
    std::string manifest_path_;
};

CuiSet read_single_cuiset(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw DomainError("cannot read " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const auto text = buf.str();
    try {
        return json::parse(text).get<CuiSet>();
    } catch (const json::exception&) {
        std::istringstream lines(text);
        auto sets = read_cuiset_lines(lines, true);
        if (sets.size() != 1) throw DomainError(p.string() + ": expected exactly one CuiSet");
        return sets.front();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cuisim: ontology-backed similarity and labeling for radiology reports"};
    app.require_subcommand(1);
    GlobalOptions global;
    app.add_option("--config", global.config_file, "JSON config file");
    app.add_option("--workers", global.workers, "Worker threads (overrides run.workers)");
    app.add_flag("--strict", global.strict, "Abort on malformed input instead of skipping");
    app.add_option("--manifest", global.manifest, "Where to write the run manifest");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse UMLS RRF files into a catalog snapshot");
    PathFlags ingest_paths;
    ingest_paths.add(ingest, "--mrconso", "mrconso", "MRCONSO.RRF");
    ingest_paths.add(ingest, "--mrrel", "mrrel", "MRREL.RRF");
    ingest_paths.add(ingest, "--mrsty", "mrsty", "MRSTY.RRF");
    std::string ingest_out, ingest_strings, ingest_graph_out;
    ingest->add_option("--out", ingest_out, "Catalog snapshot to write")->required();
    ingest->add_option("--strings", ingest_strings, "Also write the (cui, string) TSV dump");
    ingest->add_option("--graph-out", ingest_graph_out, "Also write the graph snapshot");

    // graph
    auto* graph_cmd = app.add_subcommand("graph", "Build or inspect the concept graph");
    graph_cmd->require_subcommand(1);
    auto* graph_build = graph_cmd->add_subcommand("build", "Build the graph snapshot from a catalog");
    PathFlags graph_build_paths;
    graph_build_paths.add(graph_build, "--catalog", "catalog", "Catalog snapshot");
    std::string graph_out;
    graph_build->add_option("--out", graph_out, "Graph snapshot to write")->required();
    auto* graph_stats = graph_cmd->add_subcommand("stats", "Print node, edge and component counts");
    PathFlags graph_stats_paths;
    graph_stats_paths.add(graph_stats, "--graph", "graph", "Graph snapshot");
    graph_stats_paths.add(graph_stats, "--catalog", "catalog", "Catalog snapshot (used when no graph is given)");

    // mentions
    auto* mentions = app.add_subcommand("mentions", "Apply assertion rules and merge annotation granularities");
    PathFlags mentions_paths;
    mentions_paths.add(mentions, "--annotations", "annotations", "Annotation JSON lines");
    mentions_paths.add(mentions, "--cues", "cue_lexicon", "Negation cue lexicon");
    std::string mentions_out;
    mentions->add_option("--out", mentions_out, "Mention JSON lines to write")->required();

    // link
    auto* link = app.add_subcommand("link", "Select one CUI per mention and write CuiSet JSON lines");
    PathFlags link_paths;
    link_paths.add(link, "--candidates", "candidates", "Candidate JSON lines from the extraction adapter");
    link_paths.add(link, "--catalog", "catalog", "Catalog snapshot");
    std::string link_out;
    link->add_option("--out", link_out, "CuiSet JSON lines to write")->required();

    // score
    auto* score = app.add_subcommand("score", "Compare two CuiSets and print the breakdown");
    std::string score_a, score_b;
    score->add_option("a", score_a, "Query CuiSet JSON")->required()->check(CLI::ExistingFile);
    score->add_option("b", score_b, "Candidate CuiSet JSON")->required()->check(CLI::ExistingFile);
    PathFlags score_paths;
    score_paths.add(score, "--graph", "graph", "Graph snapshot for synonym expansion");
    std::string score_measure;
    score->add_option("--measure", score_measure, "tversky|symmetric|prototypical|weighted");

    // search
    auto* search_cmd = app.add_subcommand("search", "Rank indexed reports against a query");
    PathFlags search_paths;
    search_paths.add(search_cmd, "--cuisets", "cuisets", "CuiSet JSON lines to index");
    search_paths.add(search_cmd, "--graph", "graph", "Graph snapshot");
    search_paths.add(search_cmd, "--catalog", "catalog", "Catalog snapshot (graph built on the fly)");
    std::string query_id, query_file, search_out, search_measure;
    std::size_t search_k = 0;
    bool no_discovery = false;
    search_cmd->add_option("--query-id", query_id, "Id of an indexed report to use as query");
    search_cmd->add_option("--query", query_file, "CuiSet JSON file to use as query")->check(CLI::ExistingFile);
    search_cmd->add_option("--k", search_k, "Number of results (overrides retrieval.k)");
    search_cmd->add_flag("--no-discovery", no_discovery, "Score every indexed report");
    search_cmd->add_option("--measure", search_measure, "tversky|symmetric|prototypical|weighted");
    search_cmd->add_option("--out", search_out, "Write the ranking JSON here instead of stdout");

    // harness
    auto* harness = app.add_subcommand("harness", "Run the round-robin retrieval experiment");
    PathFlags harness_paths;
    harness_paths.add(harness, "--plan", "plan", "Harness plan JSON");
    harness_paths.add(harness, "--cuisets", "cuisets", "CuiSet JSON lines (queries and retrieval pool)");
    harness_paths.add(harness, "--graph", "graph", "Graph snapshot");
    harness_paths.add(harness, "--catalog", "catalog", "Catalog snapshot (graph built on the fly)");
    std::string harness_out, harness_jsonl;
    harness->add_option("--out", harness_out, "Manifest CSV to write")->required();
    harness->add_option("--jsonl", harness_jsonl, "Manifest JSON lines with breakdowns");

    // label
    auto* label = app.add_subcommand("label", "Generate ontology-backed labels");
    PathFlags label_paths;
    label_paths.add(label, "--cuisets", "cuisets", "CuiSet JSON lines");
    label_paths.add(label, "--old-labels", "old_labels", "Baseline label CSV");
    label_paths.add(label, "--catalog", "catalog", "Catalog snapshot");
    label_paths.add(label, "--graph", "graph", "Graph snapshot");
    std::string label_out, label_audit, label_measure;
    bool no_retrieval = false;
    label->add_option("--out", label_out, "Label CSV to write")->required();
    label->add_option("--audit", label_audit, "Per-report comparison JSON lines");
    label->add_flag("--no-retrieval", no_retrieval, "Phase 1 only; ignore old labels");
    label->add_option("--measure", label_measure, "containment|jaccard")
        ->check(CLI::IsMember({"containment", "jaccard"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    std::optional<Runner> runner;
    try {
        if (*ingest) {
            runner.emplace(global, "ingest", ingest_paths);
            auto& cfg = runner->cfg();
            runner->set_default_manifest(ingest_out);
            const auto w = cfg.workers;
            auto conso = umls::parse_mrconso(runner->input("mrconso"), cfg.vocabularies, w);
            auto sty = umls::parse_mrsty(runner->input("mrsty"), w);
            auto rel = umls::parse_mrrel(runner->input("mrrel"), cfg.relations, w);
            auto built = umls::build_catalog(std::move(conso.items), sty.items, rel.items);
            {
                auto out = runner->open_output(ingest_out);
                umls::write_snapshot(out, built.catalog);
            }
            if (!ingest_strings.empty()) {
                auto out = runner->open_output(ingest_strings);
                umls::write_string_dump(out, built.catalog);
            }
            if (!ingest_graph_out.empty()) {
                auto out = runner->open_output(ingest_graph_out);
                graph::write_snapshot(out, graph::build_graph(built.catalog, cfg.synonym_relations));
            }
            json summary{{"records", built.summary.records},
                         {"semantic_types", built.summary.semantic_types},
                         {"relations", built.summary.relations},
                         {"dropped_semantic_types", built.summary.dropped_semantic_types},
                         {"dropped_relations", built.summary.dropped_relations},
                         {"mrconso", {{"rows", conso.stats.rows}, {"malformed", conso.stats.malformed}, {"filtered", conso.stats.filtered}}},
                         {"mrsty", {{"rows", sty.stats.rows}, {"malformed", sty.stats.malformed}, {"duplicates", sty.stats.duplicates}}},
                         {"mrrel", {{"rows", rel.stats.rows}, {"malformed", rel.stats.malformed}, {"filtered", rel.stats.filtered}, {"duplicates", rel.stats.duplicates}}}};
            auto& m = runner->manifest();
            m.set_counter("records", built.summary.records);
            m.set_counter("relations", built.summary.relations);
            m.set_counter("dropped_relations", built.summary.dropped_relations);
            m.set_counter("dropped_semantic_types", built.summary.dropped_semantic_types);
            m.set_counter("malformed_rows", conso.stats.malformed + sty.stats.malformed + rel.stats.malformed);
            std::cout << summary.dump(2) << '\n';
        } else if (*graph_cmd && *graph_build) {
            runner.emplace(global, "graph build", graph_build_paths);
            runner->set_default_manifest(graph_out);
            const auto g = graph::build_graph(runner->catalog(), runner->cfg().synonym_relations);
            auto out = runner->open_output(graph_out);
            graph::write_snapshot(out, g);
            runner->manifest().set_counter("nodes", g.node_count());
            runner->manifest().set_counter("edges", g.edge_count());
        } else if (*graph_cmd && *graph_stats) {
            runner.emplace(global, "graph stats", graph_stats_paths);
            if (!runner->has_graph_source()) throw ConfigError("graph stats needs --graph or --catalog");
            const auto s = graph::compute_stats(runner->graph());
            runner->manifest().set_counter("nodes", s.nodes);
            runner->manifest().set_counter("edges", s.edges);
            runner->manifest().set_counter("components", s.components);
            std::cout << json{{"nodes", s.nodes}, {"edges", s.edges}, {"synonym_edges", s.synonym_edges},
                              {"components", s.components}}
                             .dump(2)
                      << '\n';
        } else if (*mentions) {
            runner.emplace(global, "mentions", mentions_paths);
            runner->set_default_manifest(mentions_out);
            std::ifstream in(runner->input("annotations"));
            const auto annotations = report::read_annotation_lines(in);
            auto out = runner->open_output(mentions_out);
            std::size_t count = 0;
            for (const auto& a : annotations) {
                const auto ms = report::extract_mentions(a, runner->cfg().assertion);
                count += ms.size();
                out << json{{"report_id", a.report_id}, {"mentions", ms}}.dump() << '\n';
            }
            runner->manifest().set_counter("reports", annotations.size());
            runner->manifest().set_counter("mentions", count);
        } else if (*link) {
            runner.emplace(global, "link", link_paths);
            runner->set_default_manifest(link_out);
            const auto catalog = runner->catalog();
            linking::LinkStats stats;
            std::ifstream in(runner->input("candidates"));
            const auto reports = linking::read_candidate_lines(in, catalog, stats);
            std::vector<CuiSet> sets;
            for (const auto& r : reports) sets.push_back(linking::link_report(r, runner->cfg().types, stats));
            auto out = runner->open_output(link_out);
            write_cuiset_lines(out, sets);
            auto& m = runner->manifest();
            m.set_counter("reports", stats.reports);
            m.set_counter("mentions", stats.mentions);
            m.set_counter("linked", stats.linked);
            m.set_counter("unlinked", stats.unlinked);
            m.set_counter("invalid_candidates", stats.invalid_candidates);
            m.set_counter("unknown_cuis", stats.unknown_cuis);
        } else if (*score) {
            runner.emplace(global, "score", score_paths);
            auto& cfg = runner->cfg();
            if (!score_measure.empty()) cfg.distance.measure = similarity::parse_measure(score_measure);
            runner->manifest().add_input(score_a);
            runner->manifest().add_input(score_b);
            const auto a = read_single_cuiset(score_a);
            const auto b = read_single_cuiset(score_b);
            std::optional<graph::ConceptGraph> g;
            std::optional<graph::SynonymIndex> syn;
            if (cfg.path("graph")) {
                g = runner->graph();
                syn.emplace(*g, cfg.synonym_reach);
            }
            const auto breakdown = similarity::compare(a, b, cfg.distance, syn ? &*syn : nullptr);
            std::cout << json(breakdown).dump(2) << '\n';
        } else if (*search_cmd) {
            runner.emplace(global, "search", search_paths);
            auto& cfg = runner->cfg();
            if (!search_measure.empty()) cfg.distance.measure = similarity::parse_measure(search_measure);
            if (query_id.empty() == query_file.empty()) throw ConfigError("search needs exactly one of --query-id, --query");
            if (!search_out.empty()) runner->set_default_manifest(search_out);
            const auto index = retrieval::ReportIndex::build(runner->cuisets());
            CuiSet query;
            if (!query_file.empty()) {
                runner->manifest().add_input(query_file);
                query = read_single_cuiset(query_file);
            } else {
                const auto* q = index.find(query_id);
                if (q == nullptr) throw DomainError("query id '" + query_id + "' is not indexed");
                query = *q;
            }
            std::optional<graph::ConceptGraph> g;
            std::optional<graph::SynonymIndex> syn;
            if (runner->has_graph_source()) {
                g = runner->graph();
                syn.emplace(*g, cfg.synonym_reach);
            }
            retrieval::SearchContext ctx;
            ctx.index = &index;
            ctx.graph = g ? &*g : nullptr;
            ctx.synonyms = syn ? &*syn : nullptr;
            ctx.config = cfg.distance;
            ctx.discovery = cfg.discovery;
            if (no_discovery || !g) ctx.discovery.enabled = false;
            ctx.workers = cfg.workers;
            const auto ranked = retrieval::search(query, ctx, search_k > 0 ? search_k : cfg.k);
            runner->manifest().set_counter("pool_size", ranked.pool_size);
            const auto text = json(ranked).dump(2);
            if (search_out.empty()) {
                std::cout << text << '\n';
            } else {
                auto out = runner->open_output(search_out);
                out << text << '\n';
            }
        } else if (*harness) {
            runner.emplace(global, "harness", harness_paths);
            auto& cfg = runner->cfg();
            runner->set_default_manifest(harness_out);
            const auto plan = config::load_plan(runner->input("plan"));
            const auto index = retrieval::ReportIndex::build(runner->cuisets());
            std::optional<graph::ConceptGraph> g;
            std::optional<graph::SynonymIndex> syn;
            if (runner->has_graph_source()) {
                g = runner->graph();
                syn.emplace(*g, cfg.synonym_reach);
            }
            retrieval::SearchContext ctx;
            ctx.graph = g ? &*g : nullptr;
            ctx.synonyms = syn ? &*syn : nullptr;
            ctx.config = cfg.distance;
            ctx.discovery = cfg.discovery;
            if (!g) ctx.discovery.enabled = false;
            ctx.workers = cfg.workers;
            const auto result = retrieval::run_harness(plan, index, ctx);
            {
                auto out = runner->open_output(harness_out);
                retrieval::write_manifest_csv(out, result);
            }
            if (!harness_jsonl.empty()) {
                auto out = runner->open_output(harness_jsonl);
                retrieval::write_manifest_jsonl(out, result);
            }
            runner->manifest().set_counter("searches", result.searches.size());
            runner->manifest().set_counter("retrieved", result.manifest.size());
            json counts = result.per_class_counts;
            std::cout << json{{"searches", result.searches.size()}, {"retrieved", result.manifest.size()},
                              {"per_class", counts}}
                             .dump(2)
                      << '\n';
        } else if (*label) {
            runner.emplace(global, "label", label_paths);
            auto& cfg = runner->cfg();
            runner->set_default_manifest(label_out);
            if (!label_measure.empty()) cfg.label_measure = labeler::parse_set_measure(label_measure);
            const auto catalog = runner->catalog();
            const auto g = cfg.path("graph") ? graph::load_snapshot(runner->input("graph"))
                                             : graph::build_graph(catalog, cfg.synonym_relations);
            std::optional<labeler::OldLabels> old;
            if (!no_retrieval && cfg.path("old_labels")) {
                std::ifstream in(runner->input("old_labels"));
                old = labeler::read_label_csv(in);
            }
            auto names = cfg.labels;
            if (names.empty() && old) names = old->columns;
            if (names.empty()) throw ConfigError("no labels: set labeler.labels or pass --old-labels");
            const auto vocab = labeler::build_label_vocabulary(names, catalog, cfg.label_overrides);
            labeler::LabelOptions opts;
            opts.measure = cfg.label_measure;
            opts.phase1.parent_depth = cfg.parent_depth;
            opts.strict = cfg.strict;
            opts.workers = cfg.workers;
            const auto reports = runner->cuisets();
            const auto run = labeler::label_dataset(reports, old ? &*old : nullptr, vocab, g, opts);
            std::vector<labeler::LabelAssignment> rows;
            for (const auto& r : run.reports) rows.push_back(r.labels);
            {
                auto out = runner->open_output(label_out);
                labeler::write_label_csv(out, vocab.labels, rows, old ? old->id_column : "report_id");
            }
            if (!label_audit.empty()) {
                auto out = runner->open_output(label_audit);
                for (const auto& r : run.reports) {
                    json line = r.comparison ? json(*r.comparison) : json{{"report_id", r.labels.report_id}};
                    line["missing_old"] = r.missing_old;
                    out << line.dump() << '\n';
                }
            }
            auto& m = runner->manifest();
            m.set_counter("reports", run.summary.reports);
            m.set_counter("missing_old", run.summary.missing_old);
            m.set_counter("unknown_old", run.summary.unknown_old);
            json summary{{"reports", run.summary.reports},
                         {"missing_old", run.summary.missing_old},
                         {"unknown_old", run.summary.unknown_old},
                         {"changed", run.summary.changed},
                         {"selected", run.summary.selected}};
            std::cout << summary.dump(2) << '\n';
        }
        if (runner) runner->finish(kExitOk);
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "cuisim: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "cuisim: " << e.what() << '\n';
        if (runner) {
            try {
                runner->finish(kExitDomain, e.what());
            } catch (const std::exception&) {
            }
        }
        return kExitDomain;
    }
}
