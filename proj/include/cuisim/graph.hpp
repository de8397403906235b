#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cuisim/cuiset.hpp"
#include "cuisim/umls.hpp"

namespace cuisim::graph {

enum class EdgeKind { Hierarchy, Synonym };

struct Neighbor {
    Cui cui;
    EdgeKind kind = EdgeKind::Hierarchy;

    bool operator==(const Neighbor&) const = default;
};

/// Undirected concept graph. Neighbor lists are sorted by CUI. `parents`
/// keeps the PAR/CHD orientation the undirected adjacency drops.
class ConceptGraph {
public:
    void add_node(const Cui& cui);
    /// Adds or upgrades an undirected edge. Synonym wins over Hierarchy.
    void add_edge(const Cui& a, const Cui& b, EdgeKind kind);
    void add_parent(const Cui& child, const Cui& parent);
    /// Sorts neighbor and parent lists; call once after the last insertion.
    void finalize();

    bool contains(const Cui& cui) const { return adjacency_.contains(cui); }
    const std::vector<Neighbor>& neighbors(const Cui& cui) const;
    const std::vector<Cui>& parents(const Cui& cui) const;
    std::size_t node_count() const { return adjacency_.size(); }
    std::size_t edge_count() const;
    std::vector<Cui> nodes() const;  // sorted

    const std::unordered_map<Cui, std::vector<Neighbor>>& adjacency() const { return adjacency_; }
    const std::unordered_map<Cui, std::vector<Cui>>& parent_map() const { return parents_; }

    bool operator==(const ConceptGraph&) const = default;

private:
    std::unordered_map<Cui, std::vector<Neighbor>> adjacency_;
    std::unordered_map<Cui, std::vector<Cui>> parents_;
};

inline const std::set<std::string> kDefaultSynonymRelations{"SY"};

ConceptGraph build_graph(const umls::ConceptCatalog& catalog,
                         const std::set<std::string>& synonym_rels = kDefaultSynonymRelations);

enum class TraversalEdges { Both, HierarchyOnly, SynonymOnly };

struct DiscoveryResult {
    std::set<Cui> reached;
    std::size_t depth_used = 0;
    /// Newly reached node counts per level, level 0 being the seeds.
    std::vector<std::size_t> frontier_sizes;
};

DiscoveryResult bfs_discover(const ConceptGraph& graph, const std::set<Cui>& seeds,
                             std::size_t depth, TraversalEdges edges = TraversalEdges::Both);

enum class SynonymReach { MultiHop, SingleHop };

/// Answers "can `from` reach `to` over Synonym edges only". Multi-hop
/// closures are precomputed as connected components of the synonym
/// subgraph, so lookups are read-only and safe to share between threads.
class SynonymIndex {
public:
    SynonymIndex() = default;
    explicit SynonymIndex(const ConceptGraph& graph, SynonymReach reach = SynonymReach::MultiHop);

    bool reaches(const Cui& from, const Cui& to) const;

private:
    const ConceptGraph* graph_ = nullptr;
    SynonymReach reach_ = SynonymReach::MultiHop;
    std::unordered_map<Cui, std::size_t> component_;
};

/// Copy of `target` extended with every candidate CUI that some target CUI
/// reaches over synonym edges. Added elements inherit the reaching target
/// element's assertion (highest ranked if several reach it) and take the
/// candidate's concept metadata.
CuiSet synonym_expand(const CuiSet& target, const CuiSet& candidate, const SynonymIndex& synonyms);

struct GraphStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t synonym_edges = 0;
    std::size_t components = 0;
};

GraphStats compute_stats(const ConceptGraph& graph);

// Snapshot: first line `#cuisim-graph v1`, then
//   N|cui
//   E|cui|cui|H or S      (each undirected edge once, lower CUI first)
//   P|child|parent
void write_snapshot(std::ostream& out, const ConceptGraph& graph);
ConceptGraph read_snapshot(std::istream& in);
void save_snapshot(const std::filesystem::path& path, const ConceptGraph& graph);
ConceptGraph load_snapshot(const std::filesystem::path& path);

}  // namespace cuisim::graph
