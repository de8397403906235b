#include "cuisim/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>

namespace cuisim::graph {

namespace {
const std::vector<Neighbor> kNoNeighbors;
const std::vector<Cui> kNoParents;

bool traverses(TraversalEdges edges, EdgeKind kind) {
    switch (edges) {
        case TraversalEdges::Both: return true;
        case TraversalEdges::HierarchyOnly: return kind == EdgeKind::Hierarchy;
        case TraversalEdges::SynonymOnly: return kind == EdgeKind::Synonym;
    }
    return true;
}
}  // namespace

void ConceptGraph::add_node(const Cui& cui) { adjacency_.try_emplace(cui); }

void ConceptGraph::add_edge(const Cui& a, const Cui& b, EdgeKind kind) {
    if (a == b) return;
    auto upsert = [kind](std::vector<Neighbor>& list, const Cui& other) {
        auto it = std::find_if(list.begin(), list.end(), [&](const Neighbor& n) { return n.cui == other; });
        if (it == list.end())
            list.push_back({other, kind});
        else if (kind == EdgeKind::Synonym)
            it->kind = EdgeKind::Synonym;
    };
    upsert(adjacency_[a], b);
    upsert(adjacency_[b], a);
}

void ConceptGraph::add_parent(const Cui& child, const Cui& parent) {
    if (child == parent) return;
    auto& list = parents_[child];
    if (std::find(list.begin(), list.end(), parent) == list.end()) list.push_back(parent);
}

void ConceptGraph::finalize() {
    for (auto& [cui, list] : adjacency_)
        std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) { return x.cui < y.cui; });
    for (auto& [cui, list] : parents_) std::sort(list.begin(), list.end());
}

const std::vector<Neighbor>& ConceptGraph::neighbors(const Cui& cui) const {
    auto it = adjacency_.find(cui);
    return it == adjacency_.end() ? kNoNeighbors : it->second;
}

const std::vector<Cui>& ConceptGraph::parents(const Cui& cui) const {
    auto it = parents_.find(cui);
    return it == parents_.end() ? kNoParents : it->second;
}

std::size_t ConceptGraph::edge_count() const {
    std::size_t degree_sum = 0;
    for (const auto& [cui, list] : adjacency_) degree_sum += list.size();
    return degree_sum / 2;
}

std::vector<Cui> ConceptGraph::nodes() const {
    std::vector<Cui> out;
    out.reserve(adjacency_.size());
    for (const auto& [cui, list] : adjacency_) out.push_back(cui);
    std::sort(out.begin(), out.end());
    return out;
}

ConceptGraph build_graph(const umls::ConceptCatalog& catalog, const std::set<std::string>& synonym_rels) {
    ConceptGraph g;
    for (const auto& [cui, rec] : catalog.records) g.add_node(cui);

    std::map<std::pair<Cui, Cui>, EdgeKind> edges;
    for (const auto& r : catalog.relations) {
        if (r.cui1 == r.cui2) continue;
        const auto kind = synonym_rels.contains(r.rel) ? EdgeKind::Synonym : EdgeKind::Hierarchy;
        auto key = std::minmax(r.cui1, r.cui2);
        auto [it, inserted] = edges.try_emplace({key.first, key.second}, kind);
        if (!inserted && kind == EdgeKind::Synonym) it->second = EdgeKind::Synonym;

        if (r.rel == "PAR")
            g.add_parent(r.cui1, r.cui2);
        else if (r.rel == "CHD")
            g.add_parent(r.cui2, r.cui1);
    }
    for (const auto& [key, kind] : edges) g.add_edge(key.first, key.second, kind);
    g.finalize();
    return g;
}

DiscoveryResult bfs_discover(const ConceptGraph& graph, const std::set<Cui>& seeds, std::size_t depth,
                             TraversalEdges edges) {
    DiscoveryResult out;
    out.reached = seeds;
    out.frontier_sizes.push_back(seeds.size());
    std::vector<Cui> frontier(seeds.begin(), seeds.end());
    for (std::size_t level = 1; level <= depth && !frontier.empty(); ++level) {
        std::vector<Cui> next;
        for (const auto& cui : frontier)
            for (const auto& n : graph.neighbors(cui))
                if (traverses(edges, n.kind) && out.reached.insert(n.cui).second) next.push_back(n.cui);
        if (next.empty()) break;
        out.depth_used = level;
        out.frontier_sizes.push_back(next.size());
        frontier = std::move(next);
    }
    return out;
}

SynonymIndex::SynonymIndex(const ConceptGraph& graph, SynonymReach reach) : graph_(&graph), reach_(reach) {
    if (reach_ != SynonymReach::MultiHop) return;
    std::size_t next_id = 0;
    for (const auto& cui : graph.nodes()) {
        if (component_.contains(cui)) continue;
        bool has_synonym = false;
        for (const auto& n : graph.neighbors(cui)) has_synonym |= n.kind == EdgeKind::Synonym;
        if (!has_synonym) continue;
        const std::size_t id = next_id++;
        std::deque<Cui> queue{cui};
        component_.emplace(cui, id);
        while (!queue.empty()) {
            const Cui cur = std::move(queue.front());
            queue.pop_front();
            for (const auto& n : graph.neighbors(cur))
                if (n.kind == EdgeKind::Synonym && component_.emplace(n.cui, id).second) queue.push_back(n.cui);
        }
    }
}

bool SynonymIndex::reaches(const Cui& from, const Cui& to) const {
    if (graph_ == nullptr || from == to) return false;
    if (reach_ == SynonymReach::SingleHop) {
        const auto& list = graph_->neighbors(from);
        auto it = std::lower_bound(list.begin(), list.end(), to,
                                   [](const Neighbor& n, const Cui& c) { return n.cui < c; });
        return it != list.end() && it->cui == to && it->kind == EdgeKind::Synonym;
    }
    auto a = component_.find(from);
    if (a == component_.end()) return false;
    auto b = component_.find(to);
    return b != component_.end() && a->second == b->second;
}

CuiSet synonym_expand(const CuiSet& target, const CuiSet& candidate, const SynonymIndex& synonyms) {
    CuiSet out = target;
    for (const auto& [cui, cand_assertion] : candidate.elements) {
        if (target.contains(cui)) continue;
        std::optional<Assertion> inherited;
        for (const auto& [t, a] : target.elements)
            if ((!inherited || assertion_rank(a) > assertion_rank(*inherited)) && synonyms.reaches(t, cui))
                inherited = a;
        if (!inherited) continue;
        out.insert(cui, *inherited);
        if (auto it = candidate.concept_meta.find(cui); it != candidate.concept_meta.end())
            out.concept_meta[cui] = it->second;
    }
    return out;
}

GraphStats compute_stats(const ConceptGraph& graph) {
    GraphStats s;
    s.nodes = graph.node_count();
    s.edges = graph.edge_count();
    std::unordered_map<Cui, bool> seen;
    for (const auto& [cui, list] : graph.adjacency())
        for (const auto& n : list)
            if (n.kind == EdgeKind::Synonym && cui < n.cui) ++s.synonym_edges;
    for (const auto& cui : graph.nodes()) {
        if (seen.contains(cui)) continue;
        ++s.components;
        std::deque<Cui> queue{cui};
        seen[cui] = true;
        while (!queue.empty()) {
            const Cui cur = std::move(queue.front());
            queue.pop_front();
            for (const auto& n : graph.neighbors(cur))
                if (seen.emplace(n.cui, true).second) queue.push_back(n.cui);
        }
    }
    return s;
}

void write_snapshot(std::ostream& out, const ConceptGraph& graph) {
    out << "#cuisim-graph v1\n";
    const auto nodes = graph.nodes();
    for (const auto& cui : nodes) out << "N|" << cui << '\n';
    for (const auto& cui : nodes)
        for (const auto& n : graph.neighbors(cui))
            if (cui < n.cui) out << "E|" << cui << '|' << n.cui << '|' << (n.kind == EdgeKind::Synonym ? 'S' : 'H') << '\n';
    std::vector<Cui> children;
    for (const auto& [child, parents] : graph.parent_map()) children.push_back(child);
    std::sort(children.begin(), children.end());
    for (const auto& child : children)
        for (const auto& p : graph.parents(child)) out << "P|" << child << '|' << p << '\n';
}

ConceptGraph read_snapshot(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "#cuisim-graph v1")
        throw DomainError("not a graph snapshot (bad header)");
    ConceptGraph g;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = umls::split_rrf(line);
        if (f[0] == "N" && f.size() == 2) {
            g.add_node(std::string(f[1]));
        } else if (f[0] == "E" && f.size() == 4 && (f[3] == "S" || f[3] == "H")) {
            g.add_edge(std::string(f[1]), std::string(f[2]), f[3] == "S" ? EdgeKind::Synonym : EdgeKind::Hierarchy);
        } else if (f[0] == "P" && f.size() == 3) {
            g.add_parent(std::string(f[1]), std::string(f[2]));
        } else {
            throw DomainError("graph snapshot: bad line " + std::to_string(lineno));
        }
    }
    g.finalize();
    return g;
}

void save_snapshot(const std::filesystem::path& path, const ConceptGraph& graph) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write " + path.string());
    write_snapshot(out, graph);
}

ConceptGraph load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read " + path.string());
    return read_snapshot(in);
}

}  // namespace cuisim::graph
