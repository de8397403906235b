#include "cuisim/retrieval.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "parallel.hpp"

namespace cuisim::retrieval {

using nlohmann::json;

ReportIndex ReportIndex::build(std::vector<CuiSet> reports) {
    if (reports.empty()) throw DomainError("refusing to build an empty report index");
    ReportIndex index;
    for (auto& r : reports) {
        const std::string id = r.report_id;
        for (const auto& [cui, a] : r.elements) index.inverted_[cui].insert(id);
        if (!index.reports_.emplace(id, std::move(r)).second)
            throw DomainError("duplicate report id '" + id + "'");
    }
    if (!index.verify_transpose()) throw DomainError("report index transpose check failed");
    return index;
}

const CuiSet* ReportIndex::find(const std::string& id) const {
    auto it = reports_.find(id);
    return it == reports_.end() ? nullptr : &it->second;
}

bool ReportIndex::verify_transpose() const {
    std::size_t memberships = 0;
    for (const auto& [id, set] : reports_)
        for (const auto& [cui, a] : set.elements) {
            auto it = inverted_.find(cui);
            if (it == inverted_.end() || !it->second.contains(id)) return false;
            ++memberships;
        }
    std::size_t listed = 0;
    for (const auto& [cui, ids] : inverted_) listed += ids.size();
    return listed == memberships;
}

ReportIndex ReportIndex::subset(const std::set<std::string>& ids) const {
    ReportIndex out;
    for (const auto& id : ids) {
        auto it = reports_.find(id);
        if (it == reports_.end()) continue;
        for (const auto& [cui, a] : it->second.elements) out.inverted_[cui].insert(id);
        out.reports_.emplace(id, it->second);
        if (auto label = class_labels.find(id); label != class_labels.end()) out.class_labels.insert(*label);
    }
    return out;
}

ReportIndex build_index(std::istream& in, bool strict, std::size_t* malformed) {
    return ReportIndex::build(read_cuiset_lines(in, strict, malformed));
}

std::set<std::string> discover_candidate_reports(const graph::DiscoveryResult* result, const ReportIndex& index) {
    std::set<std::string> out;
    if (result == nullptr) {
        for (const auto& [id, set] : index.reports()) out.insert(id);
        return out;
    }
    for (const auto& cui : result->reached)
        if (auto it = index.inverted().find(cui); it != index.inverted().end())
            out.insert(it->second.begin(), it->second.end());
    return out;
}

void to_json(json& j, const RankedResult& r) {
    json entries = json::array();
    for (std::size_t i = 0; i < r.entries.size(); ++i)
        entries.push_back({{"rank", i + 1},
                           {"report_id", r.entries[i].report_id},
                           {"score", r.entries[i].score},
                           {"breakdown", r.entries[i].breakdown}});
    j = json{{"query_id", r.query_id}, {"pool_size", r.pool_size}, {"entries", std::move(entries)}};
}

RankedResult search(const CuiSet& query, const SearchContext& ctx, std::size_t k) {
    if (k == 0) throw ConfigError("search: k must be >= 1");
    if (ctx.index == nullptr) throw ConfigError("search: no index");
    if (ctx.discovery.enabled && ctx.graph == nullptr) throw ConfigError("search: discovery needs a graph");
    ctx.config.validate();

    std::set<std::string> pool;
    if (ctx.discovery.enabled) {
        std::set<Cui> seeds;
        for (const auto& [cui, a] : query.elements) seeds.insert(cui);
        const auto found = graph::bfs_discover(*ctx.graph, seeds, ctx.discovery.depth, ctx.discovery.edges);
        pool = discover_candidate_reports(&found, *ctx.index);
    } else {
        pool = discover_candidate_reports(nullptr, *ctx.index);
    }

    const std::vector<std::string> ids(pool.begin(), pool.end());
    auto entries = detail::parallel_map<RankedEntry>(ids.size(), ctx.workers, [&](std::size_t i) {
        auto b = similarity::compare(query, *ctx.index->find(ids[i]), ctx.config, ctx.synonyms);
        return RankedEntry{ids[i], b.score, std::move(b)};
    });
    std::stable_sort(entries.begin(), entries.end(), [](const RankedEntry& x, const RankedEntry& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.report_id < y.report_id;
    });
    if (entries.size() > k) entries.resize(k);

    RankedResult out;
    out.query_id = query.report_id;
    out.pool_size = ids.size();
    out.entries = std::move(entries);
    return out;
}

std::set<std::string> HarnessPlan::query_ids() const {
    std::set<std::string> out;
    for (const auto& c : classes) {
        auto it = class_queries.find(c);
        if (it == class_queries.end()) continue;
        const auto n = std::min(queries_per_class, it->second.size());
        out.insert(it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(n));
    }
    return out;
}

std::size_t HarnessPlan::budget() const {
    if (per_class_budget) return *per_class_budget;
    if (classes.empty()) return 0;
    return (kBalancedDatasetSize + classes.size() - 1) / classes.size();
}

void HarnessPlan::validate() const {
    if (classes.empty()) throw ConfigError("plan: no classes");
    if (queries_per_class == 0) throw ConfigError("plan: queries_per_class must be >= 1");
    std::set<std::string> seen;
    for (const auto& c : classes) {
        if (!seen.insert(c).second) throw ConfigError("plan: duplicate class '" + c + "'");
        if (!class_queries.contains(c) || class_queries.at(c).empty())
            throw ConfigError("plan: class '" + c + "' has no queries");
    }
    for (const auto& [c, q] : class_queries)
        if (!seen.contains(c)) throw ConfigError("plan: queries for unknown class '" + c + "'");
    const auto queries = query_ids();
    for (const auto& q : queries)
        if (!balanced_ids.contains(q)) throw DomainError("plan: query '" + q + "' is not in the balanced set");
    for (const auto& b : balanced_ids)
        if (!queries.contains(b) && !retrieval_ids.contains(b))
            throw DomainError("plan: balanced report '" + b + "' is neither a query nor in the retrieval set");
}

HarnessPlan parse_plan(const json& j) {
    static const std::set<std::string> known{"classes",       "queries_per_class", "queries", "balanced_ids",
                                             "retrieval_ids", "budget",            "k",       "without_replacement"};
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ConfigError("plan: unknown key '" + key + "'");
    HarnessPlan p;
    p.classes = j.at("classes").get<std::vector<std::string>>();
    p.queries_per_class = j.value("queries_per_class", std::size_t{10});
    p.class_queries = j.at("queries").get<std::map<std::string, std::vector<std::string>>>();
    p.balanced_ids = j.at("balanced_ids").get<std::set<std::string>>();
    p.retrieval_ids = j.at("retrieval_ids").get<std::set<std::string>>();
    if (j.contains("budget")) p.per_class_budget = j.at("budget").get<std::size_t>();
    p.per_query_k = j.value("k", std::size_t{0});
    p.without_replacement = j.value("without_replacement", true);
    return p;
}

HarnessResult run_harness(const HarnessPlan& plan, const ReportIndex& dataset, const SearchContext& ctx) {
    plan.validate();
    const ReportIndex pool = dataset.subset(plan.retrieval_ids);
    if (pool.size() == 0) throw DomainError("harness: retrieval set has no indexed reports");
    SearchContext round_ctx = ctx;
    round_ctx.index = &pool;
    round_ctx.workers = 1;
    const std::size_t budget = plan.budget();
    const std::size_t k = plan.per_query_k == 0 ? pool.size() : plan.per_query_k;

    std::map<std::string, std::vector<std::string>> queries;
    std::size_t rounds = 0;
    for (const auto& c : plan.classes) {
        const auto& list = plan.class_queries.at(c);
        auto& used = queries[c];
        used.assign(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(std::min(plan.queries_per_class, list.size())));
        for (const auto& q : used)
            if (dataset.find(q) == nullptr) throw DomainError("harness: query '" + q + "' is not in the dataset");
        rounds = std::max(rounds, used.size());
    }

    HarnessResult out;
    std::set<std::string> retrieved;
    for (const auto& c : plan.classes) out.per_class_counts[c] = 0;

    for (std::size_t r = 0; r < rounds; ++r) {
        std::vector<SearchLogEntry> issued;
        for (const auto& c : plan.classes) {
            const auto& used = queries.at(c);
            if (r >= used.size() || out.per_class_counts[c] >= budget) continue;
            issued.push_back({r + 1, c, used[r]});
        }
        auto rankings = detail::parallel_map<RankedResult>(issued.size(), ctx.workers, [&](std::size_t i) {
            return search(*dataset.find(issued[i].query_id), round_ctx, k);
        });
        for (std::size_t i = 0; i < issued.size(); ++i) {
            const auto& entry = issued[i];
            auto& count = out.per_class_counts[entry.class_name];
            const std::size_t quota = (budget + queries.at(entry.class_name).size() - 1) / queries.at(entry.class_name).size();
            std::size_t taken = 0;
            const auto& ranked = rankings[i].entries;
            for (std::size_t pos = 0; pos < ranked.size() && taken < quota && count < budget; ++pos) {
                const auto& e = ranked[pos];
                if (plan.without_replacement && retrieved.contains(e.report_id)) continue;
                retrieved.insert(e.report_id);
                out.manifest.push_back(
                    {e.report_id, entry.class_name, entry.query_id, entry.round, pos + 1, e.score, e.breakdown});
                ++taken;
                ++count;
            }
            out.searches.push_back(entry);
        }
    }
    return out;
}

std::string format_score(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void write_manifest_csv(std::ostream& out, const HarnessResult& result) {
    out << "report_id,class,query_id,round,rank,score\n";
    for (const auto& m : result.manifest)
        out << m.report_id << ',' << m.class_name << ',' << m.query_id << ',' << m.round << ',' << m.rank << ','
            << format_score(m.score) << '\n';
}

void write_manifest_jsonl(std::ostream& out, const HarnessResult& result) {
    for (const auto& m : result.manifest)
        out << json{{"report_id", m.report_id}, {"class", m.class_name}, {"query_id", m.query_id},
                    {"round", m.round},         {"rank", m.rank},        {"score", m.score},
                    {"breakdown", m.breakdown}}
                   .dump()
            << '\n';
}

}  // namespace cuisim::retrieval
