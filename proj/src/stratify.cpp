#include "amflow/stratify.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "amflow/parallel.hpp"

namespace amflow {

void InstanceMaskSet::validate() const {
    if (instances.empty()) return;
    const int w = width(), h = height();
    std::set<int> ids;
    for (const Instance& inst : instances) {
        if (!ids.insert(inst.id).second)
            throw FormatError("duplicate instance id " + std::to_string(inst.id));
        if (!inst.amodal.same_size(w, h) || !inst.visible.same_size(w, h))
            throw ShapeError("instance mask dimensions disagree");
        require_binary(inst.amodal, "amodal mask");
        require_binary(inst.visible, "visible mask");
        for (std::size_t p = 0; p < inst.amodal.size(); ++p)
            if (inst.visible[p] && !inst.amodal[p])
                throw FormatError("visible mask of instance " + std::to_string(inst.id) +
                                  " is not contained in its amodal mask");
    }
    for (std::size_t a = 0; a < instances.size(); ++a)
        for (std::size_t b = a + 1; b < instances.size(); ++b)
            for (std::size_t p = 0; p < instances[a].visible.size(); ++p)
                if (instances[a].visible[p] && instances[b].visible[p])
                    throw FormatError("visible masks of instances " +
                                      std::to_string(instances[a].id) + " and " +
                                      std::to_string(instances[b].id) + " overlap");
}

namespace {

struct Builder {
    const InstanceMaskSet& instances;
    std::vector<OcclusionEdge> edges;

    // Deterministic deletion choice within a cycle: smallest support first;
    // among ties prefer the edge that puts the deeper instance in front;
    // final tie-break by ids.
    bool delete_before(const OcclusionEdge& a, const OcclusionEdge& b) const {
        if (a.support != b.support) return a.support < b.support;
        const int ca = contradicts_depth(a) ? 0 : 1;
        const int cb = contradicts_depth(b) ? 0 : 1;
        if (ca != cb) return ca < cb;
        if (a.front != b.front) return a.front < b.front;
        return a.behind < b.behind;
    }

    bool contradicts_depth(const OcclusionEdge& e) const {
        const Instance* f = instances.find(e.front);
        const Instance* b = instances.find(e.behind);
        if (!f || !b || !f->mean_depth || !b->mean_depth) return false;
        return *f->mean_depth > *b->mean_depth;
    }
};

// Returns the node ids of one directed cycle, or empty if acyclic.
std::vector<int> find_cycle(const std::vector<int>& nodes,
                            const std::vector<OcclusionEdge>& edges) {
    std::map<int, std::vector<int>> adj;
    for (const OcclusionEdge& e : edges) adj[e.front].push_back(e.behind);
    for (auto& [id, out] : adj) std::sort(out.begin(), out.end());

    enum class Color { kWhite, kGray, kBlack };
    std::map<int, Color> color;
    for (int id : nodes) color[id] = Color::kWhite;

    std::vector<int> path;
    std::vector<int> cycle;

    auto dfs = [&](auto&& self, int node) -> bool {
        color[node] = Color::kGray;
        path.push_back(node);
        for (int next : adj[node]) {
            if (color[next] == Color::kGray) {
                auto it = std::find(path.begin(), path.end(), next);
                cycle.assign(it, path.end());
                return true;
            }
            if (color[next] == Color::kWhite && self(self, next)) return true;
        }
        path.pop_back();
        color[node] = Color::kBlack;
        return false;
    };

    for (int id : nodes) {
        if (color[id] == Color::kWhite && dfs(dfs, id)) return cycle;
    }
    return {};
}

OcclusionGraph layer_graph(const InstanceMaskSet& instances,
                           std::vector<OcclusionEdge> edges,
                           const StratifyOptions& opts) {
    OcclusionGraph graph;
    for (const Instance& inst : instances.instances) graph.nodes.push_back(inst.id);

    Builder builder{instances, std::move(edges)};

    for (;;) {
        std::vector<int> cycle = find_cycle(graph.nodes, builder.edges);
        if (cycle.empty()) break;
        if (!opts.resolve_cycles) {
            std::string msg = "occlusion cycle:";
            for (int id : cycle) msg += " " + std::to_string(id);
            throw StratifyError(msg, cycle);
        }
        // Edges along the cycle (closing edge included).
        const OcclusionEdge* victim = nullptr;
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            const int f = cycle[i];
            const int b = cycle[(i + 1) % cycle.size()];
            for (const OcclusionEdge& e : builder.edges) {
                if (e.front == f && e.behind == b) {
                    if (!victim || builder.delete_before(e, *victim)) victim = &e;
                    break;
                }
            }
        }
        const OcclusionEdge chosen = *victim;
        std::erase_if(builder.edges, [&](const OcclusionEdge& e) {
            return e.front == chosen.front && e.behind == chosen.behind;
        });
    }

    // Longest-path layering over the (now acyclic) relation.
    std::map<int, int> in_degree;
    std::map<int, std::vector<int>> out;
    for (int id : graph.nodes) in_degree[id] = 0;
    for (const OcclusionEdge& e : builder.edges) {
        in_degree[e.behind]++;
        out[e.front].push_back(e.behind);
    }
    std::map<int, int>& levels = graph.levels;
    std::vector<int> queue;
    for (int id : graph.nodes)
        if (in_degree[id] == 0) {
            levels[id] = 1;
            queue.push_back(id);
        }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int f = queue[head];
        for (int b : out[f]) {
            levels[b] = std::max(levels.count(b) ? levels[b] : 1, levels[f] + 1);
            if (--in_degree[b] == 0) queue.push_back(b);
        }
    }

    std::sort(builder.edges.begin(), builder.edges.end(), [](const auto& a, const auto& b) {
        return a.front != b.front ? a.front < b.front : a.behind < b.behind;
    });
    graph.edges = std::move(builder.edges);
    return graph;
}

} // namespace

OcclusionGraph stratify(const InstanceMaskSet& instances,
                        const std::vector<Raster<float>>& amodal_depths,
                        const StratifyOptions& opts) {
    instances.validate();
    if (amodal_depths.size() != instances.instances.size())
        throw ShapeError("stratify: one amodal depth raster per instance required");
    for (const auto& d : amodal_depths)
        if (!d.same_size(instances.width(), instances.height()))
            throw ShapeError("stratify: depth raster dimensions disagree");

    std::vector<OcclusionEdge> edges;
    const std::size_t k = instances.instances.size();
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            const Mask& ma = instances.instances[a].amodal;
            const Mask& mb = instances.instances[b].amodal;
            const Raster<float>& da = amodal_depths[a];
            const Raster<float>& db = amodal_depths[b];
            std::int64_t a_front = 0, b_front = 0;
            const std::int64_t n = static_cast<std::int64_t>(ma.size());
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) \
    reduction(+ : a_front, b_front)
            for (std::int64_t p = 0; p < n; ++p) {
                if (!ma[p] || !mb[p]) continue;
                if (da[p] < db[p])
                    ++a_front;
                else if (db[p] < da[p])
                    ++b_front;
                // Exact ties create no occlusion evidence.
            }
            if (a_front > 0)
                edges.push_back({instances.instances[a].id, instances.instances[b].id,
                                 static_cast<std::uint64_t>(a_front)});
            if (b_front > 0)
                edges.push_back({instances.instances[b].id, instances.instances[a].id,
                                 static_cast<std::uint64_t>(b_front)});
        }
    }
    return layer_graph(instances, std::move(edges), opts);
}

OcclusionGraph stratify(const InstanceMaskSet& instances,
                        const std::vector<std::pair<int, int>>& in_front,
                        const StratifyOptions& opts) {
    instances.validate();

    std::set<std::pair<int, int>> seen;
    std::vector<OcclusionEdge> edges;
    for (const auto& [f, b] : in_front) {
        if (f == b) throw FormatError("stratify: self-occlusion pair " + std::to_string(f));
        const Instance* fi = instances.find(f);
        const Instance* bi = instances.find(b);
        if (!fi || !bi) throw FormatError("stratify: pair references unknown instance id");
        if (!seen.insert({f, b}).second) continue;
        std::uint64_t overlap = 0;
        for (std::size_t p = 0; p < fi->amodal.size(); ++p)
            overlap += static_cast<std::uint64_t>(fi->amodal[p] & bi->amodal[p]);
        if (overlap == 0) continue; // no pixel evidence
        edges.push_back({f, b, overlap});
    }
    return layer_graph(instances, std::move(edges), opts);
}

} // namespace amflow
