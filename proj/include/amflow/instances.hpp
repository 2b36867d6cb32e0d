#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amflow/raster.hpp"

namespace amflow {

// One scene element: full (amodal) extent plus the subset actually imaged.
struct Instance {
    int id = 0;
    std::string class_label = "object";
    Mask amodal;
    Mask visible;
    std::optional<double> mean_depth; // meters, over the amodal extent
};

struct InstanceMaskSet {
    std::vector<Instance> instances;

    int width() const { return instances.empty() ? 0 : instances.front().amodal.width(); }
    int height() const { return instances.empty() ? 0 : instances.front().amodal.height(); }

    const Instance* find(int id) const {
        for (const Instance& inst : instances)
            if (inst.id == id) return &inst;
        return nullptr;
    }

    // visible subset of amodal, per instance; visible masks pairwise disjoint.
    void validate() const;
};

// Directed pair: `front` occludes `behind` somewhere in the frame.
struct OcclusionEdge {
    int front = 0;
    int behind = 0;
    // Pixels supporting the edge (overlap region with front strictly in front).
    std::uint64_t support = 0;

    bool operator==(const OcclusionEdge&) const = default;
};

// Result of scene stratification: acyclic occlusion relation plus the
// longest-path level of every instance (1 = unoccluded).
struct OcclusionGraph {
    std::vector<int> nodes;
    std::vector<OcclusionEdge> edges;
    std::map<int, int> levels;

    int max_level() const {
        int m = 0;
        for (const auto& [id, lvl] : levels) m = lvl > m ? lvl : m;
        return m;
    }
};

} // namespace amflow
