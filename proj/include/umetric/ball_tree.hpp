#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "umetric/errors.hpp"
#include "umetric/space.hpp"
#include "umetric/tolerance.hpp"

namespace umetric {

// A closed ball of the space: its members, its radius (the diameter of the
// member set) and a fixed representative point. Children partition the
// members; the first child always contains the representative.
struct BallNode {
    int id = 0;
    int parent = -1;  // -1 for the root
    int depth = 0;
    double radius = 0.0;
    std::size_t representative = 0;
    std::vector<std::size_t> members;  // ascending point indices
    std::vector<int> children;
};

// The nested ball partitions of an ultrametric space as a rooted tree.
// Nodes are stored in preorder, so ids increase along every root-to-leaf
// path. Exactly one leaf per point; level_sizes[k] is the number of balls
// in the k-th partition (balls that stopped splitting persist).
struct BallTree {
    std::vector<BallNode> nodes;
    std::vector<std::string> labels;  // copied from the space
    int root = 0;
    int depth = 0;
    std::vector<std::size_t> level_sizes;
    std::vector<int> leaf_of;  // point index -> leaf node id

    const BallNode& node(int id) const { return nodes[static_cast<std::size_t>(id)]; }
    std::size_t point_count() const { return leaf_of.size(); }
};

namespace detail {

class UnionFind {
  public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

  private:
    std::vector<std::size_t> parent_;
};

struct TreeBuilder {
    const FiniteMetricSpace& space;
    Tolerance tol;
    BallTree tree;

    int build(std::vector<std::size_t> members, int parent, int depth) {
        const std::size_t id = tree.nodes.size();
        tree.nodes.push_back(
            BallNode{static_cast<int>(id), parent, depth, 0.0, members.front(), members, {}});

        if (members.size() == 1) {
            tree.leaf_of[members[0]] = static_cast<int>(id);
            return static_cast<int>(id);
        }

        double radius = 0.0;
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                radius = std::max(radius, space(members[a], members[b]));
        tree.nodes[id].radius = radius;

        // Equivalence classes of d(x,y) < radius; a pair within slack of the
        // radius counts as realizing it and stays split.
        const double threshold = radius - tol.slack(radius);
        UnionFind uf(members.size());
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                if (space(members[a], members[b]) < threshold) uf.unite(a, b);

        // The relation is an equivalence only for ultrametric inputs: any
        // class holding a pair at (or within slack of) the radius betrays a
        // transitivity break.
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                if (uf.find(a) == uf.find(b) && !(space(members[a], members[b]) < threshold))
                    throw NotUltrametricError(
                        "not ultrametric: points '" + space.label(members[a]) + "' and '" +
                        space.label(members[b]) + "' joined only through intermediaries");

        // Members are ascending, so classes come out ordered by smallest
        // member; the class of the representative is first.
        std::vector<std::vector<std::size_t>> classes;
        std::vector<int> class_of(members.size(), -1);
        for (std::size_t a = 0; a < members.size(); ++a) {
            const std::size_t r = uf.find(a);
            if (class_of[r] < 0) {
                class_of[r] = static_cast<int>(classes.size());
                classes.emplace_back();
            }
            classes[static_cast<std::size_t>(class_of[r])].push_back(members[a]);
        }

        for (auto& cls : classes) {
            // build() may reallocate the node array; take the child id first.
            const int child = build(std::move(cls), static_cast<int>(id), depth + 1);
            tree.nodes[id].children.push_back(child);
        }
        return static_cast<int>(id);
    }
};

}  // namespace detail

// Builds the nested ball partition of an ultrametric space. Child order is
// canonical: ascending by smallest member index, which puts the class of
// the parent's representative first. Throws NotUltrametricError when the
// splitting relation fails to be an equivalence.
inline BallTree build_tree(const FiniteMetricSpace& space, Tolerance tol = {}) {
    detail::TreeBuilder builder{space, tol, {}};
    builder.tree.labels = space.labels();
    builder.tree.leaf_of.assign(space.size(), -1);

    std::vector<std::size_t> all(space.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    builder.tree.root = builder.build(std::move(all), -1, 0);

    BallTree& tree = builder.tree;
    tree.depth = 0;
    for (const auto& node : tree.nodes) tree.depth = std::max(tree.depth, node.depth);

    std::vector<std::size_t> at_depth(static_cast<std::size_t>(tree.depth) + 1, 0);
    std::vector<std::size_t> leaves_before(static_cast<std::size_t>(tree.depth) + 2, 0);
    for (const auto& node : tree.nodes) {
        at_depth[static_cast<std::size_t>(node.depth)]++;
        if (node.children.empty())
            leaves_before[static_cast<std::size_t>(node.depth) + 1]++;
    }
    std::partial_sum(leaves_before.begin(), leaves_before.end(), leaves_before.begin());
    tree.level_sizes.resize(static_cast<std::size_t>(tree.depth) + 1);
    for (std::size_t k = 0; k <= static_cast<std::size_t>(tree.depth); ++k)
        tree.level_sizes[k] = at_depth[k] + leaves_before[k];
    return tree;
}

// The node whose member set equals `ball` (ascending indices), if any.
inline std::optional<int> find_ball_node(const BallTree& tree,
                                         const std::vector<std::size_t>& ball) {
    for (const auto& node : tree.nodes)
        if (node.members == ball) return node.id;
    return std::nullopt;
}

// Node ids from the root down to the point's leaf.
inline std::vector<int> path_to_leaf(const BallTree& tree, std::size_t point) {
    std::vector<int> path;
    for (int id = tree.leaf_of[point]; id >= 0; id = tree.node(id).parent)
        path.push_back(id);
    std::reverse(path.begin(), path.end());
    return path;
}

// Radius of the lowest common ancestor ball of two points; this equals
// their distance for distinct points, and 0 for a point with itself.
inline double lca_radius(const BallTree& tree, std::size_t x, std::size_t y) {
    if (x == y) return 0.0;
    int a = tree.leaf_of[x], b = tree.leaf_of[y];
    while (tree.node(a).depth > tree.node(b).depth) a = tree.node(a).parent;
    while (tree.node(b).depth > tree.node(a).depth) b = tree.node(b).parent;
    while (a != b) {
        a = tree.node(a).parent;
        b = tree.node(b).parent;
    }
    return tree.node(a).radius;
}

// Structural fingerprint used to tie an embedding back to its tree.
inline std::string tree_fingerprint(const BallTree& tree) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xFF;
            h *= 0x100000001B3ULL;
        }
    };
    mix(tree.nodes.size());
    for (const auto& node : tree.nodes) {
        mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(node.parent)));
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(node.radius));
        std::memcpy(&bits, &node.radius, sizeof(bits));
        mix(bits);
        mix(node.members.size());
        for (std::size_t m : node.members) mix(m);
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[i] = hex[(h >> (60 - 4 * i)) & 0xF];
    buf[16] = '\0';
    return std::string(buf);
}

}  // namespace umetric
