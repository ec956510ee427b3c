#pragma once

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "frond/errors.hpp"

namespace frond {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Undirected weighted graph without self-loops.  Each edge is stored once
// under the canonical key (min, max); the adjacency view is symmetric by
// construction.
class Graph {
public:
    using EdgeKey = std::pair<int, int>;

    explicit Graph(int n_nodes) : n_(n_nodes) {
        if (n_nodes < 1) {
            throw config_error("graph", "node count must be >= 1");
        }
    }

    int n_nodes() const { return n_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }

    const std::map<EdgeKey, double>& edges() const { return edges_; }

    void add_edge(int i, int j, double w) {
        const EdgeKey key = canonical(i, j);
        if (w == 0.0 || !std::isfinite(w)) {
            throw config_error("graph", "edge weight must be finite and nonzero");
        }
        auto [it, inserted] = edges_.emplace(key, w);
        (void)it;
        if (!inserted) {
            throw config_error("graph", "duplicate edge (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ")");
        }
    }

    // Replaces the weight of (i, j); zero removes the edge, a new weight on a
    // missing edge inserts it.  Symmetry is inherent to the storage.
    void set_weight(int i, int j, double w) {
        const EdgeKey key = canonical(i, j);
        if (!std::isfinite(w)) {
            throw config_error("graph", "edge weight must be finite");
        }
        if (w == 0.0) {
            edges_.erase(key);
        } else {
            edges_[key] = w;
        }
    }

    bool has_edge(int i, int j) const { return weight(i, j) != 0.0; }

    // Weight of the pair; 0 for absent edges and for the (structurally
    // loop-free) diagonal.
    double weight(int i, int j) const {
        if (i == j) {
            return 0.0;
        }
        auto it = edges_.find(canonical(i, j));
        return it == edges_.end() ? 0.0 : it->second;
    }

    SparseMatrix adjacency() const {
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(edges_.size() * 2);
        for (const auto& [key, w] : edges_) {
            triplets.emplace_back(key.first, key.second, w);
            triplets.emplace_back(key.second, key.first, w);
        }
        SparseMatrix adj(n_, n_);
        adj.setFromTriplets(triplets.begin(), triplets.end());
        return adj;
    }

    // Neighbor ids per node, ascending.
    std::vector<std::vector<int>> neighbor_lists() const {
        std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n_));
        for (const auto& [key, w] : edges_) {
            (void)w;
            nbrs[static_cast<std::size_t>(key.first)].push_back(key.second);
            nbrs[static_cast<std::size_t>(key.second)].push_back(key.first);
        }
        for (auto& list : nbrs) {
            std::sort(list.begin(), list.end());
        }
        return nbrs;
    }

    std::vector<double> weighted_degrees() const {
        std::vector<double> deg(static_cast<std::size_t>(n_), 0.0);
        for (const auto& [key, w] : edges_) {
            deg[static_cast<std::size_t>(key.first)] += w;
            deg[static_cast<std::size_t>(key.second)] += w;
        }
        return deg;
    }

private:
    EdgeKey canonical(int i, int j) const {
        if (i == j) {
            throw config_error("graph", "self-loop at node " + std::to_string(i));
        }
        if (i < 0 || j < 0 || i >= n_ || j >= n_) {
            throw config_error("graph", "edge (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ") out of range for " +
                                            std::to_string(n_) + " nodes");
        }
        return i < j ? EdgeKey{i, j} : EdgeKey{j, i};
    }

    int n_;
    std::map<EdgeKey, double> edges_;
};

}  // namespace frond
