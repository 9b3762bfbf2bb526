#pragma once

#include "ssa/dissimilarity.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

// =============================================================================
// Ward agglomerative clustering (Ward.D2 convention).
//
// Dissimilarities are squared before agglomeration and cluster-to-cluster
// values are updated with the Lance-Williams recurrence
//
//   d2(k, i+j) = [(n_i + n_k) d2(k,i) + (n_j + n_k) d2(k,j) - n_k d2(i,j)]
//                / (n_i + n_j + n_k)
//
// Merge heights are reported on the original scale (square root). Ward.D,
// which feeds unsquared values to the same recurrence, gives a different
// tree and is not provided.
//
// Every step merges the pair with the smallest current dissimilarity. Ties
// go to the lexicographically smallest (i, j), i < j, where a cluster is
// identified by its smallest original member index.
// =============================================================================

namespace ssa {

struct Merge {
    /// Node ids: leaves are 0..n-1, the cluster formed at step s is n + s.
    /// `left` holds the smaller member index.
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;

    friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
    std::size_t n = 0;
    std::vector<Merge> merges;             // n - 1 records in merge order
    std::vector<std::size_t> leaf_order;   // 0-based leaves, left-first traversal
    /// Steps whose height is below the previous step's. Ward on valid input
    /// produces none; they are reported, never repaired.
    std::vector<std::size_t> inversions;
};

struct ClusterAssignment {
    std::size_t k = 0;
    std::vector<int> labels;          // per subject, in [1, k]
    std::vector<std::size_t> sizes;   // sizes[c - 1] for cluster c

    /// Validates labels 1..k, every cluster non-empty.
    static ClusterAssignment from_labels(std::vector<int> labels);
};

Dendrogram ward_cluster(const DissimilarityMatrix& d);

/// Undoes the last k - 1 merges. Clusters are numbered by decreasing size,
/// ties broken by the smallest member index.
ClusterAssignment cut_tree(const Dendrogram& tree, std::size_t k);

/// Mean silhouette width. Members of singleton clusters score 0.
double silhouette(const DissimilarityMatrix& d, const ClusterAssignment& assignment, int threads = 1);

struct SilhouetteDiagnostic {
    std::size_t k;
    double width;
};
/// Silhouette for each k in [k_min, k_max] (clamped to n - 1).
std::vector<SilhouetteDiagnostic> silhouette_by_k(const DissimilarityMatrix& d, const Dendrogram& tree,
                                                  std::size_t k_min = 2, std::size_t k_max = 8, int threads = 1);

void write_assignment_csv(std::ostream& out, std::span<const std::string> ids, const ClusterAssignment& assignment);
/// Reads `id,cluster` and orders the labels by `ids`.
ClusterAssignment read_assignment_csv(std::istream& in, std::span<const std::string> ids);

/// {"n":..,"method":"ward.D2","merges":[{"left":..,"right":..,"height":..,"size":..}],
///  "leaf_order":[..]}; node ids and leaf order are 1-based for leaves.
std::string dendrogram_to_json(const Dendrogram& tree);

}  // namespace ssa
