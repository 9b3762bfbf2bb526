#include "ssa/clustering.hpp"

#include "ssa/csv.hpp"
#include "ssa/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace ssa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
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

std::vector<std::size_t> leaf_order_of(std::size_t n, const std::vector<Merge>& merges) {
    std::vector<std::size_t> order;
    order.reserve(n);
    if (n == 1) return {0};
    std::vector<std::size_t> stack{n + merges.size() - 1};
    while (!stack.empty()) {
        const std::size_t node = stack.back();
        stack.pop_back();
        if (node < n) {
            order.push_back(node);
        } else {
            const auto& m = merges[node - n];
            stack.push_back(m.right);
            stack.push_back(m.left);
        }
    }
    return order;
}

}  // namespace

ClusterAssignment ClusterAssignment::from_labels(std::vector<int> labels) {
    if (labels.empty()) throw ValidationError("cluster assignment: no labels");
    const int k = *std::max_element(labels.begin(), labels.end());
    ClusterAssignment out;
    out.k = static_cast<std::size_t>(std::max(k, 0));
    out.sizes.assign(out.k, 0);
    for (int l : labels) {
        if (l < 1) throw ValidationError("cluster assignment: labels must be >= 1");
        ++out.sizes[static_cast<std::size_t>(l - 1)];
    }
    for (std::size_t c = 0; c < out.k; ++c) {
        if (out.sizes[c] == 0) throw ValidationError("cluster assignment: cluster " + std::to_string(c + 1) + " is empty");
    }
    out.labels = std::move(labels);
    return out;
}

Dendrogram ward_cluster(const DissimilarityMatrix& d) {
    const std::size_t n = d.size();
    if (n < 2) throw ValidationError("ward: need at least 2 observations");

    // Working copy of squared dissimilarities, packed lower triangle.
    std::vector<double> d2(d.packed().begin(), d.packed().end());
    for (double& v : d2) {
        if (!std::isfinite(v)) throw ComputationError("ward: non-finite dissimilarity");
        v *= v;
    }
    const auto at = [&](std::size_t i, std::size_t j) -> double& {
        return i > j ? d2[DissimilarityMatrix::offset(i, j)] : d2[DissimilarityMatrix::offset(j, i)];
    };

    std::vector<bool> active(n, true);
    std::vector<double> size(n, 1.0);
    std::vector<std::size_t> node(n);
    std::iota(node.begin(), node.end(), 0);

    // Nearest active neighbour above each slot; ties go to the smaller index.
    std::vector<std::size_t> nn(n, n);
    std::vector<double> mind(n, kInf);
    const auto rescan = [&](std::size_t i) {
        nn[i] = n;
        mind[i] = kInf;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!active[j]) continue;
            const double v = at(i, j);
            if (v < mind[i]) {
                mind[i] = v;
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i + 1 < n; ++i) rescan(i);

    Dendrogram tree;
    tree.n = n;
    tree.merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t i = n;
        double best = kInf;
        for (std::size_t s = 0; s < n; ++s) {
            if (active[s] && nn[s] < n && mind[s] < best) {
                best = mind[s];
                i = s;
            }
        }
        const std::size_t j = nn[i];
        const double dij = best;

        tree.merges.push_back({node[i], node[j], std::sqrt(dij), static_cast<std::size_t>(size[i] + size[j])});
        if (step > 0 && tree.merges[step].height < tree.merges[step - 1].height) tree.inversions.push_back(step);

        const double ni = size[i];
        const double nj = size[j];
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == i || k == j) continue;
            const double nk = size[k];
            at(k, i) = ((ni + nk) * at(k, i) + (nj + nk) * at(k, j) - nk * dij) / (ni + nj + nk);
        }
        active[j] = false;
        size[i] = ni + nj;
        node[i] = n + step;
        nn[j] = n;
        mind[j] = kInf;

        rescan(i);
        for (std::size_t k = 0; k < i; ++k) {
            if (!active[k]) continue;
            if (nn[k] == i || nn[k] == j) {
                rescan(k);
            } else {
                const double v = at(k, i);
                if (v < mind[k] || (v == mind[k] && i < nn[k])) {
                    mind[k] = v;
                    nn[k] = i;
                }
            }
        }
        for (std::size_t k = i + 1; k < j; ++k) {
            if (active[k] && nn[k] == j) rescan(k);
        }
    }
    tree.leaf_order = leaf_order_of(n, tree.merges);
    return tree;
}

ClusterAssignment cut_tree(const Dendrogram& tree, std::size_t k) {
    const std::size_t n = tree.n;
    if (k < 1 || k > n) {
        throw ValidationError("cut: k must be in [1, " + std::to_string(n) + "], got " + std::to_string(k));
    }
    // Representative leaf of every node.
    std::vector<std::size_t> rep(n + tree.merges.size());
    std::iota(rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(n), 0);
    DisjointSets sets(n);
    for (std::size_t s = 0; s < tree.merges.size(); ++s) {
        const auto& m = tree.merges[s];
        rep[n + s] = rep[m.left];
        if (s + k < n) sets.unite(rep[m.left], rep[m.right]);
    }

    // Components keyed by root; the root is the smallest member index.
    std::unordered_map<std::size_t, std::size_t> count;
    for (std::size_t i = 0; i < n; ++i) ++count[sets.find(i)];
    std::vector<std::size_t> roots;
    for (const auto& [root, c] : count) roots.push_back(root);
    std::sort(roots.begin(), roots.end(), [&](std::size_t a, std::size_t b) {
        if (count[a] != count[b]) return count[a] > count[b];
        return a < b;
    });
    std::unordered_map<std::size_t, int> label_of;
    for (std::size_t c = 0; c < roots.size(); ++c) label_of[roots[c]] = static_cast<int>(c + 1);

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = label_of[sets.find(i)];
    return ClusterAssignment::from_labels(std::move(labels));
}

double silhouette(const DissimilarityMatrix& d, const ClusterAssignment& assignment, int threads) {
    const std::size_t n = d.size();
    const std::size_t k = assignment.k;
    if (assignment.labels.size() != n) throw ValidationError("silhouette: label count does not match matrix size");
    if (k < 2) throw ValidationError("silhouette: need at least 2 clusters");
    if (k == n) throw ValidationError("silhouette: undefined when every cluster is a singleton");

    std::vector<double> width(n, 0.0);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(threads > 0 ? threads : 1) schedule(static)
    for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto own = static_cast<std::size_t>(assignment.labels[i] - 1);
        if (assignment.sizes[own] == 1) continue;
        std::vector<double> sum(k, 0.0);
        for (std::size_t j = 0; j < n; ++j) sum[static_cast<std::size_t>(assignment.labels[j] - 1)] += d(i, j);
        const double a = sum[own] / static_cast<double>(assignment.sizes[own] - 1);
        double b = kInf;
        for (std::size_t c = 0; c < k; ++c) {
            if (c != own) b = std::min(b, sum[c] / static_cast<double>(assignment.sizes[c]));
        }
        const double denom = std::max(a, b);
        width[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    double total = 0.0;
    for (double w : width) total += w;
    return total / static_cast<double>(n);
}

std::vector<SilhouetteDiagnostic> silhouette_by_k(const DissimilarityMatrix& d, const Dendrogram& tree,
                                                  std::size_t k_min, std::size_t k_max, int threads) {
    std::vector<SilhouetteDiagnostic> out;
    k_max = std::min(k_max, d.size() - 1);
    for (std::size_t k = std::max<std::size_t>(k_min, 2); k <= k_max; ++k) {
        out.push_back({k, silhouette(d, cut_tree(tree, k), threads)});
    }
    return out;
}

void write_assignment_csv(std::ostream& out, std::span<const std::string> ids, const ClusterAssignment& assignment) {
    if (ids.size() != assignment.labels.size()) throw ValidationError("assignment: id count does not match label count");
    csv::write_row(out, {"id", "cluster"});
    for (std::size_t i = 0; i < ids.size(); ++i) csv::write_row(out, {ids[i], std::to_string(assignment.labels[i])});
}

ClusterAssignment read_assignment_csv(std::istream& in, std::span<const std::string> ids) {
    const auto rows = csv::read(in);
    if (rows.empty() || rows.front() != csv::Row{"id", "cluster"}) throw ValidationError("assignment csv: header must be 'id,cluster'");
    std::unordered_map<std::string, int> by_id;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 2) throw ValidationError("assignment csv: row " + std::to_string(r) + " must have 2 fields");
        int label = 0;
        try {
            label = std::stoi(rows[r][1]);
        } catch (const std::exception&) {
            throw ValidationError("assignment csv: bad cluster label '" + rows[r][1] + "'");
        }
        if (!by_id.emplace(rows[r][0], label).second) throw ValidationError("assignment csv: duplicate id '" + rows[r][0] + "'");
    }
    std::vector<int> labels;
    labels.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw ValidationError("assignment csv: no cluster for subject '" + id + "'");
        labels.push_back(it->second);
    }
    return ClusterAssignment::from_labels(std::move(labels));
}

std::string dendrogram_to_json(const Dendrogram& tree) {
    nlohmann::ordered_json doc;
    doc["n"] = tree.n;
    doc["method"] = "ward.D2";
    auto merges = nlohmann::ordered_json::array();
    for (const auto& m : tree.merges) {
        nlohmann::ordered_json rec;
        rec["left"] = m.left + 1;
        rec["right"] = m.right + 1;
        rec["height"] = m.height;
        rec["size"] = m.size;
        merges.push_back(rec);
    }
    doc["merges"] = merges;
    auto order = nlohmann::ordered_json::array();
    for (auto leaf : tree.leaf_order) order.push_back(leaf + 1);
    doc["leaf_order"] = order;
    doc["inversions"] = tree.inversions.size();
    return doc.dump(1) + "\n";
}

}  // namespace ssa
