#pragma once

// Brute-force reference implementations used only by tests. None of these
// share code with the library routines they check.

#include "ssa/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <vector>

namespace oracle {

using Seq = std::vector<ssa::State>;

/// Every subsequence of `s` (empty one included), as a sorted unique list.
inline std::vector<Seq> all_subsequences(const Seq& s) {
    std::vector<Seq> out;
    const std::size_t masks = std::size_t{1} << s.size();
    out.reserve(masks);
    for (std::size_t m = 0; m < masks; ++m) {
        Seq sub;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (m & (std::size_t{1} << i)) sub.push_back(s[i]);
        }
        out.push_back(std::move(sub));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::size_t distinct_subsequences(const Seq& s) { return all_subsequences(s).size(); }

/// Longest element of the intersection of both subsequence sets.
inline std::size_t lcs_by_enumeration(const Seq& x, const Seq& y) {
    const auto sx = all_subsequences(x);
    const auto sy = all_subsequences(y);
    std::size_t best = 0;
    auto ix = sx.begin();
    auto iy = sy.begin();
    while (ix != sx.end() && iy != sy.end()) {
        if (*ix < *iy) {
            ++ix;
        } else if (*iy < *ix) {
            ++iy;
        } else {
            best = std::max(best, ix->size());
            ++ix;
            ++iy;
        }
    }
    return best;
}

/// Minimum edit cost over every alignment: choose m positions of x and m of
/// y (both increasing) to pair by substitution, delete/insert the rest.
inline double om_by_alignment_enumeration(const Seq& x, const Seq& y, const std::vector<double>& sub, std::size_t a,
                                          double indel) {
    double best = std::numeric_limits<double>::infinity();
    // Recursively enumerate monotone matchings; each is visited once.
    std::function<void(std::size_t, std::size_t, std::size_t, double)> rec = [&](std::size_t i, std::size_t j, std::size_t matched,
                                                                                 double cost) {
        const double total = cost + indel * static_cast<double>(x.size() - matched + y.size() - matched);
        best = std::min(best, total);
        for (std::size_t ii = i; ii < x.size(); ++ii) {
            for (std::size_t jj = j; jj < y.size(); ++jj) {
                rec(ii + 1, jj + 1, matched + 1, cost + sub[x[ii] * a + y[jj]]);
            }
        }
    };
    rec(0, 0, 0, 0.0);
    return best;
}

/// Ward.D2 by repeated full scans of a dense matrix. Returns merges as
/// (left node, right node, height, size) with the library's node numbering.
struct NaiveMerge {
    std::size_t left, right;
    double height;
    std::size_t size;
};

inline std::vector<NaiveMerge> naive_ward(const std::vector<std::vector<double>>& dist) {
    const std::size_t n = dist.size();
    std::vector<std::vector<double>> d2(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) d2[i][j] = dist[i][j] * dist[i][j];
    }
    std::vector<bool> active(n, true);
    std::vector<double> size(n, 1.0);
    std::vector<std::size_t> node(n);
    for (std::size_t i = 0; i < n; ++i) node[i] = i;
    std::vector<NaiveMerge> merges;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (active[j] && d2[i][j] < best) {
                    best = d2[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        merges.push_back({node[bi], node[bj], std::sqrt(best), static_cast<std::size_t>(size[bi] + size[bj])});
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            const double ni = size[bi], nj = size[bj], nk = size[k];
            const double v = ((ni + nk) * d2[k][bi] + (nj + nk) * d2[k][bj] - nk * best) / (ni + nj + nk);
            d2[k][bi] = d2[bi][k] = v;
        }
        active[bj] = false;
        size[bi] += size[bj];
        node[bi] = n + step;
    }
    return merges;
}

/// Log partial likelihood at beta = 0 by direct summation over event
/// times (Breslow when `efron` is false).
struct TimedEvent {
    double time;
    bool event;
};
inline double null_log_likelihood(const std::vector<TimedEvent>& data, bool efron) {
    std::set<double> event_times;
    for (const auto& r : data) {
        if (r.event) event_times.insert(r.time);
    }
    double ll = 0.0;
    for (double t : event_times) {
        double at_risk = 0.0;
        double deaths = 0.0;
        for (const auto& r : data) {
            if (r.time >= t) at_risk += 1.0;
            if (r.time == t && r.event) deaths += 1.0;
        }
        for (int l = 0; l < static_cast<int>(deaths); ++l) {
            ll -= std::log(at_risk - (efron ? l : 0));
        }
    }
    return ll;
}

}  // namespace oracle
