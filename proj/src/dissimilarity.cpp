#include "ssa/dissimilarity.hpp"

#include "ssa/csv.hpp"
#include "ssa/error.hpp"
#include "ssa/random.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ssa {

// ---------------------------------------------------------------------------
// Cost types
// ---------------------------------------------------------------------------

namespace {

void check_cost_slice(std::size_t a, std::span<const double> costs, const char* what) {
    if (costs.size() != a * a) throw ValidationError(std::string(what) + ": expected a " + std::to_string(a) + "x" + std::to_string(a) + " matrix");
    for (std::size_t i = 0; i < a; ++i) {
        if (costs[i * a + i] != 0.0) throw ValidationError(std::string(what) + ": diagonal must be zero");
        for (std::size_t j = 0; j < a; ++j) {
            const double v = costs[i * a + j];
            if (!std::isfinite(v) || v < 0.0) throw ValidationError(std::string(what) + ": entries must be finite and non-negative");
            if (v != costs[j * a + i]) throw ValidationError(std::string(what) + ": matrix must be symmetric");
        }
    }
}

}  // namespace

SubstitutionCostMatrix::SubstitutionCostMatrix(std::size_t alphabet_size, std::vector<double> costs, double indel,
                                               CostSource source)
    : size_(alphabet_size), costs_(std::move(costs)), indel_(indel), source_(source) {
    if (size_ == 0) throw ValidationError("costs: empty alphabet");
    check_cost_slice(size_, costs_, "substitution costs");
    if (!(indel_ > 0.0) || !std::isfinite(indel_)) throw ValidationError("costs: indel must be positive");
}

SubstitutionCostMatrix SubstitutionCostMatrix::constant(std::size_t alphabet_size, double substitution, double indel) {
    std::vector<double> costs(alphabet_size * alphabet_size, substitution);
    for (std::size_t i = 0; i < alphabet_size; ++i) costs[i * alphabet_size + i] = 0.0;
    return SubstitutionCostMatrix(alphabet_size, std::move(costs), indel, CostSource::constant);
}

TimeVaryingCosts::TimeVaryingCosts(std::size_t alphabet_size, std::vector<std::vector<double>> slices)
    : size_(alphabet_size), slices_(std::move(slices)) {
    if (slices_.empty()) throw ValidationError("time-varying costs: no slices");
    for (const auto& s : slices_) check_cost_slice(size_, s, "time-varying cost slice");
}

DissimilarityMatrix::DissimilarityMatrix(std::size_t n, std::string metric_tag)
    : n_(n), packed_(n > 1 ? n * (n - 1) / 2 : 0, 0.0), tag_(std::move(metric_tag)) {}

DissimilarityMatrix::DissimilarityMatrix(std::size_t n, std::vector<double> packed, std::string metric_tag)
    : n_(n), packed_(std::move(packed)), tag_(std::move(metric_tag)) {
    if (packed_.size() != (n > 1 ? n * (n - 1) / 2 : 0)) throw ValidationError("distance matrix: packed size does not match n");
    for (double v : packed_) {
        if (!std::isfinite(v) || v < 0.0) throw ValidationError("distance matrix: entries must be finite and non-negative");
    }
}

double DissimilarityMatrix::max() const noexcept {
    double m = 0.0;
    for (double v : packed_) m = std::max(m, v);
    return m;
}

// ---------------------------------------------------------------------------
// Cost estimation
// ---------------------------------------------------------------------------

SubstitutionCostMatrix transition_rate_costs(const SequenceSet& set, std::vector<std::string>* warnings) {
    const std::size_t a = set.alphabet_size();
    const std::size_t length = set.length();
    if (length < 2) throw ValidationError("transition-rate costs need sequences of length >= 2");

    std::vector<double> from(a, 0.0);
    std::vector<double> pair(a * a, 0.0);
    for (const auto& seq : set.sequences()) {
        for (std::size_t t = 0; t + 1 < length; ++t) {
            from[seq.states[t]] += 1.0;
            pair[seq.states[t] * a + seq.states[t + 1]] += 1.0;
        }
    }
    std::vector<double> rate(a * a, 0.0);
    for (std::size_t i = 0; i < a; ++i) {
        if (from[i] == 0.0) {
            if (warnings) {
                warnings->push_back("state '" + set.alphabet().state(static_cast<State>(i)) +
                                    "' never observed before the last position; its transition rates are taken as 0");
            }
            continue;
        }
        for (std::size_t j = 0; j < a; ++j) rate[i * a + j] = pair[i * a + j] / from[i];
    }
    std::vector<double> costs(a * a, 0.0);
    for (std::size_t i = 0; i < a; ++i) {
        for (std::size_t j = 0; j < a; ++j) {
            if (i != j) costs[i * a + j] = 2.0 - (rate[i * a + j] + rate[j * a + i]);  // grouped so c(a,b) == c(b,a) exactly
        }
    }
    return SubstitutionCostMatrix(a, std::move(costs), 1.0, CostSource::transition_rate);
}

TimeVaryingCosts dhd_costs(const SequenceSet& set) {
    const std::size_t a = set.alphabet_size();
    const std::size_t length = set.length();
    if (length < 3) throw ValidationError("dynamic Hamming costs need sequences of length >= 3");

    // cond[t][b * a + c] = p(x_{t+1} = c | x_t = b) for t = 0..T-2
    std::vector<std::vector<double>> cond(length - 1, std::vector<double>(a * a, 0.0));
    for (std::size_t t = 0; t + 1 < length; ++t) {
        std::vector<double> from(a, 0.0);
        auto& p = cond[t];
        for (const auto& seq : set.sequences()) {
            from[seq.states[t]] += 1.0;
            p[seq.states[t] * a + seq.states[t + 1]] += 1.0;
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (from[b] == 0.0) continue;
            for (std::size_t c = 0; c < a; ++c) p[b * a + c] /= from[b];
        }
    }

    std::vector<std::vector<double>> slices(length, std::vector<double>(a * a, 0.0));
    for (std::size_t t = 0; t < length; ++t) {
        for (std::size_t x = 0; x < a; ++x) {
            for (std::size_t y = 0; y < a; ++y) {
                if (x == y) continue;
                double incoming = 0.0;  // p(x_t = x | x_{t-1} = y) + p(x_t = y | x_{t-1} = x)
                double outgoing = 0.0;  // p(x_{t+1} = x | x_t = y) + p(x_{t+1} = y | x_t = x)
                if (t > 0) incoming = cond[t - 1][y * a + x] + cond[t - 1][x * a + y];
                if (t + 1 < length) outgoing = cond[t][y * a + x] + cond[t][x * a + y];
                double c;
                if (t == 0) {
                    c = 2.0 * (2.0 - outgoing);
                } else if (t + 1 == length) {
                    c = 2.0 * (2.0 - incoming);
                } else {
                    c = 4.0 - incoming - outgoing;
                }
                slices[t][x * a + y] = c;
            }
        }
    }
    return TimeVaryingCosts(a, std::move(slices));
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

namespace {

// Rolling-row LCS; `row` must hold |y| + 1 entries.
std::size_t lcs_rolling(std::span<const State> x, std::span<const State> y, std::vector<std::uint32_t>& row) {
    row.assign(y.size() + 1, 0);
    std::uint32_t* r = row.data();
    const std::size_t m = y.size();
    for (State xi : x) {
        std::uint32_t diag = 0;  // r[j-1] from the previous row
        std::uint32_t left = 0;  // r[j-1] from the current row
        for (std::size_t j = 1; j <= m; ++j) {
            const std::uint32_t up = r[j];
            const std::uint32_t match = xi == y[j - 1] ? diag + 1 : 0;
            left = std::max({up, left, match});
            r[j] = left;
            diag = up;
        }
    }
    return row.back();
}

double om_rolling(std::span<const State> x, std::span<const State> y, const SubstitutionCostMatrix& costs,
                  std::vector<double>& row) {
    if (y.size() > x.size()) std::swap(x, y);  // costs are symmetric; keep the row short
    const double indel = costs.indel();
    row.resize(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) row[j] = indel * static_cast<double>(j);
    for (std::size_t i = 1; i <= x.size(); ++i) {
        double diag = row[0];
        row[0] = indel * static_cast<double>(i);
        const State xi = x[i - 1];
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const double up = row[j];
            const double best = std::min({up + indel, row[j - 1] + indel, diag + costs(xi, y[j - 1])});
            row[j] = best;
            diag = up;
        }
    }
    return row.back();
}

void check_alphabet(std::span<const State> s, std::size_t a) {
    for (State v : s) {
        if (v >= a) throw ValidationError("sequence state outside the cost matrix alphabet");
    }
}

}  // namespace

double om_distance(std::span<const State> x, std::span<const State> y, const SubstitutionCostMatrix& costs) {
    check_alphabet(x, costs.alphabet_size());
    check_alphabet(y, costs.alphabet_size());
    std::vector<double> row;
    return om_rolling(x, y, costs, row);
}

std::size_t lcs_length(std::span<const State> x, std::span<const State> y) {
    std::vector<std::uint32_t> row;
    return lcs_rolling(x, y, row);
}

double lcs_distance(std::span<const State> x, std::span<const State> y) {
    return static_cast<double>(x.size() + y.size() - 2 * lcs_length(x, y));
}

double hamming_distance(std::span<const State> x, std::span<const State> y, const SubstitutionCostMatrix* costs) {
    if (x.size() != y.size()) {
        throw ValidationError("hamming: sequence lengths differ (" + std::to_string(x.size()) + " vs " +
                              std::to_string(y.size()) + ")");
    }
    double d = 0.0;
    if (costs) {
        check_alphabet(x, costs->alphabet_size());
        check_alphabet(y, costs->alphabet_size());
        for (std::size_t t = 0; t < x.size(); ++t) d += (*costs)(x[t], y[t]);
    } else {
        for (std::size_t t = 0; t < x.size(); ++t) d += x[t] != y[t] ? 1.0 : 0.0;
    }
    return d;
}

double dhd_distance(std::span<const State> x, std::span<const State> y, const TimeVaryingCosts& costs) {
    if (x.size() != y.size() || x.size() != costs.length()) {
        throw ValidationError("dhd: sequence lengths (" + std::to_string(x.size()) + ", " + std::to_string(y.size()) +
                              ") must both equal the number of cost slices (" + std::to_string(costs.length()) + ")");
    }
    check_alphabet(x, costs.alphabet_size());
    check_alphabet(y, costs.alphabet_size());
    double d = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) d += costs(t, x[t], y[t]);
    return d;
}

// ---------------------------------------------------------------------------
// Full matrix
// ---------------------------------------------------------------------------

std::string to_string(Metric metric) {
    switch (metric) {
        case Metric::om: return "om";
        case Metric::hamming: return "hamming";
        case Metric::dhd: return "dhd";
        case Metric::lcs: return "lcs";
    }
    return "?";
}

Metric parse_metric(std::string_view name) {
    if (name == "om") return Metric::om;
    if (name == "hamming") return Metric::hamming;
    if (name == "dhd") return Metric::dhd;
    if (name == "lcs") return Metric::lcs;
    throw ValidationError("unknown metric '" + std::string(name) + "' (expected om, hamming, dhd or lcs)");
}

DissimilarityMatrix pairwise_matrix(const SequenceSet& set, Metric metric, const PairwiseParams& params) {
    const std::size_t n = set.size();
    const std::size_t a = set.alphabet_size();
    DissimilarityMatrix d(n, to_string(metric));
    if (n < 2) return d;

    std::optional<SubstitutionCostMatrix> costs = params.costs;
    std::optional<TimeVaryingCosts> time_costs = params.time_costs;
    switch (metric) {
        case Metric::om:
            if (!costs) costs = SubstitutionCostMatrix::constant(a, 2.0, 1.0);
            break;
        case Metric::hamming:
            break;
        case Metric::dhd:
            if (!time_costs) time_costs = dhd_costs(set);
            if (time_costs->length() != set.length()) {
                throw ValidationError("dhd: " + std::to_string(time_costs->length()) + " cost slices for sequences of length " +
                                      std::to_string(set.length()));
            }
            if (time_costs->alphabet_size() != a) throw ValidationError("dhd: cost slices do not match the alphabet size");
            break;
        case Metric::lcs:
            break;
    }
    if (costs && costs->alphabet_size() != a) throw ValidationError("costs do not match the alphabet size");

    int threads = params.threads;
#ifdef _OPENMP
    if (threads <= 0) threads = omp_get_num_procs();
#endif
    if (threads <= 0) threads = 1;

    double* out = d.packed().data();
    const auto rows = static_cast<std::ptrdiff_t>(n);

#pragma omp parallel num_threads(threads)
    {
        std::vector<std::uint32_t> lcs_row;
        std::vector<double> om_row;
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t ii = 1; ii < rows; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            const std::span<const State> x = set[i].states;
            double* dst = out + DissimilarityMatrix::offset(i, 0);
            for (std::size_t j = 0; j < i; ++j) {
                const std::span<const State> y = set[j].states;
                double v = 0.0;
                switch (metric) {
                    case Metric::om: v = om_rolling(x, y, *costs, om_row); break;
                    case Metric::hamming: v = hamming_distance(x, y, costs ? &*costs : nullptr); break;
                    case Metric::dhd: v = dhd_distance(x, y, *time_costs); break;
                    case Metric::lcs: v = static_cast<double>(x.size() + y.size() - 2 * lcs_rolling(x, y, lcs_row)); break;
                }
                dst[j] = v;
            }
        }
    }
    return d;
}

TriangleAudit triangle_audit(const DissimilarityMatrix& d, std::size_t samples, std::uint64_t seed, double tolerance) {
    TriangleAudit audit;
    const std::size_t n = d.size();
    if (n < 3) return audit;
    Philox::Stream rng(seed, 0x7472690000000000ull);
    for (std::size_t s = 0; s < samples; ++s) {
        std::size_t i, j, k;
        do {
            i = static_cast<std::size_t>(rng.below(n));
            j = static_cast<std::size_t>(rng.below(n));
            k = static_cast<std::size_t>(rng.below(n));
        } while (i == j || j == k || i == k);
        ++audit.checked;
        const double excess = d(i, k) - (d(i, j) + d(j, k));
        if (excess > tolerance) {
            ++audit.violations;
            audit.worst_excess = std::max(audit.worst_excess, excess);
        }
    }
    return audit;
}

// ---------------------------------------------------------------------------
// I/O
// ---------------------------------------------------------------------------

void write_matrix_csv(std::ostream& out, const DissimilarityMatrix& d, std::span<const std::string> ids) {
    if (ids.size() != d.size()) throw ValidationError("distance csv: id count does not match matrix size");
    csv::Row header{"id"};
    header.insert(header.end(), ids.begin(), ids.end());
    csv::write_row(out, header);
    for (std::size_t i = 0; i < d.size(); ++i) {
        csv::Row row{ids[i]};
        for (std::size_t j = 0; j < d.size(); ++j) row.push_back(csv::format_double(d(i, j)));
        csv::write_row(out, row);
    }
}

DissimilarityMatrix read_matrix_csv(std::istream& in, std::vector<std::string>* ids) {
    const auto rows = csv::read(in);
    if (rows.empty()) throw ValidationError("distance csv: empty input");
    const std::size_t n = rows.front().size() - 1;
    if (rows.size() != n + 1) throw ValidationError("distance csv: matrix is not square");
    std::vector<std::vector<double>> full(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = rows[i + 1];
        if (row.size() != n + 1) throw ValidationError("distance csv: row " + std::to_string(i + 1) + " has the wrong width");
        if (row[0] != rows.front()[i + 1]) throw ValidationError("distance csv: row and column ids differ at " + std::to_string(i + 1));
        for (std::size_t j = 0; j < n; ++j) {
            try {
                std::size_t used = 0;
                full[i][j] = std::stod(row[j + 1], &used);
                if (used != row[j + 1].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ValidationError("distance csv: bad number '" + row[j + 1] + "'");
            }
        }
    }
    std::vector<double> packed;
    packed.reserve(n > 1 ? n * (n - 1) / 2 : 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (full[i][i] != 0.0) throw ValidationError("distance csv: non-zero diagonal");
        for (std::size_t j = 0; j < i; ++j) {
            if (full[i][j] != full[j][i]) throw ValidationError("distance csv: matrix is not symmetric");
            packed.push_back(full[i][j]);
        }
    }
    if (ids) ids->assign(rows.front().begin() + 1, rows.front().end());
    return DissimilarityMatrix(n, std::move(packed));
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
    std::array<unsigned char, sizeof(T)> bytes;
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw ValidationError("distance binary: truncated input");
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(bytes[i]) << (8 * i));
    return std::bit_cast<T>(bits);
}

constexpr std::uint16_t kBinaryVersion = 1;

}  // namespace

void write_matrix_binary(std::ostream& out, const DissimilarityMatrix& d) {
    out.write("SQDM", 4);
    put_le<std::uint16_t>(out, kBinaryVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.size()));
    for (double v : d.packed()) put_le<double>(out, v);
}

DissimilarityMatrix read_matrix_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "SQDM", 4) != 0) throw ValidationError("distance binary: bad magic");
    const auto version = get_le<std::uint16_t>(in);
    if (version != kBinaryVersion) throw ValidationError("distance binary: unsupported version " + std::to_string(version));
    const std::size_t n = get_le<std::uint32_t>(in);
    std::vector<double> packed(n > 1 ? n * (n - 1) / 2 : 0);
    for (auto& v : packed) v = get_le<double>(in);
    return DissimilarityMatrix(n, std::move(packed));
}

DissimilarityMatrix read_matrix(const std::string& path, std::vector<std::string>* ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    char magic[4] = {};
    in.read(magic, 4);
    in.clear();
    in.seekg(0);
    if (std::memcmp(magic, "SQDM", 4) == 0) return read_matrix_binary(in);
    return read_matrix_csv(in, ids);
}

void write_costs_csv(std::ostream& out, const SubstitutionCostMatrix& costs, const Alphabet& alphabet) {
    const std::size_t a = costs.alphabet_size();
    if (a != alphabet.size()) throw ValidationError("costs: alphabet size mismatch");
    csv::Row header{""};
    header.insert(header.end(), alphabet.states().begin(), alphabet.states().end());
    csv::write_row(out, header);
    for (std::size_t i = 0; i < a; ++i) {
        csv::Row row{alphabet.state(static_cast<State>(i))};
        for (std::size_t j = 0; j < a; ++j) row.push_back(csv::format_double(costs(static_cast<State>(i), static_cast<State>(j))));
        csv::write_row(out, row);
    }
}

SubstitutionCostMatrix read_costs_csv(std::istream& in, const Alphabet& alphabet, double indel) {
    const auto rows = csv::read(in);
    const std::size_t a = alphabet.size();
    if (rows.size() != a + 1) throw ValidationError("costs csv: expected " + std::to_string(a) + " rows plus a header");
    // Header and first column may list states in any order; map them onto the alphabet.
    std::vector<std::size_t> col_state(a);
    if (rows[0].size() != a + 1) throw ValidationError("costs csv: header has the wrong width");
    for (std::size_t c = 0; c < a; ++c) {
        const auto s = alphabet.find(rows[0][c + 1]);
        if (!s) throw ValidationError("costs csv: unknown state '" + rows[0][c + 1] + "' in header");
        col_state[c] = *s;
    }
    std::vector<double> costs(a * a, -1.0);
    for (std::size_t r = 1; r <= a; ++r) {
        const auto& row = rows[r];
        if (row.size() != a + 1) throw ValidationError("costs csv: row " + std::to_string(r) + " has the wrong width");
        const auto s = alphabet.find(row[0]);
        if (!s) throw ValidationError("costs csv: unknown state '" + row[0] + "'");
        for (std::size_t c = 0; c < a; ++c) {
            try {
                costs[*s * a + col_state[c]] = std::stod(row[c + 1]);
            } catch (const std::exception&) {
                throw ValidationError("costs csv: bad number '" + row[c + 1] + "'");
            }
        }
    }
    return SubstitutionCostMatrix(a, std::move(costs), indel, CostSource::user);
}

}  // namespace ssa
