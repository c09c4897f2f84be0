#pragma once

// Algorithm independency: how differently two clustering algorithms solve the
// problem (from their CAIL graph arrays), and how differently two runs of the same
// algorithm were seeded (from their basic parameters).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ces/cail.hpp"
#include "ces/error.hpp"
#include "ces/io.hpp"
#include "ces/types.hpp"

namespace ces::independency {

using cail::Cell;
using cail::GraphArray;

/// Code dependence degree of two cells: matched symbols over the longer cell length.
/// Symbols match with removal, so duplicates count at most as often as they occur in both.
inline double compare_cells(const Cell& a, const Cell& b) {
    if (a.empty() || b.empty()) throw EmptyCell();
    std::map<std::string_view, std::size_t> available;
    for (const auto& s : b) ++available[s];
    std::size_t count = 0;
    for (const auto& s : a) {
        auto it = available.find(s);
        if (it != available.end() && it->second > 0) {
            --it->second;
            ++count;
        }
    }
    return static_cast<double>(count) / static_cast<double>(std::max(a.size(), b.size()));
}

/// Rows follow the first array's cells, columns the second's.
struct Cddm {
    std::string row_algorithm;
    std::string col_algorithm;
    Matrix values;
};

inline Cddm build_cddm(const GraphArray& a, const GraphArray& b) {
    if (a.cells.empty()) throw EmptyGraph("graph array '" + a.algorithm + "' is empty");
    if (b.cells.empty()) throw EmptyGraph("graph array '" + b.algorithm + "' is empty");
    Cddm m{a.algorithm, b.algorithm, Matrix(static_cast<Eigen::Index>(a.cells.size()), static_cast<Eigen::Index>(b.cells.size()))};
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        for (std::size_t j = 0; j < b.cells.size(); ++j)
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = compare_cells(a.cells[i], b.cells[j]);
    return m;
}

struct Pick {
    Eigen::Index row;
    Eigen::Index col;
    double value;
};

/// Repeatedly takes the best surviving entry and deletes its row and column until
/// rows or columns run out. `better(x, y)` is a strict preference; ties go to the
/// smallest row, then the smallest column.
template <typename Better>
std::vector<Pick> greedy_extract(const Matrix& m, Better better) {
    std::vector<bool> row_gone(static_cast<std::size_t>(m.rows()), false);
    std::vector<bool> col_gone(static_cast<std::size_t>(m.cols()), false);
    std::vector<Pick> picks;
    const auto rounds = std::min(m.rows(), m.cols());
    for (Eigen::Index round = 0; round < rounds; ++round) {
        Pick best{-1, -1, 0.0};
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (row_gone[static_cast<std::size_t>(r)]) continue;
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (col_gone[static_cast<std::size_t>(c)]) continue;
                if (best.row < 0 || better(m(r, c), best.value)) best = {r, c, m(r, c)};
            }
        }
        row_gone[static_cast<std::size_t>(best.row)] = true;
        col_gone[static_cast<std::size_t>(best.col)] = true;
        picks.push_back(best);
    }
    return picks;
}

struct AidResult {
    double value;
    std::vector<Pick> max_cells;  // in extraction order
};

inline AidResult aid_detail(const GraphArray& a, const GraphArray& b) {
    const auto cddm = build_cddm(a, b);
    auto picks = greedy_extract(cddm.values, std::greater<double>{});
    const double m = static_cast<double>(std::max(a.cells.size(), b.cells.size()));
    double sum = 0.0;
    for (const auto& p : picks) sum += p.value;
    return {1.0 - sum / m, std::move(picks)};
}

/// Algorithm independency degree in [0, 1]; 0 for identical arrays.
inline double aid(const GraphArray& a, const GraphArray& b) { return aid_detail(a, b).value; }

/// Symmetric algorithm independency matrix with -1 on the diagonal.
class Aidm {
public:
    Aidm() = default;

    Aidm(std::vector<std::string> ids, Matrix values) : ids_(std::move(ids)), values_(std::move(values)) {
        const auto n = static_cast<Eigen::Index>(ids_.size());
        if (values_.rows() != n || values_.cols() != n) throw DimensionMismatch("AIDM must be square and match its ids");
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            if (!index_.emplace(ids_[i], i).second) throw DuplicateAlgorithmId(ids_[i]);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            if (values_(i, i) != -1.0) throw DataError("AIDM diagonal entry for '" + ids_[static_cast<std::size_t>(i)] + "' is not -1");
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double v = values_(i, j);
                if (!(v >= 0.0 && v <= 1.0)) throw DataError("AIDM entry outside [0, 1]");
                if (v != values_(j, i)) throw DataError("AIDM is not symmetric");
            }
        }
    }

    std::size_t size() const noexcept { return ids_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const Matrix& values() const noexcept { return values_; }
    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    std::size_t index_of(const std::string& id) const {
        const auto it = index_.find(id);
        if (it == index_.end()) throw UnknownAlgorithm(id);
        return it->second;
    }

    double at(const std::string& a, const std::string& b) const {
        return values_(static_cast<Eigen::Index>(index_of(a)), static_cast<Eigen::Index>(index_of(b)));
    }

private:
    std::vector<std::string> ids_;
    Matrix values_;
    std::map<std::string, std::size_t> index_;
};

inline Aidm build_aidm(const std::vector<GraphArray>& arrays) {
    if (arrays.size() < 2) throw std::invalid_argument("AIDM needs at least two algorithms");
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& a : arrays) {
        if (!seen.insert(a.algorithm).second) throw DuplicateAlgorithmId(a.algorithm);
        ids.push_back(a.algorithm);
    }
    const auto n = static_cast<Eigen::Index>(arrays.size());
    Matrix v = Matrix::Constant(n, n, -1.0);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double x = aid(arrays[static_cast<std::size_t>(i)], arrays[static_cast<std::size_t>(j)]);
            v(i, j) = x;
            v(j, i) = x;
        }
    return Aidm(std::move(ids), std::move(v));
}

/// Computes the AIDM of every `*.cail` script in `dir` (ids from file stems, sorted).
inline Aidm build_aidm_from_directory(const std::filesystem::path& dir, const cail::Scmt& scmt) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".cail") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<GraphArray> arrays;
    for (const auto& f : files) arrays.push_back(cail::to_graph_array(cail::build_graph(cail::load_cail(f, scmt))));
    return build_aidm(arrays);
}

inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// CSV with the algorithm ids as header row and first column.
inline std::string to_csv(const Aidm& aidm) {
    std::string out;
    for (const auto& id : aidm.ids()) out += "," + id;
    out += "\n";
    for (std::size_t i = 0; i < aidm.size(); ++i) {
        out += aidm.ids()[i];
        for (std::size_t j = 0; j < aidm.size(); ++j)
            out += "," + format_number(aidm.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out += "\n";
    }
    return out;
}

struct AsymmetricEntry {
    std::string row;
    std::string col;
    double upper;
    double lower;
};

/// Parses an AIDM CSV. Pairs with a_ij != a_ji are replaced by their mean and, when
/// `repaired` is given, reported there.
inline Aidm parse_aidm_csv(std::string_view text, std::vector<AsymmetricEntry>* repaired = nullptr) {
    const auto rows = io::lines(text);
    if (rows.empty()) throw ParseError(1, 1, "empty AIDM file");
    auto header = io::split(rows[0], ',');
    if (header.size() < 2) throw ParseError(1, 1, "AIDM header needs algorithm ids");
    std::vector<std::string> ids;
    for (std::size_t c = 1; c < header.size(); ++c) ids.emplace_back(io::trim(header[c]));
    const auto n = ids.size();
    if (rows.size() != n + 1) throw ParseError(rows.size(), 1, "AIDM needs one row per algorithm");
    Matrix v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto fields = io::split(rows[r + 1], ',');
        if (fields.size() != n + 1) throw ParseError(r + 2, fields.size(), "wrong number of fields");
        if (io::trim(fields[0]) != ids[r]) throw ParseError(r + 2, 1, "row id does not match header order");
        for (std::size_t c = 0; c < n; ++c) {
            const auto field = io::trim(fields[c + 1]);
            double x = 0.0;
            const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
            if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
                throw ParseError(r + 2, c + 2, "not a number: '" + std::string(field) + "'");
            v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x;
        }
    }
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = i + 1; j < v.cols(); ++j)
            if (v(i, j) != v(j, i)) {
                if (repaired) repaired->push_back({ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)], v(i, j), v(j, i)});
                const double mean = 0.5 * (v(i, j) + v(j, i));
                v(i, j) = mean;
                v(j, i) = mean;
            }
    return Aidm(std::move(ids), std::move(v));
}

inline Aidm load_aidm_csv(const std::filesystem::path& path, std::vector<AsymmetricEntry>* repaired = nullptr) {
    return parse_aidm_csv(io::read_text_file(path), repaired);
}

/// Basic parameters independency of two runs of the same algorithm: rows are matched
/// greedily by smallest Euclidean distance, and the mean matched distance t is mapped
/// to t / (1 + t).
inline double bpi(const BasicParams& p1, const BasicParams& p2) {
    if (p1.algorithm != p2.algorithm)
        throw std::invalid_argument("bpi compares runs of one algorithm; got '" + p1.algorithm + "' and '" + p2.algorithm + "'");
    if (p1.rows.cols() != p2.rows.cols()) throw DimensionMismatch("basic parameter rows differ in width");
    if (p1.rows.rows() == 0 || p2.rows.rows() == 0) throw DimensionMismatch("basic parameters need at least one row");
    Matrix dist(p1.rows.rows(), p2.rows.rows());
    for (Eigen::Index i = 0; i < p1.rows.rows(); ++i)
        for (Eigen::Index j = 0; j < p2.rows.rows(); ++j) dist(i, j) = (p1.rows.row(i) - p2.rows.row(j)).norm();
    const auto picks = greedy_extract(dist, std::less<double>{});
    double t = 0.0;
    for (const auto& p : picks) t += p.value;
    t /= static_cast<double>(picks.size());
    return t / (1.0 + t);
}

/// Per-entry independency weights. The pair term is the AIDM entry for different
/// algorithms and bpi for two runs of the same algorithm; each entry's weight is the
/// mean pair term against every other entry.
///
/// Two runs of one algorithm whose parameters live in spaces of different width
/// (spectral runs at different k) share nothing and score 1.
///
/// `Entry` must expose `algorithm` (std::string) and `basic_params` (BasicParams).
template <typename Entry>
std::vector<double> ai_weights(const std::vector<Entry>& committee, const Aidm& aidm) {
    if (committee.size() < 2) throw CommitteeTooSmall(committee.size());
    for (const auto& e : committee) aidm.index_of(e.algorithm);
    const auto m = committee.size();
    std::vector<double> pair(m * m, 0.0);
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = p + 1; q < m; ++q) {
            const auto& a = committee[p];
            const auto& b = committee[q];
            double v = 1.0;
            if (a.algorithm != b.algorithm)
                v = aidm.at(a.algorithm, b.algorithm);
            else if (a.basic_params.rows.cols() == b.basic_params.rows.cols())
                v = bpi(a.basic_params, b.basic_params);
            pair[p * m + q] = v;
            pair[q * m + p] = v;
        }
    std::vector<double> w(m, 0.0);
    for (std::size_t p = 0; p < m; ++p) {
        double sum = 0.0;
        for (std::size_t q = 0; q < m; ++q)
            if (q != p) sum += pair[p * m + q];
        w[p] = sum / static_cast<double>(m - 1);
    }
    return w;
}

}  // namespace ces::independency
