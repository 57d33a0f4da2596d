#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qkdpp/code_family.hpp"
#include "qkdpp/errors.hpp"
#include "qkdpp/parity_check_matrix.hpp"

namespace qkdpp {

// alist interchange format (MacKay convention, 1-based indices):
//   line 1: n m
//   line 2: max_col_degree max_row_degree
//   line 3: n column degrees          line 4: m row degrees
//   then n lines of check indices per variable, m lines of variable indices
//   per check. Zero padding is accepted on read, never written.

inline void write_alist(const ParityCheckMatrix& h, std::ostream& os) {
    const std::size_t m = h.check_count();
    const std::size_t n = h.variable_count();
    std::size_t max_col = 0, max_row = 0;
    for (std::size_t i = 0; i < n; ++i)
        max_col = std::max(max_col, h.col_degree(i));
    for (std::size_t j = 0; j < m; ++j)
        max_row = std::max(max_row, h.row_degree(j));

    os << n << ' ' << m << '\n';
    os << max_col << ' ' << max_row << '\n';
    for (std::size_t i = 0; i < n; ++i)
        os << h.col_degree(i) << (i + 1 < n ? ' ' : '\n');
    for (std::size_t j = 0; j < m; ++j)
        os << h.row_degree(j) << (j + 1 < m ? ' ' : '\n');
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = h.col(i);
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (k)
                os << ' ';
            os << (c[k] + 1);
        }
        os << '\n';
    }
    for (std::size_t j = 0; j < m; ++j) {
        const auto& r = h.row(j);
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (k)
                os << ' ';
            os << (r[k] + 1);
        }
        os << '\n';
    }
}

inline std::string write_alist_string(const ParityCheckMatrix& h) {
    std::ostringstream os;
    write_alist(h, os);
    return os.str();
}

namespace detail {

// Line reader that keeps a 1-based line counter for error reporting.
class LineSource {
public:
    explicit LineSource(std::istream& is) : is_(is) {}

    // Next line split into unsigned integers; throws ParseError on EOF when
    // required, or on non-numeric tokens.
    std::vector<std::int64_t> next(bool required) {
        std::string line;
        if (!std::getline(is_, line)) {
            if (required)
                throw ParseError(line_no_ + 1, "unexpected end of file");
            eof_ = true;
            return {};
        }
        ++line_no_;
        std::vector<std::int64_t> out;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            try {
                std::size_t used = 0;
                const long long v = std::stoll(tok, &used);
                if (used != tok.size())
                    throw std::invalid_argument(tok);
                out.push_back(v);
            } catch (const std::exception&) {
                throw ParseError(line_no_, "expected integer, got '" + tok + "'");
            }
        }
        return out;
    }

    std::size_t line_no() const noexcept { return line_no_; }
    bool eof() const noexcept { return eof_; }

private:
    std::istream& is_;
    std::size_t line_no_ = 0;
    bool eof_ = false;
};

} // namespace detail

inline ParityCheckMatrix read_alist(std::istream& is) {
    detail::LineSource src(is);

    auto header = src.next(true);
    if (header.size() != 2 || header[0] < 1 || header[1] < 1)
        throw ParseError(src.line_no(), "expected 'n m' with positive counts");
    const auto n = static_cast<std::size_t>(header[0]);
    const auto m = static_cast<std::size_t>(header[1]);

    auto maxima = src.next(true);
    if (maxima.size() != 2 || maxima[0] < 0 || maxima[1] < 0)
        throw ParseError(src.line_no(), "expected 'max_col_degree max_row_degree'");
    const auto max_col = static_cast<std::size_t>(maxima[0]);
    const auto max_row = static_cast<std::size_t>(maxima[1]);

    auto read_degree_line = [&](std::size_t count, std::size_t cap,
                                const char* what) {
        auto vals = src.next(true);
        if (vals.size() != count)
            throw ParseError(src.line_no(), std::string("expected ") +
                                                std::to_string(count) + " " + what +
                                                " degrees, got " +
                                                std::to_string(vals.size()));
        std::vector<std::size_t> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            if (vals[i] < 0 || static_cast<std::size_t>(vals[i]) > cap)
                throw ParseError(src.line_no(), std::string(what) + " degree " +
                                                    std::to_string(vals[i]) +
                                                    " exceeds declared maximum");
            out[i] = static_cast<std::size_t>(vals[i]);
        }
        return out;
    };
    const auto col_deg = read_degree_line(n, max_col, "column");
    const auto row_deg = read_degree_line(m, max_row, "row");

    auto read_adjacency = [&](std::size_t count, const std::vector<std::size_t>& deg,
                              std::size_t index_bound, const char* what) {
        std::vector<std::vector<std::uint32_t>> adj(count);
        for (std::size_t k = 0; k < count; ++k) {
            auto vals = src.next(true);
            // drop trailing zero padding
            while (!vals.empty() && vals.back() == 0)
                vals.pop_back();
            if (vals.size() != deg[k])
                throw ParseError(src.line_no(),
                                 std::string(what) + " " + std::to_string(k) +
                                     ": expected " + std::to_string(deg[k]) +
                                     " indices, got " + std::to_string(vals.size()));
            for (std::int64_t v : vals) {
                if (v < 1 || static_cast<std::size_t>(v) > index_bound)
                    throw ParseError(src.line_no(),
                                     std::string(what) + " " + std::to_string(k) +
                                         ": index " + std::to_string(v) +
                                         " outside [1, " +
                                         std::to_string(index_bound) + "]");
                adj[k].push_back(static_cast<std::uint32_t>(v - 1));
            }
        }
        return adj;
    };
    auto var_adj = read_adjacency(n, col_deg, m, "variable");
    auto chk_adj = read_adjacency(m, row_deg, n, "check");

    ParityCheckMatrix h(m, n, std::move(chk_adj));
    // The two sections must describe the same edge set.
    for (std::size_t i = 0; i < n; ++i) {
        auto& lst = var_adj[i];
        std::sort(lst.begin(), lst.end());
        if (lst != h.col(i))
            throw ConsistencyError("alist: variable " + std::to_string(i) +
                                   " adjacency disagrees with the check section");
    }
    return h;
}

inline ParityCheckMatrix read_alist_string(const std::string& text) {
    std::istringstream is(text);
    return read_alist(is);
}

inline void write_alist_file(const std::filesystem::path& path,
                             const ParityCheckMatrix& h) {
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot open '" + path.string() + "' for writing");
    write_alist(h, os);
    os.flush();
    if (!os)
        throw IoError("write failed for '" + path.string() + "'");
}

inline ParityCheckMatrix read_alist_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open '" + path.string() + "' for reading");
    return read_alist(is);
}

// Family directory: one alist per member plus a plain-text manifest.
inline void write_family_dir(const std::filesystem::path& dir, const CodeFamily& family) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    for (std::size_t k = 0; k < family.u(); ++k)
        write_alist_file(dir / ("H" + std::to_string(k) + ".alist"), family.member(k));
    std::ofstream os(dir / "family.manifest");
    if (!os)
        throw IoError("cannot open manifest in '" + dir.string() + "'");
    os << "u " << family.u() << '\n';
    os << "seed " << family.seed() << '\n';
    os << "wave_layout " << to_string(family.wave_layout()) << '\n';
    os << "independent_positions";
    for (std::uint32_t p : family.independent_positions())
        os << ' ' << p;
    os << '\n';
    os.flush();
    if (!os)
        throw IoError("manifest write failed in '" + dir.string() + "'");
}

inline CodeFamily read_family_dir(const std::filesystem::path& dir) {
    std::ifstream ms(dir / "family.manifest");
    if (!ms)
        throw IoError("cannot open '" + (dir / "family.manifest").string() + "'");

    std::size_t line_no = 0;
    auto expect_line = [&](const std::string& key) {
        std::string line;
        if (!std::getline(ms, line))
            throw ParseError(line_no + 1, "manifest: unexpected end of file");
        ++line_no;
        if (line.rfind(key + " ", 0) != 0 && line != key)
            throw ParseError(line_no, "manifest: expected '" + key + " ...'");
        return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
    };

    std::size_t u = 0;
    std::uint64_t seed = 0;
    try {
        u = std::stoull(expect_line("u"));
        seed = std::stoull(expect_line("seed"));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError(line_no, "manifest: malformed integer");
    }
    const WaveLayout layout = wave_layout_from_string(expect_line("wave_layout"));
    std::vector<std::uint32_t> positions;
    {
        std::istringstream ps(expect_line("independent_positions"));
        std::int64_t v;
        while (ps >> v) {
            if (v < 0)
                throw ParseError(line_no, "manifest: negative position");
            positions.push_back(static_cast<std::uint32_t>(v));
        }
    }
    if (u < 1)
        throw ParseError(1, "manifest: u must be >= 1");

    std::vector<ParityCheckMatrix> members;
    members.reserve(u);
    for (std::size_t k = 0; k < u; ++k)
        members.push_back(read_alist_file(dir / ("H" + std::to_string(k) + ".alist")));
    return CodeFamily(std::move(members), std::move(positions), layout, seed);
}

} // namespace qkdpp
