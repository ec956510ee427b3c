#pragma once

// File formats:
//   graph      whitespace-separated edge list, one `i j w` per undirected
//              edge (0-based ids); `#`-lines are comments except the header
//              `#nodes N` which raises the node count above 1 + max id
//   features   CSV, one row per node, uniform column count
//   trajectory columnar text written by write_trajectory
// Writers emit 17 significant digits so values round-trip bit-exactly.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "frond/errors.hpp"
#include "frond/fde.hpp"
#include "frond/graph.hpp"
#include "frond/rng.hpp"

namespace frond {

namespace detail {

inline bool parse_double(std::string_view token, double& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

inline bool parse_int(std::string_view token, long& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline Graph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cli_runner", "cannot open graph file: " + path);
    }
    struct RawEdge {
        long i, j;
        double w;
        int line;
    };
    std::vector<RawEdge> raw;
    long declared_nodes = -1;
    long max_id = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) {
            continue;  // blank
        }
        if (first[0] == '#') {
            if (first == "#nodes") {
                long n = 0;
                std::string tok;
                if (!(ls >> tok) || !detail::parse_int(tok, n) || n < 1) {
                    throw parse_error("cli_runner", path + ":" + std::to_string(line_no) +
                                                        ": malformed #nodes header");
                }
                declared_nodes = n;
            }
            continue;
        }
        std::string jt, wt, extra;
        long i = 0, j = 0;
        double w = 0.0;
        if (!(ls >> jt >> wt) || (ls >> extra) || !detail::parse_int(first, i) ||
            !detail::parse_int(jt, j) || !detail::parse_double(wt, w)) {
            throw parse_error("cli_runner", path + ":" + std::to_string(line_no) +
                                                ": expected `i j w`, got: " + line);
        }
        if (i < 0 || j < 0) {
            throw parse_error("cli_runner", path + ":" + std::to_string(line_no) +
                                                ": negative node id");
        }
        if (i == j) {
            throw parse_error("cli_runner", path + ":" + std::to_string(line_no) +
                                                ": self-loop at node " + std::to_string(i));
        }
        if (w == 0.0 || !std::isfinite(w)) {
            throw parse_error("cli_runner", path + ":" + std::to_string(line_no) +
                                                ": edge weight must be finite and nonzero");
        }
        raw.push_back({i, j, w, line_no});
        max_id = std::max({max_id, i, j});
    }
    if (declared_nodes >= 0 && declared_nodes < max_id + 1) {
        throw parse_error("cli_runner", path + ": #nodes " + std::to_string(declared_nodes) +
                                            " is smaller than 1 + max node id " +
                                            std::to_string(max_id));
    }
    const long n = std::max(declared_nodes, max_id + 1);
    if (n < 1) {
        throw parse_error("cli_runner", path + ": no nodes");
    }
    Graph g(static_cast<int>(n));
    for (const auto& e : raw) {
        if (g.has_edge(static_cast<int>(e.i), static_cast<int>(e.j))) {
            throw parse_error("cli_runner", path + ":" + std::to_string(e.line) +
                                                ": duplicate edge (" + std::to_string(e.i) +
                                                ", " + std::to_string(e.j) + ")");
        }
        g.add_edge(static_cast<int>(e.i), static_cast<int>(e.j), e.w);
    }
    return g;
}

inline Matrix load_features(const std::string& path, int n_nodes) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cli_runner", "cannot open features file: " + path);
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view cell =
                std::string_view(line).substr(start, comma == std::string::npos
                                                         ? std::string::npos
                                                         : comma - start);
            double v = 0.0;
            // Tolerate surrounding spaces.
            std::size_t b = cell.find_first_not_of(" \t\r");
            std::size_t e = cell.find_last_not_of(" \t\r");
            if (b == std::string_view::npos || !detail::parse_double(cell.substr(b, e - b + 1), v) ||
                !std::isfinite(v)) {
                throw parse_error("cli_runner", path + ":" + std::to_string(line_no) +
                                                    ": non-numeric cell `" + std::string(cell) +
                                                    "`");
            }
            row.push_back(v);
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw parse_error("cli_runner", path + ":" + std::to_string(line_no) +
                                                ": ragged row, expected " +
                                                std::to_string(rows.front().size()) +
                                                " columns, got " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (static_cast<int>(rows.size()) != n_nodes) {
        throw parse_error("cli_runner", path + ": feature rows (" + std::to_string(rows.size()) +
                                            ") do not match node count (" +
                                            std::to_string(n_nodes) + ")");
    }
    Matrix x(n_nodes, static_cast<Eigen::Index>(rows.front().size()));
    for (int r = 0; r < n_nodes; ++r) {
        for (std::size_t c = 0; c < rows.front().size(); ++c) {
            x(r, static_cast<Eigen::Index>(c)) = rows[static_cast<std::size_t>(r)][c];
        }
    }
    return x;
}

/// Atomic file write: contents land under the final name or not at all.
inline void atomic_write_file(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const std::string tmp = path + ".tmp~";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw io_error("cli_runner", "cannot open for writing: " + tmp);
        }
        out << contents;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw io_error("cli_runner", "write failed: " + tmp);
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw io_error("cli_runner", "rename to " + path + " failed");
    }
}

inline void save_features(const std::string& path, const Matrix& x) {
    std::string out;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            if (c > 0) {
                out += ',';
            }
            out += detail::fmt17(x(r, c));
        }
        out += '\n';
    }
    atomic_write_file(path, out);
}

inline void save_trajectory(const std::string& path, const Trajectory& traj) {
    std::ostringstream out;
    write_trajectory(out, traj);
    atomic_write_file(path, out.str());
}

inline Matrix gaussian_features(int n_nodes, int dim, double scale, std::uint64_t seed) {
    if (n_nodes < 1 || dim < 1) {
        throw config_error("cli_runner", "feature synthesis needs n >= 1 and dim >= 1");
    }
    Rng rng(seed);
    Matrix x(n_nodes, dim);
    for (int r = 0; r < n_nodes; ++r) {
        for (int c = 0; c < dim; ++c) {
            x(r, c) = scale * rng.normal();
        }
    }
    return x;
}

struct SynthGraphParams {
    double p = 0.0;       // er: edge probability in (0, 1]
    int blocks = 2;       // sbm
    double p_in = 0.0;    // sbm: within-block probability
    double p_out = 0.0;   // sbm: between-block probability
};

namespace detail {

// Keep the largest connected component and remap ids to 0..m-1 preserving
// order.  Ties go to the component with the smallest member id.
inline Graph largest_component(const Graph& g) {
    const int n = g.n_nodes();
    const auto nbrs = g.neighbor_lists();
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    int n_comps = 0;
    for (int start = 0; start < n; ++start) {
        if (comp[static_cast<std::size_t>(start)] >= 0) {
            continue;
        }
        std::vector<int> stack{start};
        comp[static_cast<std::size_t>(start)] = n_comps;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : nbrs[static_cast<std::size_t>(u)]) {
                if (comp[static_cast<std::size_t>(v)] < 0) {
                    comp[static_cast<std::size_t>(v)] = n_comps;
                    stack.push_back(v);
                }
            }
        }
        ++n_comps;
    }
    if (n_comps <= 1) {
        return g;
    }
    std::vector<int> size(static_cast<std::size_t>(n_comps), 0);
    for (int u = 0; u < n; ++u) {
        ++size[static_cast<std::size_t>(comp[static_cast<std::size_t>(u)])];
    }
    int best = 0;
    for (int c = 1; c < n_comps; ++c) {
        if (size[static_cast<std::size_t>(c)] > size[static_cast<std::size_t>(best)]) {
            best = c;
        }
    }
    std::vector<int> remap(static_cast<std::size_t>(n), -1);
    int next = 0;
    for (int u = 0; u < n; ++u) {
        if (comp[static_cast<std::size_t>(u)] == best) {
            remap[static_cast<std::size_t>(u)] = next++;
        }
    }
    Graph out(next);
    for (const auto& [key, w] : g.edges()) {
        const int a = remap[static_cast<std::size_t>(key.first)];
        const int b = remap[static_cast<std::size_t>(key.second)];
        if (a >= 0 && b >= 0) {
            out.add_edge(a, b, w);
        }
    }
    return out;
}

}  // namespace detail

/// Seeded synthetic graphs: `ring`, `er`, `sbm` (contiguous equal blocks).
/// The result is connected; if sampling disconnects it, the largest component
/// is kept with remapped ids.
inline Graph synth_graph(const std::string& kind, int n, const SynthGraphParams& params,
                         std::uint64_t seed) {
    if (n < 2) {
        throw config_error("cli_runner", "synth_graph needs n >= 2");
    }
    if (kind == "ring") {
        Graph g(n);
        for (int i = 0; i < n; ++i) {
            const int j = (i + 1) % n;
            if (!g.has_edge(i, j)) {
                g.add_edge(i, j, 1.0);
            }
        }
        return g;
    }
    if (kind == "er") {
        if (!(params.p > 0.0) || params.p > 1.0) {
            throw config_error("cli_runner", "er graph needs p in (0, 1]");
        }
        Rng rng(seed);
        Graph g(n);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (rng.bernoulli(params.p)) {
                    g.add_edge(i, j, 1.0);
                }
            }
        }
        return detail::largest_component(g);
    }
    if (kind == "sbm") {
        if (params.blocks < 1 || params.blocks > n) {
            throw config_error("cli_runner", "sbm needs 1 <= blocks <= n");
        }
        if (!(params.p_in > 0.0) || params.p_in > 1.0 || params.p_out < 0.0 ||
            params.p_out > 1.0) {
            throw config_error("cli_runner", "sbm needs p_in in (0, 1] and p_out in [0, 1]");
        }
        Rng rng(seed);
        Graph g(n);
        const auto block_of = [&](int v) {
            return static_cast<long>(v) * params.blocks / n;
        };
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double p = block_of(i) == block_of(j) ? params.p_in : params.p_out;
                if (rng.bernoulli(p)) {
                    g.add_edge(i, j, 1.0);
                }
            }
        }
        return detail::largest_component(g);
    }
    throw config_error("cli_runner", "unknown graph kind: " + kind);
}

}  // namespace frond
