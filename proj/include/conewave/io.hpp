#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "conewave/cover.hpp"
#include "conewave/degmat.hpp"
#include "conewave/graphgen.hpp"
#include "conewave/greens.hpp"

namespace conewave {

using nlohmann::json;

// Degree matrix file: {"k": 2, "d": [0,3,2,0]} row-major.
inline DegreeMatrix degree_matrix_from_json(const json& j) {
    if (!j.contains("k") || !j.contains("d"))
        throw std::invalid_argument("degree matrix json needs fields 'k' and 'd'");
    int k = j.at("k").get<int>();
    auto flat = j.at("d").get<std::vector<long long>>();
    if (k <= 0 || flat.size() != static_cast<size_t>(k) * k)
        throw std::invalid_argument("degree matrix 'd' must be a row-major k*k array");
    for (long long v : flat)
        if (v < 0) throw std::invalid_argument("degree matrix entries must be nonnegative");
    return DegreeMatrix(k, std::move(flat));
}

inline DegreeMatrix load_degree_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open degree matrix file: " + path);
    json j;
    in >> j;
    return degree_matrix_from_json(j);
}

inline json degree_matrix_to_json(const DegreeMatrix& d) {
    return json{{"k", d.k}, {"d", d.entries}};
}

inline json tree_ball_to_json(const TreeBall& b) {
    return json{{"types", b.types}, {"parents", b.parents}, {"boundary", b.boundary}};
}

inline json cone_greens_to_json(const DegreeMatrix& d, const ConeGreens& cg) {
    json entries = json::array();
    for (int i = 0; i < d.k; ++i)
        for (int j = 0; j < d.k; ++j)
            if (d(i, j) > 0)
                entries.push_back({{"parent", i},
                                   {"vertex", j},
                                   {"re", cg.gval(i, j).real()},
                                   {"im", cg.gval(i, j).imag()}});
    json roots = json::array();
    for (int t = 0; t < d.k; ++t)
        roots.push_back({{"type", t}, {"re", cg.root_diag[t].real()}, {"im", cg.root_diag[t].imag()}});
    return json{{"z_re", cg.z.real()},       {"z_im", cg.z.imag()},  {"g", entries},
                {"root_diag", roots},        {"iterations", cg.iterations},
                {"residual", cg.residual},   {"converged", cg.converged},
                {"extrapolated", cg.extrapolated}};
}

// Graph file: "N k" header, a line of N types, then one "u v" line per edge.
inline std::string graph_to_text(const TypedGraph& g) {
    std::ostringstream os;
    int k = 0;
    for (int t : g.types) k = std::max(k, t + 1);
    os << g.N << " " << k << "\n";
    for (long long v = 0; v < g.N; ++v) os << g.types[v] << (v + 1 == g.N ? "\n" : " ");
    for (auto [u, v] : g.edges) os << u << " " << v << "\n";
    return os.str();
}

inline TypedGraph graph_from_text(std::istream& in) {
    TypedGraph g;
    int k;
    if (!(in >> g.N >> k)) throw std::invalid_argument("bad graph header");
    g.types.resize(g.N);
    for (long long v = 0; v < g.N; ++v) in >> g.types[v];
    g.adj.assign(g.N, {});
    int u, v;
    while (in >> u >> v) {
        g.edges.emplace_back(std::min(u, v), std::max(u, v));
        g.adj[u].push_back(v);
        if (u != v)
            g.adj[v].push_back(u);
        else
            g.adj[u].push_back(v);
    }
    g.simple = true;
    for (size_t e = 0; e < g.edges.size(); ++e)
        if (g.edges[e].first == g.edges[e].second || (e > 0 && g.edges[e] == g.edges[e - 1]))
            g.simple = false;
    return g;
}

}  // namespace conewave
