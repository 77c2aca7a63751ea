#include "dhs/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dhs/errors.hpp"

namespace dhs {

namespace {

std::string next_content_line(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
    }
    return {};
}

} // namespace

SurfaceMesh read_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open mesh file: " + path);
    std::string header = next_content_line(in);
    std::istringstream hs(header);
    std::string magic;
    hs >> magic;
    if (magic != "OFF") throw InputError("not an OFF file: " + path);

    long nv = -1, nf = -1, ne = 0;
    if (!(hs >> nv >> nf >> ne)) {
        std::istringstream cs(next_content_line(in));
        if (!(cs >> nv >> nf >> ne)) throw InputError("OFF: missing element counts");
    }
    if (nv < 3 || nf < 1) throw InputError("OFF: implausible element counts");

    SurfaceMesh mesh;
    mesh.vertices.reserve(nv);
    for (long i = 0; i < nv; ++i) {
        std::istringstream vs(next_content_line(in));
        Eigen::Vector3d p;
        if (!(vs >> p.x() >> p.y() >> p.z())) throw InputError("OFF: bad vertex line");
        mesh.vertices.push_back(p);
    }
    mesh.faces.reserve(nf);
    for (long i = 0; i < nf; ++i) {
        std::istringstream fs(next_content_line(in));
        int k;
        if (!(fs >> k)) throw InputError("OFF: bad face line");
        if (k != 3) throw InputError("OFF: only triangle faces are supported");
        std::array<int, 3> f{};
        if (!(fs >> f[0] >> f[1] >> f[2])) throw InputError("OFF: bad face indices");
        for (int v : f)
            if (v < 0 || v >= nv) throw InputError("OFF: face index out of range");
        mesh.faces.push_back(f);
    }
    return mesh;
}

SurfaceMesh read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open mesh file: " + path);
    SurfaceMesh mesh;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Eigen::Vector3d p;
            if (!(ls >> p.x() >> p.y() >> p.z())) throw InputError("OBJ: bad vertex line");
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<int> corners;
            std::string tok;
            while (ls >> tok) {
                // accept v, v/vt, v//vn, v/vt/vn
                int v = std::stoi(tok.substr(0, tok.find('/')));
                if (v < 0) throw InputError("OBJ: negative indices are not supported");
                corners.push_back(v - 1);
            }
            if (corners.size() != 3) throw InputError("OBJ: only triangle faces are supported");
            for (int v : corners)
                if (v < 0 || v >= static_cast<int>(mesh.vertices.size()))
                    throw InputError("OBJ: face index out of range");
            mesh.faces.push_back({corners[0], corners[1], corners[2]});
        }
    }
    if (mesh.vertices.size() < 3 || mesh.faces.empty()) throw InputError("OBJ: no usable geometry");
    return mesh;
}

void write_off(const std::string& path, const SurfaceMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write mesh file: " + path);
    out.precision(17);
    out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
    for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

Polyline read_polyline(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open polyline file: " + path);
    Polyline poly;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Eigen::Vector2d p;
        if (ls >> p.x() >> p.y()) poly.vertices.push_back(p);
    }
    if (poly.vertices.size() < 3) throw InputError("polyline: need at least 3 vertices");
    return poly;
}

void write_polyline(const std::string& path, const Polyline& poly) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write polyline file: " + path);
    out.precision(17);
    for (const auto& v : poly.vertices) out << v.x() << ' ' << v.y() << '\n';
}

double face_area(const SurfaceMesh& mesh, int f) {
    const auto& t = mesh.faces[f];
    Eigen::Vector3d a = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    Eigen::Vector3d b = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    return 0.5 * a.cross(b).norm();
}

SurfaceTopology validate_surface(const SurfaceMesh& mesh) {
    const int nv = static_cast<int>(mesh.vertices.size());
    const int nf = static_cast<int>(mesh.faces.size());
    if (nv < 4 || nf < 4) throw TopologyError("surface: too few elements for a closed surface");

    double mean_area = 0.0;
    for (int f = 0; f < nf; ++f) mean_area += face_area(mesh, f);
    mean_area /= nf;
    for (int f = 0; f < nf; ++f)
        if (face_area(mesh, f) <= 1e-12 * mean_area)
            throw GeometryError("surface: degenerate face " + std::to_string(f));

    // directed half-edge census: closed + consistently oriented means every
    // undirected edge appears exactly once in each direction
    std::map<std::array<int, 2>, std::array<int, 2>> half; // (lo,hi) -> faces (fwd, rev)
    for (int f = 0; f < nf; ++f) {
        const auto& t = mesh.faces[f];
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw TopologyError("surface: face with repeated vertex");
        for (int c = 0; c < 3; ++c) {
            int a = t[c], b = t[(c + 1) % 3];
            std::array<int, 2> key{std::min(a, b), std::max(a, b)};
            int dir = (a < b) ? 0 : 1;
            auto [it, fresh] = half.try_emplace(key, std::array<int, 2>{-1, -1});
            if (it->second[dir] != -1)
                throw TopologyError("surface: non-manifold or inconsistently oriented edge");
            it->second[dir] = f;
        }
    }
    SurfaceTopology topo;
    topo.edges.reserve(half.size());
    topo.edge_faces.reserve(half.size());
    std::map<std::array<int, 2>, int> edge_id;
    for (const auto& [key, fcs] : half) {
        if (fcs[0] == -1 || fcs[1] == -1)
            throw TopologyError("surface: open boundary edge (" + std::to_string(key[0]) + "," +
                                std::to_string(key[1]) + ")");
        edge_id[key] = static_cast<int>(topo.edges.size());
        topo.edges.push_back(key);
        topo.edge_faces.push_back(fcs);
    }
    topo.face_edges.resize(nf);
    for (int f = 0; f < nf; ++f) {
        const auto& t = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            int a = t[c], b = t[(c + 1) % 3];
            topo.face_edges[f][c] = edge_id.at({std::min(a, b), std::max(a, b)});
        }
    }
    topo.vertex_neighbors.resize(nv);
    for (const auto& e : topo.edges) {
        topo.vertex_neighbors[e[0]].push_back(e[1]);
        topo.vertex_neighbors[e[1]].push_back(e[0]);
    }
    for (auto& nb : topo.vertex_neighbors) {
        std::sort(nb.begin(), nb.end());
        if (nb.empty()) throw TopologyError("surface: isolated vertex");
    }
    return topo;
}

void validate_polyline(const Polyline& poly) {
    const int n = static_cast<int>(poly.vertices.size());
    if (n < 4) throw TopologyError("polyline: need at least 4 vertices for a closed curve");
    double mean_len = 0.0;
    for (int i = 0; i < n; ++i) mean_len += (poly.vertices[(i + 1) % n] - poly.vertices[i]).norm();
    mean_len /= n;
    for (int i = 0; i < n; ++i)
        if ((poly.vertices[(i + 1) % n] - poly.vertices[i]).norm() <= 1e-12 * mean_len)
            throw GeometryError("polyline: degenerate segment " + std::to_string(i));
}

SurfaceMesh icosphere(double radius, int subdivisions) {
    if (radius <= 0.0) throw InputError("icosphere: radius must be positive");
    if (subdivisions < 0 || subdivisions > 8) throw InputError("icosphere: subdivision level out of range");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (auto& v : verts) v = radius * v.normalized();

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::array<int, 2>, int> midpoint;
        auto mid = [&](int a, int b) {
            std::array<int, 2> key{std::min(a, b), std::max(a, b)};
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Eigen::Vector3d p = radius * (verts[a] + verts[b]).normalized();
            verts.push_back(p);
            int id = static_cast<int>(verts.size()) - 1;
            midpoint[key] = id;
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    return SurfaceMesh{std::move(verts), std::move(faces)};
}

Polyline regular_polygon(double radius, int n) {
    if (radius <= 0.0) throw InputError("regular_polygon: radius must be positive");
    if (n < 4) throw InputError("regular_polygon: need at least 4 vertices");
    Polyline poly;
    poly.vertices.reserve(n);
    const double two_pi = 6.283185307179586476925286766559;
    for (int k = 0; k < n; ++k) {
        double a = two_pi * k / n;
        poly.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a));
    }
    return poly;
}

} // namespace dhs
