#pragma once
#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace dhs {

// closed triangle mesh embedded in R^3
struct SurfaceMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> faces;
};

// closed curve in R^2, vertices in loop order, closing edge implied
struct Polyline {
    std::vector<Eigen::Vector2d> vertices;
};

// derived edge/face incidence of a surface mesh
struct SurfaceTopology {
    std::vector<std::array<int, 2>> edges;      // vertex pairs, lo < hi, lexicographic order
    std::vector<std::array<int, 2>> edge_faces; // incident faces per edge
    std::vector<std::array<int, 3>> face_edges; // edge ids per face, aligned with face corners
    std::vector<std::vector<int>> vertex_neighbors;
};

SurfaceMesh read_off(const std::string& path);
SurfaceMesh read_obj(const std::string& path);
void write_off(const std::string& path, const SurfaceMesh& mesh);

Polyline read_polyline(const std::string& path);
void write_polyline(const std::string& path, const Polyline& poly);

// throws TopologyError unless the mesh is a closed, consistently oriented
// 2-manifold; throws GeometryError on degenerate faces
SurfaceTopology validate_surface(const SurfaceMesh& mesh);
void validate_polyline(const Polyline& poly);

double face_area(const SurfaceMesh& mesh, int f);

// unit icosahedron-based sphere triangulation, vertices exactly at |x| = radius
SurfaceMesh icosphere(double radius, int subdivisions);
Polyline regular_polygon(double radius, int n);

} // namespace dhs
