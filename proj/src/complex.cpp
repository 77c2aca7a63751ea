#include "dhs/complex.hpp"

#include <cmath>
#include <fstream>

#include "dhs/errors.hpp"
#include "dhs/mesh.hpp"

namespace dhs {

namespace {

using Triplet = Eigen::Triplet<double>;

double gauss_at(const Eigen::VectorXd& x) { return std::exp(-0.5 * x.squaredNorm()); }

Eigen::Vector3d circumcenter(const Eigen::Vector3d& a, const Eigen::Vector3d& b0,
                             const Eigen::Vector3d& c0) {
    Eigen::Vector3d b = b0 - a, c = c0 - a;
    Eigen::Vector3d bxc = b.cross(c);
    double denom = 2.0 * bxc.squaredNorm();
    if (denom <= 0.0) throw GeometryError("circumcenter of degenerate face");
    return a + (b.squaredNorm() * c.cross(bxc) + c.squaredNorm() * bxc.cross(b)) / denom;
}

Eigen::VectorXd embed3(const Eigen::Vector3d& p, int n) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    x.head(3) = p;
    return x;
}

void check_positive(const Eigen::VectorXd& diag, int p) {
    for (int i = 0; i < diag.size(); ++i)
        if (!(diag[i] > 0.0))
            throw GeometryError("mass matrix for degree " + std::to_string(p) +
                                " has a nonpositive entry (cell " + std::to_string(i) +
                                "); mesh quality insufficient");
}

// curves: vertices 0..N-1, edges (i, i+1 mod N) in vertex order
WeightedComplex curve_complex(const GeometryBackend& bk) {
    const int nv = static_cast<int>(bk.samples.size());
    WeightedComplex cx;
    cx.m = 1;
    cx.kind = bk.kind;
    const bool arc = bk.parametric_arc;
    const double r = std::sqrt(bk.samples[0].xsq());

    Eigen::SparseMatrix<double> d0(nv, nv);
    std::vector<Triplet> trip;
    trip.reserve(2 * nv);
    Eigen::VectorXd m0(nv), m1(nv);
    cx.points.resize(2);
    cx.points[0].reserve(nv);
    cx.points[1].reserve(nv);

    for (int i = 0; i < nv; ++i) {
        cx.points[0].push_back(bk.samples[i].position);
        m0[i] = bk.samples[i].quad_weight;
    }
    for (int e = 0; e < nv; ++e) {
        int a = e, b = (e + 1) % nv;
        trip.emplace_back(e, a, -1.0);
        trip.emplace_back(e, b, 1.0);
        const Eigen::VectorXd& xa = bk.samples[a].position;
        const Eigen::VectorXd& xb = bk.samples[b].position;
        Eigen::VectorXd mid = 0.5 * (xa + xb);
        double len;
        if (arc) {
            // parametric grid: arc length and on-manifold weight point
            double cosang = std::min(1.0, std::max(-1.0, xa.dot(xb) / (r * r)));
            len = r * std::acos(cosang);
            mid = (r / mid.norm()) * mid;
        } else {
            len = (xb - xa).norm();
        }
        m1[e] = gauss_at(mid) / len * bk.measure_scale;
        cx.points[1].push_back(std::move(mid));
    }
    d0.setFromTriplets(trip.begin(), trip.end());
    cx.d.push_back(std::move(d0));
    check_positive(m0, 0);
    check_positive(m1, 1);
    cx.mass = {std::move(m0), std::move(m1)};
    return cx;
}

WeightedComplex surface_complex(const GeometryBackend& bk) {
    const SurfaceMesh& mesh = *bk.surface;
    SurfaceTopology topo = validate_surface(mesh);
    const int nv = static_cast<int>(mesh.vertices.size());
    const int ne = static_cast<int>(topo.edges.size());
    const int nf = static_cast<int>(mesh.faces.size());
    const bool analytic = bk.kind == BackendKind::analytic_sphere;
    const double r = std::sqrt(bk.samples[0].xsq());
    const int n = bk.n;

    WeightedComplex cx;
    cx.m = 2;
    cx.kind = bk.kind;
    cx.points.resize(3);

    // weight evaluation point: analytic backends pin it to the sphere
    auto weight_point = [&](const Eigen::Vector3d& p) {
        Eigen::Vector3d q = analytic ? Eigen::Vector3d((r / p.norm()) * p) : p;
        return embed3(q, n);
    };

    Eigen::VectorXd m0(nv), m1(ne), m2(nf);
    for (int v = 0; v < nv; ++v) {
        m0[v] = bk.samples[v].quad_weight;
        cx.points[0].push_back(bk.samples[v].position);
    }

    // d_0: canonical edge orientation low -> high
    std::vector<Triplet> t0;
    t0.reserve(2 * ne);
    for (int e = 0; e < ne; ++e) {
        t0.emplace_back(e, topo.edges[e][0], -1.0);
        t0.emplace_back(e, topo.edges[e][1], 1.0);
    }
    Eigen::SparseMatrix<double> d0(ne, nv);
    d0.setFromTriplets(t0.begin(), t0.end());

    // d_1: cyclic boundary of each face against canonical edge orientation
    std::vector<Triplet> t1;
    t1.reserve(3 * nf);
    for (int f = 0; f < nf; ++f) {
        const auto& t = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            int a = t[c], b = t[(c + 1) % 3];
            t1.emplace_back(f, topo.face_edges[f][c], a < b ? 1.0 : -1.0);
        }
    }
    Eigen::SparseMatrix<double> d1(nf, ne);
    d1.setFromTriplets(t1.begin(), t1.end());

    // cotangent edge weights
    Eigen::VectorXd cot_sum = Eigen::VectorXd::Zero(ne);
    for (int f = 0; f < nf; ++f) {
        const auto& t = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            int a = t[c], b = t[(c + 1) % 3], opp = t[(c + 2) % 3];
            Eigen::Vector3d u = mesh.vertices[a] - mesh.vertices[opp];
            Eigen::Vector3d w = mesh.vertices[b] - mesh.vertices[opp];
            double cross = u.cross(w).norm();
            if (cross <= 0.0) throw GeometryError("degenerate angle in face " + std::to_string(f));
            cot_sum[topo.face_edges[f][c]] += u.dot(w) / cross;
        }
    }
    for (int e = 0; e < ne; ++e) {
        const Eigen::Vector3d mid =
            0.5 * (mesh.vertices[topo.edges[e][0]] + mesh.vertices[topo.edges[e][1]]);
        Eigen::VectorXd wp = weight_point(mid);
        m1[e] = 0.5 * cot_sum[e] * gauss_at(wp) * bk.measure_scale;
        cx.points[1].push_back(std::move(wp));
    }
    for (int f = 0; f < nf; ++f) {
        Eigen::Vector3d cc = circumcenter(mesh.vertices[mesh.faces[f][0]],
                                          mesh.vertices[mesh.faces[f][1]],
                                          mesh.vertices[mesh.faces[f][2]]);
        Eigen::VectorXd wp = weight_point(cc);
        m2[f] = gauss_at(wp) / face_area(mesh, f) * bk.measure_scale;
        cx.points[2].push_back(std::move(wp));
    }

    check_positive(m0, 0);
    check_positive(m1, 1);
    check_positive(m2, 2);
    cx.d = {std::move(d0), std::move(d1)};
    cx.mass = {std::move(m0), std::move(m1), std::move(m2)};
    return cx;
}

} // namespace

Eigen::SparseMatrix<double> WeightedComplex::mass_matrix(int p) const {
    const Eigen::VectorXd& diag = mass.at(p);
    Eigen::SparseMatrix<double> mm(diag.size(), diag.size());
    std::vector<Triplet> trip;
    trip.reserve(diag.size());
    for (int i = 0; i < diag.size(); ++i) trip.emplace_back(i, i, diag[i]);
    mm.setFromTriplets(trip.begin(), trip.end());
    return mm;
}

WeightedComplex build_complex(const GeometryBackend& bk) {
    switch (bk.kind) {
        case BackendKind::analytic_circle:
        case BackendKind::mesh_curve:
            return curve_complex(bk);
        case BackendKind::analytic_sphere:
            if (!bk.surface)
                throw CapabilityError(
                    "backend has quadrature nodes but no discretization grid; "
                    "use the closed-form spectrum instead");
            return surface_complex(bk);
        case BackendKind::mesh_surface:
            return surface_complex(bk);
    }
    throw InputError("build_complex: unknown backend kind");
}

std::pair<Eigen::SparseMatrix<double>, Eigen::SparseMatrix<double>>
hodge_laplacian(const WeightedComplex& cx, int p) {
    if (p < 0 || p > cx.m)
        throw DimensionError("hodge_laplacian: degree " + std::to_string(p) + " out of range [0," +
                             std::to_string(cx.m) + "]");
    const int nc = cx.cells(p);
    Eigen::SparseMatrix<double> K(nc, nc);
    if (p < cx.m) {
        const auto& d = cx.d[p];
        K += Eigen::SparseMatrix<double>(d.transpose() * cx.mass[p + 1].asDiagonal() * d);
    }
    if (p > 0) {
        const auto& d = cx.d[p - 1];
        Eigen::SparseMatrix<double> half =
            cx.mass[p].asDiagonal() * d * cx.mass[p - 1].cwiseInverse().asDiagonal();
        K += Eigen::SparseMatrix<double>(half * Eigen::SparseMatrix<double>(d.transpose() * cx.mass[p].asDiagonal()));
    }
    return {std::move(K), cx.mass_matrix(p)};
}

Eigen::VectorXd drift_apply(const WeightedComplex& cx, const Eigen::VectorXd& u) {
    if (u.size() != cx.cells(0))
        throw DimensionError("drift_apply: expected " + std::to_string(cx.cells(0)) +
                             " vertex values, got " + std::to_string(u.size()));
    const auto& d0 = cx.d[0];
    Eigen::VectorXd flux = cx.mass[1].asDiagonal() * (d0 * u);
    return cx.mass[0].cwiseInverse().asDiagonal() * (d0.transpose() * flux);
}

Eigen::VectorXd carre_du_champ(const WeightedComplex& cx, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& v) {
    if (u.size() != cx.cells(0) || v.size() != cx.cells(0))
        throw DimensionError("carre_du_champ: vertex value size mismatch");
    const auto& d0 = cx.d[0];
    Eigen::VectorXd prod = (d0 * u).cwiseProduct(d0 * v).cwiseProduct(cx.mass[1]);
    // each edge contributes half its |du dv| energy to either endpoint
    Eigen::VectorXd lumped = Eigen::VectorXd::Zero(cx.cells(0));
    for (int k = 0; k < d0.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(d0, k); it; ++it)
            lumped[it.col()] += 0.5 * prod[it.row()];
    return cx.mass[0].cwiseInverse().asDiagonal() * lumped;
}

double weighted_quadrature(const WeightedComplex& cx, int p, const Eigen::VectorXd& cell_values,
                           const Eigen::VectorXd& phi) {
    if (p < 0 || p > cx.m) throw DimensionError("weighted_quadrature: degree out of range");
    if (cell_values.size() != cx.cells(p) || phi.size() != cx.cells(p))
        throw DimensionError("weighted_quadrature: cell count mismatch");
    return cell_values.cwiseProduct(cx.mass[p]).cwiseProduct(phi).dot(phi);
}

void write_matrix_market(const Eigen::SparseMatrix<double>& mat, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << mat.rows() << " " << mat.cols() << " " << mat.nonZeros() << "\n";
    out.precision(17);
    for (int k = 0; k < mat.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(mat, k); it; ++it)
            out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
    if (!out) throw InputError("write failed: " + path);
}

} // namespace dhs
