#include "dhs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dhs/errors.hpp"

namespace dhs {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

double gauss_weight(const Eigen::VectorXd& x) { return std::exp(-0.5 * x.squaredNorm()); }

// surface area of the unit m-sphere: 2 pi^((m+1)/2) / Gamma((m+1)/2)
double unit_sphere_area(int m) {
    return 2.0 * std::pow(kPi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

Eigen::VectorXd embed(const Eigen::Vector3d& p, int n) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    x.head(3) = p;
    return x;
}

// orthonormal tangent pair at a sphere point with radial unit normal u,
// living in the first three ambient coordinates
void sphere_tangents(const Eigen::Vector3d& u, Eigen::Vector3d& t1, Eigen::Vector3d& t2) {
    int axis = 0;
    for (int a = 1; a < 3; ++a)
        if (std::abs(u[a]) < std::abs(u[axis])) axis = a;
    Eigen::Vector3d e = Eigen::Vector3d::Unit(axis);
    t1 = (e - u.dot(e) * u).normalized();
    t2 = u.cross(t1);
}

struct JetResult {
    Eigen::MatrixXd tangent;   // n x m orthonormal
    Eigen::VectorXd normal;    // unit
    Eigen::MatrixXd h;         // m x m in the orthonormal tangent frame
};

// degree-k graph fit over the estimated tangent plane; returns the exact
// curvature of the fitted graph at the center vertex
JetResult surface_jet(const Eigen::Vector3d& center, const Eigen::Vector3d& n0,
                      const Eigen::Vector3d& t1, const Eigen::Vector3d& t2,
                      const std::vector<Eigen::Vector3d>& nbrs) {
    const int npts = static_cast<int>(nbrs.size());
    int degree = npts >= 18 ? 4 : (npts >= 12 ? 3 : 2);
    int nmono = degree == 4 ? 14 : (degree == 3 ? 9 : 5);
    if (npts < nmono)
        throw GeometryError("curvature fit: stencil too small (" + std::to_string(npts) + " points)");

    double s = 0.0;
    for (const auto& p : nbrs) {
        Eigen::Vector3d d = p - center;
        s += std::hypot(d.dot(t1), d.dot(t2));
    }
    s /= npts;
    if (s <= 0.0) throw GeometryError("curvature fit: collapsed stencil");

    Eigen::MatrixXd A(npts, nmono);
    Eigen::VectorXd rhs(npts);
    for (int i = 0; i < npts; ++i) {
        Eigen::Vector3d d = nbrs[i] - center;
        double u = d.dot(t1) / s, v = d.dot(t2) / s;
        int c = 0;
        A(i, c++) = u;
        A(i, c++) = v;
        A(i, c++) = u * u;
        A(i, c++) = u * v;
        A(i, c++) = v * v;
        if (degree >= 3) {
            A(i, c++) = u * u * u;
            A(i, c++) = u * u * v;
            A(i, c++) = u * v * v;
            A(i, c++) = v * v * v;
        }
        if (degree >= 4) {
            A(i, c++) = u * u * u * u;
            A(i, c++) = u * u * u * v;
            A(i, c++) = u * u * v * v;
            A(i, c++) = u * v * v * v;
            A(i, c++) = v * v * v * v;
        }
        rhs(i) = d.dot(n0) / s;
    }
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);

    Eigen::Vector2d grad(coef(0), coef(1)); // dimensionless
    Eigen::Matrix2d hess;
    hess << 2.0 * coef(2), coef(3), coef(3), 2.0 * coef(4);
    hess /= s;

    double g2 = grad.squaredNorm();
    Eigen::Matrix2d metric = Eigen::Matrix2d::Identity() + grad * grad.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(metric);
    Eigen::Matrix2d ginvsqrt = es.operatorInverseSqrt();

    JetResult out;
    out.h = ginvsqrt * (hess / std::sqrt(1.0 + g2)) * ginvsqrt;
    Eigen::MatrixXd frame(3, 2);
    frame.col(0) = t1 + grad(0) * n0;
    frame.col(1) = t2 + grad(1) * n0;
    out.tangent = frame * ginvsqrt;
    out.normal = (n0 - grad(0) * t1 - grad(1) * t2) / std::sqrt(1.0 + g2);
    return out;
}

} // namespace

const char* to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::analytic_sphere: return "analytic-sphere";
        case BackendKind::analytic_circle: return "analytic-circle";
        case BackendKind::mesh_surface: return "mesh-surface";
        case BackendKind::mesh_curve: return "mesh-curve";
    }
    return "unknown";
}

double SamplePoint::second_fundamental_norm_sq() const {
    double s = 0.0;
    for (const auto& block : second_fundamental) s += block.squaredNorm();
    return s;
}

double GeometryBackend::weighted_volume() const {
    double s = 0.0;
    for (const auto& q : samples) s += q.quad_weight;
    return s;
}

GeometryBackend sphere_backend(int m, int ambient_n, int resolution, double radius) {
    if (m < 1) throw DimensionError("sphere_backend: intrinsic dimension must be >= 1");
    if (ambient_n < m + 1)
        throw DimensionError("sphere_backend: ambient dimension must be at least m+1");
    double r = radius > 0.0 ? radius : std::sqrt(static_cast<double>(m));
    const double wgauss = std::exp(-0.5 * r * r);
    const double exact_volume = unit_sphere_area(m) * std::pow(r, m) * wgauss;

    GeometryBackend bk;
    bk.m = m;
    bk.n = ambient_n;
    bk.curvature_estimated = false;
    bk.sectional_curvature = (m == 1) ? 0.0 : 1.0 / (r * r);

    auto radial_sample = [&](const Eigen::VectorXd& x, Eigen::MatrixXd tangent) {
        SamplePoint q;
        q.position = x;
        q.tangent = std::move(tangent);
        q.normal = Eigen::MatrixXd::Zero(ambient_n, ambient_n - m);
        q.normal.col(0) = x / r;
        int extra = 1;
        // equatorial embedding: remaining normal directions are the unused axes
        for (int a = m + 1; a < ambient_n; ++a) q.normal.col(extra++)[a] = 1.0;
        q.second_fundamental.assign(ambient_n - m, Eigen::MatrixXd::Zero(m, m));
        q.second_fundamental[0] = -(1.0 / r) * Eigen::MatrixXd::Identity(m, m);
        q.mean_curvature = -(m / (r * r)) * x;
        return q;
    };

    if (m == 1) {
        int nv = resolution > 0 ? resolution : 256;
        if (nv < 4) throw InputError("sphere_backend: circle resolution must be >= 4");
        bk.kind = BackendKind::analytic_circle;
        bk.curve = regular_polygon(r, nv);
        bk.parametric_arc = true;
        const double warc = (2.0 * kPi * r / nv) * wgauss;
        for (int k = 0; k < nv; ++k) {
            double a = 2.0 * kPi * k / nv;
            Eigen::VectorXd x = Eigen::VectorXd::Zero(ambient_n);
            x[0] = r * std::cos(a);
            x[1] = r * std::sin(a);
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ambient_n, 1);
            t(0, 0) = -std::sin(a);
            t(1, 0) = std::cos(a);
            SamplePoint q = radial_sample(x, t);
            q.quad_weight = warc;
            bk.samples.push_back(std::move(q));
        }
        return bk;
    }

    if (m == 2) {
        int level = resolution >= 0 ? resolution : 4;
        bk.kind = BackendKind::analytic_sphere;
        SurfaceMesh mesh = icosphere(r, level);
        const int nv = static_cast<int>(mesh.vertices.size());
        std::vector<double> lumped(nv, 0.0);
        double flat_total = 0.0;
        for (int f = 0; f < static_cast<int>(mesh.faces.size()); ++f) {
            double a = face_area(mesh, f);
            flat_total += a;
            for (int v : mesh.faces[f]) lumped[v] += a / 3.0;
        }
        // exact total weighted measure; the same factor rescales complex masses
        bk.measure_scale = (4.0 * kPi * r * r) / flat_total;
        for (int v = 0; v < nv; ++v) {
            Eigen::Vector3d u = mesh.vertices[v] / r;
            Eigen::Vector3d t1, t2;
            sphere_tangents(u, t1, t2);
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ambient_n, 2);
            t.col(0).head(3) = t1;
            t.col(1).head(3) = t2;
            SamplePoint q = radial_sample(embed(mesh.vertices[v], ambient_n), t);
            q.quad_weight = lumped[v] * wgauss * bk.measure_scale;
            bk.samples.push_back(std::move(q));
        }
        bk.surface = std::move(mesh);
        return bk;
    }

    // m >= 3: cross-polytope nodes (a degree-2 exact equal-weight rule), no grid
    bk.kind = BackendKind::analytic_sphere;
    const int npts = 2 * (m + 1);
    const double w = exact_volume / npts;
    for (int a = 0; a <= m; ++a) {
        for (int sgn : {1, -1}) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(ambient_n);
            x[a] = sgn * r;
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ambient_n, m);
            int c = 0;
            for (int b = 0; b <= m; ++b)
                if (b != a) t(b, c++) = 1.0;
            SamplePoint q = radial_sample(x, t);
            q.quad_weight = w;
            bk.samples.push_back(std::move(q));
        }
    }
    return bk;
}

GeometryBackend backend_from_surface(const SurfaceMesh& mesh) {
    SurfaceTopology topo = validate_surface(mesh);
    const int nv = static_cast<int>(mesh.vertices.size());

    GeometryBackend bk;
    bk.kind = BackendKind::mesh_surface;
    bk.m = 2;
    bk.n = 3;
    bk.curvature_estimated = true;

    // area-weighted vertex normals
    std::vector<Eigen::Vector3d> vnormal(nv, Eigen::Vector3d::Zero());
    std::vector<double> lumped(nv, 0.0);
    for (const auto& f : mesh.faces) {
        Eigen::Vector3d a = mesh.vertices[f[1]] - mesh.vertices[f[0]];
        Eigen::Vector3d b = mesh.vertices[f[2]] - mesh.vertices[f[0]];
        Eigen::Vector3d cr = 0.5 * a.cross(b); // area-scaled normal
        for (int v : f) {
            vnormal[v] += cr;
            lumped[v] += cr.norm() / 3.0;
        }
    }

    for (int v = 0; v < nv; ++v) {
        // expand rings until the quartic fit is well overdetermined
        std::set<int> stencil(topo.vertex_neighbors[v].begin(), topo.vertex_neighbors[v].end());
        for (int pass = 0; pass < 3 && static_cast<int>(stencil.size()) < 18; ++pass) {
            std::set<int> grown = stencil;
            for (int u : stencil)
                grown.insert(topo.vertex_neighbors[u].begin(), topo.vertex_neighbors[u].end());
            grown.erase(v);
            if (grown == stencil) break;
            stencil = std::move(grown);
        }
        std::vector<Eigen::Vector3d> nbrs;
        nbrs.reserve(stencil.size());
        for (int u : stencil) nbrs.push_back(mesh.vertices[u]);

        Eigen::Vector3d n0 = vnormal[v].normalized();
        Eigen::Vector3d t1, t2;
        sphere_tangents(n0, t1, t2);
        JetResult jet = surface_jet(mesh.vertices[v], n0, t1, t2, nbrs);

        SamplePoint q;
        q.position = mesh.vertices[v];
        q.tangent = jet.tangent;
        q.normal = jet.normal;
        q.second_fundamental = {jet.h};
        q.mean_curvature = jet.h.trace() * jet.normal;
        q.quad_weight = lumped[v] * gauss_weight(q.position);
        bk.samples.push_back(std::move(q));
    }
    bk.surface = mesh;
    return bk;
}

GeometryBackend backend_from_polyline(const Polyline& poly) {
    validate_polyline(poly);
    const int nv = static_cast<int>(poly.vertices.size());

    GeometryBackend bk;
    bk.kind = BackendKind::mesh_curve;
    bk.m = 1;
    bk.n = 2;
    bk.curvature_estimated = true;

    for (int v = 0; v < nv; ++v) {
        const Eigen::Vector2d& c = poly.vertices[v];
        Eigen::Vector2d t0 = (poly.vertices[(v + 1) % nv] - poly.vertices[(v + nv - 1) % nv]).normalized();
        Eigen::Vector2d n0(t0.y(), -t0.x());

        std::vector<double> us, ws;
        std::set<int> seen{v};
        for (int off : {-2, -1, 1, 2}) {
            int u = ((v + off) % nv + nv) % nv;
            if (!seen.insert(u).second) continue;
            Eigen::Vector2d d = poly.vertices[u] - c;
            us.push_back(d.dot(t0));
            ws.push_back(d.dot(n0));
        }
        const int npts = static_cast<int>(us.size());
        const int nmono = std::min(npts, 4);
        if (nmono < 2) throw GeometryError("curvature fit: curve stencil too small");
        double s = 0.0;
        for (double u : us) s += std::abs(u);
        s /= npts;
        Eigen::MatrixXd A(npts, nmono);
        Eigen::VectorXd rhs(npts);
        for (int i = 0; i < npts; ++i) {
            double u = us[i] / s, pw = u;
            for (int k = 0; k < nmono; ++k, pw *= u) A(i, k) = pw;
            rhs(i) = ws[i] / s;
        }
        Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);
        double b = coef(0);
        double kappa = (2.0 * coef(1) / s) / std::pow(1.0 + b * b, 1.5);
        double ib = 1.0 / std::sqrt(1.0 + b * b);

        SamplePoint q;
        q.position = c;
        q.tangent = Eigen::MatrixXd(2, 1);
        q.tangent.col(0) = (t0 + b * n0) * ib;
        q.normal = Eigen::MatrixXd(2, 1);
        q.normal.col(0) = (n0 - b * t0) * ib;
        q.second_fundamental = {Eigen::MatrixXd::Constant(1, 1, kappa)};
        q.mean_curvature = kappa * q.normal.col(0);
        double len = 0.5 * ((poly.vertices[(v + 1) % nv] - c).norm() +
                            (poly.vertices[(v + nv - 1) % nv] - c).norm());
        q.quad_weight = len * gauss_weight(q.position);
        bk.samples.push_back(std::move(q));
    }
    bk.curve = poly;
    return bk;
}

GeometryBackend mesh_backend(const std::string& path) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == "off") return backend_from_surface(read_off(path));
    if (ext == "obj") return backend_from_surface(read_obj(path));
    if (ext == "poly" || ext == "xy" || ext == "txt") return backend_from_polyline(read_polyline(path));
    throw InputError("mesh_backend: unrecognized mesh format: " + path);
}

double shrinker_residual(const GeometryBackend& backend) {
    double worst = 0.0;
    for (const auto& q : backend.samples) {
        Eigen::VectorXd xn = q.normal * (q.normal.transpose() * q.position);
        worst = std::max(worst, (q.mean_curvature + xn).norm());
    }
    return worst;
}

Eigen::MatrixXd hessian_half_xsq(const SamplePoint& q) {
    const int m = static_cast<int>(q.tangent.cols());
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(m, m);
    for (int a = 0; a < q.normal.cols(); ++a)
        T += q.second_fundamental[a] * q.normal.col(a).dot(q.position);
    return T;
}

Eigen::MatrixXd hessian_half_xsq_ambient(const SamplePoint& q) {
    const int m = static_cast<int>(q.tangent.cols());
    const int n = static_cast<int>(q.position.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd hij = Eigen::VectorXd::Zero(n);
            for (int a = 0; a < q.normal.cols(); ++a)
                hij += q.second_fundamental[a](i, j) * q.normal.col(a);
            T(i, j) += hij.dot(q.position);
        }
    }
    return T;
}

double frame_gradient_identity(const SamplePoint& q) { return q.tangent.squaredNorm(); }

} // namespace dhs
