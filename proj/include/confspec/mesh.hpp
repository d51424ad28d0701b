#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <utility>
#include <vector>

#include "conformal_maps.hpp"
#include "errors.hpp"

namespace confspec {

using Point2 = std::array<double, 2>;

struct Mesh {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<char> boundary_flags;
  std::vector<cplx> disc_preimage;  // empty for meshes not built from the disc

  double signed_area(std::size_t t) const {
    const auto& [a, b, c] = triangles[t];
    const auto& pa = vertices[a];
    const auto& pb = vertices[b];
    const auto& pc = vertices[c];
    return 0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]));
  }

  double total_area() const {
    double sum = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) sum += signed_area(t);
    return sum;
  }

  /// Smallest interior angle of a triangle, in degrees.
  double min_angle_deg(std::size_t t) const {
    double best = 180.0;
    for (int k = 0; k < 3; ++k) {
      const auto& p = vertices[triangles[t][k]];
      const auto& q = vertices[triangles[t][(k + 1) % 3]];
      const auto& r = vertices[triangles[t][(k + 2) % 3]];
      const double ux = q[0] - p[0], uy = q[1] - p[1];
      const double vx = r[0] - p[0], vy = r[1] - p[1];
      const double angle = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
      best = std::min(best, angle * 180.0 / std::numbers::pi);
    }
    return best;
  }

  double max_edge_length() const {
    double h = 0.0;
    for (const auto& tri : triangles) {
      for (int k = 0; k < 3; ++k) {
        const auto& p = vertices[tri[k]];
        const auto& q = vertices[tri[(k + 1) % 3]];
        h = std::max(h, std::hypot(q[0] - p[0], q[1] - p[1]));
      }
    }
    return h;
  }

  std::size_t edge_count() const {
    std::set<std::pair<int, int>> edges;
    for (const auto& tri : triangles) {
      for (int k = 0; k < 3; ++k) {
        const int a = tri[k];
        const int b = tri[(k + 1) % 3];
        edges.emplace(std::min(a, b), std::max(a, b));
      }
    }
    return edges.size();
  }

  /// V - E + F; 1 for a triangulated disc.
  long euler_characteristic() const {
    return static_cast<long>(vertices.size()) - static_cast<long>(edge_count()) +
           static_cast<long>(triangles.size());
  }
};

/// Structured polar triangulation of the unit disc: a centre vertex and n
/// rings, ring i carrying 6i vertices.
inline Mesh disc_mesh(int n) {
  if (n < 4) fail(ErrorKind::ParameterOutOfRange, "mesh resolution n must be >= 4");
  Mesh mesh;
  std::vector<int> ring_start(n + 1);
  mesh.disc_preimage.push_back({0.0, 0.0});
  ring_start[0] = 0;
  for (int i = 1; i <= n; ++i) {
    ring_start[i] = static_cast<int>(mesh.disc_preimage.size());
    const double radius = static_cast<double>(i) / n;
    for (int j = 0; j < 6 * i; ++j) {
      mesh.disc_preimage.push_back(std::polar(radius, 2.0 * std::numbers::pi * j / (6.0 * i)));
    }
  }
  auto ring_vertex = [&](int i, int j) {
    if (i == 0) return 0;
    return ring_start[i] + (j % (6 * i));
  };
  for (int s = 0; s < 6; ++s) mesh.triangles.push_back({0, ring_vertex(1, s), ring_vertex(1, s + 1)});
  for (int i = 1; i < n; ++i) {
    for (int s = 0; s < 6; ++s) {
      for (int j = 0; j < i; ++j) {
        const int in0 = ring_vertex(i, s * i + j);
        const int in1 = ring_vertex(i, s * i + j + 1);
        const int out0 = ring_vertex(i + 1, s * (i + 1) + j);
        const int out1 = ring_vertex(i + 1, s * (i + 1) + j + 1);
        mesh.triangles.push_back({in0, out0, out1});
        mesh.triangles.push_back({in0, out1, in1});
      }
      mesh.triangles.push_back({ring_vertex(i, s * i + i), ring_vertex(i + 1, s * (i + 1) + i),
                                ring_vertex(i + 1, s * (i + 1) + i + 1)});
    }
  }
  for (const auto& w : mesh.disc_preimage) mesh.vertices.push_back({w.real(), w.imag()});
  mesh.boundary_flags.assign(mesh.vertices.size(), 0);
  for (int j = 0; j < 6 * n; ++j) mesh.boundary_flags[ring_start[n] + j] = 1;
  return mesh;
}

inline constexpr double kMinAngleDeg = 5.0;

/// Rejects inverted or degenerate triangles; min-angle quality is required
/// except on triangles within two rings of a boundary derivative zero, where
/// the image legitimately has a cusp.
inline void check_mesh_quality(const Mesh& mesh, const std::vector<cplx>& cusp_preimages = {}, double ring_width = 0.0) {
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!(mesh.signed_area(t) > 0.0)) {
      fail(ErrorKind::MeshQualityFailure, "triangle " + std::to_string(t) + " is degenerate or inverted");
    }
    bool near_cusp = false;
    if (!mesh.disc_preimage.empty()) {
      for (int k = 0; k < 3 && !near_cusp; ++k) {
        for (const auto& c : cusp_preimages) {
          if (std::abs(mesh.disc_preimage[mesh.triangles[t][k]] - c) < 2.0 * ring_width + 1e-12) near_cusp = true;
        }
      }
    }
    if (!near_cusp && mesh.min_angle_deg(t) < kMinAngleDeg) {
      fail(ErrorKind::MeshQualityFailure, "triangle " + std::to_string(t) + " has an angle below 5 degrees");
    }
  }
}

/// Disc mesh pushed forward through psi.
inline Mesh build_mesh(const ConformalMap& map, int n) {
  Mesh mesh = disc_mesh(n);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const cplx z = eval_map(map, mesh.disc_preimage[v]);
    mesh.vertices[v] = {z.real(), z.imag()};
  }
  std::vector<cplx> cusps;
  for (const auto& z : deriv_zeros(map)) {
    if (z.on_boundary) cusps.push_back(z.location);
  }
  check_mesh_quality(mesh, cusps, 1.0 / n);
  return mesh;
}

/// Uniform right-triangle mesh of the square [0, side]^2 with n cells per side.
inline Mesh square_mesh(double side, int n) {
  if (n < 1 || !(side > 0.0)) fail(ErrorKind::ParameterOutOfRange, "invalid square mesh parameters");
  Mesh mesh;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices.push_back({side * i / n, side * j / n});
      mesh.boundary_flags.push_back(i == 0 || j == 0 || i == n || j == n);
    }
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return mesh;
}

/// OFF export (z = 0) for external viewers.
inline void write_off(const Mesh& mesh, std::ostream& os) {
  os << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
  os.precision(17);
  for (const auto& v : mesh.vertices) os << v[0] << ' ' << v[1] << " 0\n";
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace confspec
