#include "bronchopt/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "bronchopt/errors.hpp"

namespace bronchopt {

namespace {

// Quantized-coordinate key for vertex merging at 1e-6 mm tolerance.
struct VertexKey {
  int64_t x, y, z;
  bool operator==(const VertexKey& o) const {
    return x == o.x && y == o.y && z == o.z;
  }
};

struct VertexKeyHash {
  size_t operator()(const VertexKey& k) const {
    size_t h = 1469598103934665603ull;
    for (int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<size_t>(v);
      h *= 1099511628211ull;
    }
    return h;
  }
};

VertexKey quantize(const Eigen::Vector3d& v) {
  constexpr double inv_tol = 1e6;
  return {static_cast<int64_t>(std::llround(v.x() * inv_tol)),
          static_cast<int64_t>(std::llround(v.y() * inv_tol)),
          static_cast<int64_t>(std::llround(v.z() * inv_tol))};
}

struct EdgeKey {
  int a, b;
  bool operator==(const EdgeKey& o) const { return a == o.a && b == o.b; }
};

struct EdgeKeyHash {
  size_t operator()(const EdgeKey& k) const {
    return (static_cast<size_t>(k.a) << 32) ^ static_cast<size_t>(k.b);
  }
};

bool is_binary_stl(const std::filesystem::path& path, uint32_t& tri_count) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open mesh file: " + path.string());
  const auto size = in.tellg();
  if (size < 84) return false;
  in.seekg(80);
  uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  if (static_cast<uint64_t>(size) == 84ull + 50ull * n) {
    tri_count = n;
    return true;
  }
  return false;
}

AirwayMesh load_binary_stl(const std::filesystem::path& path, uint32_t n) {
  std::ifstream in(path, std::ios::binary);
  in.seekg(84);
  AirwayMesh mesh;
  mesh.vertices.reserve(static_cast<size_t>(n) * 3);
  mesh.triangles.reserve(n);
  std::array<char, 50> record{};
  for (uint32_t i = 0; i < n; ++i) {
    in.read(record.data(), 50);
    if (!in) throw ParseError("truncated binary stl: " + path.string());
    const int base = static_cast<int>(mesh.vertices.size());
    for (int k = 0; k < 3; ++k) {
      float xyz[3];
      std::memcpy(xyz, record.data() + 12 + k * 12, 12);
      mesh.vertices.emplace_back(xyz[0], xyz[1], xyz[2]);
    }
    mesh.triangles.emplace_back(base, base + 1, base + 2);
  }
  return mesh;
}

AirwayMesh load_ascii_stl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path.string());
  AirwayMesh mesh;
  std::string tok;
  std::vector<Eigen::Vector3d> facet;
  while (in >> tok) {
    if (tok == "vertex") {
      double x, y, z;
      if (!(in >> x >> y >> z)) {
        throw ParseError("bad vertex line in ascii stl: " + path.string());
      }
      facet.emplace_back(x, y, z);
    } else if (tok == "endfacet") {
      if (facet.size() != 3) {
        throw ParseError("facet without 3 vertices in: " + path.string());
      }
      const int base = static_cast<int>(mesh.vertices.size());
      for (const auto& v : facet) mesh.vertices.push_back(v);
      mesh.triangles.emplace_back(base, base + 1, base + 2);
      facet.clear();
    }
  }
  return mesh;
}

AirwayMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path.string());
  AirwayMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) {
        throw ParseError("bad obj vertex: " + line);
      }
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string ref;
      while (ls >> ref) {
        // "v", "v/vt", "v//vn", "v/vt/vn" forms; only the vertex index is used.
        const int vi = std::stoi(ref.substr(0, ref.find('/')));
        const int n = static_cast<int>(mesh.vertices.size());
        int resolved = vi > 0 ? vi - 1 : n + vi;
        if (resolved < 0 || resolved >= n) {
          throw ParseError("obj face index out of range: " + line);
        }
        idx.push_back(resolved);
      }
      if (idx.size() < 3) throw ParseError("obj face with <3 vertices: " + line);
      for (size_t k = 1; k + 1 < idx.size(); ++k) {
        mesh.triangles.emplace_back(idx[0], idx[k], idx[k + 1]);
      }
    }
  }
  return mesh;
}

}  // namespace

Eigen::AlignedBox3d AirwayMesh::bounds() const {
  Eigen::AlignedBox3d box;
  for (const auto& v : vertices) box.extend(v);
  return box;
}

void AirwayMesh::compute_normals() {
  normals.resize(triangles.size());
  for (size_t i = 0; i < triangles.size(); ++i) {
    const auto& t = triangles[i];
    const Eigen::Vector3d n = (vertices[t[1]] - vertices[t[0]])
                                  .cross(vertices[t[2]] - vertices[t[0]]);
    const double len = n.norm();
    normals[i] = len > 0.0 ? Eigen::Vector3d(n / len) : Eigen::Vector3d(0, 0, 1);
  }
}

void AirwayMesh::finalize() {
  std::unordered_map<VertexKey, int, VertexKeyHash> seen;
  std::vector<int> remap(vertices.size());
  std::vector<Eigen::Vector3d> merged;
  merged.reserve(vertices.size());
  for (size_t i = 0; i < vertices.size(); ++i) {
    const VertexKey key = quantize(vertices[i]);
    auto [it, inserted] = seen.emplace(key, static_cast<int>(merged.size()));
    if (inserted) merged.push_back(vertices[i]);
    remap[i] = it->second;
  }

  std::vector<Eigen::Vector3i> kept;
  kept.reserve(triangles.size());
  for (const auto& t : triangles) {
    const Eigen::Vector3i r(remap[t[0]], remap[t[1]], remap[t[2]]);
    if (r[0] == r[1] || r[1] == r[2] || r[0] == r[2]) continue;
    const Eigen::Vector3d cr = (merged[r[1]] - merged[r[0]])
                                   .cross(merged[r[2]] - merged[r[0]]);
    if (cr.squaredNorm() < 1e-20) continue;
    kept.push_back(r);
  }

  vertices = std::move(merged);
  triangles = std::move(kept);
  compute_normals();
  watertight = check_watertight(*this);
}

bool check_watertight(const AirwayMesh& mesh) {
  if (mesh.triangles.empty()) return false;
  std::unordered_map<EdgeKey, int, EdgeKeyHash> directed;
  directed.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const EdgeKey e{t[k], t[(k + 1) % 3]};
      if (++directed[e] > 1) return false;  // repeated directed edge
    }
  }
  for (const auto& [edge, count] : directed) {
    auto it = directed.find(EdgeKey{edge.b, edge.a});
    if (it == directed.end() || it->second != 1) return false;
  }
  return true;
}

AirwayMesh load_mesh(const std::filesystem::path& path) {
  AirwayMesh mesh;
  const std::string ext = [&] {
    std::string e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), ::tolower);
    return e;
  }();

  if (ext == ".obj") {
    mesh = load_obj(path);
  } else {
    uint32_t n = 0;
    mesh = is_binary_stl(path, n) ? load_binary_stl(path, n)
                                  : load_ascii_stl(path);
  }

  mesh.finalize();
  if (mesh.triangles.empty()) {
    throw EmptyMesh("no triangles after cleaning: " + path.string());
  }
  return mesh;
}

void save_stl(const AirwayMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write stl: " + path.string());
  std::array<char, 80> header{};
  std::snprintf(header.data(), header.size(), "bronchopt mesh");
  out.write(header.data(), 80);
  const uint32_t n = static_cast<uint32_t>(mesh.triangles.size());
  out.write(reinterpret_cast<const char*>(&n), 4);
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    float rec[12];
    const Eigen::Vector3d& nrm =
        i < mesh.normals.size() ? mesh.normals[i] : Eigen::Vector3d(0, 0, 1);
    for (int k = 0; k < 3; ++k) rec[k] = static_cast<float>(nrm[k]);
    for (int v = 0; v < 3; ++v) {
      for (int k = 0; k < 3; ++k) {
        rec[3 + v * 3 + k] = static_cast<float>(mesh.vertices[t[v]][k]);
      }
    }
    out.write(reinterpret_cast<const char*>(rec), 48);
    const uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(&attr), 2);
  }
  if (!out) throw IoError("short write on stl: " + path.string());
}

}  // namespace bronchopt
