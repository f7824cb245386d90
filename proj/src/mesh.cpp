#include "vxf/mesh.hpp"

#include <Eigen/Geometry>
#include <cctype>
#include <fstream>
#include <sstream>

namespace vxf {

double Mesh::face_area(std::size_t f) const {
  const auto& t = triangles[f];
  const Eigen::Vector3d& a = vertices[t[0]].position;
  const Eigen::Vector3d& b = vertices[t[1]].position;
  const Eigen::Vector3d& c = vertices[t[2]].position;
  return 0.5 * (b - a).cross(c - a).norm();
}

double Mesh::total_area() const {
  double area = 0.0;
  for (std::size_t f = 0; f < triangles.size(); ++f) area += face_area(f);
  return area;
}

void Mesh::validate() const {
  if (face_semantics.size() != triangles.size())
    throw DataError("mesh has " + std::to_string(triangles.size()) + " faces but " +
                    std::to_string(face_semantics.size()) + " semantic labels");
  for (const auto& t : triangles)
    for (std::uint32_t v : t)
      if (v >= vertices.size())
        throw DataError("triangle vertex index " + std::to_string(v) + " out of range");
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw DataError(path + ":" + std::to_string(line) + ": " + what);
}

// Accepts "f 1 2 3" and "f 1/4/7 2/5/8 3/6/9"; only the vertex index is used.
std::uint32_t parse_face_index(const std::string& token, std::size_t vertex_count,
                               const std::string& path, int line) {
  std::size_t slash = token.find('/');
  const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
  long idx = 0;
  try {
    idx = std::stol(head);
  } catch (const std::exception&) {
    parse_fail(path, line, "bad face index \"" + token + "\"");
  }
  if (idx < 0) idx = static_cast<long>(vertex_count) + idx + 1;  // negative = relative
  if (idx < 1 || static_cast<std::size_t>(idx) > vertex_count)
    parse_fail(path, line, "face index " + head + " out of range");
  return static_cast<std::uint32_t>(idx - 1);
}

}  // namespace

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  Mesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      MeshVertex v;
      if (!(ls >> v.position[0] >> v.position[1] >> v.position[2]))
        parse_fail(path, lineno, "vertex needs 3 coordinates");
      double r, g, b;
      if (ls >> r) {
        if (!(ls >> g >> b)) parse_fail(path, lineno, "vertex color needs 3 components");
        v.color = Eigen::Vector3f(static_cast<float>(r), static_cast<float>(g), static_cast<float>(b));
      } else {
        v.color = Eigen::Vector3f(0.5f, 0.5f, 0.5f);
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string token;
      while (ls >> token) poly.push_back(parse_face_index(token, mesh.vertices.size(), path, lineno));
      if (poly.size() < 3) parse_fail(path, lineno, "face needs at least 3 vertices");
      for (std::size_t i = 1; i + 1 < poly.size(); ++i)
        mesh.triangles.push_back({poly[0], poly[i], poly[i + 1]});
    }
    // other tags (vn, vt, o, g, usemtl, ...) are ignored
  }

  const std::string sem_path = path + ".sem";
  std::ifstream sem(sem_path);
  if (sem) {
    int id = 0;
    while (sem >> id) mesh.face_semantics.push_back(make_label(id));
    if (!sem.eof())
      throw DataError(sem_path + ": non-integer token in semantic sidecar");
    if (mesh.face_semantics.size() != mesh.triangles.size())
      throw DataError(sem_path + ": " + std::to_string(mesh.face_semantics.size()) +
                      " labels for " + std::to_string(mesh.triangles.size()) + " faces");
  } else {
    mesh.face_semantics.assign(mesh.triangles.size(), SemanticLabel{});
  }
  mesh.validate();
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::string& path, bool write_sidecar) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.precision(9);
  for (const MeshVertex& v : mesh.vertices)
    out << "v " << v.position[0] << ' ' << v.position[1] << ' ' << v.position[2] << ' '
        << v.color[0] << ' ' << v.color[1] << ' ' << v.color[2] << '\n';
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw DataError("write failed for " + path);
  if (write_sidecar) {
    std::ofstream sem(path + ".sem", std::ios::trunc);
    if (!sem) throw DataError("cannot open " + path + ".sem for writing");
    for (std::size_t f = 0; f < mesh.face_semantics.size(); ++f)
      sem << static_cast<int>(mesh.face_semantics[f].class_id) << '\n';
    if (!sem) throw DataError("write failed for " + path + ".sem");
  }
}

}  // namespace vxf
