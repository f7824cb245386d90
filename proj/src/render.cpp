#include "vxf/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "vxf/parallel.hpp"

namespace vxf {

void Camera::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw DataError("camera needs positive focal lengths");
  if (width <= 0 || height <= 0) throw DataError("camera image area is zero");
  const Eigen::Matrix3d r = world_to_camera.leftCols<3>();
  if ((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-5)
    throw DataError("camera rotation is not orthonormal");
}

Camera parse_camera_block(const std::vector<std::string>& lines, int first_line_no) {
  Camera cam;
  bool saw[6] = {false, false, false, false, false, false};
  std::vector<double> m;
  int line_no = first_line_no;
  for (const std::string& line : lines) {
    ++line_no;
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      std::string key = line.substr(0, eq);
      key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
      std::istringstream val(line.substr(eq + 1));
      double v;
      if (!(val >> v))
        throw DataError("camera line " + std::to_string(line_no) + ": bad value for " + key);
      if (key == "fx") cam.fx = v, saw[0] = true;
      else if (key == "fy") cam.fy = v, saw[1] = true;
      else if (key == "cx") cam.cx = v, saw[2] = true;
      else if (key == "cy") cam.cy = v, saw[3] = true;
      else if (key == "width") cam.width = static_cast<int>(v), saw[4] = true;
      else if (key == "height") cam.height = static_cast<int>(v), saw[5] = true;
      else
        throw DataError("camera line " + std::to_string(line_no) + ": unknown key " + key);
    } else {
      std::istringstream vals(line);
      double v;
      while (vals >> v) m.push_back(v);
    }
  }
  for (bool s : saw)
    if (!s) throw DataError("camera block before line " + std::to_string(line_no) +
                            " is missing an intrinsic key");
  if (m.size() != 12)
    throw DataError("camera block before line " + std::to_string(line_no) + " has " +
                    std::to_string(m.size()) + " extrinsic values, needs 12");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) cam.world_to_camera(r, c) = m[static_cast<std::size_t>(4 * r + c)];
  cam.validate();
  return cam;
}

std::vector<Camera> load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Camera> cameras;
  std::vector<std::string> block;
  std::string line;
  int line_no = 0, block_start = 0;
  auto flush = [&] {
    if (!block.empty()) {
      cameras.push_back(parse_camera_block(block, block_start));
      block.clear();
    }
    block_start = line_no;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank)
      flush();
    else if (line[0] != '#')
      block.push_back(line);
  }
  flush();
  if (cameras.empty()) throw DataError(path + " holds no camera blocks");
  return cameras;
}

void save_trajectory(const std::vector<Camera>& cameras, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.precision(12);
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const Camera& c = cameras[i];
    if (i) out << '\n';
    out << "fx=" << c.fx << "\nfy=" << c.fy << "\ncx=" << c.cx << "\ncy=" << c.cy
        << "\nwidth=" << c.width << "\nheight=" << c.height << '\n';
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 4; ++col) out << c.world_to_camera(r, col) << (col == 3 ? '\n' : ' ');
    }
  }
  if (!out) throw DataError("write failed for " + path);
}

namespace {

struct PreparedSplat {
  Eigen::Vector3d pc, t1c, t2c, nc;
  Eigen::Vector3f color;
  double sigma = 0.0, cutoff_sq = 0.0;
};

constexpr double kNear = 1e-9;
constexpr float kAlphaFloor = 1.0f / 255.0f;

}  // namespace

RenderOutput render(const std::vector<Splat>& splats, const Camera& camera,
                    const Eigen::Vector3f& background, int threads) {
  camera.validate();
  RenderOutput out;
  out.width = camera.width;
  out.height = camera.height;
  out.rgb.resize(static_cast<std::size_t>(camera.width) * camera.height * 3);
  out.coverage.assign(static_cast<std::size_t>(camera.width) * camera.height, 0);
  for (int y = 0; y < camera.height; ++y)
    for (int x = 0; x < camera.width; ++x)
      for (int c = 0; c < 3; ++c) out.pixel(x, y)[c] = background[c];

  const Eigen::Matrix3d rot = camera.world_to_camera.leftCols<3>();

  // Cull behind the camera, then order back-to-front by center depth with
  // splat id as the tie-break.
  struct Visible {
    double depth;
    std::size_t id;
  };
  std::vector<Visible> visible;
  visible.reserve(splats.size());
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const double depth = camera.to_camera(splats[i].center).z();
    if (depth > kNear) visible.push_back(Visible{depth, i});
  }
  std::sort(visible.begin(), visible.end(), [](const Visible& a, const Visible& b) {
    return a.depth != b.depth ? a.depth > b.depth : a.id < b.id;
  });

  std::vector<PreparedSplat> prepared(visible.size());
  std::vector<std::array<int, 4>> boxes(visible.size());  // x0,x1,y0,y1 inclusive
  for (std::size_t v = 0; v < visible.size(); ++v) {
    const Splat& s = splats[visible[v].id];
    PreparedSplat& ps = prepared[v];
    ps.pc = camera.to_camera(s.center);
    ps.t1c = rot * s.rotation.col(0);
    ps.t2c = rot * s.rotation.col(1);
    ps.nc = rot * s.rotation.col(2);
    ps.color = s.color;
    ps.sigma = s.radius / 2.0;
    const double cutoff = 3.0 * ps.sigma;
    ps.cutoff_sq = cutoff * cutoff;

    // Conservative screen box from the bounding sphere of the cutoff disk.
    int x0 = 0, x1 = camera.width - 1, y0 = 0, y1 = camera.height - 1;
    if (ps.pc.z() - cutoff > kNear) {
      const double zs[2] = {ps.pc.z() - cutoff, ps.pc.z() + cutoff};
      double px_min = 1e30, px_max = -1e30, py_min = 1e30, py_max = -1e30;
      for (double dx : {-cutoff, cutoff})
        for (double z : zs) {
          const double px = camera.fx * (ps.pc.x() + dx) / z + camera.cx;
          px_min = std::min(px_min, px);
          px_max = std::max(px_max, px);
        }
      for (double dy : {-cutoff, cutoff})
        for (double z : zs) {
          const double py = camera.fy * (ps.pc.y() + dy) / z + camera.cy;
          py_min = std::min(py_min, py);
          py_max = std::max(py_max, py);
        }
      x0 = std::max(0, static_cast<int>(std::floor(px_min)) - 1);
      x1 = std::min(camera.width - 1, static_cast<int>(std::ceil(px_max)) + 1);
      y0 = std::max(0, static_cast<int>(std::floor(py_min)) - 1);
      y1 = std::min(camera.height - 1, static_cast<int>(std::ceil(py_max)) + 1);
    }
    boxes[v] = {x0, x1, y0, y1};
  }

  // Horizontal bands; every band walks the full sorted order, so each pixel
  // sees the same composite sequence as a serial pass.
  const int band_count = std::max(1, std::min(threads, camera.height));
  const int band_rows = (camera.height + band_count - 1) / band_count;
  parallel_for(0, static_cast<std::size_t>(band_count), threads, [&](std::size_t band) {
    const int band_y0 = static_cast<int>(band) * band_rows;
    const int band_y1 = std::min(camera.height, band_y0 + band_rows);
    for (std::size_t v = 0; v < prepared.size(); ++v) {
      const PreparedSplat& ps = prepared[v];
      const int y0 = std::max(boxes[v][2], band_y0);
      const int y1 = std::min(boxes[v][3], band_y1 - 1);
      for (int py = y0; py <= y1; ++py) {
        for (int px = boxes[v][0]; px <= boxes[v][1]; ++px) {
          const Eigen::Vector3d ray((px + 0.5 - camera.cx) / camera.fx,
                                    (py + 0.5 - camera.cy) / camera.fy, 1.0);
          const double denom = ps.nc.dot(ray);
          if (std::abs(denom) < 1e-12) continue;
          const double s = ps.nc.dot(ps.pc) / denom;
          if (s <= kNear) continue;
          const Eigen::Vector3d delta = s * ray - ps.pc;
          const double a = delta.dot(ps.t1c);
          const double b = delta.dot(ps.t2c);
          const double d_sq = a * a + b * b;
          if (d_sq > ps.cutoff_sq) continue;
          const float alpha = static_cast<float>(std::exp(-0.5 * d_sq / (ps.sigma * ps.sigma)));
          if (alpha <= kAlphaFloor) continue;
          float* px_rgb = out.pixel(px, py);
          for (int c = 0; c < 3; ++c)
            px_rgb[c] = alpha * ps.color[c] + (1.0f - alpha) * px_rgb[c];
          out.coverage[static_cast<std::size_t>(py) * camera.width + px] = 1;
        }
      }
    }
  });
  return out;
}

}  // namespace vxf
