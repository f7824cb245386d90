#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "vxf/splat.hpp"
#include "vxf/types.hpp"

namespace vxf {

// Pinhole camera: pixel (px,py) sees ray ((px+.5-cx)/fx, (py+.5-cy)/fy, 1)
// in camera coordinates; world_to_camera is the rigid [R|t].
struct Camera {
  double fx = 500, fy = 500, cx = 0, cy = 0;
  int width = 0, height = 0;
  Eigen::Matrix<double, 3, 4> world_to_camera = Eigen::Matrix<double, 3, 4>::Identity();

  void validate() const;

  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
    return world_to_camera.leftCols<3>() * world + world_to_camera.col(3);
  }
};

// ASCII camera block: fx/fy/cx/cy/width/height as key=value lines, then 12
// reals (row-major world-to-camera). A trajectory file holds one block per
// frame, separated by blank lines.
Camera parse_camera_block(const std::vector<std::string>& lines, int first_line_no);
std::vector<Camera> load_trajectory(const std::string& path);
void save_trajectory(const std::vector<Camera>& cameras, const std::string& path);

struct RenderOutput {
  int width = 0, height = 0;
  std::vector<float> rgb;              // width*height*3, [0,1], row-major
  std::vector<std::uint8_t> coverage;  // width*height; 1 where any splat contributed

  float* pixel(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const float* pixel(int x, int y) const {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  bool covered(int x, int y) const { return coverage[static_cast<std::size_t>(y) * width + x] != 0; }
};

// Software surfel rasterizer. Splats behind the camera are culled, the rest
// are alpha-composited back-to-front by center depth (ties by splat id);
// alpha falls off as exp(-d^2 / (2 sigma^2)) with sigma = radius/2 over the
// in-plane distance d, cut off at 3 sigma. The coverage mask records pixels
// with any contribution above 1/255; uncovered pixels keep the background
// color exactly. Tiling across threads reproduces the serial image
// bit-exactly.
RenderOutput render(const std::vector<Splat>& splats, const Camera& camera,
                    const Eigen::Vector3f& background, int threads = 1);

}  // namespace vxf
