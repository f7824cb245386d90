#include "vxf/types.hpp"

namespace vxf {

namespace {
constexpr const char* kClassNames[kClassCount] = {
    "road",          "sidewalk",   "building", "wall",   "fence",
    "pole",          "traffic light", "traffic sign", "vegetation", "terrain",
    "sky",           "person",     "rider",    "car",    "truck",
    "bus",           "train",      "motorcycle", "bicycle", "road-lane",
};
}  // namespace

const char* class_name(int class_id) {
  if (class_id == SemanticLabel::kNull) return "null";
  if (class_id < 0 || class_id >= kClassCount) return "invalid";
  return kClassNames[class_id];
}

SemanticLabel make_label(int class_id) {
  if (class_id == SemanticLabel::kNull) return SemanticLabel{};
  if (class_id < 0 || class_id >= kClassCount)
    throw DataError("semantic class id " + std::to_string(class_id) + " outside taxonomy");
  return SemanticLabel{static_cast<std::uint8_t>(class_id)};
}

}  // namespace vxf
