#include <conceptpose/object_model.hpp>

#include <conceptpose/error.hpp>

namespace conceptpose {

void ObjectModel::validate() const {
  if (vertices.empty()) throw Error(ErrorKind::Configuration, "object model has no vertices");
  if (!(diameter > 0.0)) throw Error(ErrorKind::Configuration, "object diameter must be positive");
  const int n = static_cast<int>(vertices.size());
  for (const auto& t : triangles) {
    if ((t.array() < 0).any() || (t.array() >= n).any()) {
      throw Error(ErrorKind::Configuration, "triangle references a missing vertex");
    }
  }
  for (const auto& s : discrete_symmetries) s.validate();
  for (const auto& c : continuous_symmetries) {
    if (!(c.axis.norm() > 0.0)) {
      throw Error(ErrorKind::Configuration, "continuous symmetry axis must be non-zero");
    }
  }
}

double compute_diameter(const std::vector<Eigen::Vector3d>& vertices) {
  double best = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      best = std::max(best, (vertices[i] - vertices[j]).squaredNorm());
    }
  }
  return std::sqrt(best);
}

std::vector<RigidTransform> symmetry_set(const ObjectModel& model, int continuous_steps) {
  std::vector<RigidTransform> out{RigidTransform::identity()};
  out.insert(out.end(), model.discrete_symmetries.begin(), model.discrete_symmetries.end());
  for (const auto& c : model.continuous_symmetries) {
    std::vector<RigidTransform> expanded;
    expanded.reserve(out.size() * continuous_steps);
    for (int step = 0; step < continuous_steps; ++step) {
      const Eigen::Matrix3d r = rot_axis(c.axis, 360.0 * step / continuous_steps);
      const RigidTransform about_axis{r, c.offset - r * c.offset};
      for (const auto& s : out) expanded.push_back(compose(about_axis, s));
    }
    out = std::move(expanded);
  }
  return out;
}

}  // namespace conceptpose
