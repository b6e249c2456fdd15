#include <conceptpose/concept_cloud.hpp>

#include <conceptpose/error.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace conceptpose {

SaliencyTensor::SaliencyTensor(std::vector<std::string> l, std::string category, int h, int w)
    : labels(std::move(l)), object_category(std::move(category)), height(h), width(w),
      data(labels.size() * static_cast<std::size_t>(h) * w, 0.0f) {}

void SaliencyTensor::validate() const {
  if (labels.empty()) throw Error(ErrorKind::Configuration, "saliency tensor has no labels");
  if (height <= 0 || width <= 0) {
    throw Error(ErrorKind::Configuration, "saliency tensor has an empty raster");
  }
  if (data.size() != labels.size() * static_cast<std::size_t>(height) * width) {
    throw Error(ErrorKind::Configuration, "saliency payload does not match L x H x W");
  }
  for (float v : data) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw Error(ErrorKind::Configuration, "saliency values must be finite and in [0,1]");
    }
  }
}

SaliencyTensor SaliencyTensor::select(const std::vector<std::string>& subset) const {
  SaliencyTensor out(subset, object_category, height, width);
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    auto it = std::find(labels.begin(), labels.end(), subset[i]);
    if (it == labels.end()) {
      throw Error(ErrorKind::Configuration, "unknown concept label '" + subset[i] + "'");
    }
    const auto src = static_cast<std::size_t>(it - labels.begin()) * plane;
    std::copy_n(data.begin() + src, plane, out.data.begin() + i * plane);
  }
  return out;
}

bool ConceptPointCloud::rows_are_distributions(double tol) const {
  if (concepts.rows() != static_cast<Eigen::Index>(points.size())) return false;
  if (concepts.cols() != static_cast<Eigen::Index>(labels.size())) return false;
  for (Eigen::Index i = 0; i < concepts.rows(); ++i) {
    if ((concepts.row(i).array() <= 0.0).any()) return false;
    if (std::abs(concepts.row(i).sum() - 1.0) > tol) return false;
  }
  return true;
}

ConceptPointCloud ConceptPointCloud::subset(const std::vector<int>& keep) const {
  ConceptPointCloud out;
  out.labels = labels;
  out.temperature = temperature;
  out.points.reserve(keep.size());
  out.concepts.resize(static_cast<Eigen::Index>(keep.size()), concepts.cols());
  if (!pixels.empty()) out.pixels.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.points.push_back(points[keep[i]]);
    if (!pixels.empty()) out.pixels.push_back(pixels[keep[i]]);
    out.concepts.row(static_cast<Eigen::Index>(i)) = concepts.row(keep[i]);
  }
  return out;
}

void softmax_row(const float* raw, int channels, double temperature, double* out) {
  double peak = raw[0];
  for (int i = 1; i < channels; ++i) peak = std::max(peak, static_cast<double>(raw[i]));
  double sum = 0.0;
  for (int i = 0; i < channels; ++i) {
    out[i] = std::exp((static_cast<double>(raw[i]) - peak) / temperature);
    sum += out[i];
  }
  for (int i = 0; i < channels; ++i) out[i] /= sum;
}

ConceptPointCloud build_cloud(const Frame& frame, const SaliencyTensor& saliency,
                              double temperature, Execution exec) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorKind::Configuration, "softmax temperature must be positive");
  }
  saliency.validate();
  if (saliency.height != frame.height() || saliency.width != frame.width()) {
    throw Error(ErrorKind::Configuration, "saliency tensor size does not match the frame");
  }

  const auto samples = backproject(frame);
  if (samples.empty()) {
    throw Error(ErrorKind::DegenerateFrame, "frame has no pixel with mask=1 and depth>0");
  }

  const int channels = saliency.channels();
  const auto n = static_cast<Eigen::Index>(samples.size());
  ConceptPointCloud cloud;
  cloud.labels = saliency.labels;
  cloud.temperature = temperature;
  cloud.points.resize(samples.size());
  cloud.pixels.resize(samples.size());
  cloud.concepts.resize(n, channels);

  const std::size_t plane = static_cast<std::size_t>(saliency.height) * saliency.width;
  auto fill = [&](Eigen::Index i) {
    const auto& s = samples[i];
    cloud.points[i] = s.point;
    cloud.pixels[i] = s.pixel;
    float raw[256];
    std::vector<float> wide;
    float* row = raw;
    if (channels > 256) {
      wide.resize(channels);
      row = wide.data();
    }
    const std::size_t offset = static_cast<std::size_t>(s.pixel.v) * saliency.width + s.pixel.u;
    for (int c = 0; c < channels; ++c) row[c] = saliency.data[c * plane + offset];
    softmax_row(row, channels, temperature, cloud.concepts.row(i).data());
  };

  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) fill(i);
  } else {
    for (Eigen::Index i = 0; i < n; ++i) fill(i);
  }
  return cloud;
}

VoxelizedCloud voxelize(const ConceptPointCloud& cloud, int resolution) {
  if (cloud.empty()) throw Error(ErrorKind::DegenerateGeometry, "cannot voxelize an empty cloud");
  if (resolution < 2) throw Error(ErrorKind::Configuration, "voxel resolution must be >= 2");

  Eigen::Vector3d lo = cloud.points.front();
  Eigen::Vector3d hi = lo;
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = (hi - lo).maxCoeff();
  if (!(scale > 0.0)) {
    throw Error(ErrorKind::DegenerateGeometry, "cloud has zero spatial extent");
  }
  const Eigen::Vector3d centroid = 0.5 * (lo + hi);

  // Linear voxel key -> accumulated concept row and member count. std::map
  // keeps the output order deterministic.
  const int channels = cloud.channels();
  std::map<std::int64_t, int> slot_of;
  std::vector<Eigen::RowVectorXd> sums;
  std::vector<int> counts;
  const auto cell = [&](double normalized) {
    int idx = static_cast<int>(std::floor((normalized + 0.5) * resolution));
    return std::clamp(idx, 0, resolution - 1);
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d norm = (cloud.points[i] - centroid) / scale;
    const std::int64_t key =
        (static_cast<std::int64_t>(cell(norm.x())) * resolution + cell(norm.y())) * resolution +
        cell(norm.z());
    auto [it, inserted] = slot_of.try_emplace(key, static_cast<int>(sums.size()));
    if (inserted) {
      sums.push_back(Eigen::RowVectorXd::Zero(channels));
      counts.push_back(0);
    }
    sums[it->second] += cloud.concepts.row(static_cast<Eigen::Index>(i));
    counts[it->second] += 1;
  }

  VoxelizedCloud out;
  out.scale = scale;
  out.centroid = centroid;
  out.grid_resolution = resolution;
  out.cloud.labels = cloud.labels;
  out.cloud.temperature = cloud.temperature;
  out.cloud.points.reserve(slot_of.size());
  out.cloud.concepts.resize(static_cast<Eigen::Index>(slot_of.size()), channels);
  Eigen::Index row = 0;
  for (const auto& [key, slot] : slot_of) {
    const std::int64_t iz = key % resolution;
    const std::int64_t iy = (key / resolution) % resolution;
    const std::int64_t ix = key / (static_cast<std::int64_t>(resolution) * resolution);
    const Eigen::Vector3d center_norm =
        (Eigen::Vector3d(ix, iy, iz).array() + 0.5).matrix() / resolution -
        Eigen::Vector3d::Constant(0.5);
    out.cloud.points.push_back(center_norm * scale + centroid);
    Eigen::RowVectorXd mean = sums[slot] / counts[slot];
    out.cloud.concepts.row(row++) = mean / mean.sum();
  }
  return out;
}

}  // namespace conceptpose
