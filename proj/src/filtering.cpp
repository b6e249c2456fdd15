#include <conceptpose/filtering.hpp>

#include <conceptpose/error.hpp>
#include <conceptpose/kdtree.hpp>

#include <cmath>

namespace conceptpose {

namespace {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

// Population statistics; summation in index order keeps results independent
// of the thread count.
MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return out;
}

std::vector<int> keep_below(const std::vector<double>& values, double multiplier) {
  const MeanStd stats = mean_std(values);
  // Relative slack absorbs rounding in the mean so equal values never
  // exceed their own average.
  const double limit = stats.mean + multiplier * stats.stddev + 1e-12 * std::abs(stats.mean);
  std::vector<int> keep;
  keep.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > limit)) keep.push_back(static_cast<int>(i));
  }
  return keep;
}

std::vector<int> all_indices(std::size_t n) {
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  return idx;
}

}  // namespace

std::vector<int> local_outlier_indices(const ConceptPointCloud& cloud, int k, double std_ratio,
                                       Execution exec) {
  if (k < 1) throw Error(ErrorKind::Configuration, "local filter needs k >= 1");
  const std::size_t n = cloud.size();
  if (n <= static_cast<std::size_t>(k)) return all_indices(n);

  const KdTree tree(cloud.points);
  std::vector<double> mean_dist(n);
  auto kernel = [&](std::vector<Neighbor>& scratch, std::size_t i) {
    tree.knn(cloud.points[i], k, scratch, static_cast<int>(i));
    double sum = 0.0;
    for (const auto& nb : scratch) sum += std::sqrt(nb.sq_dist);
    mean_dist[i] = sum / static_cast<double>(scratch.size());
  };

  if (exec == Execution::Parallel) {
#pragma omp parallel
    {
      std::vector<Neighbor> scratch;
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < n; ++i) kernel(scratch, i);
    }
  } else {
    std::vector<Neighbor> scratch;
    for (std::size_t i = 0; i < n; ++i) kernel(scratch, i);
  }
  return keep_below(mean_dist, std_ratio);
}

std::vector<int> global_outlier_indices(const ConceptPointCloud& cloud, double sigma_mult) {
  const std::size_t n = cloud.size();
  if (n <= 1) return all_indices(n);
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) centroid += p;
  centroid /= static_cast<double>(n);
  std::vector<double> radius(n);
  for (std::size_t i = 0; i < n; ++i) radius[i] = (cloud.points[i] - centroid).norm();
  return keep_below(radius, sigma_mult);
}

ConceptPointCloud local_outlier_filter(const ConceptPointCloud& cloud, int k, double std_ratio,
                                       Execution exec) {
  return cloud.subset(local_outlier_indices(cloud, k, std_ratio, exec));
}

ConceptPointCloud global_outlier_filter(const ConceptPointCloud& cloud, double sigma_mult) {
  return cloud.subset(global_outlier_indices(cloud, sigma_mult));
}

}  // namespace conceptpose
