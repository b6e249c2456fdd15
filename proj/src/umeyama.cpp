#include <conceptpose/pose_solver.hpp>

#include <conceptpose/error.hpp>

#include <Eigen/SVD>

namespace conceptpose {

std::optional<UmeyamaResult> try_umeyama(std::span<const Eigen::Vector3d> anchor_pts,
                                         std::span<const Eigen::Vector3d> query_pts,
                                         bool estimate_scale) {
  const std::size_t n = anchor_pts.size();
  if (n < 3 || query_pts.size() != n) return std::nullopt;

  Eigen::Vector3d mean_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_q = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += anchor_pts[i];
    mean_q += query_pts[i];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  mean_a *= inv_n;
  mean_q *= inv_n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d da = anchor_pts[i] - mean_a;
    cov.noalias() += (query_pts[i] - mean_q) * da.transpose();
    var_a += da.squaredNorm();
  }
  cov *= inv_n;
  var_a *= inv_n;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d& sv = svd.singularValues();
  // Rank < 2 means the points are collinear (or coincident): rotation about
  // the common line is unconstrained.
  if (!(sv[0] > 0.0) || sv[1] <= 1e-10 * sv[0] || !sv.allFinite()) return std::nullopt;

  Eigen::Vector3d signs = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) signs[2] = -1.0;

  UmeyamaResult out;
  out.transform.rotation = svd.matrixU() * signs.asDiagonal() * svd.matrixV().transpose();
  out.scale = estimate_scale ? sv.dot(signs) / var_a : 1.0;
  out.transform.translation = mean_q - out.scale * (out.transform.rotation * mean_a);
  return out;
}

UmeyamaResult umeyama(std::span<const Eigen::Vector3d> anchor_pts,
                      std::span<const Eigen::Vector3d> query_pts, bool estimate_scale) {
  if (anchor_pts.size() != query_pts.size()) {
    throw Error(ErrorKind::ContractViolation, "umeyama needs paired point sets of equal size");
  }
  auto fit = try_umeyama(anchor_pts, query_pts, estimate_scale);
  if (!fit) {
    throw Error(ErrorKind::DegenerateSample,
                "umeyama: rank-deficient covariance (need >= 3 non-collinear points)");
  }
  return *fit;
}

}  // namespace conceptpose
