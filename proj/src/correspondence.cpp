#include <conceptpose/correspondence.hpp>

#include <conceptpose/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace conceptpose {

namespace {

constexpr Eigen::Index kAnchorTile = 512;
constexpr Eigen::Index kQueryBlock = 64;

/// Per-row quantities reused by every pairing of that row.
struct RowTable {
  RowMatrix prob;
  RowMatrix logp;
  Eigen::VectorXd self_term;  // sum p log p
  Eigen::VectorXd norm;
};

RowTable make_table(const RowMatrix& rows) {
  RowTable t;
  t.prob = rows;
  t.logp = rows.array().max(kLogFloor).log().matrix();
  t.self_term.resize(rows.rows());
  t.norm.resize(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < rows.cols(); ++k) s += t.prob(i, k) * t.logp(i, k);
    t.self_term[i] = s;
    t.norm[i] = rows.row(i).norm();
  }
  return t;
}

// One scoring routine shared by similarity(), the serial reference loop and
// the tiled parallel kernel, so all three agree bit for bit.
inline double score_pair(const RowTable& q, Eigen::Index i, const RowTable& a, Eigen::Index j,
                         SimilarityMeasure measure) {
  const Eigen::Index l = q.prob.cols();
  const double* qp = q.prob.row(i).data();
  const double* ql = q.logp.row(i).data();
  const double* ap = a.prob.row(j).data();
  const double* al = a.logp.row(j).data();
  double acc = 0.0;
  switch (measure) {
    case SimilarityMeasure::ForwardKl:
      for (Eigen::Index k = 0; k < l; ++k) acc += qp[k] * al[k];
      return acc - q.self_term[i];
    case SimilarityMeasure::ReverseKl:
      for (Eigen::Index k = 0; k < l; ++k) acc += ap[k] * ql[k];
      return acc - a.self_term[j];
    case SimilarityMeasure::BidirectionalKl:
      for (Eigen::Index k = 0; k < l; ++k) acc += (qp[k] - ap[k]) * (ql[k] - al[k]);
      return -0.5 * acc;
    case SimilarityMeasure::Asymmetric:
      for (Eigen::Index k = 0; k < l; ++k) acc += qp[k] * al[k];
      return acc;
    case SimilarityMeasure::Cosine:
      for (Eigen::Index k = 0; k < l; ++k) acc += qp[k] * ap[k];
      return acc / (q.norm[i] * a.norm[j]);
  }
  return acc;
}

void require_distribution(std::span<const double> row, const char* which) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::ContractViolation,
                  std::string(which) + " row has a non-positive entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-5) {
    throw Error(ErrorKind::ContractViolation, std::string(which) + " row does not sum to 1");
  }
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  // Multiply-shift keeps the draw sequence identical across standard
  // libraries, unlike std::uniform_int_distribution.
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

}  // namespace

std::string_view to_string(SimilarityMeasure m) {
  switch (m) {
    case SimilarityMeasure::ForwardKl: return "forward_kl";
    case SimilarityMeasure::ReverseKl: return "reverse_kl";
    case SimilarityMeasure::BidirectionalKl: return "bidirectional_kl";
    case SimilarityMeasure::Asymmetric: return "asymmetric";
    case SimilarityMeasure::Cosine: return "cosine";
  }
  return "unknown";
}

std::optional<SimilarityMeasure> parse_measure(std::string_view name) {
  for (auto m : kAllMeasures) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

double similarity(std::span<const double> query_row, std::span<const double> anchor_row,
                  SimilarityMeasure measure) {
  if (query_row.size() != anchor_row.size() || query_row.empty()) {
    throw Error(ErrorKind::ContractViolation, "rows must have the same non-zero length");
  }
  require_distribution(query_row, "query");
  require_distribution(anchor_row, "anchor");
  const auto l = static_cast<Eigen::Index>(query_row.size());
  const RowTable q = make_table(Eigen::Map<const RowMatrix>(query_row.data(), 1, l));
  const RowTable a = make_table(Eigen::Map<const RowMatrix>(anchor_row.data(), 1, l));
  return score_pair(q, 0, a, 0, measure);
}

std::vector<int> subsample_indices(std::size_t n, std::size_t max_count, std::uint64_t seed) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= max_count) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < max_count; ++i) {
    const std::size_t j = i + bounded(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(max_count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

CorrespondenceSet match(const ConceptPointCloud& query, const ConceptPointCloud& anchor,
                        SimilarityMeasure measure, std::size_t max_correspondences,
                        std::uint64_t seed, Execution exec) {
  if (query.labels != anchor.labels) {
    throw Error(ErrorKind::Configuration, "query and anchor concept label lists differ");
  }
  if (query.empty() || anchor.empty()) {
    throw Error(ErrorKind::DegenerateGeometry, "cannot match an empty cloud");
  }
  if (max_correspondences == 0) {
    throw Error(ErrorKind::Configuration, "max_correspondences must be positive");
  }

  const std::vector<int> retained = subsample_indices(query.size(), max_correspondences, seed);
  const RowTable q = make_table(query.concepts);
  const RowTable a = make_table(anchor.concepts);
  const auto n_query = static_cast<Eigen::Index>(retained.size());
  const Eigen::Index n_anchor = a.prob.rows();

  std::vector<int> best_index(retained.size(), -1);
  std::vector<double> best_score(retained.size(), -std::numeric_limits<double>::infinity());

  if (exec == Execution::Serial) {
    for (Eigen::Index r = 0; r < n_query; ++r) {
      const Eigen::Index i = retained[r];
      for (Eigen::Index j = 0; j < n_anchor; ++j) {
        const double s = score_pair(q, i, a, j, measure);
        if (s > best_score[r]) {
          best_score[r] = s;
          best_index[r] = static_cast<int>(j);
        }
      }
    }
  } else {
    // Query blocks x anchor tiles. Tiles are visited in ascending order for
    // every query row, so the strict comparison still resolves ties to the
    // lowest anchor index.
    const Eigen::Index n_blocks = (n_query + kQueryBlock - 1) / kQueryBlock;
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index b = 0; b < n_blocks; ++b) {
      const Eigen::Index first = b * kQueryBlock;
      const Eigen::Index last = std::min(n_query, first + kQueryBlock);
      for (Eigen::Index tile = 0; tile < n_anchor; tile += kAnchorTile) {
        const Eigen::Index stop = std::min(n_anchor, tile + kAnchorTile);
        for (Eigen::Index r = first; r < last; ++r) {
          const Eigen::Index i = retained[r];
          double top = best_score[r];
          int arg = best_index[r];
          for (Eigen::Index j = tile; j < stop; ++j) {
            const double s = score_pair(q, i, a, j, measure);
            if (s > top) {
              top = s;
              arg = static_cast<int>(j);
            }
          }
          best_score[r] = top;
          best_index[r] = arg;
        }
      }
    }
  }

  CorrespondenceSet out;
  out.measure = measure;
  out.pairs.reserve(retained.size());
  for (std::size_t r = 0; r < retained.size(); ++r) {
    if (best_index[r] < 0) continue;  // only reachable with NaN scores
    out.pairs.push_back({query.points[retained[r]], anchor.points[best_index[r]], best_score[r],
                         retained[r], best_index[r]});
  }
  return out;
}

}  // namespace conceptpose
