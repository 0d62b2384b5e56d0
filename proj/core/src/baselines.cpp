#include "floodreg/baselines.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <stdexcept>

#include "floodreg/errors.hpp"
#include "floodreg/gev.hpp"

namespace floodreg {

namespace {

// Feature embedding in which hydro_distance is plain Euclidean: scaled
// centroid coordinates followed by weighted z-scored attributes.
std::vector<double> embed(const Station& s, const DistanceSpec& spec,
                          const CovariateSchema& schema) {
  std::vector<double> f;
  f.reserve(schema.size() + 2);
  const double c = std::sqrt(spec.w0) / spec.norm.centroid_dist_sd;
  f.push_back(c * s.x);
  f.push_back(c * s.y);
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const double z = (s.attribute(schema.names[k]) - spec.norm.mean[k]) / spec.norm.sd[k];
    f.push_back(std::sqrt(spec.w[k]) * z);
  }
  return f;
}

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

Clustering ward_cluster(const std::vector<Station>& stations, const DistanceSpec& spec,
                        const CovariateSchema& schema, std::size_t C) {
  const std::size_t m = stations.size();
  if (C < 1 || C > m) throw std::invalid_argument("cluster count must lie in [1, m]");

  std::vector<std::vector<double>> feats(m);
  for (std::size_t i = 0; i < m; ++i) feats[i] = embed(stations[i], spec, schema);

  // active clusters; D holds the Ward merge cost (variance increase)
  struct Cluster {
    std::size_t node;  // linkage node id
    std::size_t size;
    std::vector<std::size_t> members;
  };
  std::vector<Cluster> active(m);
  for (std::size_t i = 0; i < m; ++i) active[i] = {i, 1, {i}};

  std::vector<std::vector<double>> D(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      D[i][j] = D[j][i] = 0.5 * sqdist(feats[i], feats[j]);

  Clustering out;
  out.C = C;
  std::size_t next_node = m;

  while (active.size() > C) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = i + 1; j < active.size(); ++j)
        if (D[i][j] < best) {
          best = D[i][j];
          bi = i;
          bj = j;
        }

    out.merge_history.push_back({active[bi].node, active[bj].node, best});

    // Lance-Williams update of the merge costs against the fused cluster
    const double ni = static_cast<double>(active[bi].size);
    const double nj = static_cast<double>(active[bj].size);
    std::vector<double> fused(active.size(), 0.0);
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (k == bi || k == bj) continue;
      const double nk = static_cast<double>(active[k].size);
      fused[k] = ((ni + nk) * D[bi][k] + (nj + nk) * D[bj][k] - nk * best) / (ni + nj + nk);
    }

    active[bi].node = next_node++;
    active[bi].size += active[bj].size;
    active[bi].members.insert(active[bi].members.end(), active[bj].members.begin(),
                              active[bj].members.end());
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (k == bi || k == bj) continue;
      D[bi][k] = D[k][bi] = fused[k];
    }
    active.erase(active.begin() + bj);
    for (auto& row : D) row.erase(row.begin() + bj);
    D.erase(D.begin() + bj);
  }

  // stable cluster ids: order clusters by their smallest member station id
  std::vector<std::size_t> order(active.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto smallest_id = [&](std::size_t c) {
    const Station* best = nullptr;
    for (auto mi : active[c].members)
      if (!best || stations[mi].id < best->id) best = &stations[mi];
    return best->id;
  };
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return smallest_id(a) < smallest_id(b); });
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    for (auto mi : active[order[rank]].members)
      out.assignment[stations[mi].id] = static_cast<int>(rank);
  return out;
}

int assign_ungauged(const Clustering& clustering, const Station& target,
                    const std::vector<Station>& stations, const DistanceSpec& spec,
                    const CovariateSchema& schema) {
  if (clustering.assignment.empty()) throw std::invalid_argument("empty clustering");

  const std::vector<double> tf = embed(target, spec, schema);
  std::map<int, std::pair<std::vector<double>, std::size_t>> centroids;
  for (const auto& s : stations) {
    auto it = clustering.assignment.find(s.id);
    if (it == clustering.assignment.end()) continue;
    auto& [sum, count] = centroids[it->second];
    const std::vector<double> f = embed(s, spec, schema);
    if (sum.empty()) sum.assign(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) sum[i] += f[i];
    ++count;
  }

  int best_cluster = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (auto& [cid, entry] : centroids) {
    auto& [sum, count] = entry;
    std::vector<double> centroid(sum);
    for (auto& v : centroid) v /= static_cast<double>(count);
    const double d = sqdist(tf, centroid);
    if (d < best_dist) {  // map iteration is id-ascending, ties keep the lower id
      best_dist = d;
      best_cluster = cid;
    }
  }
  return best_cluster;
}

std::array<double, 3> discharge_characteristics(const std::vector<double>& maxima) {
  if (maxima.size() < 3)
    throw std::invalid_argument("need at least 3 observations for discharge characteristics");
  const double n = static_cast<double>(maxima.size());
  const double mean = std::accumulate(maxima.begin(), maxima.end(), 0.0) / n;
  if (!(mean > 0.0)) throw std::invalid_argument("mean annual maximum must be positive");
  double ss = 0.0;
  for (double x : maxima) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double cv = sd / mean;
  if (!(cv > 0.0)) throw std::invalid_argument("degenerate record: zero variance");
  const LMoments lm = sample_lmoments(maxima);
  return {std::log(mean), std::log(cv), lm.t3};
}

CcaModel fit_cca(const std::vector<Station>& stations, const CovariateSchema& schema,
                 const std::vector<std::array<double, 3>>& discharge_chars, double radius) {
  schema.validate();
  const std::size_t m = stations.size();
  const std::size_t Ka = schema.size();
  constexpr std::size_t Kd = 3;
  if (discharge_chars.size() != m)
    throw std::invalid_argument("one discharge-characteristic vector per station required");
  if (m <= std::max(Ka, Kd))
    throw std::invalid_argument("station count must exceed the dimension of both blocks");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");

  Eigen::MatrixXd X(m, Ka), Y(m, Kd);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < Ka; ++k) {
      const double y = stations[j].attribute(schema.names[k]);
      if (!(y > 0.0)) throw std::invalid_argument("attributes must be strictly positive");
      X(j, k) = std::log(y);
    }
    for (std::size_t k = 0; k < Kd; ++k) Y(j, k) = discharge_chars[j][k];
  }
  const Eigen::RowVectorXd xbar = X.colwise().mean();
  const Eigen::RowVectorXd ybar = Y.colwise().mean();
  X.rowwise() -= xbar;
  Y.rowwise() -= ybar;

  const double denom = static_cast<double>(m - 1);
  const Eigen::MatrixXd Sxx = X.transpose() * X / denom;
  const Eigen::MatrixXd Syy = Y.transpose() * Y / denom;
  const Eigen::MatrixXd Sxy = X.transpose() * Y / denom;

  auto check_conditioning = [](const Eigen::MatrixXd& S, const char* block) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    const double largest = es.eigenvalues().maxCoeff();
    if (!(largest > 0.0) || es.eigenvalues().minCoeff() <= 1e-12 * largest)
      throw SingularCovariance(std::string(block) + " covariance block is singular");
  };
  check_conditioning(Sxx, "attribute");
  check_conditioning(Syy, "discharge");

  Eigen::LLT<Eigen::MatrixXd> lx(Sxx), ly(Syy);
  if (lx.info() != Eigen::Success || ly.info() != Eigen::Success)
    throw SingularCovariance("covariance block is not positive definite");

  // whiten both blocks, then SVD the cross-covariance
  const Eigen::MatrixXd Lx = lx.matrixL();
  const Eigen::MatrixXd Ly = ly.matrixL();
  const Eigen::MatrixXd M =
      Lx.triangularView<Eigen::Lower>().solve(Sxy) *
      Ly.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(Kd, Kd)).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);

  const std::size_t p = std::min(Ka, Kd);
  CcaModel model;
  model.n_pairs = p;
  model.schema = schema;
  model.radius = radius;
  model.attr_mean.assign(xbar.data(), xbar.data() + Ka);
  model.disch_mean.assign(ybar.data(), ybar.data() + Kd);

  const Eigen::MatrixXd A =
      Lx.triangularView<Eigen::Lower>().transpose().solve(svd.matrixU().leftCols(p));
  const Eigen::MatrixXd B =
      Ly.triangularView<Eigen::Lower>().transpose().solve(svd.matrixV().leftCols(p));
  for (std::size_t i = 0; i < p; ++i) {
    model.attr_weights.emplace_back(A.col(i).data(), A.col(i).data() + Ka);
    model.disch_weights.emplace_back(B.col(i).data(), B.col(i).data() + Kd);
    const double rho = std::clamp(svd.singularValues()(i), 0.0, 1.0);
    model.correlations.push_back(rho);
    model.sigma_diag.push_back(std::max(1.0 - rho * rho, 1e-10));
  }
  return model;
}

namespace {

std::vector<double> attr_scores(const CcaModel& model, const std::vector<double>& attrs) {
  const std::size_t Ka = model.schema.size();
  if (attrs.size() != Ka) throw SchemaMismatch("attribute count does not match CCA schema");
  std::vector<double> centered(Ka);
  for (std::size_t k = 0; k < Ka; ++k) {
    if (!(attrs[k] > 0.0)) throw std::invalid_argument("attributes must be strictly positive");
    centered[k] = std::log(attrs[k]) - model.attr_mean[k];
  }
  std::vector<double> u(model.n_pairs, 0.0);
  for (std::size_t i = 0; i < model.n_pairs; ++i)
    for (std::size_t k = 0; k < Ka; ++k) u[i] += model.attr_weights[i][k] * centered[k];
  return u;
}

std::vector<double> disch_scores(const CcaModel& model, const std::array<double, 3>& chars) {
  std::vector<double> v(model.n_pairs, 0.0);
  for (std::size_t i = 0; i < model.n_pairs; ++i)
    for (std::size_t k = 0; k < 3; ++k)
      v[i] += model.disch_weights[i][k] * (chars[k] - model.disch_mean[k]);
  return v;
}

}  // namespace

std::vector<std::string> cca_roi(const CcaModel& model, const std::vector<double>& target_attrs,
                                 const std::vector<Station>& pool,
                                 const std::vector<std::array<double, 3>>& pool_chars) {
  if (pool.size() != pool_chars.size())
    throw std::invalid_argument("one characteristic vector per pool station required");
  const std::vector<double> u = attr_scores(model, target_attrs);

  std::vector<std::string> members;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    const std::vector<double> v = disch_scores(model, pool_chars[j]);
    double d2 = 0.0;
    for (std::size_t i = 0; i < model.n_pairs; ++i) {
      const double dev = v[i] - model.correlations[i] * u[i];
      d2 += dev * dev / model.sigma_diag[i];
    }
    if (std::sqrt(d2) <= model.radius) members.push_back(pool[j].id);
  }
  if (members.empty())
    throw EmptyRegion("no station within Mahalanobis radius " + std::to_string(model.radius));
  return members;
}

}  // namespace floodreg
