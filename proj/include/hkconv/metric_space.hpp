#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hkconv {

enum class Backend { euclidean, graph, matrix };

inline const char* to_string(Backend b) {
  switch (b) {
    case Backend::euclidean: return "euclidean";
    case Backend::graph: return "graph";
    case Backend::matrix: return "matrix";
  }
  return "unknown";
}

/// Raised when an operation needs geodesic interpolation that the space does not provide.
class BackendMissing : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Edge {
  std::size_t from;
  std::size_t to;
  double weight;
};

/// A finite metric space with a dense distance matrix.
///
/// Three backends exist:
///  - euclidean: a point cloud, geodesics are straight segments;
///  - graph: shortest-path metric of a weighted connected graph, geodesics run
///    along a deterministic shortest-path chain;
///  - matrix: an explicit distance matrix without any geodesic structure.
///
/// Interpolated points returned by geodesic_point() are appended to the space
/// ("virtual" points, index >= base_size()). After freeze() the space is
/// read-only and safe for concurrent readers.
class FiniteMetricSpace {
 public:
  static constexpr double kTriangleTol = 1e-12;

  static FiniteMetricSpace euclidean(std::vector<std::vector<double>> coords) {
    if (coords.empty()) throw std::invalid_argument("euclidean space: no points");
    const std::size_t dim = coords.front().size();
    for (const auto& c : coords) {
      if (c.size() != dim) throw std::invalid_argument("euclidean space: dimension mismatch");
      for (double v : c)
        if (!std::isfinite(v)) throw std::invalid_argument("euclidean space: non-finite coordinate");
    }
    FiniteMetricSpace s;
    s.backend_ = Backend::euclidean;
    s.coords_ = std::move(coords);
    const std::size_t n = s.coords_.size();
    s.dist_.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        s.dist_[i][j] = s.dist_[j][i] = euclid(s.coords_[i], s.coords_[j]);
    s.base_size_ = n;
    s.check_metric();
    return s;
  }

  /// All-pairs shortest paths (Floyd-Warshall). Ties between equally short
  /// routes keep the smaller predecessor index, so chains are reproducible.
  static FiniteMetricSpace graph(std::size_t n, std::span<const Edge> edges) {
    if (n == 0) throw std::invalid_argument("graph space: no vertices");
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    FiniteMetricSpace s;
    s.backend_ = Backend::graph;
    s.dist_.assign(n, std::vector<double>(n, inf));
    s.pred_.assign(n, std::vector<std::size_t>(n, none));
    for (std::size_t i = 0; i < n; ++i) {
      s.dist_[i][i] = 0.0;
      s.pred_[i][i] = i;
    }
    for (const auto& e : edges) {
      if (e.from >= n || e.to >= n) throw std::invalid_argument("graph space: edge endpoint out of range");
      if (e.from == e.to) throw std::invalid_argument("graph space: self-loop");
      if (!(e.weight > 0.0) || !std::isfinite(e.weight))
        throw std::invalid_argument("graph space: edge weights must be positive and finite");
      if (e.weight < s.dist_[e.from][e.to]) {
        s.dist_[e.from][e.to] = s.dist_[e.to][e.from] = e.weight;
        s.pred_[e.from][e.to] = e.from;
        s.pred_[e.to][e.from] = e.to;
      }
    }
    auto& D = s.dist_;
    auto& P = s.pred_;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        if (D[i][k] == inf) continue;
        for (std::size_t j = 0; j < n; ++j) {
          const double via = D[i][k] + D[k][j];
          if (via < D[i][j]) {
            D[i][j] = via;
            P[i][j] = P[k][j];
          } else if (via == D[i][j] && i != j && k != j && P[k][j] < P[i][j]) {
            P[i][j] = P[k][j];
          }
        }
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (D[i][j] == inf) throw std::invalid_argument("graph space: graph is disconnected");
    // Floyd-Warshall may leave 1-ulp asymmetries when ties are summed in different orders.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) D[i][j] = D[j][i] = std::min(D[i][j], D[j][i]);
    s.edges_.assign(edges.begin(), edges.end());
    s.base_size_ = n;
    s.check_metric();
    return s;
  }

  static FiniteMetricSpace from_matrix(std::vector<std::vector<double>> dist) {
    const std::size_t n = dist.size();
    if (n == 0) throw std::invalid_argument("matrix space: empty matrix");
    for (const auto& row : dist) {
      if (row.size() != n) throw std::invalid_argument("matrix space: matrix is not square");
      for (double v : row)
        if (!(v >= 0.0) || !std::isfinite(v))
          throw std::invalid_argument("matrix space: entries must be finite and nonnegative");
    }
    FiniteMetricSpace s;
    s.backend_ = Backend::matrix;
    s.dist_ = std::move(dist);
    s.base_size_ = n;
    s.check_metric();
    return s;
  }

  Backend backend() const noexcept { return backend_; }
  std::size_t size() const noexcept { return dist_.size(); }
  std::size_t base_size() const noexcept { return base_size_; }
  bool has_interpolation() const noexcept { return backend_ != Backend::matrix; }
  bool frozen() const noexcept { return frozen_; }
  void freeze() noexcept { frozen_ = true; }

  double distance(std::size_t i, std::size_t j) const {
    check_index(i);
    check_index(j);
    return dist_[i][j];
  }

  const std::vector<std::vector<double>>& distance_matrix() const noexcept { return dist_; }

  /// Edge list a graph space was built from (empty for other backends).
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const double> coords(std::size_t i) const {
    if (backend_ != Backend::euclidean) throw BackendMissing("coords: space is not euclidean");
    check_index(i);
    return coords_[i];
  }

  std::size_t dimension() const {
    if (backend_ != Backend::euclidean) throw BackendMissing("dimension: space is not euclidean");
    return coords_.front().size();
  }

  /// Vertex chain of the stored shortest path from i to j (graph backend, base vertices).
  std::vector<std::size_t> chain(std::size_t i, std::size_t j) const {
    if (backend_ != Backend::graph) throw BackendMissing("chain: space is not a graph");
    if (i >= base_size_ || j >= base_size_)
      throw std::invalid_argument("chain: only defined between base vertices");
    std::vector<std::size_t> path{j};
    std::size_t cur = j;
    while (cur != i) {
      cur = pred_[i][cur];
      path.push_back(cur);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  /// Point at fraction s of a geodesic from x0 to x1; appends a virtual point when needed.
  std::size_t geodesic_point(std::size_t x0, std::size_t x1, double s) {
    check_index(x0);
    check_index(x1);
    if (!(s >= 0.0 && s <= 1.0)) throw std::out_of_range("geodesic_point: s outside [0,1]");
    if (!has_interpolation()) throw BackendMissing("geodesic_point: matrix backend has no geodesics");
    if (s == 0.0 || x0 == x1) return x0;
    if (s == 1.0) return x1;
    if (backend_ == Backend::euclidean) {
      const auto& a = coords_[x0];
      const auto& b = coords_[x1];
      std::vector<double> c(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) c[k] = (1.0 - s) * a[k] + s * b[k];
      return append_euclidean(std::move(c));
    }
    return graph_point(x0, x1, s);
  }

 private:
  struct VirtualOnEdge {
    std::size_t u, v;  // base endpoints
    double offset;     // distance from u along the edge
    double length;     // edge length
  };

  FiniteMetricSpace() = default;

  static double euclid(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(acc);
  }

  void check_index(std::size_t i) const {
    if (i >= dist_.size()) throw std::out_of_range("metric space: point index out of range");
  }

  void check_mutable() const {
    if (frozen_) throw std::logic_error("metric space is frozen; virtual points cannot be added");
  }

  void check_metric() const {
    const std::size_t n = dist_.size();
    double scale = 0.0;
    for (const auto& row : dist_)
      for (double v : row) scale = std::max(scale, v);
    const double tol = kTriangleTol * std::max(1.0, scale);
    for (std::size_t i = 0; i < n; ++i) {
      if (dist_[i][i] != 0.0) throw std::invalid_argument("metric space: nonzero diagonal");
      for (std::size_t j = 0; j < n; ++j) {
        if (dist_[i][j] != dist_[j][i]) throw std::invalid_argument("metric space: asymmetric distance");
        if (i != j && dist_[i][j] == 0.0) throw std::invalid_argument("metric space: distinct points at distance 0");
      }
    }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (dist_[i][j] > dist_[i][k] + dist_[k][j] + tol)
            throw std::invalid_argument("metric space: triangle inequality violated");
  }

  std::size_t append_row(const std::vector<double>& row) {
    check_mutable();
    for (std::size_t k = 0; k < dist_.size(); ++k) dist_[k].push_back(row[k]);
    auto full = row;
    full.push_back(0.0);
    dist_.push_back(std::move(full));
    return dist_.size() - 1;
  }

  std::size_t append_euclidean(std::vector<double> c) {
    check_mutable();
    for (std::size_t k = 0; k < coords_.size(); ++k)
      if (coords_[k] == c) return k;
    std::vector<double> row(dist_.size());
    for (std::size_t k = 0; k < coords_.size(); ++k) row[k] = euclid(coords_[k], c);
    coords_.push_back(std::move(c));
    return append_row(row);
  }

  // Distance from a point sitting on edge e to an existing point q.
  double edge_point_distance(const VirtualOnEdge& e, std::size_t q) const {
    double best = std::min(e.offset + dist_[e.u][q], (e.length - e.offset) + dist_[e.v][q]);
    if (q >= base_size_) {
      const auto& f = virtual_[q - base_size_];
      if (f.u == e.u && f.v == e.v) best = std::min(best, std::abs(e.offset - f.offset));
      if (f.u == e.v && f.v == e.u) best = std::min(best, std::abs(e.offset - (f.length - f.offset)));
    }
    return best;
  }

  std::size_t graph_point(std::size_t x0, std::size_t x1, double s) {
    const auto path = chain(x0, x1);
    const double target = s * dist_[x0][x1];
    double walked = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const std::size_t u = path[k];
      const std::size_t v = path[k + 1];
      const double w = dist_[u][v];
      if (walked + w >= target) {
        const double off = target - walked;
        if (off <= 0.0) return u;
        if (off >= w) return v;
        return append_graph({u, v, off, w});
      }
      walked += w;
    }
    return x1;
  }

  std::size_t append_graph(VirtualOnEdge e) {
    check_mutable();
    for (std::size_t k = 0; k < virtual_.size(); ++k) {
      const auto& f = virtual_[k];
      if ((f.u == e.u && f.v == e.v && f.offset == e.offset) ||
          (f.u == e.v && f.v == e.u && f.offset == e.length - e.offset))
        return base_size_ + k;
    }
    std::vector<double> row(dist_.size());
    for (std::size_t q = 0; q < dist_.size(); ++q) row[q] = edge_point_distance(e, q);
    virtual_.push_back(e);
    return append_row(row);
  }

  Backend backend_ = Backend::matrix;
  std::vector<std::vector<double>> dist_;
  std::vector<std::vector<double>> coords_;
  std::vector<std::vector<std::size_t>> pred_;
  std::vector<VirtualOnEdge> virtual_;
  std::vector<Edge> edges_;
  std::size_t base_size_ = 0;
  bool frozen_ = false;
};

}  // namespace hkconv
