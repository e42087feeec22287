#pragma once

#include <smkl/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace smkl {

template <typename Scalar>
struct EigenPairs {
  DenseVector<Scalar> values;   // ascending
  DenseMatrix<Scalar> vectors;  // orthonormal columns, one per value
};

// Full symmetric eigendecomposition (input symmetrized defensively), keeping
// the c smallest pairs.
template <typename Scalar>
EigenPairs<Scalar> smallest_eigenpairs(const DenseMatrix<Scalar>& m, Index c) {
  if (m.rows() != m.cols())
    throw Error("domain", "smallest_eigenpairs: matrix must be square");
  if (c < 1 || c > m.rows())
    throw Error("domain", "smallest_eigenpairs: need 1 <= c <= n, got c = " +
                              std::to_string(c));
  const DenseMatrix<Scalar> sym = (m + m.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(sym);
  if (es.info() != Eigen::Success)
    throw Error("numeric", "smallest_eigenpairs: eigendecomposition failed");
  EigenPairs<Scalar> out;
  out.values = es.eigenvalues().head(c);
  out.vectors = es.eigenvectors().leftCols(c);
  return out;
}

// Cholesky factorization held for repeated right-hand sides; solve() is const
// and safe to call concurrently.
template <typename Scalar>
class SpdSolver {
 public:
  explicit SpdSolver(const DenseMatrix<Scalar>& a) : llt_(a) {
    if (a.rows() != a.cols())
      throw Error("domain", "SpdSolver: matrix must be square");
    if (llt_.info() != Eigen::Success)
      throw Error("not-positive-definite",
                  "SpdSolver: Cholesky factorization failed");
  }

  DenseMatrix<Scalar> solve(const DenseMatrix<Scalar>& b) const {
    if (b.rows() != llt_.matrixL().rows())
      throw Error("domain", "SpdSolver: right-hand side has wrong row count");
    return llt_.solve(b);
  }

 private:
  Eigen::LLT<DenseMatrix<Scalar>> llt_;
};

template <typename Scalar>
DenseMatrix<Scalar> solve_spd(const DenseMatrix<Scalar>& a,
                              const DenseMatrix<Scalar>& b) {
  return SpdSolver<Scalar>(a).solve(b);
}

// ---- k-means on unit-normalized rows -------------------------------------

struct KMeansRun {
  std::vector<int> labels;
  double inertia = 0;                 // within-cluster sum of squares
  std::vector<double> inertia_trace;  // per Lloyd sweep, non-increasing
};

namespace detail {

inline Matrix normalize_rows(const Matrix& rows) {
  Matrix out = rows;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0) out.row(i) /= norm;
  }
  return out;
}

inline Index count_distinct_rows(const Matrix& rows) {
  std::vector<Index> order(static_cast<std::size_t>(rows.rows()));
  std::iota(order.begin(), order.end(), Index(0));
  auto row_less = [&](Index a, Index b) {
    for (Index j = 0; j < rows.cols(); ++j) {
      if (rows(a, j) < rows(b, j)) return true;
      if (rows(a, j) > rows(b, j)) return false;
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  Index distinct = rows.rows() > 0 ? 1 : 0;
  for (std::size_t i = 1; i < order.size(); ++i)
    if (row_less(order[i - 1], order[i])) ++distinct;
  return distinct;
}

// One seeded run: squared-distance-weighted farthest-point seeding, then
// Lloyd sweeps until the assignment stabilizes.
inline KMeansRun kmeans_once(const Matrix& rows, int c, std::mt19937_64& rng) {
  const Index n = rows.rows();
  const Index d = rows.cols();
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Matrix centers(c, d);
  centers.row(0) = rows.row(static_cast<Index>(unif(rng) * n) % n);
  Vector d2min(n);
  for (Index i = 0; i < n; ++i)
    d2min(i) = (rows.row(i) - centers.row(0)).squaredNorm();
  for (int k = 1; k < c; ++k) {
    const double total = d2min.sum();
    Index pick = 0;
    if (total > 0) {
      const double target = unif(rng) * total;
      double acc = 0;
      for (Index i = 0; i < n; ++i) {
        acc += d2min(i);
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(unif(rng) * n) % n;
    }
    centers.row(k) = rows.row(pick);
    for (Index i = 0; i < n; ++i)
      d2min(i) =
          std::min(d2min(i), (rows.row(i) - centers.row(k)).squaredNorm());
  }

  KMeansRun run;
  run.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> counts(c, 0);
  constexpr int kMaxSweeps = 200;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool changed = false;
    // assignment (ties to the lowest center index)
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d2 = (rows.row(i) - centers.row(0)).squaredNorm();
      for (int k = 1; k < c; ++k) {
        const double d2 = (rows.row(i) - centers.row(k)).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = k;
        }
      }
      if (run.labels[static_cast<std::size_t>(i)] != best) {
        run.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    std::fill(counts.begin(), counts.end(), 0);
    for (Index i = 0; i < n; ++i) ++counts[run.labels[i]];
    // revive empty clusters with the point farthest from its center
    for (int k = 0; k < c; ++k) {
      if (counts[k] > 0) continue;
      Index far = -1;
      double far_d2 = -1;
      for (Index i = 0; i < n; ++i) {
        if (counts[run.labels[i]] <= 1) continue;
        const double d2 =
            (rows.row(i) - centers.row(run.labels[i])).squaredNorm();
        if (d2 > far_d2) {
          far_d2 = d2;
          far = i;
        }
      }
      if (far < 0) break;
      --counts[run.labels[far]];
      run.labels[static_cast<std::size_t>(far)] = k;
      counts[k] = 1;
      changed = true;
    }
    // center update
    centers.setZero();
    for (Index i = 0; i < n; ++i) centers.row(run.labels[i]) += rows.row(i);
    for (int k = 0; k < c; ++k)
      if (counts[k] > 0) centers.row(k) /= static_cast<double>(counts[k]);
    double inertia = 0;
    for (Index i = 0; i < n; ++i)
      inertia += (rows.row(i) - centers.row(run.labels[i])).squaredNorm();
    run.inertia = inertia;
    run.inertia_trace.push_back(inertia);
    if (!changed) break;
  }
  return run;
}

}  // namespace detail

// Rows are unit-normalized first (zero rows left as-is); requires at least c
// exactly-distinct normalized rows. Best of `restarts` seeded runs by final
// within-cluster sum of squares.
inline KMeansRun kmeans_run(const Matrix& rows_in, int c, int restarts,
                            std::uint64_t seed) {
  const Index n = rows_in.rows();
  if (c < 1) throw Error("domain", "kmeans: c must be >= 1");
  if (n < c) throw Error("domain", "kmeans: more clusters than rows");
  if (restarts < 1) throw Error("domain", "kmeans: restarts must be >= 1");
  const Matrix rows = detail::normalize_rows(rows_in);
  if (detail::count_distinct_rows(rows) < c)
    throw Error("degenerate-clustering",
                "kmeans: fewer than c distinct rows after normalization");
  std::mt19937_64 rng(seed);
  KMeansRun best;
  for (int r = 0; r < restarts; ++r) {
    KMeansRun run = detail::kmeans_once(rows, c, rng);
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

inline std::vector<int> kmeans(const Matrix& rows, int c, int restarts,
                               std::uint64_t seed) {
  return kmeans_run(rows, c, restarts, seed).labels;
}

// ---- minimum-cost assignment ----------------------------------------------

struct Assignment {
  std::vector<int> perm;  // row i matched to column perm[i]
  double cost = 0;
};

// O(n^3) Hungarian algorithm with row/column potentials, minimizing
// sum_i cost(i, perm[i]) over permutations.
inline Assignment hungarian(const Matrix& cost) {
  if (cost.rows() != cost.cols())
    throw Error("domain", "hungarian: cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  Assignment out;
  if (n == 0) return out;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  out.perm.assign(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) out.perm[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) out.cost += cost(i, out.perm[i]);
  return out;
}

// ---- graph components -----------------------------------------------------

struct ComponentLabels {
  int count = 0;
  std::vector<int> labels;  // component ids in first-visit order
};

// Undirected reachability over edges with weight strictly above tol.
inline ComponentLabels connected_components(const Matrix& w, double tol) {
  if (w.rows() != w.cols())
    throw Error("domain", "connected_components: matrix must be square");
  const Index n = w.rows();
  ComponentLabels out;
  out.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> stack;
  for (Index s = 0; s < n; ++s) {
    if (out.labels[static_cast<std::size_t>(s)] >= 0) continue;
    stack.push_back(s);
    out.labels[static_cast<std::size_t>(s)] = out.count;
    while (!stack.empty()) {
      const Index i = stack.back();
      stack.pop_back();
      for (Index j = 0; j < n; ++j) {
        if (out.labels[static_cast<std::size_t>(j)] >= 0) continue;
        if (w(i, j) > tol || w(j, i) > tol) {
          out.labels[static_cast<std::size_t>(j)] = out.count;
          stack.push_back(j);
        }
      }
    }
    ++out.count;
  }
  return out;
}

inline double default_component_tol(const Matrix& w) {
  return w.size() == 0 ? 0.0 : 1e-8 * w.cwiseAbs().maxCoeff();
}

}  // namespace smkl
