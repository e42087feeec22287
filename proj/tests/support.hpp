#pragma once

// Shared test scaffolding: independent numeric oracles (deliberately NOT the
// library's solve/eigen paths), synthetic data generators with known ground
// truth, and filesystem helpers.

#include <smkl/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace testsup {

using smkl::Index;
using smkl::Matrix;
using smkl::Vector;

// ---- independent linear-algebra oracles ------------------------------------

// Gaussian elimination with partial pivoting. Hand-rolled on purpose: the
// library solves through Cholesky/LU factorizations, so agreement here is
// evidence, not tautology.
inline Vector gauss_solve(Matrix a, Vector b) {
  const Index n = a.rows();
  if (a.cols() != n || b.size() != n)
    throw std::invalid_argument("gauss_solve: shape mismatch");
  for (Index k = 0; k < n; ++k) {
    Index piv = k;
    for (Index i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) throw std::runtime_error("gauss_solve: singular");
    if (piv != k) {
      a.row(piv).swap(a.row(k));
      std::swap(b(piv), b(k));
    }
    for (Index i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a.row(i).tail(n - k) -= f * a.row(k).tail(n - k);
      b(i) -= f * b(k);
    }
  }
  Vector x(n);
  for (Index i = n - 1; i >= 0; --i) {
    double s = b(i);
    for (Index j = i + 1; j < n; ++j) s -= a(i, j) * x(j);
    x(i) = s / a(i, i);
  }
  return x;
}

struct JacobiEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns match values
};

// Cyclic Jacobi rotations on a symmetric matrix. Slow but self-contained and
// independent of the library's tridiagonal QL path.
inline JacobiEigen jacobi_eigen(Matrix m, int max_sweeps = 100) {
  const Index n = m.rows();
  if (m.cols() != n) throw std::invalid_argument("jacobi_eigen: not square");
  m = ((m + m.transpose()) / 2.0).eval();
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (off < 1e-26 * std::max(1.0, m.squaredNorm())) break;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (m(p, q) == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index i = 0; i < n; ++i) {
          const double mip = m(i, p), miq = m(i, q);
          m(i, p) = c * mip - s * miq;
          m(i, q) = s * mip + c * miq;
        }
        for (Index j = 0; j < n; ++j) {
          const double mpj = m(p, j), mqj = m(q, j);
          m(p, j) = c * mpj - s * mqj;
          m(q, j) = s * mpj + c * mqj;
        }
        for (Index i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  JacobiEigen out;
  out.values.resize(n);
  for (Index i = 0; i < n; ++i) out.values(i) = m(i, i);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return out.values(a) < out.values(b); });
  Vector sorted(n);
  Matrix vs(n, n);
  for (Index i = 0; i < n; ++i) {
    sorted(i) = out.values(order[static_cast<std::size_t>(i)]);
    vs.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  out.values = sorted;
  out.vectors = vs;
  return out;
}

// ---- random matrix generators ----------------------------------------------

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = unif(rng);
  return m;
}

inline Matrix random_symmetric(Index n, std::mt19937_64& rng) {
  const Matrix m = random_matrix(n, n, rng);
  return (m + m.transpose()) / 2.0;
}

inline Matrix random_psd(Index n, std::mt19937_64& rng) {
  const Matrix m = random_matrix(n, n, rng);
  return m * m.transpose() / static_cast<double>(n);
}

// Orthonormal n x c via modified Gram-Schmidt on random columns.
inline Matrix random_orthonormal(Index n, Index c, std::mt19937_64& rng) {
  Matrix q = random_matrix(n, c, rng);
  for (Index j = 0; j < c; ++j) {
    for (Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    const double nrm = q.col(j).norm();
    if (nrm < 1e-12) {
      q.col(j).setZero();
      q(j % n, j) = 1.0;
    } else {
      q.col(j) /= nrm;
    }
  }
  return q;
}

// ---- synthetic datasets with known ground truth ----------------------------

struct LabeledData {
  Matrix x;                 // n x d
  std::vector<int> labels;  // length n
};

// Isotropic Gaussian blobs, `per_class` samples around each center.
inline LabeledData make_blobs(const std::vector<std::pair<double, double>>& centers,
                              int per_class, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const int c = static_cast<int>(centers.size());
  LabeledData out;
  out.x.resize(static_cast<Index>(c) * per_class, 2);
  Index row = 0;
  for (int k = 0; k < c; ++k) {
    for (int i = 0; i < per_class; ++i, ++row) {
      out.x(row, 0) = centers[static_cast<std::size_t>(k)].first + noise(rng);
      out.x(row, 1) = centers[static_cast<std::size_t>(k)].second + noise(rng);
      out.labels.push_back(k);
    }
  }
  return out;
}

// The usual three well-separated blobs (centers 10 sigma apart).
inline LabeledData blobs3(int per_class, std::uint64_t seed) {
  return make_blobs({{0, 0}, {10, 0}, {0, 10}}, per_class, 1.0, seed);
}

// Two interleaved half-circles ("two moons"), n/2 points per moon, Gaussian
// coordinate noise.
inline LabeledData make_moons(int n, double noise_std, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_std);
  const int half = n / 2;
  LabeledData out;
  out.x.resize(2 * half, 2);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < half; ++i) {
    const double t = pi * i / (half - 1);
    out.x(i, 0) = std::cos(t) + noise(rng);
    out.x(i, 1) = std::sin(t) + noise(rng);
    out.labels.push_back(0);
  }
  for (int i = 0; i < half; ++i) {
    const double t = pi * i / (half - 1);
    out.x(half + i, 0) = 1.0 - std::cos(t) + noise(rng);
    out.x(half + i, 1) = 0.5 - std::sin(t) + noise(rng);
    out.labels.push_back(1);
  }
  return out;
}

// ---- metric oracles ---------------------------------------------------------

// Best label-matching accuracy by brute force over all mappings of predicted
// ids onto true ids (padded to a common id count). Exponential; keep c <= 7.
inline double exhaustive_accuracy(const std::vector<int>& pred,
                                  const std::vector<int>& truth) {
  int c = 0;
  for (int v : pred) c = std::max(c, v + 1);
  for (int v : truth) c = std::max(c, v + 1);
  std::vector<int> perm(static_cast<std::size_t>(c));
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0;
  do {
    int hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (perm[static_cast<std::size_t>(pred[i])] == truth[i]) ++hits;
    best = std::max(best, static_cast<double>(hits) /
                              static_cast<double>(pred.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Within-cluster sum of squares for given labels (on the rows as given).
inline double wcss(const Matrix& rows, const std::vector<int>& labels, int c) {
  Matrix centers = Matrix::Zero(c, rows.cols());
  std::vector<int> counts(static_cast<std::size_t>(c), 0);
  for (Index i = 0; i < rows.rows(); ++i) {
    centers.row(labels[static_cast<std::size_t>(i)]) += rows.row(i);
    counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]++;
  }
  for (int k = 0; k < c; ++k)
    if (counts[static_cast<std::size_t>(k)] > 0)
      centers.row(k) /= counts[static_cast<std::size_t>(k)];
  double total = 0;
  for (Index i = 0; i < rows.rows(); ++i)
    total += (rows.row(i) - centers.row(labels[static_cast<std::size_t>(i)]))
                 .squaredNorm();
  return total;
}

// Runs fn and reports the Error kind it threw ("<none>" if it returned).
template <typename Fn>
std::string error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const smkl::Error& e) {
    return e.kind();
  }
  return "<none>";
}

// ---- filesystem helpers -----------------------------------------------------

// Random affinity with a planted block structure; every block is connected
// via a ring plus random chords.
inline smkl::Matrix planted_blocks(const std::vector<int>& sizes,
                                   std::mt19937_64& rng) {
  int n = 0;
  for (int sz : sizes) n += sz;
  smkl::Matrix w = smkl::Matrix::Zero(n, n);
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  int base = 0;
  for (int sz : sizes) {
    for (int i = 0; i < sz; ++i) {
      const int a = base + i;
      const int b = base + (i + 1) % sz;
      if (a != b) {
        const double v = unif(rng);
        w(a, b) = w(b, a) = v;
      }
    }
    for (int extra = 0; extra < sz; ++extra) {
      const int a = base + static_cast<int>(rng() % static_cast<unsigned>(sz));
      const int b = base + static_cast<int>(rng() % static_cast<unsigned>(sz));
      if (a != b) {
        const double v = unif(rng);
        w(a, b) = w(b, a) = v;
      }
    }
    base += sz;
  }
  return w;
}

class TempDir {
 public:
  TempDir() : TempDir("t") {}
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("smkl_test_" + tag + "_" + std::to_string(++counter) + "_" +
             std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }
  std::string dir() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& body) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_text: cannot open " + path);
  std::fwrite(body.data(), 1, body.size(), f);
  std::fclose(f);
}

inline std::string read_text(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("read_text: cannot open " + path);
  std::string body;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) body.append(buf, got);
  std::fclose(f);
  return body;
}

}  // namespace testsup
