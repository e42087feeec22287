#pragma once

#include <smkl/types.hpp>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace smkl {

// Squared Euclidean distances between rows of a sample matrix; dmax2 caches
// the largest entry (the bandwidth anchor for the gaussian kernels).
template <typename Scalar>
struct SqDists {
  DenseMatrix<Scalar> d2;
  Scalar dmax2 = 0;
};

// Gram-based pairwise squared distances with an exact-zero diagonal, exact
// symmetry (upper triangle mirrored), and rounding-noise negatives clamped.
template <typename Derived>
SqDists<typename Derived::Scalar> pairwise_sq_dists(
    const Eigen::MatrixBase<Derived>& x_expr) {
  using Scalar = typename Derived::Scalar;
  const DenseMatrix<Scalar> x = x_expr;
  const Index n = x.rows();
  const DenseVector<Scalar> sq = x.rowwise().squaredNorm();
  DenseMatrix<Scalar> d2 = Scalar(-2) * (x * x.transpose());
  d2.colwise() += sq;
  d2.rowwise() += sq.transpose();
  SqDists<Scalar> out;
  out.dmax2 = 0;
  for (Index j = 0; j < n; ++j) {
    d2(j, j) = 0;
    for (Index i = 0; i < j; ++i) {
      const Scalar v = std::max(Scalar(0), d2(i, j));
      d2(i, j) = v;
      d2(j, i) = v;
      out.dmax2 = std::max(out.dmax2, v);
    }
  }
  out.d2 = std::move(d2);
  return out;
}

// exp(-d2 / (t * dmax2)): unit diagonal, entries in (0, 1].
template <typename Scalar>
DenseMatrix<Scalar> gaussian_kernel(const DenseMatrix<Scalar>& d2, Scalar dmax2,
                                    Scalar t) {
  if (!(t > 0)) throw Error("domain", "gaussian_kernel: t must be positive");
  if (!(dmax2 > 0))
    throw Error("degenerate-data",
                "gaussian_kernel: all samples identical (max distance is 0)");
  return (-d2.array() / (t * dmax2)).exp().matrix();
}

template <typename Derived>
DenseMatrix<typename Derived::Scalar> linear_kernel(
    const Eigen::MatrixBase<Derived>& x) {
  return x.derived() * x.derived().transpose();
}

// (a + <x_i, x_j>)^b elementwise; PSD for a >= 0 and even b.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> polynomial_kernel(
    const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar a, int b) {
  using Scalar = typename Derived::Scalar;
  if (!(a >= 0)) throw Error("domain", "polynomial_kernel: a must be >= 0");
  if (b < 1) throw Error("domain", "polynomial_kernel: b must be >= 1");
  DenseMatrix<Scalar> gram = x.derived() * x.derived().transpose();
  return (gram.array() + a).pow(b).matrix();
}

// Divides by the largest absolute entry so the result has unit max magnitude;
// exactly idempotent (dividing by 1.0 is a no-op bit-for-bit).
template <typename Scalar>
DenseMatrix<Scalar> rescale_kernel(const DenseMatrix<Scalar>& h) {
  const Scalar m = h.array().abs().maxCoeff();
  if (!(m > 0))
    throw Error("degenerate-kernel", "rescale_kernel: all-zero kernel");
  return h / m;
}

enum class KernelFamily { gaussian, linear, polynomial };

// Descriptor of one bank member; round-trips through name()/parse() for the
// kernel-cache manifest.
struct KernelKind {
  KernelFamily family = KernelFamily::linear;
  double t = 0;  // gaussian bandwidth multiplier
  double a = 0;  // polynomial shift
  int b = 0;     // polynomial degree

  static KernelKind gaussian(double t);
  static KernelKind linear();
  static KernelKind polynomial(double a, int b);
  std::string name() const;
  static KernelKind parse(const std::string& text);
};

struct KernelMatrix {
  Matrix values;
  KernelKind kind;
};

// Fixed, ordered collection of rescaled kernels over one dataset. Treated as
// immutable once built.
struct KernelBank {
  std::vector<KernelMatrix> kernels;
  std::string recipe;

  int size() const { return static_cast<int>(kernels.size()); }
  Index n() const { return kernels.empty() ? 0 : kernels[0].values.rows(); }
};

// Named recipes: "clustering12" = gaussians t in {0.01,0.05,0.1,1,10,50,100},
// linear, polynomials (a,b) in {0,1}x{2,4}; "ssl7" = gaussians t in
// {0.1,1,10,100}, linear, polynomials a in {0,1} with b=2.
std::vector<KernelKind> recipe_kinds(const std::string& recipe);
KernelBank build_bank(const Matrix& x, const std::string& recipe);
KernelBank build_bank(const Matrix& x, const std::vector<KernelKind>& kinds,
                      std::string recipe_name);

// Kernel cache: kernel_XX.csv per member plus manifest.txt listing the recipe
// name and the member kinds in order.
void save_bank(const KernelBank& bank, const std::string& dir);
KernelBank load_bank(const std::string& dir);

}  // namespace smkl
