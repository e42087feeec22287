#include <smkl/evaluation.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"

using namespace smkl;
using testsup::error_kind;

TEST_CASE("accuracy forgives a pure relabeling") {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  const std::vector<int> pred = {2, 2, 0, 0, 1, 1};
  CHECK(clustering_accuracy(pred, truth) == doctest::Approx(1.0));
}

TEST_CASE("accuracy counts the best bijection on a mixed case") {
  // Clusters {0,0,1} vs classes {0,1,1}: the best map fixes both labels and
  // matches 2 of 3.
  const std::vector<int> truth = {0, 1, 1};
  const std::vector<int> pred = {0, 0, 1};
  CHECK(clustering_accuracy(pred, truth) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("accuracy handles rectangular label sets by padding") {
  // Three predicted clusters against two true classes and vice versa.
  const std::vector<int> truth = {0, 0, 1, 1};
  const std::vector<int> pred = {0, 1, 2, 2};
  CHECK(clustering_accuracy(pred, truth) == doctest::Approx(0.75));
  CHECK(clustering_accuracy(truth, pred) == doctest::Approx(0.75));
}

TEST_CASE("accuracy agrees with the exhaustive permutation oracle") {
  std::mt19937_64 rng(71);
  for (int rep = 0; rep < 30; ++rep) {
    const int c = 2 + static_cast<int>(rng() % 5);  // up to 6 classes
    const int n = 10 + static_cast<int>(rng() % 30);
    std::vector<int> truth(static_cast<std::size_t>(n));
    std::vector<int> pred(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      truth[static_cast<std::size_t>(i)] = static_cast<int>(rng()) % c;
      if (truth[static_cast<std::size_t>(i)] < 0)
        truth[static_cast<std::size_t>(i)] += c;
      pred[static_cast<std::size_t>(i)] = static_cast<int>(rng()) % c;
      if (pred[static_cast<std::size_t>(i)] < 0)
        pred[static_cast<std::size_t>(i)] += c;
    }
    CHECK(clustering_accuracy(pred, truth) ==
          doctest::Approx(testsup::exhaustive_accuracy(pred, truth))
              .epsilon(1e-12));
  }
}

TEST_CASE("accuracy validates its inputs") {
  CHECK(error_kind([] {
          clustering_accuracy({0, 1}, {0, 1, 2});
        }) == "domain");
  CHECK(error_kind([] { clustering_accuracy({}, {}); }) == "domain");
  CHECK(error_kind([] { clustering_accuracy({0, -1}, {0, 1}); }) == "domain");
}

TEST_CASE("nmi is one for identical and for relabeled partitions") {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2, 2};
  CHECK(nmi(truth, truth) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<int> relabeled = {1, 1, 2, 2, 0, 0, 0};
  CHECK(nmi(relabeled, truth) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nmi is symmetric") {
  std::mt19937_64 rng(72);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<int> a(20), b(20);
    for (int i = 0; i < 20; ++i) {
      a[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 3);
      b[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 4);
    }
    CHECK(nmi(a, b) == doctest::Approx(nmi(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("nmi vanishes for an exactly independent pair") {
  // A 2x2 balanced contingency table: every joint cell holds n/4, so mutual
  // information is exactly zero.
  const std::vector<int> a = {0, 0, 1, 1};
  const std::vector<int> b = {0, 1, 0, 1};
  CHECK(std::abs(nmi(a, b)) <= 1e-12);
}

TEST_CASE("nmi matches a hand-computed two-by-two table") {
  // Table [[2,1],[1,2]]: H(a) = H(b) = ln 2, I = sum p log(p/(p_a p_b)).
  const std::vector<int> a = {0, 0, 0, 1, 1, 1};
  const std::vector<int> b = {0, 0, 1, 0, 1, 1};
  const double p_same = 2.0 / 6.0, p_diff = 1.0 / 6.0;
  const double mi = 2.0 * p_same * std::log(p_same / 0.25) +
                    2.0 * p_diff * std::log(p_diff / 0.25);
  const double expected = mi / std::log(2.0);
  CHECK(nmi(a, b) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("nmi treats constant partitions as contracted") {
  const std::vector<int> flat = {0, 0, 0, 0};
  const std::vector<int> split = {0, 0, 1, 1};
  CHECK(nmi(flat, flat) == doctest::Approx(1.0));
  CHECK(nmi(flat, split) == doctest::Approx(0.0));
  CHECK(nmi(split, flat) == doctest::Approx(0.0));
}

TEST_CASE("nmi stays within the unit interval") {
  std::mt19937_64 rng(73);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<int> a(15), b(15);
    for (int i = 0; i < 15; ++i) {
      a[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 4);
      b[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 3);
    }
    const double v = nmi(a, b);
    CHECK(v >= -1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("evaluate reports matched accuracy and a consistent confusion") {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  const std::vector<int> pred = {2, 2, 0, 0, 1, 1};
  const MetricReport rep = evaluate(pred, truth);
  CHECK(rep.acc == doctest::Approx(1.0));
  CHECK(rep.nmi == doctest::Approx(1.0));
  int trace = 0;
  for (int i = 0; i < rep.confusion.rows(); ++i) trace += rep.confusion(i, i);
  CHECK(static_cast<double>(trace) / 6.0 == doctest::Approx(rep.acc));
}

TEST_CASE("evaluate confusion accounts for every sample") {
  std::mt19937_64 rng(74);
  for (int rep_i = 0; rep_i < 10; ++rep_i) {
    const int n = 12 + static_cast<int>(rng() % 20);
    std::vector<int> truth(static_cast<std::size_t>(n));
    std::vector<int> pred(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      truth[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 3);
      pred[static_cast<std::size_t>(i)] = static_cast<int>(rng() % 4);
    }
    const MetricReport rep = evaluate(pred, truth);
    CHECK(rep.confusion.sum() == n);
    CHECK(rep.acc ==
          doctest::Approx(clustering_accuracy(pred, truth)).epsilon(1e-12));
    int trace = 0;
    for (int i = 0; i < rep.confusion.rows(); ++i)
      trace += rep.confusion(i, i);
    CHECK(static_cast<double>(trace) / n == doctest::Approx(rep.acc));
    CHECK(rep.confusion.rows() == rep.confusion.cols());
  }
}

TEST_CASE("restricted evaluate scores a plain match on the given rows") {
  const std::vector<int> truth = {0, 1, 0, 1, 0};
  const std::vector<int> pred = {0, 0, 0, 1, 1};
  const std::vector<int> idx = {1, 3, 4};  // matches at 3 only
  const MetricReport rep = evaluate(pred, truth, idx);
  CHECK(rep.acc == doctest::Approx(1.0 / 3.0));
  CHECK(rep.confusion.sum() == 3);
}

TEST_CASE("restricted evaluate does not remap labels") {
  // A perfect relabeling scores zero under the anchored metric.
  const std::vector<int> truth = {0, 0, 1, 1};
  const std::vector<int> pred = {1, 1, 0, 0};
  const std::vector<int> idx = {0, 1, 2, 3};
  const MetricReport rep = evaluate(pred, truth, idx);
  CHECK(rep.acc == doctest::Approx(0.0));
  CHECK(clustering_accuracy(pred, truth) == doctest::Approx(1.0));
}

TEST_CASE("restricted evaluate rejects bad index sets") {
  const std::vector<int> truth = {0, 1};
  const std::vector<int> pred = {0, 1};
  CHECK(error_kind([&] { evaluate(pred, truth, {}); }) == "domain");
  CHECK(error_kind([&] { evaluate(pred, truth, {2}); }) == "domain");
  CHECK(error_kind([&] { evaluate(pred, truth, {-1}); }) == "domain");
}
