#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bitwise.hpp"
#include "imn/baselines.hpp"
#include "imn/rng.hpp"
#include "imn/synth.hpp"

using imn_test::bits_equal;

using imn::Dataset;

namespace {

Dataset tiny_classes(const std::vector<double>& xs, const std::vector<int>& ys) {
  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) data.x(static_cast<Eigen::Index>(i), 0) = xs[i];
  data.y_class = ys;
  data.n_classes = 1 + *std::max_element(ys.begin(), ys.end());
  data.task = data.n_classes == 2 ? imn::TaskKind::kBinary : imn::TaskKind::kMulticlass;
  data.feature_names = {"f"};
  return data;
}

}  // namespace

TEST_CASE("logreg separates a separable pair and stays deterministic") {
  const Dataset data = tiny_classes({-1.0, 1.0}, {0, 1});
  const imn::LogisticRegression model = imn::train_logreg(data);
  CHECK(model.accuracy(data) == 1.0);
  CHECK(model.predict(Eigen::VectorXd::Constant(1, -3.0)) == 0);
  CHECK(model.predict(Eigen::VectorXd::Constant(1, 3.0)) == 1);

  const imn::LogisticRegression again = imn::train_logreg(data);
  CHECK(bits_equal(model.w, again.w));
  CHECK(bits_equal(model.b, again.b));

  CHECK_THROWS_AS(imn::train_logreg(data, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(imn::train_logreg(data, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(imn::train_logreg(data, 0.0, 0.5, 0), std::invalid_argument);
}

TEST_CASE("logreg gradients match finite differences") {
  // A small 3-class problem with a non-trivial parameter point.
  Dataset data;
  data.x.resize(9, 3);
  imn::Rng rng(15);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 3; ++j) data.x(i, j) = rng.normal();
  data.y_class = {0, 1, 2, 0, 1, 2, 0, 1, 2};
  data.n_classes = 3;
  data.task = imn::TaskKind::kMulticlass;
  data.feature_names = {"a", "b", "c"};

  imn::LogisticRegression model;
  model.w.resize(3, 3);
  model.b.resize(3);
  for (int i = 0; i < 3; ++i) {
    model.b(i) = 0.1 * rng.normal();
    for (int j = 0; j < 3; ++j) model.w(i, j) = 0.5 * rng.normal();
  }

  const double l2 = 0.3;
  Eigen::MatrixXd dw;
  Eigen::VectorXd db;
  imn::logreg_grad(model, data, l2, dw, db);

  const double h = 1e-6;
  double worst = 0.0;
  auto probe = [&](double& theta, double g) {
    const double saved = theta;
    theta = saved + h;
    const double up = imn::logreg_loss(model, data, l2);
    theta = saved - h;
    const double down = imn::logreg_loss(model, data, l2);
    theta = saved;
    const double fd = (up - down) / (2.0 * h);
    const double err = std::abs(g - fd);
    if (err > 1e-10) worst = std::max(worst, err / std::max({std::abs(g), std::abs(fd), 1e-8}));
  };
  for (int i = 0; i < 3; ++i) {
    probe(model.b(i), db(i));
    for (int j = 0; j < 3; ++j) probe(model.w(i, j), dw(i, j));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("l2 shrinks the weights toward zero and predictions toward the priors") {
  // 12 rows, 9 of class 1, features scaled small so the intercepts dominate.
  Dataset data = tiny_classes({-0.4, -0.3, -0.2, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9},
                              {0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1});

  const double free_norm = imn::train_logreg(data, 0.0, 0.1, 20000).w.norm();
  const double mild_norm = imn::train_logreg(data, 1.0, 0.1, 20000).w.norm();
  const imn::LogisticRegression crushed = imn::train_logreg(data, 50.0, 0.01, 20000);
  CHECK(mild_norm < free_norm);
  CHECK(crushed.w.norm() < mild_norm);

  // With the weights pinned near zero only the intercepts speak, and their
  // fixed point is the class frequencies.
  CHECK(crushed.w.cwiseAbs().maxCoeff() < 0.01);
  const Eigen::VectorXd p = crushed.proba(Eigen::VectorXd::Constant(1, 0.2));
  CHECK(p(1) == doctest::Approx(0.75).epsilon(0.03));
}

TEST_CASE("cart: pure data yields a single leaf") {
  const Dataset data = tiny_classes({1.0, 2.0, 3.0}, {1, 1, 1});
  const imn::DecisionTree tree = imn::train_cart(data, 5);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].feature == -1);
  CHECK(tree.nodes[0].leaf_class == 1);
  CHECK(tree.depth() == 0);
  CHECK(tree.accuracy(data) == 1.0);
}

TEST_CASE("cart: depth 2 solves XOR, depth 1 cannot") {
  Dataset data;
  data.x.resize(4, 2);
  data.x << 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0;
  data.y_class = {0, 1, 1, 0};
  data.n_classes = 2;
  data.task = imn::TaskKind::kBinary;
  data.feature_names = {"a", "b"};

  const imn::DecisionTree deep = imn::train_cart(data, 2);
  CHECK(deep.accuracy(data) == 1.0);
  CHECK(deep.depth() == 2);

  const imn::DecisionTree shallow = imn::train_cart(data, 1);
  CHECK(shallow.accuracy(data) == 0.5);
  CHECK(shallow.depth() <= 1);

  // More depth never hurts training accuracy on the same data.
  CHECK(deep.accuracy(data) >= shallow.accuracy(data));

  CHECK_THROWS_AS(imn::train_cart(data, 0), std::invalid_argument);
  CHECK_THROWS_AS(imn::train_cart(data, 2, 0), std::invalid_argument);
}

TEST_CASE("cart: the root split matches an exhaustive 1-D search") {
  imn::Rng rng(99);
  std::vector<double> xs(24);
  std::vector<int> ys(24);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = std::round(rng.uniform(-2.0, 2.0) * 4.0) / 4.0;  // coarse grid forces ties
    ys[i] = rng.uniform() < 0.35 + 0.3 * (xs[i] > 0) ? 1 : 0;
  }
  const Dataset data = tiny_classes(xs, ys);
  const imn::DecisionTree tree = imn::train_cart(data, 1);
  REQUIRE(tree.nodes[0].feature == 0);

  // Oracle: weighted Gini at every midpoint of consecutive distinct values.
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  double best_score = std::numeric_limits<double>::infinity();
  double best_threshold = 0.0;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i] == sorted[i + 1]) continue;
    const double thr = 0.5 * (sorted[i] + sorted[i + 1]);
    int nl = 0, pl = 0, nr = 0, pr = 0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      if (xs[t] <= thr) {
        ++nl;
        pl += ys[t];
      } else {
        ++nr;
        pr += ys[t];
      }
    }
    // Same accumulation order as the library's Gini so rounding cannot flip
    // the argmin between two near-tied thresholds.
    auto gini = [](int pos, int n) {
      double g = 1.0;
      const double q0 = static_cast<double>(n - pos) / static_cast<double>(n);
      g -= q0 * q0;
      const double q1 = static_cast<double>(pos) / static_cast<double>(n);
      g -= q1 * q1;
      return g;
    };
    const double score = (nl * gini(pl, nl) + nr * gini(pr, nr)) / static_cast<double>(xs.size());
    if (score < best_score) {
      best_score = score;
      best_threshold = thr;
    }
  }
  CHECK(tree.nodes[0].threshold == best_threshold);
}

TEST_CASE("auroc: canonical values and a brute-force pair-counting oracle") {
  CHECK(imn::auroc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
  CHECK(imn::auroc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}) == 0.0);
  CHECK(imn::auroc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);

  // 50 quantized scores: plenty of ties for the rank-averaging path.
  imn::Rng rng(7);
  std::vector<double> scores(50);
  std::vector<int> labels(50);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = std::round(rng.uniform() * 10.0) / 10.0;
    labels[i] = rng.uniform() < 0.4 ? 1 : 0;
  }
  double hits = 0.0;
  std::size_t pairs = 0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (labels[p] != 1) continue;
    for (std::size_t q = 0; q < scores.size(); ++q) {
      if (labels[q] != 0) continue;
      ++pairs;
      if (scores[p] > scores[q]) hits += 1.0;
      else if (scores[p] == scores[q]) hits += 0.5;
    }
  }
  REQUIRE(pairs > 0);
  CHECK(imn::auroc(scores, labels) ==
        doctest::Approx(hits / static_cast<double>(pairs)).epsilon(1e-12));

  // Rank-based: invariant under strictly increasing transforms.
  std::vector<double> warped(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) warped[i] = std::exp(3.0 * scores[i] + 1.0);
  CHECK(imn::auroc(warped, labels) == imn::auroc(scores, labels));

  CHECK_THROWS_AS(imn::auroc({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(imn::auroc({0.5, 0.6}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(imn::auroc({0.5, 0.6}, {0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(imn::auroc({0.5}, {1, 0}), std::invalid_argument);
}

TEST_CASE("macro OVR is the mean of the per-class binary curves") {
  imn::Rng rng(23);
  const int n = 18, c = 3;
  Eigen::MatrixXd scores(n, c);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[static_cast<std::size_t>(i)] = i % c;
    for (int k = 0; k < c; ++k)
      scores(i, k) = rng.uniform() + (k == i % c ? 0.3 : 0.0);
  }

  double mean = 0.0;
  for (int k = 0; k < c; ++k) {
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[static_cast<std::size_t>(i)] = scores(i, k);
      y[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(i)] == k ? 1 : 0;
    }
    mean += imn::auroc(s, y);
  }
  mean /= c;
  CHECK(imn::auroc_macro_ovr(scores, labels, c) == doctest::Approx(mean).epsilon(1e-15));

  std::vector<int> single(n, 0);
  CHECK_THROWS_AS(imn::auroc_macro_ovr(scores, single, c), std::invalid_argument);
  CHECK_THROWS_AS(imn::auroc_macro_ovr(scores, labels, 4), std::invalid_argument);
}

TEST_CASE("gain is the AUROC ratio against the tree") {
  CHECK(imn::gain(0.9, 0.6) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(imn::gain(0.42, 0.42) == 1.0);
  // Consistency across a chain of comparisons.
  CHECK(imn::gain(0.9, 0.8) * imn::gain(0.8, 0.5) == doctest::Approx(imn::gain(0.9, 0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(imn::gain(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("top-k removal: k = 0 reproduces the unablated run, dead features change nothing") {
  Dataset data = imn::gen_half_moons(40, 0.1, 12);
  // Append an all-zero third feature.
  Dataset padded = data;
  padded.x.conservativeResize(40, 3);
  padded.x.col(2).setZero();
  padded.feature_names.push_back("dead");
  const auto [train_split, val_split] = imn::split(padded, 0.25, 9, true);

  imn::TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 30;
  cfg.warmup_epochs = 1;
  cfg.n_cycles = 1;
  imn::NetConfig net;
  net.input_dim = 3;
  net.n_blocks = 1;
  net.hidden_width = 8;

  // Rank the dead feature first so k = 1 only masks a column of zeros.
  const std::vector<int> ranking = {2, 0, 1};
  const std::vector<std::uint64_t> seeds = {5};
  const auto curve =
      imn::topk_removal_curve(train_split, val_split, ranking, 1, cfg, net, seeds);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].k == 0);
  CHECK(curve[1].k == 1);

  // The k = 0 point equals a direct run with the same derived seeds.
  imn::TrainConfig run_cfg = cfg;
  run_cfg.seed = 5;
  imn::NetConfig run_net = net;
  run_net.seed = imn::splitmix64(5);
  const auto direct = imn::train(train_split, run_cfg, run_net);
  CHECK(curve[0].mean_accuracy == imn::ensemble_accuracy(direct.ensemble, val_split));

  // Masking an already-zero column is a no-op end to end.
  CHECK(curve[1].mean_accuracy == curve[0].mean_accuracy);

  CHECK_THROWS_AS(imn::topk_removal_curve(train_split, val_split, ranking, 3, cfg, net, seeds),
                  std::invalid_argument);
  CHECK_THROWS_AS(imn::topk_removal_curve(train_split, val_split, {2}, 2, cfg, net, seeds),
                  std::invalid_argument);
  CHECK_THROWS_AS(imn::topk_removal_curve(train_split, val_split, ranking, 1, cfg, net, {}),
                  std::invalid_argument);
}
