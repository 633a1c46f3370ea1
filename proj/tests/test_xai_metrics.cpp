#include <doctest.h>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bitwise.hpp"
#include "imn/explain.hpp"
#include "imn/rng.hpp"
#include "imn/synth.hpp"
#include "imn/train.hpp"
#include "imn/xai_metrics.hpp"

using imn_test::bits_equal;

using imn::Explainer;
using imn::InstanceModel;
using imn::ModelFactory;
using imn::ModelFn;

TEST_CASE("pearson: perfect, inverted, and degenerate inputs") {
  Eigen::VectorXd a(3), b(3);
  a << 1.0, 2.0, 3.0;
  b << 2.0, 4.0, 6.0;
  CHECK(*imn::pearson(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*imn::pearson(a, (-b).eval()) == doctest::Approx(-1.0).epsilon(1e-12));

  Eigen::VectorXd flat = Eigen::VectorXd::Constant(3, 4.2);
  CHECK(!imn::pearson(a, flat).has_value());
  CHECK(!imn::pearson(flat, b).has_value());

  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK_THROWS_AS(imn::pearson(one, one), std::invalid_argument);
  CHECK_THROWS_AS(imn::pearson(a, one), std::invalid_argument);
}

TEST_CASE("Shapley oracle: closed form for linear models") {
  Eigen::VectorXd w(3);
  w << 3.0, -2.0, 0.5;
  const ModelFn f = [&](const Eigen::VectorXd& z) { return w.dot(z) + 1.0; };

  Eigen::VectorXd x(3);
  x << 0.7, -1.3, 2.0;
  const Eigen::VectorXd zero_bg = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd phi = imn::brute_force_shapley(f, x, zero_bg);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(phi(j) - w(j) * x(j)) <= 1e-9);

  // Non-zero background shifts the reference point: phi_j = w_j (x_j - b_j).
  Eigen::VectorXd bg(3);
  bg << 0.5, 0.5, -1.0;
  const Eigen::VectorXd shifted = imn::brute_force_shapley(f, x, bg);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(shifted(j) - w(j) * (x(j) - bg(j))) <= 1e-9);
}

TEST_CASE("Shapley oracle: efficiency, symmetry, and dummy axioms") {
  const ModelFn f = [](const Eigen::VectorXd& z) {
    return std::sin(z(0)) * z(1) + z(2) * z(2);
  };
  Eigen::VectorXd x(3);
  x << 0.9, -0.4, 1.1;
  const Eigen::VectorXd bg = Eigen::VectorXd::Zero(3);

  // Efficiency: attributions account exactly for f(x) - f(background).
  const Eigen::VectorXd phi = imn::brute_force_shapley(f, x, bg);
  CHECK(std::abs(phi.sum() - (f(x) - f(bg))) <= 1e-9);

  // Symmetry: interchangeable features with equal values get equal credit.
  const ModelFn sym = [](const Eigen::VectorXd& z) {
    return std::tanh(z(0)) + std::tanh(z(1)) + 0.3 * z(0) * z(1);
  };
  Eigen::VectorXd pair(2);
  pair << 0.8, 0.8;
  const Eigen::VectorXd psi = imn::brute_force_shapley(sym, pair, Eigen::VectorXd::Zero(2));
  CHECK(std::abs(psi(0) - psi(1)) <= 1e-12);

  // Dummy: a feature the model never reads gets exactly zero.
  const ModelFn ignores_last = [](const Eigen::VectorXd& z) { return z(0) * z(0) - z(1); };
  const Eigen::VectorXd with_dummy = imn::brute_force_shapley(ignores_last, x, bg);
  CHECK(with_dummy(2) == 0.0);
}

TEST_CASE("Shapley oracle: enumeration caps and shape guards") {
  const ModelFn f = [](const Eigen::VectorXd& z) { return z.sum(); };
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(imn::brute_force_shapley(f, x, Eigen::VectorXd::Zero(3), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(imn::brute_force_shapley(f, x, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(imn::brute_force_shapley(f, Eigen::VectorXd::Ones(16), Eigen::VectorXd::Zero(16)),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      imn::brute_force_shapley(f, Eigen::VectorXd::Ones(26), Eigen::VectorXd::Zero(26), 30),
      std::invalid_argument);
}

TEST_CASE("faithfulness: drops correlate with themselves perfectly") {
  Eigen::VectorXd w(3);
  w << 0.1, 0.2, 0.3;
  const ModelFn f = [&](const Eigen::VectorXd& z) { return w.dot(z) + 0.5; };
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.7;
  const Eigen::VectorXd bg = Eigen::VectorXd::Zero(3);

  // For the linear model the per-feature drop is w_j x_j.
  Eigen::VectorXd drops = w.cwiseProduct(x);
  CHECK(*imn::faithfulness_instance(f, drops, x, bg) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*imn::faithfulness_instance(f, (-drops).eval(), x, bg) ==
        doctest::Approx(-1.0).epsilon(1e-12));

  // Constant attributions, or an instance sitting on the baseline, have no
  // variance to correlate.
  CHECK(!imn::faithfulness_instance(f, Eigen::VectorXd::Ones(3), x, bg).has_value());
  CHECK(!imn::faithfulness_instance(f, drops, bg, bg).has_value());

  CHECK_THROWS_AS(imn::faithfulness_instance(f, Eigen::VectorXd::Ones(2), x, bg),
                  std::invalid_argument);
}

TEST_CASE("monotonicity: ideal and adversarial orderings") {
  Eigen::VectorXd w(3);
  w << 1.0, 2.0, 3.0;
  const ModelFn f = [&](const Eigen::VectorXd& z) { return w.dot(z); };
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
  const Eigen::VectorXd bg = Eigen::VectorXd::Zero(3);

  // Attributions matching the true effect sizes walk the gains upward.
  CHECK(imn::monotonicity_instance(f, w, x, bg) == 1.0);

  // Reversed attributions walk them downward: no ordered pair survives.
  Eigen::VectorXd reversed(3);
  reversed << 3.0, 2.0, 1.0;
  CHECK(imn::monotonicity_instance(f, reversed, x, bg) == 0.0);

  Eigen::VectorXd tiny(1);
  CHECK_THROWS_AS(imn::monotonicity_instance(f, tiny, tiny, tiny), std::invalid_argument);
}

TEST_CASE("infidelity: the generated weights are a perfect local surrogate of a linear logit") {
  Eigen::VectorXd a(3);
  a << 1.5, -0.25, 0.8;
  const ModelFn logit = [&](const Eigen::VectorXd& z) { return a.dot(z) - 2.0; };
  Eigen::VectorXd x(3);
  x << 0.3, 1.1, -0.6;

  // predicted = a . eps equals actual = f(x) - f(x - eps) up to rounding.
  CHECK(imn::infidelity_instance(logit, a, x, 0.1, 500, 7) <= 1e-20);

  // A zero surrogate must pay the full variance of the model differences.
  const double zero_a = imn::infidelity_instance(logit, Eigen::VectorXd::Zero(3), x, 0.1, 500, 7);
  CHECK(zero_a > 1e-4);

  // Deterministic per seed.
  CHECK(imn::infidelity_instance(logit, a, x, 0.1, 100, 9) ==
        imn::infidelity_instance(logit, a, x, 0.1, 100, 9));

  CHECK_THROWS_AS(imn::infidelity_instance(logit, a, x, 0.0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(imn::infidelity_instance(logit, a, x, 0.1, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(imn::infidelity_instance(logit, Eigen::VectorXd::Zero(2), x, 0.1, 10, 1),
                  std::invalid_argument);
}

namespace {

// A fixed linear model exposed through the metric interfaces. The prob view
// is affine (not squashed) so drop patterns stay exactly linear.
ModelFactory linear_factory(const Eigen::VectorXd& w) {
  return [w](const Eigen::VectorXd&) {
    InstanceModel im;
    im.prob = [w](const Eigen::VectorXd& z) { return w.dot(z) * 0.1 + 0.5; };
    im.logit = [w](const Eigen::VectorXd& z) { return w.dot(z); };
    return im;
  };
}

Explainer impact_explainer(const Eigen::VectorXd& w) {
  auto attr = [w](const Eigen::VectorXd& x, int) { return Eigen::VectorXd(w.cwiseProduct(x)); };
  auto pert = [w](const Eigen::VectorXd&, int) { return w; };
  return {"impact", attr, pert};
}

}  // namespace

TEST_CASE("dataset-level metrics aggregate and skip degenerate instances") {
  Eigen::VectorXd w(3);
  w << 1.0, -2.0, 0.5;
  const ModelFactory model = linear_factory(w);
  const Explainer explainer = impact_explainer(w);
  const Eigen::VectorXd bg = Eigen::VectorXd::Zero(3);

  Eigen::MatrixXd xs(3, 3);
  xs << 1.0, 0.5, -1.0, 0.25, -0.75, 2.0, -1.5, 1.0, 0.5;

  CHECK(imn::faithfulness(model, explainer, xs, bg) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(imn::monotonicity(model, explainer, xs, bg) == 1.0);
  CHECK(imn::shapley_corr(model, explainer, xs, bg) == doctest::Approx(1.0).epsilon(1e-12));

  // An all-baseline row has no drops to correlate: skipped, not fatal.
  Eigen::MatrixXd with_zero_row(4, 3);
  with_zero_row << xs, Eigen::RowVector3d::Zero();
  int skipped = 0;
  const double kept_mean = imn::faithfulness(model, explainer, with_zero_row, bg, &skipped);
  CHECK(skipped == 1);
  CHECK(kept_mean == doctest::Approx(1.0).epsilon(1e-12));

  // When every instance is degenerate the metric refuses to answer.
  Eigen::MatrixXd all_zero = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(imn::faithfulness(model, explainer, all_zero, bg), std::runtime_error);
  CHECK_THROWS_AS(imn::faithfulness(model, explainer, Eigen::MatrixXd(0, 3), bg),
                  std::invalid_argument);
  CHECK_THROWS_AS(imn::shapley_corr(model, explainer, xs.topRows(1), bg), std::invalid_argument);

  // Infidelity of the exact weights is zero; determinism across calls.
  CHECK(imn::infidelity(model, explainer, xs) <= 1e-20);
  CHECK(imn::infidelity(model, explainer, xs, 0.1, 50, 3) ==
        imn::infidelity(model, explainer, xs, 0.1, 50, 3));
}

TEST_CASE("shapley_corr flags a sign error on a two-feature model") {
  Eigen::VectorXd w(2);
  w << 1.0, 2.0;
  const ModelFactory model = linear_factory(w);

  // Attribute the right magnitude with the wrong sign on feature 1.
  auto attr = [w](const Eigen::VectorXd& x, int) {
    Eigen::VectorXd v = w.cwiseProduct(x);
    v(1) = -v(1);
    return v;
  };
  const Explainer flipped{"flipped", attr, attr};

  Eigen::MatrixXd xs(2, 2);
  xs << 1.0, 1.0, -0.5, 0.75;
  CHECK(imn::shapley_corr(model, flipped, xs, Eigen::VectorXd::Zero(2)) ==
        doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("random attributions: deterministic, standard normal in bulk") {
  const Eigen::VectorXd a = imn::random_attribution(5, 11);
  const Eigen::VectorXd b = imn::random_attribution(5, 11);
  CHECK(bits_equal(a, b));
  CHECK(a.size() == 5);
  CHECK(!bits_equal(a, imn::random_attribution(5, 12)));
  CHECK_THROWS_AS(imn::random_attribution(0, 1), std::invalid_argument);

  const int n = 100000;
  const Eigen::VectorXd big = imn::random_attribution(n, 3);
  CHECK(std::abs(big.mean()) < 0.02);
  const double var = (big.array() - big.mean()).square().sum() / n;
  CHECK(std::abs(var - 1.0) < 0.02);

  // The explainer derives an independent stream per instance index and uses
  // the same vector for attribution and perturbation.
  const Explainer rnd = imn::random_explainer(42);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
  CHECK(bits_equal(rnd.attribute(x, 0), rnd.perturbation_vector(x, 0)));
  CHECK(bits_equal(rnd.attribute(x, 0), rnd.attribute(x, 0)));
  CHECK(!bits_equal(rnd.attribute(x, 0), rnd.attribute(x, 1)));
}

TEST_CASE("roar: score arithmetic and input guards") {
  std::vector<imn::RoarPoint> curve = {{0.2, 0.9}, {0.4, 0.8}, {0.6, 0.8}, {0.8, 0.85}};
  CHECK(imn::roar_monotonicity_score(curve) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(imn::roar_monotonicity_score({{0.2, 0.5}, {0.4, 0.5}}) == 1.0);
  CHECK_THROWS_AS(imn::roar_monotonicity_score({{0.2, 0.9}}), std::invalid_argument);

  const imn::Dataset data = imn::gen_half_moons(40, 0.1, 1);
  const auto [train_split, val_split] = imn::split(data, 0.25, 3, true);
  imn::TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 30;
  cfg.warmup_epochs = 1;
  cfg.n_cycles = 1;
  imn::NetConfig net;
  net.input_dim = 2;
  net.n_blocks = 1;
  net.hidden_width = 8;
  net.seed = 4;

  CHECK_THROWS_AS(
      imn::roar_monotonicity(train_split, val_split, {1.0}, {0.4}, cfg, net),
      std::invalid_argument);
  CHECK_THROWS_AS(
      imn::roar_monotonicity(train_split, val_split, {1.0, 0.5}, {}, cfg, net),
      std::invalid_argument);
  CHECK_THROWS_AS(
      imn::roar_monotonicity(train_split, val_split, {1.0, 0.5}, {1.2}, cfg, net),
      std::invalid_argument);
  // ceil(0.6 * 2) = 2 features would leave nothing to train on.
  CHECK_THROWS_AS(
      imn::roar_monotonicity(train_split, val_split, {1.0, 0.5}, {0.6}, cfg, net),
      std::invalid_argument);

  // One valid fraction: a single retrain with the top feature zeroed.
  const auto curve1 =
      imn::roar_monotonicity(train_split, val_split, {1.0, 0.5}, {0.4}, cfg, net);
  REQUIRE(curve1.size() == 1);
  CHECK(curve1[0].fraction == 0.4);
  CHECK(curve1[0].accuracy >= 0.0);
  CHECK(curve1[0].accuracy <= 1.0);
}

TEST_CASE("the IMN wiring exposes the ensemble's own coefficients") {
  const imn::Dataset data = imn::gen_half_moons(40, 0.1, 9);
  imn::TrainConfig cfg;
  cfg.epochs = 6;
  cfg.batch_size = 20;
  cfg.warmup_epochs = 1;
  cfg.n_cycles = 1;
  cfg.seed = 8;
  imn::NetConfig net;
  net.input_dim = 2;
  net.n_blocks = 1;
  net.hidden_width = 8;
  net.seed = 21;
  const auto result = imn::train(data, cfg, net);
  const auto& ens = result.ensemble;

  const Explainer ex = imn::imn_explainer(ens);
  CHECK(ex.name == "imn");
  const ModelFactory factory = imn_model_factory(ens);

  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd x = data.x.row(i).transpose();
    const imn::Attribution attr = imn::local_attribution(ens, x);
    CHECK(bits_equal(ex.attribute(x, i), attr.impacts));

    const imn::GeneratedLinearModel lin = imn::ensemble_generate(ens, x);
    CHECK(bits_equal(ex.perturbation_vector(x, i),
                     Eigen::VectorXd(lin.weights.row(attr.target_class).transpose())));

    const InstanceModel im = factory(x);
    const int cls = imn::ensemble_predict(ens, x);
    CHECK(im.prob(x) == imn::ensemble_proba(ens, x)(cls));
    CHECK(im.logit(x) == imn::predict_logits(lin, x)(cls));
  }
}
