#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitwise.hpp"
#include "imn/checkpoint.hpp"
#include "imn/format.hpp"
#include "imn/preprocess.hpp"
#include "imn/rng.hpp"
#include "temp_dir.hpp"

using imn_test::bits_equal;
using imn_test::TempDir;

namespace {

imn::NetConfig demo_net() {
  imn::NetConfig net;
  net.input_dim = 3;
  net.n_blocks = 2;
  net.hidden_width = 8;
  net.dropout_p = 0.25;
  net.n_classes = 2;
  net.seed = 99;
  return net;
}

}  // namespace

TEST_CASE("base64 matches the canonical example and round-trips") {
  const std::vector<unsigned char> man = {'M', 'a', 'n'};
  CHECK(imn::base64_encode(man) == "TWFu");
  CHECK(imn::base64_encode({'M', 'a'}) == "TWE=");
  CHECK(imn::base64_encode({'M'}) == "TQ==");
  CHECK(imn::base64_encode({}) == "");

  imn::Rng rng(17);
  for (std::size_t len : {1u, 2u, 3u, 4u, 57u, 200u}) {
    std::vector<unsigned char> bytes(len);
    for (auto& b : bytes) b = static_cast<unsigned char>(rng.below(256));
    CHECK(imn::base64_decode(imn::base64_encode(bytes)) == bytes);
  }

  CHECK_THROWS_AS(imn::base64_decode("TWF"), std::invalid_argument);    // bad length
  CHECK_THROWS_AS(imn::base64_decode("TQ=x"), std::invalid_argument);   // malformed padding
  CHECK_THROWS_AS(imn::base64_decode("TW!u"), std::invalid_argument);   // bad character
}

TEST_CASE("double payloads survive bit-exactly, including awkward values") {
  std::vector<double> values = {0.0,
                                -0.0,
                                1.0,
                                -1.0 / 3.0,
                                1e-308,
                                std::numeric_limits<double>::max(),
                                std::numeric_limits<double>::denorm_min(),
                                std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::quiet_NaN(),
                                0.1 + 0.2};
  const std::string text = imn::encode_doubles(values.data(), values.size());
  const std::vector<double> back = imn::decode_doubles(text);
  REQUIRE(back.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(bits_equal(values[i], back[i]));

  // 80 chars encode 60 bytes: not a multiple of 8, so not a valid payload.
  CHECK_THROWS_AS(imn::decode_doubles(std::string(80, 'A')), std::invalid_argument);
}

TEST_CASE("format_double renders with round-trip precision") {
  for (double v : {1.0 / 3.0, 0.1, -2.5e-17, 12345.678901234567, 1e300}) {
    CHECK(std::strtod(imn::format_double(v).c_str(), nullptr) == v);
  }
  CHECK(imn::format_double(1.0) == "1");
}

TEST_CASE("params round-trip bitwise through JSON") {
  const imn::NetConfig net = demo_net();
  const imn::ModelParams params = imn::init_params(net);
  const nlohmann::json doc = imn::params_to_json(net, params.p);
  const imn::ParamSet back = imn::params_from_json(net, doc);

  const auto orig = params.p.layers();
  const auto rest = back.layers();
  REQUIRE(orig.size() == rest.size());
  for (std::size_t l = 0; l < orig.size(); ++l) {
    CHECK(bits_equal(orig[l]->w, rest[l]->w));
    CHECK(bits_equal(orig[l]->b, rest[l]->b));
  }

  // A payload whose shape disagrees with the config is rejected.
  imn::NetConfig wider = net;
  wider.hidden_width = 16;
  CHECK_THROWS_AS(imn::params_from_json(wider, doc), std::invalid_argument);
}

TEST_CASE("net and train configs round-trip through JSON") {
  imn::NetConfig net = demo_net();
  const imn::NetConfig net2 = imn::net_config_from_json(imn::net_config_to_json(net));
  CHECK(net2.input_dim == net.input_dim);
  CHECK(net2.n_blocks == net.n_blocks);
  CHECK(net2.hidden_width == net.hidden_width);
  CHECK(net2.dropout_p == net.dropout_p);
  CHECK(net2.n_classes == net.n_classes);
  CHECK(net2.seed == net.seed);

  imn::TrainConfig cfg;
  cfg.epochs = 42;
  cfg.batch_size = 7;
  cfg.peak_lr = 0.123;
  cfg.weight_decay = 0.456;
  cfg.warmup_epochs = 2;
  cfg.lambda_l1 = 0.789;
  cfg.n_cycles = 8;
  cfg.min_lr = 0.001;
  cfg.seed = 31337;
  const imn::TrainConfig cfg2 = imn::train_config_from_json(imn::train_config_to_json(cfg));
  CHECK(cfg2.epochs == 42);
  CHECK(cfg2.batch_size == 7);
  CHECK(cfg2.peak_lr == 0.123);
  CHECK(cfg2.weight_decay == 0.456);
  CHECK(cfg2.warmup_epochs == 2);
  CHECK(cfg2.lambda_l1 == 0.789);
  CHECK(cfg2.n_cycles == 8);
  CHECK(cfg2.min_lr == 0.001);
  CHECK(cfg2.seed == 31337);
}

TEST_CASE("checkpoints round-trip through disk with optional preprocessor state") {
  TempDir dir;
  const imn::NetConfig net = demo_net();

  imn::Checkpoint ckpt;
  ckpt.ensemble.config = net;
  imn::NetConfig other = net;
  other.seed = 100;
  ckpt.ensemble.snapshots.push_back(imn::init_params(net).p);
  ckpt.ensemble.snapshots.push_back(imn::init_params(other).p);
  ckpt.train_config.epochs = 30;
  ckpt.train_config.warmup_epochs = 0;
  ckpt.train_config.n_cycles = 2;
  ckpt.train_config.seed = 5;

  const std::string path = dir.file("model.json");
  imn::save_checkpoint(ckpt, path);
  const imn::Checkpoint back = imn::load_checkpoint(path);

  CHECK(back.ensemble.config.hidden_width == net.hidden_width);
  CHECK(back.train_config.epochs == 30);
  CHECK(back.train_config.seed == 5);
  CHECK(!back.preprocessor.has_value());
  REQUIRE(back.ensemble.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto orig = ckpt.ensemble.snapshots[s].layers();
    const auto rest = back.ensemble.snapshots[s].layers();
    for (std::size_t l = 0; l < orig.size(); ++l) {
      CHECK(bits_equal(orig[l]->w, rest[l]->w));
      CHECK(bits_equal(orig[l]->b, rest[l]->b));
    }
  }

  // The on-disk document declares its format version.
  nlohmann::json doc = nlohmann::json::parse(imn_test::read_file(path));
  CHECK(doc.at("format_version").get<int>() == imn::kCheckpointFormatVersion);

  // An unknown version is refused.
  doc["format_version"] = imn::kCheckpointFormatVersion + 1;
  CHECK_THROWS_AS(imn::checkpoint_from_json(doc), std::invalid_argument);

  // Attach preprocessor state and confirm it reloads.
  imn::RawTable table;
  table.schema.columns = {{"a", imn::ColumnKind::kNumeric},
                          {"b", imn::ColumnKind::kCategorical},
                          {"y", imn::ColumnKind::kTarget}};
  table.rows = {{"1.0", "x", "yes"}, {"2.0", "z", "no"}, {"3.0", "x", "yes"}, {"4.0", "z", "no"}};
  imn::PreprocessorState state =
      imn::fit_preprocessor(table, {0, 1, 2, 3}, imn::TaskKind::kBinary, 10.0);
  ckpt.preprocessor = state;
  imn::save_checkpoint(ckpt, path);
  const imn::Checkpoint with_pre = imn::load_checkpoint(path);
  REQUIRE(with_pre.preprocessor.has_value());
  CHECK(with_pre.preprocessor->target_column == state.target_column);

  // Round-tripped state transforms identically.
  const imn::Dataset before = imn::transform(table, state);
  const imn::Dataset after = imn::transform(table, *with_pre.preprocessor);
  CHECK(bits_equal(before.x, after.x));

  CHECK_THROWS_AS(imn::load_checkpoint(dir.file("missing.json")), std::runtime_error);
  imn::Checkpoint hollow;
  hollow.ensemble.config = net;
  CHECK_THROWS_AS(imn::checkpoint_to_json(hollow), std::invalid_argument);
}
