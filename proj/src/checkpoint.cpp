#include "imn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace imn {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int alphabet_index(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  throw std::invalid_argument("base64: invalid character");
}

}  // namespace

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (static_cast<std::uint32_t>(bytes[i]) << 16) |
                            (static_cast<std::uint32_t>(bytes[i + 1]) << 8) |
                            static_cast<std::uint32_t>(bytes[i + 2]);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (rest == 2) {
    const std::uint32_t v = (static_cast<std::uint32_t>(bytes[i]) << 16) |
                            (static_cast<std::uint32_t>(bytes[i + 1]) << 8);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64: length must be a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool pad1 = text[i + 2] == '=';
    const bool pad2 = text[i + 3] == '=';
    if (pad1 && !pad2) throw std::invalid_argument("base64: malformed padding");
    const std::uint32_t a = static_cast<std::uint32_t>(alphabet_index(text[i]));
    const std::uint32_t b = static_cast<std::uint32_t>(alphabet_index(text[i + 1]));
    const std::uint32_t c = pad1 ? 0 : static_cast<std::uint32_t>(alphabet_index(text[i + 2]));
    const std::uint32_t d = pad2 ? 0 : static_cast<std::uint32_t>(alphabet_index(text[i + 3]));
    const std::uint32_t v = (a << 18) | (b << 12) | (c << 6) | d;
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    if (!pad1) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    if (!pad2) out.push_back(static_cast<unsigned char>(v & 0xff));
  }
  return out;
}

std::string encode_doubles(const double* values, std::size_t count) {
  std::vector<unsigned char> bytes;
  bytes.reserve(count * 8);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int shift = 0; shift < 64; shift += 8)
      bytes.push_back(static_cast<unsigned char>((bits >> shift) & 0xff));
  }
  return base64_encode(bytes);
}

std::vector<double> decode_doubles(const std::string& text) {
  const std::vector<unsigned char> bytes = base64_decode(text);
  if (bytes.size() % 8 != 0)
    throw std::invalid_argument("checkpoint: double payload has a truncated value");
  std::vector<double> values(bytes.size() / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int byte = 0; byte < 8; ++byte)
      bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(byte)])
              << (8 * byte);
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

nlohmann::json net_config_to_json(const NetConfig& config) {
  return {{"input_dim", config.input_dim},       {"n_blocks", config.n_blocks},
          {"hidden_width", config.hidden_width}, {"dropout_p", config.dropout_p},
          {"n_classes", config.n_classes},       {"seed", config.seed}};
}

NetConfig net_config_from_json(const nlohmann::json& doc) {
  NetConfig config;
  config.input_dim = doc.at("input_dim").get<int>();
  config.n_blocks = doc.at("n_blocks").get<int>();
  config.hidden_width = doc.at("hidden_width").get<int>();
  config.dropout_p = doc.at("dropout_p").get<double>();
  config.n_classes = doc.at("n_classes").get<int>();
  config.seed = doc.at("seed").get<std::uint64_t>();
  config.validate();
  return config;
}

nlohmann::json train_config_to_json(const TrainConfig& config) {
  return {{"epochs", config.epochs},
          {"batch_size", config.batch_size},
          {"peak_lr", config.peak_lr},
          {"weight_decay", config.weight_decay},
          {"warmup_epochs", config.warmup_epochs},
          {"lambda_l1", config.lambda_l1},
          {"n_cycles", config.n_cycles},
          {"min_lr", config.min_lr},
          {"beta1", config.beta1},
          {"beta2", config.beta2},
          {"eps", config.eps},
          {"seed", config.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& doc) {
  TrainConfig config;
  config.epochs = doc.at("epochs").get<int>();
  config.batch_size = doc.at("batch_size").get<int>();
  config.peak_lr = doc.at("peak_lr").get<double>();
  config.weight_decay = doc.at("weight_decay").get<double>();
  config.warmup_epochs = doc.at("warmup_epochs").get<int>();
  config.lambda_l1 = doc.at("lambda_l1").get<double>();
  config.n_cycles = doc.at("n_cycles").get<int>();
  config.min_lr = doc.at("min_lr").get<double>();
  config.beta1 = doc.at("beta1").get<double>();
  config.beta2 = doc.at("beta2").get<double>();
  config.eps = doc.at("eps").get<double>();
  config.seed = doc.at("seed").get<std::uint64_t>();
  config.validate();
  return config;
}

namespace {

nlohmann::json layer_to_json(const std::string& name, const DenseLayer& layer) {
  std::vector<double> w_flat;
  w_flat.reserve(static_cast<std::size_t>(layer.w.size()));
  for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.w.cols(); ++c) w_flat.push_back(layer.w(r, c));
  return {{"name", name},
          {"rows", layer.w.rows()},
          {"cols", layer.w.cols()},
          {"w", encode_doubles(w_flat.data(), w_flat.size())},
          {"b", encode_doubles(layer.b.data(), static_cast<std::size_t>(layer.b.size()))}};
}

void layer_from_json(const nlohmann::json& doc, DenseLayer& layer) {
  const auto rows = doc.at("rows").get<Eigen::Index>();
  const auto cols = doc.at("cols").get<Eigen::Index>();
  const std::vector<double> w_flat = decode_doubles(doc.at("w").get<std::string>());
  const std::vector<double> b = decode_doubles(doc.at("b").get<std::string>());
  if (static_cast<Eigen::Index>(w_flat.size()) != rows * cols ||
      static_cast<Eigen::Index>(b.size()) != rows)
    throw std::invalid_argument("checkpoint: layer payload does not match declared shape");
  layer.w.resize(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) layer.w(r, c) = w_flat[k++];
  layer.b = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
}

}  // namespace

nlohmann::json params_to_json(const NetConfig& config, const ParamSet& params) {
  const auto names = ParamSet::layer_names(config.n_blocks);
  const auto layers = params.layers();
  if (names.size() != layers.size())
    throw std::invalid_argument("checkpoint: parameter set does not match config");
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < layers.size(); ++i) out.push_back(layer_to_json(names[i], *layers[i]));
  return out;
}

ParamSet params_from_json(const NetConfig& config, const nlohmann::json& doc) {
  ParamSet params = ParamSet::zeros(config);
  auto layers = params.layers();
  const auto names = ParamSet::layer_names(config.n_blocks);
  if (!doc.is_array() || doc.size() != layers.size())
    throw std::invalid_argument("checkpoint: wrong layer count");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (doc[i].at("name").get<std::string>() != names[i])
      throw std::invalid_argument("checkpoint: unexpected layer order");
    layer_from_json(doc[i], *layers[i]);
  }
  const ParamSet expected = ParamSet::zeros(config);
  const auto shape_ref = expected.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i]->w.rows() != shape_ref[i]->w.rows() ||
        layers[i]->w.cols() != shape_ref[i]->w.cols())
      throw std::invalid_argument("checkpoint: layer shape does not match config");
  }
  return params;
}

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  if (ckpt.ensemble.snapshots.empty())
    throw std::invalid_argument("checkpoint: ensemble has no snapshots");
  nlohmann::json snapshots = nlohmann::json::array();
  for (const ParamSet& p : ckpt.ensemble.snapshots)
    snapshots.push_back(params_to_json(ckpt.ensemble.config, p));
  nlohmann::json out{{"format_version", kCheckpointFormatVersion},
                     {"net_config", net_config_to_json(ckpt.ensemble.config)},
                     {"train_config", train_config_to_json(ckpt.train_config)},
                     {"snapshots", snapshots}};
  if (ckpt.preprocessor.has_value()) out["preprocessor"] = ckpt.preprocessor->to_json();
  return out;
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  if (doc.at("format_version").get<int>() != kCheckpointFormatVersion)
    throw std::invalid_argument("checkpoint: unsupported format version");
  Checkpoint ckpt;
  ckpt.ensemble.config = net_config_from_json(doc.at("net_config"));
  ckpt.train_config = train_config_from_json(doc.at("train_config"));
  for (const auto& snap : doc.at("snapshots"))
    ckpt.ensemble.snapshots.push_back(params_from_json(ckpt.ensemble.config, snap));
  if (ckpt.ensemble.snapshots.empty())
    throw std::invalid_argument("checkpoint: ensemble has no snapshots");
  if (doc.contains("preprocessor"))
    ckpt.preprocessor = PreprocessorState::from_json(doc.at("preprocessor"));
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  out << checkpoint_to_json(ckpt).dump(2) << '\n';
  if (!out) throw std::runtime_error("checkpoint: write to " + path + " failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  nlohmann::json doc;
  in >> doc;
  return checkpoint_from_json(doc);
}

}  // namespace imn
