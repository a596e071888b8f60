#include "cubepad/network_io.hpp"

#include <cmath>
#include <fstream>

#include "cubepad/rng.hpp"
#include "cubepad/tensor_io.hpp"
#include "json.hpp"

namespace cubepad {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kFormat = "cubepad-network/1";

const char* const kLstmNames[] = {"x_i", "x_f", "x_c", "x_o", "h_i", "h_f", "h_c", "h_o",
                                  "c_i", "c_f", "c_o", "b_i", "b_f", "b_c", "b_o"};

Tensor* lstm_field(ConvLSTMWeights& w, std::size_t i) {
  Tensor* fields[] = {&w.x_i, &w.x_f, &w.x_c, &w.x_o, &w.h_i, &w.h_f, &w.h_c, &w.h_o,
                      &w.c_i, &w.c_f, &w.c_o, &w.b_i, &w.b_f, &w.b_c, &w.b_o};
  return fields[i];
}

Tensor he_uniform(Rng& rng, Dims dims, std::size_t fan_in) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::vector<float> v(element_count(dims));
  for (float& x : v) x = static_cast<float>(rng.uniform(-bound, bound));
  return Tensor(std::move(dims), std::move(v));
}

Tensor load_ref(const ordered_json& node, const fs::path& base, const std::string& what) {
  if (!node.is_string()) throw FormatError("manifest field '" + what + "' must be a file path");
  return read_tensor(base / node.get<std::string>());
}

template <typename T>
T get_or(const ordered_json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("manifest field '") + key + "' has the wrong type");
  }
}

std::size_t get_size(const ordered_json& obj, const char* key, std::size_t fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_unsigned()) throw FormatError(std::string("manifest field '") + key +
                                                   "' must be a non-negative integer");
  return it->get<std::size_t>();
}

PadMode parse_pad(const std::string& s) {
  if (s == "cube") return PadMode::Cube;
  if (s == "zero") return PadMode::Zero;
  throw FormatError("unknown pad mode '" + s + "'");
}

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "none") return Activation::None;
  throw FormatError("unknown activation '" + s + "'");
}

}  // namespace

NetworkBundle load_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("manifest " + manifest.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || get_or<std::string>(doc, "format", "") != kFormat)
    throw FormatError("manifest " + manifest.string() + " lacks format \"" + kFormat + "\"");
  const fs::path base = manifest.parent_path();

  NetworkBundle b;
  const auto layers = doc.find("layers");
  if (layers == doc.end() || !layers->is_array()) throw FormatError("manifest needs a layers array");
  for (const auto& l : *layers) {
    const std::string type = get_or<std::string>(l, "type", "");
    if (type == "conv") {
      ConvLayer c{load_ref(l.value("kernel", ordered_json()), base, "kernel"),
                  load_ref(l.value("bias", ordered_json()), base, "bias")};
      c.stride = get_size(l, "stride", 1);
      c.pad = parse_pad(get_or<std::string>(l, "pad", "cube"));
      c.activation = parse_activation(get_or<std::string>(l, "activation", "relu"));
      b.net.layers.emplace_back(std::move(c));
    } else if (type == "pool") {
      b.net.layers.emplace_back(PoolLayer{get_size(l, "kernel", 2), get_size(l, "stride", 2)});
    } else if (type == "upsample") {
      b.net.layers.emplace_back(UpsampleLayer{get_size(l, "factor", 2)});
    } else {
      throw FormatError("unknown layer type '" + type + "'");
    }
  }
  b.net.head = load_ref(doc.value("head", ordered_json()), base, "head");
  b.net.post_pool = get_size(doc, "post_pool", 3);
  b.net.validate();

  if (const auto lstm = doc.find("convlstm"); lstm != doc.end()) {
    if (!lstm->is_object()) throw FormatError("manifest field 'convlstm' must be an object");
    ConvLSTMWeights w = ConvLSTMWeights::zeros(1, 1);
    for (std::size_t i = 0; i < std::size(kLstmNames); ++i)
      *lstm_field(w, i) = load_ref(lstm->value(kLstmNames[i], ordered_json()), base,
                                   std::string("convlstm.") + kLstmNames[i]);
    w.validate();
    b.lstm = std::move(w);
  }
  return b;
}

void save_manifest(const NetworkBundle& bundle, const fs::path& manifest) {
  bundle.net.validate();
  const fs::path base = manifest.parent_path();
  if (!base.empty()) fs::create_directories(base);
  auto store = [&](const Tensor& t, const std::string& name) {
    const std::string file = name + ".cpt";
    write_tensor(t, base / file);
    return file;
  };

  ordered_json doc;
  doc["format"] = kFormat;
  ordered_json layers = ordered_json::array();
  std::size_t conv_index = 0;
  for (const Layer& l : bundle.net.layers) {
    ordered_json j;
    if (const auto* c = std::get_if<ConvLayer>(&l)) {
      const std::string stem = "conv" + std::to_string(conv_index++);
      j["type"] = "conv";
      j["kernel"] = store(c->kernel, stem + "_w");
      j["bias"] = store(c->bias, stem + "_b");
      j["stride"] = c->stride;
      j["pad"] = c->pad == PadMode::Cube ? "cube" : "zero";
      j["activation"] = c->activation == Activation::ReLU ? "relu" : "none";
    } else if (const auto* p = std::get_if<PoolLayer>(&l)) {
      j["type"] = "pool";
      j["kernel"] = p->kernel;
      j["stride"] = p->stride;
    } else {
      j["type"] = "upsample";
      j["factor"] = std::get<UpsampleLayer>(l).factor;
    }
    layers.push_back(std::move(j));
  }
  doc["layers"] = std::move(layers);
  doc["head"] = store(bundle.net.head, "head");
  doc["post_pool"] = bundle.net.post_pool;
  if (bundle.lstm) {
    bundle.lstm->validate();
    ConvLSTMWeights w = *bundle.lstm;
    ordered_json j;
    for (std::size_t i = 0; i < std::size(kLstmNames); ++i)
      j[kLstmNames[i]] = store(*lstm_field(w, i), std::string("lstm_") + kLstmNames[i]);
    doc["convlstm"] = std::move(j);
  }
  std::ofstream out(manifest);
  if (!out) throw IoError("cannot write manifest " + manifest.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest " + manifest.string());
}

NetworkSpec toy_network(std::uint64_t seed, const ToyNetOptions& o) {
  if (o.input_channels < 1 || o.hidden_channels < 1 || o.classes < 1)
    throw ArgumentError("toy network channel counts must be positive");
  Rng rng(seed);
  NetworkSpec net;
  const std::size_t c = o.hidden_channels;
  net.layers.emplace_back(ConvLayer{he_uniform(rng, {c, o.input_channels, 3, 3}, o.input_channels * 9),
                                    Tensor::zeros({c})});
  net.layers.emplace_back(PoolLayer{2, 2});
  net.layers.emplace_back(ConvLayer{he_uniform(rng, {c, c, 3, 3}, c * 9), Tensor::zeros({c})});
  net.head = he_uniform(rng, {o.classes, c, 1, 1}, c);
  net.post_pool = o.post_pool;
  net.validate();
  return net;
}

ConvLSTMWeights toy_convlstm(std::uint64_t seed, std::size_t channels) {
  if (channels < 1) throw ArgumentError("ConvLSTM channel count must be positive");
  Rng rng(seed);
  const std::size_t k = channels;
  ConvLSTMWeights w = ConvLSTMWeights::zeros(k, k);
  for (std::size_t i = 0; i < 8; ++i) *lstm_field(w, i) = he_uniform(rng, {k, k, 3, 3}, 2 * k * 9);
  for (std::size_t i = 8; i < 11; ++i) {
    std::vector<float> v(k);
    for (float& x : v) x = static_cast<float>(rng.uniform(-0.1, 0.1));
    *lstm_field(w, i) = Tensor({k}, std::move(v));
  }
  return w;
}

}  // namespace cubepad
