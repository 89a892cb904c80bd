#include "eegdgr/model_io.hpp"

#include <json.hpp>

#include <bit>
#include <fstream>
#include <iterator>
#include <map>

namespace eegdgr::net {

namespace {

using json = nlohmann::json;

struct TensorEntry {
  std::string name;
  std::vector<Eigen::Index> shape;
  const double* data;  // row-major
  std::size_t count;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

json hyper_to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs},   {"patience", c.patience},
          {"dropout_rate", c.dropout_rate},   {"conv_depth", c.conv_depth}, {"hidden", c.hidden},
          {"seed", c.seed},                   {"beta1", c.beta1},     {"beta2", c.beta2},
          {"epsilon", c.epsilon}};
}

TrainConfig hyper_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.patience = j.at("patience").get<int>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.conv_depth = j.at("conv_depth").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  return c;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const ClassifierModel& model) {
  model.validate();
  const int k = model.num_classes();
  const int m = model.num_channels();

  RowMajor eigvals(k, m);
  for (int c = 0; c < k; ++c) eigvals.row(c) = model.csp.per_class_eigvals.at(static_cast<std::size_t>(c)).transpose();
  const RowMajor csp_w = model.csp.w;
  const RowMajor adjacency = model.adjacency.matrix();
  const RowMajor filters = model.conv.filters;
  const RowMajor hidden_w = model.fc_hidden.weights;
  const RowMajor out_w = model.fc_out.weights;

  const std::vector<TensorEntry> tensors{
      {"csp.w", {m, m}, csp_w.data(), static_cast<std::size_t>(csp_w.size())},
      {"csp.eigvals", {k, m}, eigvals.data(), static_cast<std::size_t>(eigvals.size())},
      {"dgr.adjacency", {m, m}, adjacency.data(), static_cast<std::size_t>(adjacency.size())},
      {"conv.filters", {filters.rows(), 2, 2}, filters.data(), static_cast<std::size_t>(filters.size())},
      {"conv.bias", {model.conv.bias.size()}, model.conv.bias.data(), static_cast<std::size_t>(model.conv.bias.size())},
      {"fc_hidden.weights", {hidden_w.rows(), hidden_w.cols()}, hidden_w.data(),
       static_cast<std::size_t>(hidden_w.size())},
      {"fc_hidden.bias", {model.fc_hidden.bias.size()}, model.fc_hidden.bias.data(),
       static_cast<std::size_t>(model.fc_hidden.bias.size())},
      {"fc_out.weights", {out_w.rows(), out_w.cols()}, out_w.data(), static_cast<std::size_t>(out_w.size())},
      {"fc_out.bias", {model.fc_out.bias.size()}, model.fc_out.bias.data(),
       static_cast<std::size_t>(model.fc_out.bias.size())},
  };

  json manifest;
  manifest["format_version"] = kModelFormatVersion;
  manifest["class_order"] = model.class_order;
  manifest["dims"] = {{"channels", m},
                      {"window", model.window},
                      {"depth", model.conv.depth()},
                      {"hidden", model.fc_hidden.weights.rows()},
                      {"classes", k}};
  manifest["hyperparameters"] = hyper_to_json(model.hyper);
  manifest["normalization"] = {{"mean", to_std(model.norm.mean)}, {"std", to_std(model.norm.std)}};
  json list = json::array();
  std::size_t offset = 0;
  for (const auto& t : tensors) {
    const std::size_t length = t.count * sizeof(double);
    list.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"length", length}});
    offset += length;
  }
  manifest["tensors"] = list;

  const std::string text = manifest.dump();
  std::vector<std::uint8_t> out(std::begin(kModelMagic), std::end(kModelMagic));
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + offset);
  for (const auto& t : tensors) {
    for (std::size_t i = 0; i < t.count; ++i) put_f64(out, t.data[i]);
  }
  return out;
}

ClassifierModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes[0] != 'B' || bytes[1] != '2' || bytes[2] != 'O') {
    throw ModelIoError(ModelIoErrorKind::bad_magic, "bad magic: not a model container");
  }
  if (bytes[3] != static_cast<std::uint8_t>(kModelMagic[3])) {
    throw ModelIoError(ModelIoErrorKind::version_mismatch,
                       std::string("container version mismatch: found '") + static_cast<char>(bytes[3]) +
                           "', expected '1'");
  }
  if (bytes.size() < 8) throw ModelIoError(ModelIoErrorKind::length_mismatch, "container truncated before manifest");
  std::uint32_t manifest_len = 0;
  for (int i = 0; i < 4; ++i) manifest_len |= static_cast<std::uint32_t>(bytes[4 + i]) << (8 * i);
  if (bytes.size() - 8 < manifest_len) {
    throw ModelIoError(ModelIoErrorKind::length_mismatch,
                       "manifest length " + std::to_string(manifest_len) + " exceeds container size");
  }

  json manifest;
  try {
    manifest = json::parse(bytes.begin() + 8, bytes.begin() + 8 + manifest_len);
  } catch (const json::exception& e) {
    throw ModelIoError(ModelIoErrorKind::malformed_manifest, std::string("manifest is not valid JSON: ") + e.what());
  }
  const auto blob = bytes.subspan(8 + manifest_len);

  try {
    if (manifest.at("format_version").get<int>() != kModelFormatVersion) {
      throw ModelIoError(ModelIoErrorKind::version_mismatch,
                         "manifest format_version " + manifest.at("format_version").dump() + " is not supported");
    }
    std::map<std::string, RowMajor> tensors;
    for (const auto& t : manifest.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      const auto shape = t.at("shape").get<std::vector<std::int64_t>>();
      const auto offset = t.at("offset").get<std::size_t>();
      const auto length = t.at("length").get<std::size_t>();
      std::size_t count = 1;
      for (auto s : shape) {
        if (s < 0) throw ModelIoError(ModelIoErrorKind::malformed_manifest, "tensor '" + name + "' has a negative dim");
        count *= static_cast<std::size_t>(s);
      }
      if (length != count * sizeof(double)) {
        throw ModelIoError(ModelIoErrorKind::length_mismatch,
                           "tensor '" + name + "' declares " + std::to_string(length) + " bytes but its shape needs " +
                               std::to_string(count * sizeof(double)));
      }
      if (offset > blob.size() || blob.size() - offset < length) {
        throw ModelIoError(ModelIoErrorKind::length_mismatch,
                           "tensor '" + name + "' runs past the end of the blob section (truncated container)");
      }
      const Eigen::Index rows = shape.empty() ? 1 : static_cast<Eigen::Index>(shape[0]);
      const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(count) / std::max<Eigen::Index>(rows, 1);
      RowMajor value(rows, shape.size() <= 1 ? 1 : cols);
      for (std::size_t i = 0; i < count; ++i) value.data()[i] = get_f64(blob.data() + offset + i * 8);
      tensors[name] = std::move(value);
    }
    auto need = [&](const std::string& name) -> const RowMajor& {
      const auto it = tensors.find(name);
      if (it == tensors.end()) throw ModelIoError(ModelIoErrorKind::malformed_manifest, "missing tensor '" + name + "'");
      return it->second;
    };

    ClassifierModel model;
    model.class_order = manifest.at("class_order").get<std::vector<int>>();
    model.window = manifest.at("dims").at("window").get<int>();
    model.hyper = hyper_from_json(manifest.at("hyperparameters"));
    model.norm.mean = to_eigen(manifest.at("normalization").at("mean").get<std::vector<double>>());
    model.norm.std = to_eigen(manifest.at("normalization").at("std").get<std::vector<double>>());

    model.csp.w = need("csp.w");
    model.csp.num_channels = static_cast<int>(model.csp.w.rows());
    model.csp.class_order = model.class_order;
    const RowMajor& eig = need("csp.eigvals");
    for (Eigen::Index r = 0; r < eig.rows(); ++r) model.csp.per_class_eigvals.push_back(eig.row(r).transpose());
    model.adjacency = dgr::project_adjacency(need("dgr.adjacency"));
    model.conv.filters = need("conv.filters");
    model.conv.bias = need("conv.bias").col(0);
    model.fc_hidden.weights = need("fc_hidden.weights");
    model.fc_hidden.bias = need("fc_hidden.bias").col(0);
    model.fc_hidden.activation = Activation::tanh;
    model.fc_out.weights = need("fc_out.weights");
    model.fc_out.bias = need("fc_out.bias").col(0);
    model.fc_out.activation = Activation::softmax;
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw ModelIoError(ModelIoErrorKind::malformed_manifest, std::string("manifest field error: ") + e.what());
  } catch (const NetError& e) {
    throw ModelIoError(ModelIoErrorKind::malformed_manifest, std::string("inconsistent model: ") + e.what());
  }
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelIoError(ModelIoErrorKind::io, "cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelIoError(ModelIoErrorKind::io, "cannot open model file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace eegdgr::net
