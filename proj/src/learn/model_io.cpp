#include "beamprint/learn/model_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "beamprint/errors.hpp"

namespace beamprint::learn {

using nlohmann::json;

namespace {

template <typename T>
json pack(const std::vector<T>& v) {
  std::vector<std::uint8_t> bytes(v.size() * sizeof(T));
  if (!v.empty()) std::memcpy(bytes.data(), v.data(), bytes.size());
  return json::binary(std::move(bytes));
}

template <typename T>
std::vector<T> unpack(const json& j, const char* what) {
  if (!j.is_binary()) throw ModelError(std::string("model field '") + what + "' is not a byte array");
  const auto& bytes = j.get_binary();
  if (bytes.size() % sizeof(T) != 0) {
    throw ModelError(std::string("model field '") + what + "' has a truncated payload");
  }
  std::vector<T> v(bytes.size() / sizeof(T));
  if (!v.empty()) std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

json vector_json(const Vector& v) { return pack(std::vector<double>(v.data(), v.data() + v.size())); }

Vector json_vector(const json& j, const char* what) {
  const auto d = unpack<double>(j, what);
  return Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

json tree_json(const DecisionTree& t) {
  std::vector<std::int32_t> feature, left, right, offset;
  std::vector<double> threshold;
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    left.push_back(n.left);
    right.push_back(n.right);
    offset.push_back(n.value_offset);
    threshold.push_back(n.threshold);
  }
  return {{"n_outputs", t.n_outputs},  {"feature", pack(feature)}, {"threshold", pack(threshold)},
          {"left", pack(left)},        {"right", pack(right)},     {"value_offset", pack(offset)},
          {"values", pack(t.values)}};
}

DecisionTree json_tree(const json& j, int n_features) {
  DecisionTree t;
  t.n_outputs = j.at("n_outputs").get<int>();
  const auto feature = unpack<std::int32_t>(j.at("feature"), "feature");
  const auto left = unpack<std::int32_t>(j.at("left"), "left");
  const auto right = unpack<std::int32_t>(j.at("right"), "right");
  const auto offset = unpack<std::int32_t>(j.at("value_offset"), "value_offset");
  const auto threshold = unpack<double>(j.at("threshold"), "threshold");
  t.values = unpack<double>(j.at("values"), "values");
  const std::size_t n = feature.size();
  if (n == 0 || left.size() != n || right.size() != n || offset.size() != n ||
      threshold.size() != n || t.n_outputs < 1) {
    throw ModelError("tree arrays are inconsistent");
  }
  const auto in_range = [n](std::int32_t v) { return v > 0 && static_cast<std::size_t>(v) < n; };
  t.nodes.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& node = t.nodes[k];
    node.feature = feature[k];
    node.left = left[k];
    node.right = right[k];
    node.value_offset = offset[k];
    node.threshold = threshold[k];
    if (node.feature >= 0) {
      // Children always follow their parent, so a valid tree has no cycles.
      if (node.feature >= n_features || !in_range(node.left) || !in_range(node.right) ||
          static_cast<std::size_t>(node.left) <= k || static_cast<std::size_t>(node.right) <= k) {
        throw ModelError("tree node " + std::to_string(k) + " is malformed");
      }
    } else if (node.value_offset < 0 ||
               static_cast<std::size_t>(node.value_offset + t.n_outputs) > t.values.size()) {
      throw ModelError("tree leaf " + std::to_string(k) + " points outside its value block");
    }
  }
  return t;
}

}  // namespace

Labels ModelBundle::predict(const Matrix& fingerprints) const {
  if (fingerprints.cols() != input_dim()) {
    throw ModelError("model expects " + std::to_string(input_dim()) + " fingerprint features, got " +
                     std::to_string(fingerprints.cols()));
  }
  Matrix x = scaler.apply(fingerprints);
  if (pca) x = pca->transform(x);
  return ensemble.predict(x);
}

std::vector<std::uint8_t> encode_model(const ModelBundle& b) {
  json trees = json::array();
  for (const auto& t : b.ensemble.trees) trees.push_back(tree_json(t));
  json pca = nullptr;
  if (b.pca) {
    const Matrix& c = b.pca->components;
    pca = {{"rows", c.rows()},
           {"cols", c.cols()},
           {"mean", vector_json(b.pca->mean)},
           {"components", pack(std::vector<double>(c.data(), c.data() + c.size()))},
           {"explained_variance", vector_json(b.pca->explained_variance)},
           {"explained_variance_ratio", vector_json(b.pca->explained_variance_ratio)}};
  }
  const json doc = {
      {"format", kModelFormat},
      {"version", kModelVersion},
      {"recipe", b.recipe},
      {"class_names", b.class_names},
      {"report_width", b.report_width},
      {"fingerprint",
       {{"window", b.fingerprint.window},
        {"stride", b.fingerprint.stride},
        {"nb_encoding", to_string(b.fingerprint.nb_encoding)},
        {"scaling", to_string(b.fingerprint.scaling)}}},
      {"scaler",
       {{"kind", to_string(b.scaler.kind)},
        {"offset", vector_json(b.scaler.offset)},
        {"scale", vector_json(b.scaler.scale)}}},
      {"pca", pca},
      {"ensemble",
       {{"kind", to_string(b.ensemble.kind)},
        {"target", to_string(b.ensemble.target)},
        {"n_classes", b.ensemble.n_classes},
        {"n_features", b.ensemble.n_features},
        {"prior_class", b.ensemble.prior_class},
        {"boost_weights", pack(b.ensemble.boost_weights)},
        {"trees", trees}}},
      {"settings", json::parse(b.settings_json)},
  };
  return json::to_cbor(doc);
}

ModelBundle decode_model(const std::vector<std::uint8_t>& bytes) {
  json doc;
  try {
    doc = json::from_cbor(bytes);
  } catch (const json::exception& e) {
    throw ModelError(std::string("model file is not a valid container: ") + e.what());
  }
  try {
    if (doc.value("format", "") != kModelFormat) throw ModelError("not a beamprint model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelVersion) {
      throw ModelError("unsupported model version " + std::to_string(version));
    }
    ModelBundle b;
    b.recipe = doc.at("recipe").get<std::string>();
    b.class_names = doc.at("class_names").get<std::vector<std::string>>();
    b.report_width = doc.at("report_width").get<int>();
    const json& fp = doc.at("fingerprint");
    b.fingerprint.window = fp.at("window").get<int>();
    b.fingerprint.stride = fp.at("stride").get<int>();
    b.fingerprint.nb_encoding = nb_encoding_from_string(fp.at("nb_encoding").get<std::string>());
    b.fingerprint.scaling = scaling_kind_from_string(fp.at("scaling").get<std::string>());
    b.fingerprint.validate();
    if (b.report_width < 1) throw ModelError("report_width must be positive");

    const json& sc = doc.at("scaler");
    b.scaler.kind = scaling_kind_from_string(sc.at("kind").get<std::string>());
    b.scaler.offset = json_vector(sc.at("offset"), "offset");
    b.scaler.scale = json_vector(sc.at("scale"), "scale");
    if (b.scaler.offset.size() != b.input_dim() || b.scaler.scale.size() != b.input_dim()) {
      throw ModelError("scaler dimension does not match the fingerprint layout");
    }

    Eigen::Index stage_dim = b.input_dim();
    if (!doc.at("pca").is_null()) {
      const json& p = doc.at("pca");
      PcaModel m;
      const auto rows = p.at("rows").get<Eigen::Index>();
      const auto cols = p.at("cols").get<Eigen::Index>();
      const auto comp = unpack<double>(p.at("components"), "components");
      if (rows < 1 || cols != stage_dim || static_cast<Eigen::Index>(comp.size()) != rows * cols) {
        throw ModelError("PCA block does not match the fingerprint layout");
      }
      m.components = Eigen::Map<const Matrix>(comp.data(), rows, cols);
      m.mean = json_vector(p.at("mean"), "mean");
      m.explained_variance = json_vector(p.at("explained_variance"), "explained_variance");
      m.explained_variance_ratio =
          json_vector(p.at("explained_variance_ratio"), "explained_variance_ratio");
      if (m.mean.size() != cols) throw ModelError("PCA mean has the wrong length");
      b.pca = std::move(m);
      stage_dim = rows;
    }

    const json& en = doc.at("ensemble");
    TreeEnsemble& e = b.ensemble;
    e.kind = ensemble_kind_from_string(en.at("kind").get<std::string>());
    e.target = target_mode_from_string(en.at("target").get<std::string>());
    e.n_classes = en.at("n_classes").get<int>();
    e.n_features = en.at("n_features").get<int>();
    e.prior_class = en.at("prior_class").get<int>();
    e.boost_weights = unpack<double>(en.at("boost_weights"), "boost_weights");
    if (e.n_features != stage_dim) {
      throw ModelError("ensemble expects " + std::to_string(e.n_features) + " features but the " +
                       "preceding stage yields " + std::to_string(stage_dim));
    }
    if (e.n_classes < 1 || e.prior_class < 0 || e.prior_class >= e.n_classes ||
        static_cast<int>(b.class_names.size()) != e.n_classes) {
      throw ModelError("class table is inconsistent");
    }
    for (const json& t : en.at("trees")) {
      e.trees.push_back(json_tree(t, e.n_features));
      const int expected = e.target == TargetMode::Classification ? e.n_classes : 1;
      if (e.trees.back().n_outputs != expected) throw ModelError("tree output width is wrong");
    }
    if (e.kind == EnsembleKind::AdaBoost && e.boost_weights.size() != e.trees.size()) {
      throw ModelError("boost weights do not match the tree count");
    }
    b.settings_json = doc.at("settings").dump();
    return b;
  } catch (const json::exception& e) {
    throw ModelError(std::string("model file is missing or mistypes a field: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelError(std::string("model file holds an invalid value: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelBundle& bundle) {
  const auto bytes = encode_model(bundle);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ModelError("failed writing model file " + path.string());
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace beamprint::learn
