// Model files are JSON documents with a fixed key order:
//   schema, target, horizon, features, config{theta, top_k, expansion_fraction},
//   lambda, scaler{feature_min, feature_max, target_min, target_max},
//   boxes[{min, max}], experts[{slope, intercept}]
// Doubles are written in shortest round-trip form so a reloaded model
// predicts bit-for-bit like the original.

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "hmr/error.hpp"
#include "hmr/regressor.hpp"

namespace hmr {

using Json = nlohmann::ordered_json;

void write_model(const HmrModel& model, std::ostream& out) {
  if (!model.trained()) throw StateError("cannot save an untrained model");
  const auto& meta = model.metadata();
  Json doc;
  doc["schema"] = kModelSchema;
  doc["target"] = meta.target_name;
  doc["horizon"] = meta.horizon;
  doc["features"] = meta.feature_names;
  doc["config"] = {{"theta", model.config().theta},
                   {"top_k", model.config().top_k},
                   {"expansion_fraction", model.config().expansion_fraction}};
  doc["lambda"] = model.params().lambda();
  doc["scaler"] = {{"feature_min", model.scaler().feature_min},
                   {"feature_max", model.scaler().feature_max},
                   {"target_min", model.scaler().target_min},
                   {"target_max", model.scaler().target_max}};
  Json boxes = Json::array();
  for (const auto& b : model.boxes()) boxes.push_back({{"min", b.min()}, {"max", b.max()}});
  doc["boxes"] = std::move(boxes);
  Json experts = Json::array();
  for (const auto& e : model.experts()) experts.push_back({{"slope", e.slope}, {"intercept", e.intercept}});
  doc["experts"] = std::move(experts);
  out << doc.dump(1) << '\n';
}

HmrModel read_model(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const auto schema = doc.at("schema").get<std::string>();
    if (schema != kModelSchema) throw DataError("unsupported model schema '" + schema + "'");
    HmrModel::Metadata meta;
    meta.target_name = doc.at("target").get<std::string>();
    meta.horizon = doc.at("horizon").get<int>();
    meta.feature_names = doc.at("features").get<std::vector<std::string>>();
    ClusterConfig config;
    config.theta = doc.at("config").at("theta").get<double>();
    config.top_k = doc.at("config").at("top_k").get<std::size_t>();
    config.expansion_fraction = doc.at("config").at("expansion_fraction").get<double>();
    ScalerParams scaler;
    const auto& s = doc.at("scaler");
    scaler.feature_min = s.at("feature_min").get<std::vector<double>>();
    scaler.feature_max = s.at("feature_max").get<std::vector<double>>();
    scaler.target_min = s.at("target_min").get<double>();
    scaler.target_max = s.at("target_max").get<double>();
    std::vector<Hyperbox> boxes;
    for (const auto& b : doc.at("boxes")) {
      boxes.emplace_back(b.at("min").get<std::vector<double>>(), b.at("max").get<std::vector<double>>());
    }
    std::vector<LocalExpert> experts;
    for (const auto& e : doc.at("experts")) {
      experts.push_back({e.at("slope").get<std::vector<double>>(), e.at("intercept").get<double>()});
    }
    return HmrModel(std::move(boxes), MembershipParams(doc.at("lambda").get<std::vector<double>>()),
                    std::move(experts), std::move(scaler), config, std::move(meta));
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("inconsistent model file: ") + e.what());
  }
}

void save_model(const HmrModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_model(model, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

HmrModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_model(in);
}

}  // namespace hmr
