#include "quietgait/ppolearn/checkpoint.hpp"

#include <fstream>

#include "quietgait/common/error.hpp"

namespace quietgait::ppolearn {

namespace {

nlohmann::json matrix_to_json(const MatX& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const VecX& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json net_to_json(const std::vector<LayerParams>& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerParams& l : net)
    layers.push_back(nlohmann::json{{"w", matrix_to_json(l.W)}, {"b", vector_to_json(l.b)}});
  return layers;
}

MatX matrix_from_json(const nlohmann::json& j, const std::string& where, Eigen::Index rows,
                      Eigen::Index cols) {
  if (!j.is_array())
    throw ParseError("checkpoint: " + where + " is not an array");
  if (static_cast<Eigen::Index>(j.size()) != rows)
    throw CheckpointMismatchError("checkpoint: " + where + " has " + std::to_string(j.size()) +
                                  " rows, expected " + std::to_string(rows));
  MatX m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw CheckpointMismatchError("checkpoint: " + where + " row " + std::to_string(i) +
                                    " has " + std::to_string(row.size()) + " columns, expected " +
                                    std::to_string(cols));
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& cell = row[static_cast<std::size_t>(k)];
      if (!cell.is_number())
        throw ParseError("checkpoint: " + where + " contains a non-numeric entry");
      m(i, k) = cell.get<double>();
    }
  }
  return m;
}

VecX vector_from_json(const nlohmann::json& j, const std::string& where, Eigen::Index n) {
  if (!j.is_array()) throw ParseError("checkpoint: " + where + " is not an array");
  if (static_cast<Eigen::Index>(j.size()) != n)
    throw CheckpointMismatchError("checkpoint: " + where + " has length " +
                                  std::to_string(j.size()) + ", expected " + std::to_string(n));
  VecX v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& cell = j[static_cast<std::size_t>(i)];
    if (!cell.is_number())
      throw ParseError("checkpoint: " + where + " contains a non-numeric entry");
    v[i] = cell.get<double>();
  }
  return v;
}

std::vector<LayerParams> net_from_json(const nlohmann::json& j, const std::string& name,
                                       int obs_dim, int hidden_dim, int out_dim) {
  if (!j.is_array() || j.size() != 4)
    throw ParseError("checkpoint: " + name + " must hold exactly four layers");
  const int dims[5] = {obs_dim, hidden_dim, hidden_dim, hidden_dim, out_dim};
  std::vector<LayerParams> net(4);
  for (int l = 0; l < 4; ++l) {
    const auto& layer = j[static_cast<std::size_t>(l)];
    if (!layer.is_object() || !layer.contains("w") || !layer.contains("b"))
      throw ParseError("checkpoint: " + name + " layer " + std::to_string(l) +
                       " must contain 'w' and 'b'");
    const std::string where = name + " layer " + std::to_string(l);
    net[l].W = matrix_from_json(layer["w"], where + " weight", dims[l + 1], dims[l]);
    net[l].b = vector_from_json(layer["b"], where + " bias", dims[l + 1]);
  }
  return net;
}

}  // namespace

nlohmann::json save_checkpoint(const PolicyParams& params, const PpoConfig& config,
                               long iteration, int curriculum_phase) {
  params.validate();
  nlohmann::json doc;
  doc["format"] = "quietgait-checkpoint-v1";
  doc["iteration"] = iteration;
  doc["curriculum_phase"] = curriculum_phase;
  doc["config"] = config;
  doc["obs_dim"] = params.obs_dim;
  doc["act_dim"] = params.act_dim;
  doc["hidden_dim"] = params.hidden_dim;
  doc["actor"] = net_to_json(params.actor);
  doc["critic"] = net_to_json(params.critic);
  doc["log_std"] = vector_to_json(params.log_std);
  return doc;
}

Checkpoint load_checkpoint(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("checkpoint: document is not a JSON object");
  for (const char* key :
       {"format", "iteration", "curriculum_phase", "config", "obs_dim", "act_dim", "hidden_dim",
        "actor", "critic", "log_std"}) {
    if (!doc.contains(key))
      throw ParseError(std::string("checkpoint: missing field '") + key + "'");
  }
  if (doc["format"].get<std::string>() != "quietgait-checkpoint-v1")
    throw ParseError("checkpoint: unrecognized format '" + doc["format"].dump() + "'");

  Checkpoint ck;
  try {
    ck.iteration = doc["iteration"].get<long>();
    ck.curriculum_phase = doc["curriculum_phase"].get<int>();
    ck.config = doc["config"].get<PpoConfig>();
    ck.params.obs_dim = doc["obs_dim"].get<int>();
    ck.params.act_dim = doc["act_dim"].get<int>();
    ck.params.hidden_dim = doc["hidden_dim"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  ck.params.actor = net_from_json(doc["actor"], "actor", ck.params.obs_dim, ck.params.hidden_dim,
                                  ck.params.act_dim);
  ck.params.critic =
      net_from_json(doc["critic"], "critic", ck.params.obs_dim, ck.params.hidden_dim, 1);
  ck.params.log_std = vector_from_json(doc["log_std"], "log_std", ck.params.act_dim);
  ck.params.validate();
  ck.config.validate();
  return ck;
}

void save_checkpoint_file(const std::string& path, const PolicyParams& params,
                          const PpoConfig& config, long iteration, int curriculum_phase) {
  const nlohmann::json doc = save_checkpoint(params, config, iteration, curriculum_phase);
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open checkpoint for writing: " + path);
  out << doc.dump();
  out << '\n';
  if (!out) throw Error("failed writing checkpoint: " + path);
}

void check_compatible(const PolicyParams& params, int obs_dim, int act_dim) {
  if (params.obs_dim != obs_dim)
    throw CheckpointMismatchError(
        "checkpoint: actor layer 0 expects observation dim " + std::to_string(params.obs_dim) +
        ", the configuration provides " + std::to_string(obs_dim));
  if (params.act_dim != act_dim)
    throw CheckpointMismatchError("checkpoint: actor layer 3 produces action dim " +
                                  std::to_string(params.act_dim) +
                                  ", the configuration expects " + std::to_string(act_dim));
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open checkpoint: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint '" + path + "': " + e.what());
  }
  return load_checkpoint(doc);
}

}  // namespace quietgait::ppolearn
