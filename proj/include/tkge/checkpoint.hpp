#pragma once
// Checkpoint layout: a directory holding meta.json plus one raw binary file
// per tensor (little-endian float64, row-major). Tensors are written in
// their creation order; meta.json records names and shapes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tkge/models.hpp"

namespace tkge {

struct CheckpointMeta {
  int epochs_trained = 0;
  std::uint64_t seed = 0;
  std::string precision = "fp64";
};

namespace detail {

template <class S>
void write_tensor(const std::filesystem::path& path, const MatX<S>& m) {
  MatX<double> tmp = m.template cast<double>();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write tensor file: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(tmp.data()),
            static_cast<std::streamsize>(sizeof(double)) * tmp.size());
}

template <class S>
void read_tensor(const std::filesystem::path& path, MatX<S>& m) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw std::runtime_error("cannot open tensor file: " + path.string());
  }
  const auto bytes = static_cast<std::int64_t>(in.tellg());
  const std::int64_t expected =
      static_cast<std::int64_t>(sizeof(double)) * m.size();
  if (bytes != expected) {
    throw std::runtime_error("tensor size mismatch for " + path.string() +
                             ": expected " + std::to_string(expected) +
                             " bytes, found " + std::to_string(bytes));
  }
  MatX<double> tmp(m.rows(), m.cols());
  in.seekg(0);
  in.read(reinterpret_cast<char*>(tmp.data()), bytes);
  if (!in) {
    throw std::runtime_error("short read on tensor file: " + path.string());
  }
  m = tmp.template cast<S>();
}

}  // namespace detail

template <class S>
void save_checkpoint(const std::string& dir, const Model<S>& model,
                     const CheckpointMeta& meta = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  nlohmann::json j;
  j["model"] = model_kind_name(model.cfg.kind);
  j["dim"] = model.cfg.dim;
  j["gamma"] = model.cfg.gamma;
  j["temporal_dim"] = model.temporal_dim;
  j["tero_norm"] = model.cfg.tero_norm == TeroNorm::L1 ? "l1" : "l2";
  j["n_entities"] = model.n_entities;
  j["n_relations"] = model.n_relations;
  j["n_timestamps"] = model.n_timestamps();
  j["epoch_serial"] = model.epoch_serial;
  j["epoch_date"] = format_date(date_from_serial(model.epoch_serial));
  j["time_serials"] = model.time_serials;
  j["epoch"] = meta.epochs_trained;
  j["seed"] = meta.seed;
  j["precision"] = meta.precision;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, m] : model.params.items()) {
    tensors.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}});
    detail::write_tensor(fs::path(dir) / (name + ".bin"), m);
  }
  j["tensors"] = tensors;

  std::ofstream out(fs::path(dir) / "meta.json");
  if (!out) {
    throw std::runtime_error("cannot write meta.json in " + dir);
  }
  out << j.dump(2) << '\n';
}

template <class S>
Model<S> load_checkpoint(const std::string& dir,
                         CheckpointMeta* meta_out = nullptr) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "meta.json");
  if (!in) {
    throw std::runtime_error("cannot open checkpoint meta: " + dir +
                             "/meta.json");
  }
  nlohmann::json j;
  in >> j;

  ModelConfig cfg;
  cfg.kind = parse_model_kind(j.at("model").get<std::string>());
  cfg.dim = j.at("dim").get<int>();
  cfg.gamma = j.at("gamma").get<double>();
  cfg.tero_norm =
      j.at("tero_norm").get<std::string>() == "l2" ? TeroNorm::L2 : TeroNorm::L1;

  ModelSizes sizes;
  sizes.n_entities = j.at("n_entities").get<int>();
  sizes.n_relations = j.at("n_relations").get<int>();
  sizes.epoch_serial = j.at("epoch_serial").get<std::int64_t>();
  sizes.time_serials = j.at("time_serials").get<std::vector<std::int64_t>>();

  Model<S> model = Model<S>::init(cfg, sizes, /*seed=*/0);

  const auto& tensors = j.at("tensors");
  if (tensors.size() != model.params.size()) {
    throw std::runtime_error("checkpoint tensor count mismatch: meta lists " +
                             std::to_string(tensors.size()) + ", model has " +
                             std::to_string(model.params.size()));
  }
  for (const auto& entry : tensors) {
    const auto name = entry.at("name").get<std::string>();
    if (!model.params.has(name)) {
      throw std::runtime_error("checkpoint has unexpected tensor: " + name);
    }
    auto& m = model.params.at(name);
    const auto shape = entry.at("shape");
    if (shape.at(0).get<Eigen::Index>() != m.rows() ||
        shape.at(1).get<Eigen::Index>() != m.cols()) {
      throw std::runtime_error("tensor shape mismatch for " + name);
    }
    detail::read_tensor(fs::path(dir) / (name + ".bin"), m);
  }

  if (meta_out) {
    meta_out->epochs_trained = j.value("epoch", 0);
    meta_out->seed = j.value("seed", std::uint64_t{0});
    meta_out->precision = j.value("precision", "fp64");
  }
  return model;
}

}  // namespace tkge
