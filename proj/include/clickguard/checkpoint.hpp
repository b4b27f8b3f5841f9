#pragma once

#include <cstring>
#include <filesystem>
#include <string>

#include "clickguard/ssafb.hpp"
#include "clickguard/util.hpp"

#include <json.hpp>

namespace clickguard {

inline constexpr int kCheckpointVersion = 1;

// Envelope: {format_version, config, scaler, rfe_selection, tensors, checksum}.
// Tensor payloads are little-endian float64, base64-encoded. The checksum
// (FNV-1a over the config dump, tensor names and raw payloads) catches byte
// tampering that shape validation alone cannot see.
inline nlohmann::json checkpoint_to_json(ClickGuardModel& model) {
  nlohmann::json j;
  j["format_version"] = kCheckpointVersion;
  nlohmann::json cfg;
  config_to_json(model.config, cfg);
  j["config"] = cfg;

  if (model.scaler) {
    nlohmann::json s;
    scaler_to_json(*model.scaler, s);
    j["scaler"] = s;
  } else {
    j["scaler"] = nullptr;
  }
  if (model.rfe) {
    nlohmann::json r;
    rfe_to_json(*model.rfe, r);
    j["rfe_selection"] = r;
  } else {
    j["rfe_selection"] = nullptr;
  }

  std::uint64_t checksum = fnv1a64(cfg.dump());
  nlohmann::json tensors = nlohmann::json::array();
  for (auto& [name, tensor] : model.named_parameters()) {
    const auto& values = tensor->values();
    const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
    const std::size_t n_bytes = values.size() * sizeof(double);
    checksum = fnv1a64(name, checksum);
    checksum = fnv1a64_bytes(bytes, n_bytes, checksum);
    tensors.push_back({{"name", name},
                       {"shape", tensor->shape()},
                       {"dtype", "float64"},
                       {"data_base64", base64_encode(bytes, n_bytes)}});
  }
  j["tensors"] = tensors;
  char hex[20];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(checksum));
  j["checksum"] = std::string(hex);
  return j;
}

inline void save_checkpoint(ClickGuardModel& model, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_to_json(model).dump(1) + "\n");
}

// Every failure mode maps to CheckpointError: the caller's exit-4 contract.
inline ClickGuardModel checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format_version", -1) != kCheckpointVersion)
      throw CheckpointError("unsupported checkpoint format_version");

    ModelConfig config = config_from_json(j.at("config"));
    ClickGuardModel model = make_model(config, /*seed=*/0);

    nlohmann::json cfg;
    config_to_json(config, cfg);
    std::uint64_t checksum = fnv1a64(cfg.dump());

    auto params = model.named_parameters();
    const auto& tensors = j.at("tensors");
    if (!tensors.is_array() || tensors.size() != params.size())
      throw CheckpointError("checkpoint tensor count does not match the config");

    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& entry = tensors[i];
      const std::string name = entry.at("name").get<std::string>();
      if (name != params[i].first)
        throw CheckpointError("unexpected tensor '" + name + "', wanted '" +
                              params[i].first + "'");
      Shape shape = entry.at("shape").get<Shape>();
      Tensor* dst = params[i].second;
      if (shape != dst->shape())
        throw CheckpointError("tensor '" + name + "' has shape " + shape_str(shape) +
                              ", config derives " + shape_str(dst->shape()));
      if (entry.at("dtype").get<std::string>() != "float64")
        throw CheckpointError("tensor '" + name + "' has unsupported dtype");
      auto bytes = base64_decode(entry.at("data_base64").get<std::string>());
      if (bytes.size() != dst->size() * sizeof(double))
        throw CheckpointError("tensor '" + name + "' payload size mismatch");
      checksum = fnv1a64(name, checksum);
      checksum = fnv1a64_bytes(bytes.data(), bytes.size(), checksum);
      std::memcpy(dst->data(), bytes.data(), bytes.size());
    }

    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(checksum));
    if (j.at("checksum").get<std::string>() != hex)
      throw CheckpointError("checkpoint checksum mismatch");

    if (!j.at("scaler").is_null()) model.scaler = scaler_from_json(j.at("scaler"));
    if (!j.at("rfe_selection").is_null())
      model.rfe = rfe_from_json(j.at("rfe_selection"));

    if (config.structural_enabled() && model.rfe && model.scaler) {
      if (model.rfe->kept.size() != config.selected_count())
        throw CheckpointError("rfe selection size disagrees with the config");
      if (model.scaler->means.size() != model.rfe->kept.size())
        throw CheckpointError("scaler width disagrees with the rfe selection");
    }
    return model;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  }
}

inline ClickGuardModel load_checkpoint(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError&) {
    throw;
  }
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw CheckpointError("checkpoint is not valid JSON");
  return checkpoint_from_json(j);
}

}  // namespace clickguard
