#include "edgerec/train/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "edgerec/common/binary_io.hpp"
#include "edgerec/common/error.hpp"

namespace edgerec::train {

namespace {

constexpr const char* kFormat = "edge-rec-checkpoint";
constexpr int kVersion = 1;

std::size_t dtype_width(const std::string& dtype) {
  if (dtype == "float32") return 4;
  if (dtype == "float64") return 8;
  throw CheckpointError("unsupported dtype '" + dtype + "'");
}

template <typename Real>
const char* dtype_name() {
  return sizeof(Real) == 4 ? "float32" : "float64";
}

}  // namespace

template <typename Real>
Checkpoint make_checkpoint(gdit::GDiTModel<Real>& model, const diffusion::NoiseSchedule& schedule,
                           const xform::RatingScaler& scaler, std::uint64_t iteration,
                           const std::string& rng_state) {
  Checkpoint ckpt;
  ckpt.model_config = model.config();
  ckpt.dtype = dtype_name<Real>();
  for (auto& [name, var] : model.named_parameters()) {
    ckpt.names.push_back(name);
    ckpt.tensors.push_back(var.value().template cast<double>());
  }
  ckpt.schedule = schedule;
  ckpt.scaler = scaler;
  ckpt.iteration = iteration;
  ckpt.rng_state = rng_state;
  return ckpt;
}

template <typename Real>
void load_parameters(const Checkpoint& ckpt, gdit::GDiTModel<Real>& model) {
  if (!(ckpt.model_config == model.config())) {
    throw ConfigMismatchError("checkpoint model config " + gdit::to_json(ckpt.model_config).dump() +
                              " does not match " + gdit::to_json(model.config()).dump());
  }
  auto params = model.named_parameters();
  if (params.size() != ckpt.names.size()) {
    throw ConfigMismatchError("checkpoint holds " + std::to_string(ckpt.names.size()) +
                              " tensors, model expects " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& [name, var] = params[k];
    if (name != ckpt.names[k]) throw ConfigMismatchError("expected tensor '" + name + "', found '" + ckpt.names[k] + "'");
    if (var.shape() != ckpt.tensors[k].shape()) {
      throw ConfigMismatchError("tensor '" + name + "' has shape " + numeric::shape_string(ckpt.tensors[k].shape()) +
                                ", model expects " + numeric::shape_string(var.shape()));
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k].second.mutable_value() = ckpt.tensors[k].template cast<Real>();
  }
}

template <typename Real>
gdit::GDiTModel<Real> model_from_checkpoint(const Checkpoint& ckpt) {
  Rng scratch(0);
  gdit::GDiTModel<Real> model(ckpt.model_config, scratch);
  load_parameters(ckpt, model);
  return model;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (ckpt.names.size() != ckpt.tensors.size()) throw CheckpointError("names and tensors differ in count");
  const std::size_t width = dtype_width(ckpt.dtype);
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["dtype"] = ckpt.dtype;
  header["model_config"] = gdit::to_json(ckpt.model_config);
  header["schedule"] = {{"kind", ckpt.schedule.kind()}, {"betas", ckpt.schedule.betas()}};
  header["scaler"] = xform::to_json(ckpt.scaler);
  header["iteration"] = ckpt.iteration;
  header["rng_state"] = ckpt.rng_state;
  header["train_config"] = ckpt.train_config;

  std::string payload;
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t k = 0; k < ckpt.names.size(); ++k) {
    const auto& t = ckpt.tensors[k];
    entries.push_back({{"name", ckpt.names[k]}, {"shape", t.shape()}, {"offset", payload.size()},
                       {"nbytes", t.size() * width}});
    if (width == 4) {
      auto f = t.cast<float>();
      append_le<float>(payload, f.data());
    } else {
      append_le<double>(payload, t.data());
    }
  }
  header["tensors"] = entries;
  header["payload_bytes"] = payload.size();

  const std::string text = header.dump();
  std::string blob;
  const std::uint64_t len = text.size();
  append_le<std::uint64_t>(blob, std::span<const std::uint64_t>(&len, 1));
  blob += text;
  blob += payload;

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw CheckpointError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (blob.size() < 8) throw CheckpointError(path.string() + ": file too short for a header length");
  const std::uint64_t len = read_le<std::uint64_t>(blob.data(), 1)[0];
  if (len > blob.size() - 8) throw CheckpointError(path.string() + ": header length exceeds file size");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(blob.begin() + 8, blob.begin() + 8 + static_cast<std::ptrdiff_t>(len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + ": malformed header: " + e.what());
  }
  if (header.value("format", "") != kFormat) throw CheckpointError(path.string() + ": not a checkpoint file");
  if (header.value("version", -1) != kVersion) {
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + header.value("version", nlohmann::json()).dump());
  }

  Checkpoint ckpt;
  try {
    ckpt.dtype = header.at("dtype").get<std::string>();
    ckpt.model_config = gdit::gdit_config_from_json(header.at("model_config"));
    ckpt.schedule = diffusion::NoiseSchedule::from_betas(header.at("schedule").at("betas").get<std::vector<double>>(),
                                                         header.at("schedule").at("kind").get<std::string>());
    ckpt.scaler = xform::scaler_from_json(header.at("scaler"));
    ckpt.iteration = header.at("iteration").get<std::uint64_t>();
    ckpt.rng_state = header.value("rng_state", "");
    ckpt.train_config = header.value("train_config", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path.string() + ": malformed header: " + e.what());
  }

  const std::size_t width = dtype_width(ckpt.dtype);
  const char* payload = blob.data() + 8 + len;
  const std::size_t available = blob.size() - 8 - len;
  std::size_t expected_end = 0;
  for (const auto& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<numeric::Shape>();
    const auto offset = entry.at("offset").get<std::size_t>();
    const auto nbytes = entry.at("nbytes").get<std::size_t>();
    const std::size_t count = numeric::shape_size(shape);
    if (nbytes != count * width) throw CheckpointError("tensor '" + name + "': byte count does not match its shape");
    if (offset + nbytes > available) {
      throw CheckpointError("tensor '" + name + "': payload truncated (needs bytes " + std::to_string(offset) +
                            ".." + std::to_string(offset + nbytes) + ", file has " + std::to_string(available) + ")");
    }
    std::vector<double> values;
    if (width == 4) {
      auto f = read_le<float>(payload + offset, count);
      values.assign(f.begin(), f.end());
    } else {
      values = read_le<double>(payload + offset, count);
    }
    ckpt.names.push_back(name);
    ckpt.tensors.emplace_back(shape, std::move(values));
    expected_end = std::max(expected_end, offset + nbytes);
  }
  if (available != header.value("payload_bytes", expected_end)) {
    throw CheckpointError(path.string() + ": payload is " + std::to_string(available) + " bytes, header declares " +
                          std::to_string(header.value("payload_bytes", expected_end)));
  }
  return ckpt;
}

template Checkpoint make_checkpoint<float>(gdit::GDiTModel<float>&, const diffusion::NoiseSchedule&,
                                           const xform::RatingScaler&, std::uint64_t, const std::string&);
template Checkpoint make_checkpoint<double>(gdit::GDiTModel<double>&, const diffusion::NoiseSchedule&,
                                            const xform::RatingScaler&, std::uint64_t, const std::string&);
template void load_parameters<float>(const Checkpoint&, gdit::GDiTModel<float>&);
template void load_parameters<double>(const Checkpoint&, gdit::GDiTModel<double>&);
template gdit::GDiTModel<float> model_from_checkpoint<float>(const Checkpoint&);
template gdit::GDiTModel<double> model_from_checkpoint<double>(const Checkpoint&);

}  // namespace edgerec::train
