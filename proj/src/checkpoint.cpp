#include "ved/checkpoint.hpp"

#include "ved/binary_io.hpp"
#include "ved/errors.hpp"

namespace ved {

namespace {
constexpr const char* kFormat = "ved-checkpoint";
constexpr int kVersion = 1;
}  // namespace

nlohmann::json arch_to_json(const ArchConfig& arch) {
  return {{"height", arch.height},           {"width", arch.width},
          {"latent_dim", arch.latent_dim},   {"channels", arch.channels},
          {"n_res_blocks", arch.n_res_blocks}, {"decoder_hidden", arch.decoder_hidden},
          {"output_dim", arch.output_dim},   {"kernel", arch.kernel},
          {"padding", arch.padding}};
}

ArchConfig arch_from_json(const nlohmann::json& j) {
  ArchConfig a;
  try {
    a.height = j.at("height").get<int>();
    a.width = j.at("width").get<int>();
    a.latent_dim = j.at("latent_dim").get<int>();
    a.channels = j.at("channels").get<std::vector<int>>();
    a.n_res_blocks = j.at("n_res_blocks").get<int>();
    a.decoder_hidden = j.at("decoder_hidden").get<int>();
    a.output_dim = j.at("output_dim").get<int>();
    a.kernel = j.value("kernel", 3);
    a.padding = j.value("padding", 1);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed architecture record: ") + e.what());
  }
  return a;
}

void save_checkpoint(const std::filesystem::path& dir, VedModel<float>& model, const nlohmann::json& info) {
  std::filesystem::create_directories(dir);
  nlohmann::json tensors = nlohmann::json::array();
  Eigen::Index offset = 0;
  for (const auto& p : model.parameters()) {
    tensors.push_back({{"name", p.name}, {"shape", p.shape}, {"offset", offset}, {"size", p.size}, {"trainable", true}});
    offset += p.size;
  }
  for (const auto& b : model.buffers()) {
    tensors.push_back({{"name", b.name}, {"shape", b.shape}, {"offset", offset}, {"size", b.size}, {"trainable", false}});
    offset += b.size;
  }
  const std::vector<float> state = model.state();
  write_f32le(dir / "weights.bin", state);
  nlohmann::json manifest = {{"format", kFormat},
                             {"version", kVersion},
                             {"dtype", "f32le"},
                             {"arch", arch_to_json(model.arch())},
                             {"n_values", state.size()},
                             {"tensors", tensors},
                             {"info", info.is_null() ? nlohmann::json::object() : info}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint manifest is not valid JSON: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != kFormat) throw DataError("not a checkpoint directory: " + dir.string());
  if (manifest.value("version", 0) != kVersion) throw DataError("unsupported checkpoint version");

  ArchConfig arch = arch_from_json(manifest.at("arch"));
  try {
    arch.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint architecture is invalid: ") + e.what());
  }
  LoadedCheckpoint out{VedModel<float>(arch, 0), manifest.value("info", nlohmann::json::object())};

  // the tensor table must match what this architecture builds
  const auto params = out.model.parameters();
  const auto bufs = out.model.buffers();
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != params.size() + bufs.size()) throw DataError("checkpoint tensor count does not match architecture");
  std::size_t k = 0;
  auto expect = [&](const std::string& name, Eigen::Index size) {
    const auto& t = tensors[k++];
    if (t.at("name").get<std::string>() != name || t.at("size").get<Eigen::Index>() != size)
      throw DataError("checkpoint tensor '" + t.at("name").get<std::string>() + "' does not match expected '" + name + "'");
  };
  for (const auto& p : params) expect(p.name, p.size);
  for (const auto& b : bufs) expect(b.name, b.size);

  const auto n = manifest.at("n_values").get<std::size_t>();
  out.model.load_state(read_f32le(dir / "weights.bin", n));
  return out;
}

}  // namespace ved
