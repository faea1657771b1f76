#include "ved/config.hpp"

#include <set>

#include "ved/binary_io.hpp"
#include "ved/errors.hpp"
#include "ved/serialization.hpp"

namespace ved {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown config key '" + (section.empty() ? k : section + "." + k) + "'");
}

template <class T>
void read(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  if (grid.height < 2 || grid.width < 2) throw ConfigError("grid must be at least 2 x 2");
  if (!(grid.corner_bite_fraction >= 0.0 && grid.corner_bite_fraction < 0.5))
    throw ConfigError("grid.corner_bite_fraction must be in [0, 0.5)");
  if (!(grid.cell_size > 0.0)) throw ConfigError("grid.cell_size must be > 0");
  if (!(field.variance > 0.0) || !(field.length_scale > 0.0))
    throw ConfigError("field.variance and field.length_scale must be > 0");
  if (field.kle_order < 1) throw ConfigError("field.kle_order must be >= 1");
  if (data.n_samples < 2) throw ConfigError("data.n_samples must be >= 2");
  if (data.n_wells < 1) throw ConfigError("data.n_wells must be >= 1");
  if (!(data.train_fraction > 0.0 && data.train_fraction < 1.0))
    throw ConfigError("data.train_fraction must be in (0, 1)");
  if (!(cca.threshold > 0.0 && cca.threshold <= 1.0)) throw ConfigError("cca.threshold must be in (0, 1]");
  if (cca.ridge && !(*cca.ridge >= 0.0)) throw ConfigError("cca.ridge must be >= 0");
  if (model.latent_dim < 1) throw ConfigError("model.latent_dim must be >= 1");
  if (eval.n_samples < 0) throw ConfigError("eval.n_samples must be >= 0");
  if (sweep.r.empty() || sweep.beta.empty() || sweep.lambda.empty()) throw ConfigError("sweep lists must be non-empty");
  for (int r : sweep.r)
    if (r < 1) throw ConfigError("sweep.r entries must be >= 1");
  for (double b : sweep.beta)
    if (!(b >= 0.0)) throw ConfigError("sweep.beta entries must be >= 0");
  for (double l : sweep.lambda)
    if (!(l >= 0.0)) throw ConfigError("sweep.lambda entries must be >= 0");
  train.validate();
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    reject_unknown(j, "", {"seed", "out", "grid", "field", "data", "cca", "model", "train", "sweep", "eval"});
    read(j, "seed", c.seed);
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      reject_unknown(g, "grid", {"height", "width", "corner_bite_fraction", "cell_size", "boundary"});
      read(g, "height", c.grid.height);
      read(g, "width", c.grid.width);
      read(g, "corner_bite_fraction", c.grid.corner_bite_fraction);
      read(g, "cell_size", c.grid.cell_size);
      if (g.contains("boundary")) c.grid.boundary = boundary_from_json(g.at("boundary"));
    }
    if (j.contains("field")) {
      const json& f = j.at("field");
      reject_unknown(f, "field", {"variance", "length_scale", "kle_order", "mean"});
      read(f, "variance", c.field.variance);
      read(f, "length_scale", c.field.length_scale);
      read(f, "kle_order", c.field.kle_order);
      read(f, "mean", c.field.mean);
    }
    if (j.contains("data")) {
      const json& d = j.at("data");
      reject_unknown(d, "data", {"n_samples", "n_wells", "train_fraction"});
      read(d, "n_samples", c.data.n_samples);
      read(d, "n_wells", c.data.n_wells);
      read(d, "train_fraction", c.data.train_fraction);
    }
    if (j.contains("cca")) {
      const json& x = j.at("cca");
      reject_unknown(x, "cca", {"threshold", "ridge"});
      read(x, "threshold", c.cca.threshold);
      if (x.contains("ridge") && !x.at("ridge").is_null()) c.cca.ridge = x.at("ridge").get<double>();
    }
    if (j.contains("model")) {
      const json& m = j.at("model");
      reject_unknown(m, "model", {"latent_dim", "channels", "n_res_blocks", "decoder_hidden"});
      read(m, "latent_dim", c.model.latent_dim);
      read(m, "channels", c.model.channels);
      read(m, "n_res_blocks", c.model.n_res_blocks);
      read(m, "decoder_hidden", c.model.decoder_hidden);
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      reject_unknown(t, "train", {"epochs", "batch_size", "lr_init", "lr_final", "clip_norm", "beta", "lambda",
                                  "train_size", "test_size", "adam_beta1", "adam_beta2", "adam_eps", "verbose"});
      read(t, "epochs", c.train.epochs);
      read(t, "batch_size", c.train.batch_size);
      read(t, "lr_init", c.train.lr_init);
      read(t, "lr_final", c.train.lr_final);
      read(t, "clip_norm", c.train.clip_norm);
      read(t, "train_size", c.train.train_size);
      read(t, "test_size", c.train.test_size);
      read(t, "adam_beta1", c.train.adam_beta1);
      read(t, "adam_beta2", c.train.adam_beta2);
      read(t, "adam_eps", c.train.adam_eps);
      read(t, "verbose", c.train.verbose);
      if (t.contains("beta")) c.train.beta = schedule_from_json(t.at("beta"));
      if (t.contains("lambda")) c.train.lambda = schedule_from_json(t.at("lambda"));
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      reject_unknown(s, "sweep", {"r", "beta", "lambda"});
      read(s, "r", c.sweep.r);
      read(s, "beta", c.sweep.beta);
      read(s, "lambda", c.sweep.lambda);
    }
    if (j.contains("eval")) {
      const json& e = j.at("eval");
      reject_unknown(e, "eval", {"n_samples"});
      read(e, "n_samples", c.eval.n_samples);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.train.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  j["grid"] = {{"height", c.grid.height},
               {"width", c.grid.width},
               {"corner_bite_fraction", c.grid.corner_bite_fraction},
               {"cell_size", c.grid.cell_size},
               {"boundary", boundary_to_json(c.grid.boundary)}};
  j["field"] = {{"variance", c.field.variance},
                {"length_scale", c.field.length_scale},
                {"kle_order", c.field.kle_order},
                {"mean", c.field.mean}};
  j["data"] = {{"n_samples", c.data.n_samples}, {"n_wells", c.data.n_wells}, {"train_fraction", c.data.train_fraction}};
  j["cca"] = {{"threshold", c.cca.threshold}, {"ridge", c.cca.ridge ? json(*c.cca.ridge) : json(nullptr)}};
  j["model"] = {{"latent_dim", c.model.latent_dim},
                {"channels", c.model.channels},
                {"n_res_blocks", c.model.n_res_blocks},
                {"decoder_hidden", c.model.decoder_hidden}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"lr_init", c.train.lr_init},
                {"lr_final", c.train.lr_final},
                {"clip_norm", c.train.clip_norm},
                {"beta", schedule_to_json(c.train.beta)},
                {"lambda", schedule_to_json(c.train.lambda)},
                {"train_size", c.train.train_size},
                {"test_size", c.train.test_size},
                {"adam_beta1", c.train.adam_beta1},
                {"adam_beta2", c.train.adam_beta2},
                {"adam_eps", c.train.adam_eps},
                {"verbose", c.train.verbose}};
  j["sweep"] = {{"r", c.sweep.r}, {"beta", c.sweep.beta}, {"lambda", c.sweep.lambda}};
  j["eval"] = {{"n_samples", c.eval.n_samples}};
  return j;
}

ArchConfig arch_from_config(const RunConfig& cfg, int height, int width, int output_dim, int latent_dim) {
  ArchConfig a;
  a.height = height;
  a.width = width;
  a.output_dim = output_dim;
  a.latent_dim = latent_dim;
  a.channels = cfg.model.channels;
  a.n_res_blocks = cfg.model.n_res_blocks;
  a.decoder_hidden = cfg.model.decoder_hidden;
  a.validate();
  return a;
}

}  // namespace ved
