#include "seqvid/json_io.hpp"

#include "seqvid/error.hpp"

namespace seqvid {

using nlohmann::json;

json to_json(const ModelSpec& spec) {
  return json{{"variant", variant_name(spec.variant)},
              {"layers", spec.layers},
              {"hidden_dim", spec.hidden_dim},
              {"input_dim", spec.input_dim},
              {"t_in", spec.t_in},
              {"t_future", spec.t_future},
              {"conditional_recon", spec.conditional_recon},
              {"conditional_future", spec.conditional_future},
              {"output_unit", spec.output_unit == OutputUnit::Logistic
                                  ? "logistic"
                                  : "linear"}};
}

ModelSpec model_spec_from_json(const json& j) {
  try {
    ModelSpec spec;
    spec.variant = variant_from_name(j.at("variant").get<std::string>());
    spec.layers = j.at("layers").get<std::size_t>();
    spec.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    spec.input_dim = j.at("input_dim").get<std::size_t>();
    spec.t_in = j.at("t_in").get<std::size_t>();
    spec.t_future = j.at("t_future").get<std::size_t>();
    spec.conditional_recon = j.at("conditional_recon").get<bool>();
    spec.conditional_future = j.at("conditional_future").get<bool>();
    const auto unit = j.at("output_unit").get<std::string>();
    if (unit == "logistic") {
      spec.output_unit = OutputUnit::Logistic;
    } else if (unit == "linear") {
      spec.output_unit = OutputUnit::Linear;
    } else {
      throw ParameterError("unknown output unit: " + unit);
    }
    return spec;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model spec json: ") + e.what());
  }
}

json to_json(const GenConfig& cfg) {
  return json{{"canvas", cfg.canvas},
              {"num_digits", cfg.num_digits},
              {"seq_len", cfg.seq_len},
              {"vel_min", cfg.vel_min},
              {"vel_max", cfg.vel_max},
              {"binarize", cfg.binarize},
              {"digit_size", cfg.digit_size}};
}

GenConfig gen_config_from_json(const json& j) {
  try {
    GenConfig cfg;
    cfg.canvas = j.at("canvas").get<std::size_t>();
    cfg.num_digits = j.at("num_digits").get<std::size_t>();
    cfg.seq_len = j.at("seq_len").get<std::size_t>();
    cfg.vel_min = j.at("vel_min").get<double>();
    cfg.vel_max = j.at("vel_max").get<double>();
    cfg.binarize = j.at("binarize").get<bool>();
    cfg.digit_size = j.at("digit_size").get<std::size_t>();
    return cfg;
  } catch (const json::exception& e) {
    throw FormatError(std::string("generator config json: ") + e.what());
  }
}

json to_json(const TrainConfig& cfg) {
  return json{{"batch_size", cfg.batch_size},
              {"learning_rate", cfg.learning_rate},
              {"momentum", cfg.momentum},
              {"grad_clip_norm", cfg.grad_clip_norm},
              {"max_steps", cfg.max_steps},
              {"eval_every", cfg.eval_every},
              {"seed", cfg.seed},
              {"model", to_json(cfg.model)},
              {"data", to_json(cfg.data)}};
}

TrainConfig train_config_from_json(const json& j) {
  try {
    TrainConfig cfg;
    cfg.batch_size = j.at("batch_size").get<std::size_t>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.momentum = j.at("momentum").get<double>();
    cfg.grad_clip_norm = j.at("grad_clip_norm").get<double>();
    cfg.max_steps = j.at("max_steps").get<std::size_t>();
    cfg.eval_every = j.at("eval_every").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.model = model_spec_from_json(j.at("model"));
    cfg.data = gen_config_from_json(j.at("data"));
    return cfg;
  } catch (const json::exception& e) {
    throw FormatError(std::string("train config json: ") + e.what());
  }
}

}  // namespace seqvid
