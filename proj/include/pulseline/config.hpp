#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "pulseline/dsp.hpp"
#include "pulseline/errors.hpp"
#include "pulseline/models.hpp"

namespace pulseline {

struct DataConfig {
    std::size_t n = 5687;
    double abnormal_fraction = 0.2;
    std::uint64_t seed = 42;
};

struct PipelineConfig {
    double gate_threshold = 0.5;
};

struct BenchConfig {
    std::size_t repeats = 10;
    double power_mw = 100.0;
};

struct AppConfig {
    DataConfig data;
    FilterSpec filters = FilterSpec::defaults();
    BundleConfigs train;
    PipelineConfig pipeline;
    BenchConfig bench;

    void validate() const {
        if (data.n < 10) throw ConfigError("config: data.n must be >= 10");
        if (data.abnormal_fraction < 0.0 || data.abnormal_fraction > 1.0)
            throw ConfigError("config: data.abnormal_fraction must be in [0, 1]");
        try {
            filters.validate();
            train.upsampler.validate();
            train.classifier.validate();
            train.regressor.validate();
        } catch (const Error& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        if (pipeline.gate_threshold < 0.0 || pipeline.gate_threshold > 1.0)
            throw ConfigError("config: pipeline.gate_threshold must be in [0, 1]");
        if (bench.repeats < 10) throw ConfigError("config: bench.repeats must be >= 10");
        if (!(bench.power_mw > 0.0)) throw ConfigError("config: bench.power_mw must be > 0");
    }
};

namespace config_detail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    if (!obj.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
inline void get_if(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for " + where + "." + key);
    }
}

inline OptimizerKind parse_optimizer(const std::string& s, const std::string& where) {
    if (s == "sgd") return OptimizerKind::SGD;
    if (s == "adam") return OptimizerKind::Adam;
    throw ConfigError("config: " + where + ".optimizer must be 'sgd' or 'adam'");
}

inline LossKind parse_loss(const std::string& s, const std::string& where) {
    if (s == "mse") return LossKind::MSE;
    if (s == "bce") return LossKind::BCE;
    throw ConfigError("config: " + where + ".loss must be 'mse' or 'bce'");
}

inline CheckpointMetric parse_metric(const std::string& s, const std::string& where) {
    if (s == "val_rmse") return CheckpointMetric::ValRMSE;
    if (s == "val_f1") return CheckpointMetric::ValF1;
    if (s == "val_loss") return CheckpointMetric::ValLoss;
    throw ConfigError("config: " + where + ".checkpoint_metric must be val_rmse, val_f1 or val_loss");
}

inline const char* optimizer_name(OptimizerKind k) {
    return k == OptimizerKind::SGD ? "sgd" : "adam";
}
inline const char* loss_name(LossKind k) { return k == LossKind::MSE ? "mse" : "bce"; }
inline const char* metric_name(CheckpointMetric m) {
    switch (m) {
    case CheckpointMetric::ValRMSE: return "val_rmse";
    case CheckpointMetric::ValF1: return "val_f1";
    case CheckpointMetric::ValLoss: return "val_loss";
    }
    return "?";
}

inline void parse_train_config(const json& obj, TrainConfig& cfg, const std::string& where) {
    check_keys(obj,
               {"optimizer", "learning_rate", "weight_decay", "epochs", "loss",
                "checkpoint_metric", "seed", "batch_size", "adam_beta1", "adam_beta2", "adam_eps"},
               where);
    if (obj.contains("optimizer"))
        cfg.optimizer = parse_optimizer(obj.at("optimizer").get<std::string>(), where);
    if (obj.contains("loss")) cfg.loss = parse_loss(obj.at("loss").get<std::string>(), where);
    if (obj.contains("checkpoint_metric"))
        cfg.checkpoint_metric = parse_metric(obj.at("checkpoint_metric").get<std::string>(), where);
    get_if(obj, "learning_rate", cfg.learning_rate, where);
    get_if(obj, "weight_decay", cfg.weight_decay, where);
    get_if(obj, "epochs", cfg.epochs, where);
    get_if(obj, "seed", cfg.seed, where);
    get_if(obj, "batch_size", cfg.batch_size, where);
    get_if(obj, "adam_beta1", cfg.adam_beta1, where);
    get_if(obj, "adam_beta2", cfg.adam_beta2, where);
    get_if(obj, "adam_eps", cfg.adam_eps, where);
}

inline json train_config_to_json(const TrainConfig& cfg) {
    return json{{"optimizer", optimizer_name(cfg.optimizer)},
                {"learning_rate", cfg.learning_rate},
                {"weight_decay", cfg.weight_decay},
                {"epochs", cfg.epochs},
                {"loss", loss_name(cfg.loss)},
                {"checkpoint_metric", metric_name(cfg.checkpoint_metric)},
                {"seed", cfg.seed},
                {"batch_size", cfg.batch_size},
                {"adam_beta1", cfg.adam_beta1},
                {"adam_beta2", cfg.adam_beta2},
                {"adam_eps", cfg.adam_eps}};
}

} // namespace config_detail

inline AppConfig config_from_json(const nlohmann::json& j) {
    using namespace config_detail;
    AppConfig cfg;
    check_keys(j, {"data", "filters", "train", "pipeline", "bench"}, "top level");

    if (j.contains("data")) {
        const auto& d = j.at("data");
        check_keys(d, {"n", "abnormal_fraction", "seed"}, "data");
        get_if(d, "n", cfg.data.n, "data");
        get_if(d, "abnormal_fraction", cfg.data.abnormal_fraction, "data");
        get_if(d, "seed", cfg.data.seed, "data");
    }
    if (j.contains("filters")) {
        const auto& f = j.at("filters");
        check_keys(f, {"median_window", "fir_taps", "ma_window", "interp_factor"}, "filters");
        get_if(f, "median_window", cfg.filters.median_window, "filters");
        get_if(f, "ma_window", cfg.filters.ma_window, "filters");
        get_if(f, "interp_factor", cfg.filters.interp_factor, "filters");
        if (f.contains("fir_taps")) get_if(f, "fir_taps", cfg.filters.fir_taps, "filters");
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        check_keys(t, {"upsampler", "classifier", "regressor"}, "train");
        if (t.contains("upsampler"))
            parse_train_config(t.at("upsampler"), cfg.train.upsampler, "train.upsampler");
        if (t.contains("classifier"))
            parse_train_config(t.at("classifier"), cfg.train.classifier, "train.classifier");
        if (t.contains("regressor"))
            parse_train_config(t.at("regressor"), cfg.train.regressor, "train.regressor");
    }
    if (j.contains("pipeline")) {
        const auto& p = j.at("pipeline");
        check_keys(p, {"gate_threshold"}, "pipeline");
        get_if(p, "gate_threshold", cfg.pipeline.gate_threshold, "pipeline");
    }
    if (j.contains("bench")) {
        const auto& b = j.at("bench");
        check_keys(b, {"repeats", "power_mw"}, "bench");
        get_if(b, "repeats", cfg.bench.repeats, "bench");
        get_if(b, "power_mw", cfg.bench.power_mw, "bench");
    }
    cfg.validate();
    return cfg;
}

inline nlohmann::json config_to_json(const AppConfig& cfg) {
    using namespace config_detail;
    return nlohmann::json{
        {"data",
         {{"n", cfg.data.n},
          {"abnormal_fraction", cfg.data.abnormal_fraction},
          {"seed", cfg.data.seed}}},
        {"filters",
         {{"median_window", cfg.filters.median_window},
          {"fir_taps", cfg.filters.fir_taps},
          {"ma_window", cfg.filters.ma_window},
          {"interp_factor", cfg.filters.interp_factor}}},
        {"train",
         {{"upsampler", train_config_to_json(cfg.train.upsampler)},
          {"classifier", train_config_to_json(cfg.train.classifier)},
          {"regressor", train_config_to_json(cfg.train.regressor)}}},
        {"pipeline", {{"gate_threshold", cfg.pipeline.gate_threshold}}},
        {"bench", {{"repeats", cfg.bench.repeats}, {"power_mw", cfg.bench.power_mw}}}};
}

inline AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return config_from_json(j);
}

} // namespace pulseline
