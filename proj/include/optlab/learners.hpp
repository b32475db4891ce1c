#pragma once

#include <memory>

#include "optlab/forest.hpp"
#include "optlab/mlp.hpp"
#include "optlab/oblivious_gbm.hpp"
#include "optlab/regressor.hpp"

namespace optlab {

inline std::unique_ptr<TrainedRegressor> fit_regressor(const DataMatrix& train,
                                                       const RegressorConfig& config,
                                                       std::uint64_t seed) {
    if (const auto* m = std::get_if<MlpConfig>(&config)) return mlp_fit(train, *m, seed);
    if (const auto* f = std::get_if<ForestConfig>(&config)) return forest_fit(train, *f, seed);
    return gbm_fit(train, std::get<GbmConfig>(config), seed);
}

inline std::unique_ptr<TrainedRegressor> model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "optlab-model") {
        throw ParseError("not an optlab model artifact");
    }
    if (j.value("version", 0) != 1) {
        throw ParseError("unsupported model artifact version");
    }
    const std::string kind = j.at("kind");
    if (kind == "mlp") return MlpModel::from_json(j);
    if (kind == "forest") return ForestModel::from_json(j);
    if (kind == "gbm") return GbmModel::from_json(j);
    throw ParseError("unknown model kind: " + kind);
}

inline void save_model(const TrainedRegressor& model, const std::filesystem::path& path) {
    write_file_atomic(path, model.to_json().dump(2) + "\n");
}

inline std::unique_ptr<TrainedRegressor> load_model(const std::filesystem::path& path) {
    return model_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace optlab
