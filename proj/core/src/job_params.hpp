#pragma once

#include <nlohmann/json.hpp>

#include "framekit/classifier.hpp"
#include "framekit/lda.hpp"

namespace framekit::jobs {

// Readers for parameters already passed through normalize_params.
lda::LdaConfig lda_config_from(const nlohmann::json& params, int num_topics);
classifier::TrainConfig train_config_from(const nlohmann::json& config);

}  // namespace framekit::jobs
