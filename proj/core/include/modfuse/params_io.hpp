#pragma once

#include <string>

#include "modfuse/model.hpp"
#include "modfuse/pipeline.hpp"
#include "modfuse/synthetic.hpp"

namespace modfuse {

// Self-describing JSON parameter document: states, initial, transition,
// sources, emissions. Probabilities round-trip bit-identically.
std::string params_to_json(const ModelParameters& params);
ModelParameters params_from_json(const std::string& text);
void save_params(const ModelParameters& params, const std::string& path);
ModelParameters load_params(const std::string& path);

// Pipeline configuration document (all keys optional, defaults apply):
// window_start, window_end, sources, category_map, exclusion_keywords.
PipelineConfig pipeline_config_from_json(const std::string& text);
PipelineConfig load_pipeline_config(const std::string& path);

// Generator configuration document (all keys optional): n_districts, n_weeks,
// start_date, seed, missingness (number or array per source), parameters.
GeneratorConfig generator_config_from_json(const std::string& text);
GeneratorConfig load_generator_config(const std::string& path);

}  // namespace modfuse
