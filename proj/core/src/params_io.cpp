#include "modfuse/params_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "modfuse/errors.hpp"
#include "modfuse/reporting.hpp"

namespace modfuse {

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InputError(std::string(what) + ": invalid JSON");
    return j;
}

Vec3 read_vec3(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 3)
        throw InputError("key '" + key + "': expected an array of 3 numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number()) throw InputError("key '" + key + "': expected numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

Mat3 read_mat3(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 3)
        throw InputError("key '" + key + "': expected a 3x3 matrix");
    Mat3 m;
    for (int i = 0; i < 3; ++i) m[i] = read_vec3(j[i], key);
    return m;
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json mat3_json(const Mat3& m) {
    return json::array({vec3_json(m[0]), vec3_json(m[1]), vec3_json(m[2])});
}

}  // namespace

std::string params_to_json(const ModelParameters& params) {
    json j;
    j["states"] = json::array();
    for (int i = 0; i < kNumStates; ++i) j["states"].push_back(modality_name(i));
    j["initial"] = vec3_json(params.initial);
    j["transition"] = mat3_json(params.transition);
    j["sources"] = params.sources;
    j["emissions"] = json::object();
    for (size_t c = 0; c < params.emissions.size(); ++c) {
        const std::string name =
            c < params.sources.size() ? params.sources[c] : "S" + std::to_string(c);
        j["emissions"][name] = mat3_json(params.emissions[c]);
    }
    return j.dump(2) + "\n";
}

ModelParameters params_from_json(const std::string& text) {
    const json j = parse(text, "parameter file");
    for (const char* key : {"states", "initial", "transition", "sources", "emissions"})
        if (!j.contains(key)) throw InputError(std::string("parameter file: missing key '") + key + "'");

    const json& states = j["states"];
    if (!states.is_array() || states.size() != kNumStates)
        throw InputError("key 'states': expected 3 labels");
    for (int i = 0; i < kNumStates; ++i)
        if (!states[i].is_string() || states[i].get<std::string>() != modality_name(i))
            throw InputError(
                "key 'states': must be [\"remote\", \"hybrid\", \"in-person\"] (state and "
                "category axes are indexed in this order)");

    ModelParameters p;
    p.initial = read_vec3(j["initial"], "initial");
    p.transition = read_mat3(j["transition"], "transition");
    if (!j["sources"].is_array() || j["sources"].empty())
        throw InputError("key 'sources': expected a non-empty array of names");
    p.sources = j["sources"].get<std::vector<std::string>>();
    for (const std::string& src : p.sources) {
        if (!j["emissions"].contains(src))
            throw InputError("key 'emissions': missing matrix for source '" + src + "'");
        p.emissions.push_back(read_mat3(j["emissions"][src], "emissions." + src));
    }

    p.validate();
    return p;
}

void save_params(const ModelParameters& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << params_to_json(params);
}

ModelParameters load_params(const std::string& path) {
    try {
        return params_from_json(slurp(path));
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
    const json j = parse(text, "pipeline config");
    PipelineConfig cfg = PipelineConfig::defaults();
    if (j.contains("window_start")) cfg.window_start = Date::parse(j["window_start"].get<std::string>());
    if (j.contains("window_end")) cfg.window_end = Date::parse(j["window_end"].get<std::string>());
    if (cfg.window_end < cfg.window_start)
        throw InputError("key 'window_end': precedes window_start");
    if (j.contains("sources")) {
        cfg.sources = j["sources"].get<std::vector<std::string>>();
        if (cfg.sources.empty()) throw InputError("key 'sources': must be non-empty");
    }
    if (j.contains("category_map")) {
        if (!j["category_map"].is_object()) throw InputError("key 'category_map': expected an object");
        cfg.category_map.clear();
        for (const auto& [raw, v] : j["category_map"].items()) {
            if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() >= kNumStates)
                throw InputError("key 'category_map." + raw + "': value must be 0, 1, or 2");
            std::string k = raw;
            for (char& ch : k) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            cfg.category_map[k] = v.get<int>();
        }
    }
    if (j.contains("exclusion_keywords"))
        cfg.exclusion_keywords = j["exclusion_keywords"].get<std::vector<std::string>>();
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    try {
        return pipeline_config_from_json(slurp(path));
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

GeneratorConfig generator_config_from_json(const std::string& text) {
    const json j = parse(text, "generator config");
    GeneratorConfig cfg;
    if (j.contains("parameters")) {
        cfg.parameters = params_from_json(j["parameters"].dump());
        // the reference missingness only fits the default 4-channel model
        if (cfg.parameters.num_sources() != static_cast<int>(cfg.missingness.size()))
            cfg.missingness.assign(cfg.parameters.num_sources(), {0.0});
    }
    if (j.contains("n_districts")) {
        if (!j["n_districts"].is_number_integer() || j["n_districts"].get<int>() < 1)
            throw InputError("key 'n_districts': must be a positive integer");
        cfg.n_districts = j["n_districts"].get<int>();
    }
    if (j.contains("n_weeks")) {
        if (!j["n_weeks"].is_number_integer() || j["n_weeks"].get<int>() < 1)
            throw InputError("key 'n_weeks': must be a positive integer");
        cfg.n_weeks = j["n_weeks"].get<int>();
    }
    if (j.contains("start_date"))
        cfg.start_week = WeekIndex::of(Date::parse(j["start_date"].get<std::string>()));
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("missingness")) {
        const json& m = j["missingness"];
        cfg.missingness.clear();
        auto read_schedule = [](const json& e) -> std::vector<double> {
            if (e.is_number()) return {e.get<double>()};
            if (e.is_array()) return e.get<std::vector<double>>();
            throw InputError("key 'missingness': entries must be numbers or arrays");
        };
        if (m.is_number()) {
            for (int c = 0; c < cfg.parameters.num_sources(); ++c)
                cfg.missingness.push_back({m.get<double>()});
        } else if (m.is_array()) {
            for (const json& e : m) cfg.missingness.push_back(read_schedule(e));
        } else {
            throw InputError("key 'missingness': expected a number or an array");
        }
    }
    try {
        cfg.validate();
    } catch (const InputError& e) {
        throw InputError(std::string("generator config: ") + e.what());
    }
    return cfg;
}

GeneratorConfig load_generator_config(const std::string& path) {
    try {
        return generator_config_from_json(slurp(path));
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

}  // namespace modfuse
