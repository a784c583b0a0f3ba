#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include "modfuse/errors.hpp"
#include "modfuse/params_io.hpp"
#include "oracle.hpp"

using namespace modfuse;

namespace {

bool bit_identical(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("parameter files round-trip bit-identically") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        ModelParameters p = oracle::random_params(rng, 4);
        p.sources = {"Burbio", "MCH", "R2LT", "SD"};
        const std::string text = params_to_json(p);
        const ModelParameters q = params_from_json(text);
        CHECK(q.sources == p.sources);
        for (int i = 0; i < 3; ++i) {
            CHECK(bit_identical(p.initial[i], q.initial[i]));
            for (int j = 0; j < 3; ++j)
                CHECK(bit_identical(p.transition[i][j], q.transition[i][j]));
        }
        for (int c = 0; c < 4; ++c)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    CHECK(bit_identical(p.emissions[c][i][j], q.emissions[c][i][j]));
        // serialize-parse-serialize is a fixed point
        CHECK(params_to_json(q) == text);
    }
}

TEST_CASE("parameter file rejects non-canonical state label order") {
    CHECK_THROWS_WITH_AS(params_from_json(R"({
        "states": ["hybrid", "remote", "in-person"],
        "initial": [0.5, 0.3, 0.2],
        "transition": [[0.8, 0.1, 0.1], [0.2, 0.7, 0.1], [0.3, 0.3, 0.4]],
        "sources": ["A"],
        "emissions": {"A": [[0.6, 0.2, 0.2], [0.1, 0.8, 0.1], [0.25, 0.25, 0.5]]}
    })"),
                         doctest::Contains("states"), InputError);
}

TEST_CASE("parameter file validation errors") {
    CHECK_THROWS_AS(params_from_json("{not json"), InputError);
    CHECK_THROWS_AS(params_from_json("{}"), InputError);
    ModelParameters p = reference_parameters();
    std::string text = params_to_json(p);
    // break a row sum
    const std::string needle = "0.90299999999999997";  // not present; use generic corruption
    std::string corrupted = text;
    const size_t at = corrupted.find("0.9");
    REQUIRE(at != std::string::npos);
    corrupted.replace(at, 3, "0.5");
    CHECK_THROWS_AS(params_from_json(corrupted), InputError);
}

TEST_CASE("pipeline config parsing") {
    const PipelineConfig cfg = pipeline_config_from_json(R"({
        "window_start": "2020-10-01",
        "window_end": "2020-12-31",
        "sources": ["X", "Y"],
        "category_map": {"Open": 2, "Closed": 0, "Mixed": 1},
        "exclusion_keywords": ["virtual"]
    })");
    CHECK(cfg.window_start == Date{2020, 10, 1});
    CHECK(cfg.sources == std::vector<std::string>{"X", "Y"});
    CHECK(cfg.normalize_category("open") == 2);
    CHECK(cfg.normalize_category("OPEN") == 2);
    CHECK(cfg.normalize_category("remote") == -1);  // map was replaced
    CHECK(cfg.exclusion_keywords == std::vector<std::string>{"virtual"});

    CHECK_THROWS_AS(pipeline_config_from_json(R"({"window_end": "2019-01-01"})"), InputError);
    CHECK_THROWS_AS(pipeline_config_from_json(R"({"category_map": {"x": 9}})"), InputError);
    CHECK_THROWS_AS(pipeline_config_from_json(R"({"sources": []})"), InputError);
}

TEST_CASE("generator config parsing") {
    const GeneratorConfig cfg = generator_config_from_json(R"({
        "n_districts": 5, "n_weeks": 7, "seed": 11,
        "missingness": [0.1, [0.0,0.1,0.2,0.3,0.4,0.5,0.6], 0.9, 1.0]
    })");
    CHECK(cfg.n_districts == 5);
    CHECK(cfg.n_weeks == 7);
    CHECK(cfg.seed == 11);
    CHECK(cfg.missingness[0] == std::vector<double>{0.1});
    CHECK(cfg.missingness[1].size() == 7);

    CHECK_THROWS_AS(generator_config_from_json(R"({"n_districts": 0})"), InputError);
    CHECK_THROWS_AS(generator_config_from_json(R"({"missingness": [2.0]})"), InputError);
    // scalar missingness broadcasts over all four default channels
    const GeneratorConfig b = generator_config_from_json(R"({"missingness": 0.5})");
    CHECK(b.missingness.size() == 4);
    CHECK(b.missingness[3] == std::vector<double>{0.5});
}
