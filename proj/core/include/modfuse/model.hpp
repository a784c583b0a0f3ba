#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "modfuse/dates.hpp"

namespace modfuse {

// Hidden states / observation categories: 0 = remote, 1 = hybrid, 2 = in-person.
inline constexpr int kNumStates = 3;
inline constexpr std::int8_t kMissing = -1;

const char* modality_name(int state);
// -1 if the (already normalized, lowercase) label is unknown
int modality_from_name(const std::string& label);

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

// Shared HMM: one 3-state chain observed through S independent categorical
// channels, one 3x3 row-stochastic emission matrix per channel.
struct ModelParameters {
    Vec3 initial{};
    Mat3 transition{};
    std::vector<std::string> sources;  // channel names, same order as emissions
    std::vector<Mat3> emissions;

    int num_sources() const { return static_cast<int>(emissions.size()); }

    // Throws InputError on negative entries, row sums off by more than 1e-9,
    // or a source-name/emission count mismatch.
    void validate() const;
};

// One district's week-indexed grid of per-source reports. Row-major T x S,
// cells in {0,1,2} or kMissing.
struct ObservationSequence {
    std::string entity_id;
    WeekIndex start_week{};
    int num_weeks = 0;
    int num_sources = 0;
    std::vector<std::int8_t> cells;

    std::int8_t cell(int week, int source) const { return cells[static_cast<size_t>(week) * num_sources + source]; }
    std::int8_t& cell(int week, int source) { return cells[static_cast<size_t>(week) * num_sources + source]; }
    const std::int8_t* row(int week) const { return cells.data() + static_cast<size_t>(week) * num_sources; }

    static ObservationSequence all_missing(std::string entity_id, WeekIndex start, int weeks, int sources);
    void validate() const;
};

struct WeekDecode {
    WeekIndex week{};
    Vec3 posterior{};
    int state = 0;            // argmax (ties -> lowest index)
    double confidence = 0.0;  // max posterior mass
    bool high_confidence = false;
};

struct PosteriorDecode {
    std::string entity_id;
    std::vector<WeekDecode> per_week;
};

// E-step expected counts; additive across sequences.
struct SufficientStatistics {
    Vec3 start{};
    Mat3 transition{};
    std::vector<Mat3> emissions;
    double log_likelihood = 0.0;

    explicit SufficientStatistics(int num_sources = 0) : emissions(num_sources, Mat3{}) {}
    void merge(const SufficientStatistics& other);
};

}  // namespace modfuse
