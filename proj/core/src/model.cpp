#include "modfuse/model.hpp"

#include <cmath>

#include "modfuse/errors.hpp"

namespace modfuse {

namespace {

constexpr double kRowSumTol = 1e-9;

void check_row(const Vec3& row, const std::string& what) {
    double sum = 0.0;
    for (double v : row) {
        if (!(v >= 0.0))
            throw InputError(what + ": negative or non-finite probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw InputError(what + ": row sums to " + std::to_string(sum) + ", expected 1");
}

}  // namespace

const char* modality_name(int state) {
    switch (state) {
        case 0: return "remote";
        case 1: return "hybrid";
        case 2: return "in-person";
    }
    return "?";
}

int modality_from_name(const std::string& label) {
    if (label == "remote") return 0;
    if (label == "hybrid") return 1;
    if (label == "in-person") return 2;
    return -1;
}

void ModelParameters::validate() const {
    check_row(initial, "initial distribution");
    for (int i = 0; i < kNumStates; ++i)
        check_row(transition[i], "transition row " + std::to_string(i));
    if (!sources.empty() && sources.size() != emissions.size())
        throw InputError("source name count (" + std::to_string(sources.size()) +
                         ") does not match emission matrix count (" +
                         std::to_string(emissions.size()) + ")");
    if (emissions.empty())
        throw InputError("model has no emission channels");
    for (size_t c = 0; c < emissions.size(); ++c)
        for (int i = 0; i < kNumStates; ++i)
            check_row(emissions[c][i],
                      "emission channel " + std::to_string(c) + " row " + std::to_string(i));
}

ObservationSequence ObservationSequence::all_missing(std::string entity_id, WeekIndex start,
                                                     int weeks, int sources) {
    ObservationSequence seq;
    seq.entity_id = std::move(entity_id);
    seq.start_week = start;
    seq.num_weeks = weeks;
    seq.num_sources = sources;
    seq.cells.assign(static_cast<size_t>(weeks) * sources, kMissing);
    return seq;
}

void ObservationSequence::validate() const {
    if (num_weeks < 1) throw InputError("sequence '" + entity_id + "': needs at least one week");
    if (num_sources < 1) throw InputError("sequence '" + entity_id + "': needs at least one source");
    if (cells.size() != static_cast<size_t>(num_weeks) * num_sources)
        throw InputError("sequence '" + entity_id + "': cell buffer size mismatch");
    for (std::int8_t v : cells)
        if (v != kMissing && (v < 0 || v >= kNumStates))
            throw InputError("sequence '" + entity_id + "': category out of range");
}

void SufficientStatistics::merge(const SufficientStatistics& other) {
    if (emissions.size() != other.emissions.size())
        throw InputError("cannot merge statistics with different channel counts");
    for (int i = 0; i < kNumStates; ++i) {
        start[i] += other.start[i];
        for (int j = 0; j < kNumStates; ++j) transition[i][j] += other.transition[i][j];
    }
    for (size_t c = 0; c < emissions.size(); ++c)
        for (int i = 0; i < kNumStates; ++i)
            for (int j = 0; j < kNumStates; ++j) emissions[c][i][j] += other.emissions[c][i][j];
    log_likelihood += other.log_likelihood;
}

}  // namespace modfuse
