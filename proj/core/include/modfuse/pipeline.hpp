#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "modfuse/dates.hpp"
#include "modfuse/model.hpp"

namespace modfuse {

struct DistrictRecord {
    std::string leaid;
    std::string name;
    std::string state;        // 2-letter code, may be empty
    int agency_type = -1;     // -1 = unknown
    int operating_status = -1;
    std::string county_fips;  // 5 digits, may be empty
    int urban_rural = -1;     // 1..6, -1 = unknown
    long long enrollment = -1;
    int school_count = -1;
};

struct RawReport {
    std::string source;
    std::string leaid;
    Date report_date;
    int modality = -1;  // 0/1/2
};

struct PipelineConfig {
    Date window_start{2020, 9, 1};
    Date window_end{2021, 6, 25};
    std::vector<std::string> sources{"Burbio", "MCH", "R2LT", "SD"};
    // raw modality string (lowercased, trimmed) -> category
    std::map<std::string, int> category_map;
    std::vector<std::string> exclusion_keywords{"online", "cyber",    "distance",
                                                "remote", "virtual",  "digital"};

    static PipelineConfig defaults();
    std::vector<WeekIndex> window_weeks() const;
    // -1 when the raw string normalizes to nothing in the map
    int normalize_category(const std::string& raw) const;
};

struct Exclusion {
    std::string leaid;
    std::string reason;  // "agency_type", "operating_status", "keyword:<word>", "unparseable"
};

struct FilterResult {
    std::vector<DistrictRecord> eligible;
    std::vector<Exclusion> excluded;
};

// Keeps agency_type in {1,2,7}, operating_status in {1,3,4,5,8}, and names
// free of the exclusion keywords (case-insensitive, word-boundary).
FilterResult filter_eligible(const std::vector<DistrictRecord>& districts,
                             const std::vector<std::string>& keywords);

// (source, leaid, week) -> resolved modality
using WeeklyCells = std::map<std::tuple<std::string, std::string, WeekIndex>, int>;

// Within one (source, leaid, week): latest report date wins; same-date
// conflicts resolve by majority, remaining ties to hybrid. Reports outside
// the window are dropped (count returned via dropped_out_of_window).
WeeklyCells aggregate_to_weeks(const std::vector<RawReport>& reports, const PipelineConfig& config,
                               long long* dropped_out_of_window = nullptr);

struct BuildResult {
    std::vector<ObservationSequence> sequences;
    std::vector<std::string> unknown_leaids;  // reported but absent from metadata
};

// One sequence per eligible district with >=1 non-missing cell, spanning the
// full window with kMissing elsewhere. Channel order = config.sources.
BuildResult build_sequences(const WeeklyCells& cells,
                            const std::vector<DistrictRecord>& eligible,
                            const PipelineConfig& config);

struct SourceCoverage {
    std::string source;
    long long districts = 0;
    long long district_weeks = 0;  // non-missing cells
};

struct CoverageSummary {
    std::vector<SourceCoverage> per_source;
    long long union_districts = 0;       // districts with >=1 observation
    long long union_district_weeks = 0;  // district-weeks with >=1 observation
    long long total_district_weeks = 0;  // sequences x window length (decodable)
};

CoverageSummary coverage_summary(const std::vector<ObservationSequence>& sequences,
                                 const std::vector<std::string>& sources);

// --- delimited-text ingestion -------------------------------------------

// header: source,leaid,report_date,modality
std::vector<RawReport> load_reports(std::istream& in, const std::string& filename,
                                    const PipelineConfig& config);
std::vector<RawReport> load_reports_file(const std::string& path, const PipelineConfig& config);

// header: leaid,name,state,agency_type,operating_status,county_fips,urban_rural,enrollment,school_count
// Malformed rows land in `unparseable` instead of aborting the load.
std::vector<DistrictRecord> load_districts(std::istream& in, const std::string& filename,
                                           std::vector<Exclusion>& unparseable);
std::vector<DistrictRecord> load_districts_file(const std::string& path,
                                                std::vector<Exclusion>& unparseable);

// Minimal CSV splitter: no quoting, fields must not contain commas.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace modfuse
