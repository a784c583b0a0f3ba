#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "modfuse/pipeline.hpp"
#include "modfuse/reporting.hpp"

namespace modfuse {

// leaid,week_start,modality,p_remote,p_hybrid,p_inperson,high_confidence
// Probabilities at 6 decimal places, high_confidence as 0/1.
void write_decodes(std::ostream& out, const std::vector<PosteriorDecode>& decodes);
void write_decodes_file(const std::string& path, const std::vector<PosteriorDecode>& decodes);
std::vector<PosteriorDecode> load_decodes_file(const std::string& path);

// Square matrix (members x members, agreement values) and long form
// pair,overlap,agreement.
void write_agreement_matrix(std::ostream& out, const AgreementMatrix& m);
void write_agreement_pairs(std::ostream& out, const AgreementMatrix& m);

// week_start,stratum,pct_remote,pct_hybrid,pct_inperson (empty fields for
// strata with no decoded districts)
void write_trend_rows(std::ostream& out, const std::vector<TrendRow>& rows);

// week_start,state,n_districts,pct_inperson
void write_snapshot_rows(std::ostream& out, const std::vector<SnapshotRow>& rows);

// source,districts,district_weeks plus union/total rows
void write_coverage(std::ostream& out, const CoverageSummary& cov);

// leaid,week_start,true_modality
void write_truth(std::ostream& out, const std::vector<ObservationSequence>& sequences,
                 const std::vector<std::vector<int>>& truth_paths);

// source,leaid,report_date,modality — one row per non-missing cell, dated at
// the week's Monday
void write_reports(std::ostream& out, const std::vector<ObservationSequence>& sequences,
                   const std::vector<std::string>& sources);

void write_districts(std::ostream& out, const std::vector<DistrictRecord>& districts);

}  // namespace modfuse
