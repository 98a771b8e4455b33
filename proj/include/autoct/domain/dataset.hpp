#pragma once

#include "autoct/domain/types.hpp"

#include <istream>
#include <string>
#include <vector>

namespace autoct {

/// Reads `nct_id,label,start_date[,phase]` CSV. Throws DatasetError (with the
/// line number) on a bad header, label outside {0,1}, missing or invalid
/// start_date, unknown phase, or a duplicate nct_id.
std::vector<TrialRecord> read_trials_csv(std::istream& in);
std::vector<TrialRecord> load_trials_csv(const std::string& path);

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials);

}  // namespace autoct
