#pragma once

#include "autoct/domain/errors.hpp"
#include "autoct/domain/types.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace autoct {

class InsufficientClass : public Error {
public:
    using Error::Error;
};

/// Per-label quotas: floor(n * p_c) plus one slot per class in decreasing
/// order of fractional remainder (ties to the lower label) until n is met.
std::map<int, std::size_t> stratified_quotas(const std::vector<TrialRecord>& records, std::size_t n);

/// Seeded uniform draw of each class's quota. The result does not depend on
/// input order and is sorted by nct_id.
std::vector<TrialRecord> stratified_sample(const std::vector<TrialRecord>& records, std::size_t n, std::uint64_t seed);

/// Seeded uniform draw of k records (all of them when fewer exist), in draw order.
std::vector<TrialRecord> uniform_sample(const std::vector<TrialRecord>& records, std::size_t k, std::uint64_t seed);

}  // namespace autoct
