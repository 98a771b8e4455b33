#include "autoct/pipeline/sampling.hpp"

#include "autoct/common/rng.hpp"

#include <algorithm>
#include <string>

namespace autoct {

namespace {

std::map<int, std::vector<TrialRecord>> by_class(const std::vector<TrialRecord>& records) {
    std::map<int, std::vector<TrialRecord>> out;
    for (const auto& r : records) out[r.label].push_back(r);
    for (auto& [label, members] : out) {
        std::sort(members.begin(), members.end(),
                  [](const TrialRecord& a, const TrialRecord& b) { return a.nct_id < b.nct_id; });
    }
    return out;
}

}  // namespace

std::map<int, std::size_t> stratified_quotas(const std::vector<TrialRecord>& records, std::size_t n) {
    if (n > records.size()) {
        throw InsufficientClass("cannot sample " + std::to_string(n) + " of " + std::to_string(records.size()) +
                                " records");
    }
    const auto classes = by_class(records);
    const std::size_t total = records.size();
    std::map<int, std::size_t> quotas;
    // Remainders as exact fractions (n * count mod total) / total.
    std::vector<std::pair<std::size_t, int>> remainders;
    std::size_t assigned = 0;
    for (const auto& [label, members] : classes) {
        const std::size_t scaled = n * members.size();
        quotas[label] = scaled / total;
        assigned += scaled / total;
        remainders.emplace_back(scaled % total, label);
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) quotas[remainders[i % remainders.size()].second] += 1;
    for (const auto& [label, quota] : quotas) {
        if (quota > classes.at(label).size()) {
            throw InsufficientClass("class " + std::to_string(label) + " has " +
                                    std::to_string(classes.at(label).size()) + " members, quota " +
                                    std::to_string(quota));
        }
    }
    return quotas;
}

std::vector<TrialRecord> stratified_sample(const std::vector<TrialRecord>& records, std::size_t n, std::uint64_t seed) {
    const auto quotas = stratified_quotas(records, n);
    const auto classes = by_class(records);
    std::vector<TrialRecord> out;
    for (const auto& [label, quota] : quotas) {
        const auto& members = classes.at(label);
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
        for (std::size_t i : rng.sample_without_replacement(members.size(), quota)) out.push_back(members[i]);
    }
    std::sort(out.begin(), out.end(), [](const TrialRecord& a, const TrialRecord& b) { return a.nct_id < b.nct_id; });
    return out;
}

std::vector<TrialRecord> uniform_sample(const std::vector<TrialRecord>& records, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TrialRecord> out;
    for (std::size_t i : rng.sample_without_replacement(records.size(), std::min(k, records.size()))) {
        out.push_back(records[i]);
    }
    return out;
}

}  // namespace autoct
