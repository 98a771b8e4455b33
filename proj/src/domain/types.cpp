#include "autoct/domain/types.hpp"

#include "autoct/common/text.hpp"

#include <cctype>

namespace autoct {

std::optional<Phase> parse_phase(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "i" || t == "1" || t == "phase i" || t == "phase 1") return Phase::I;
    if (t == "ii" || t == "2" || t == "phase ii" || t == "phase 2") return Phase::II;
    if (t == "iii" || t == "3" || t == "phase iii" || t == "phase 3") return Phase::III;
    if (t == "iv" || t == "4" || t == "phase iv" || t == "phase 4") return Phase::IV;
    return std::nullopt;
}

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::I: return "I";
        case Phase::II: return "II";
        case Phase::III: return "III";
        case Phase::IV: return "IV";
    }
    return "?";
}

std::optional<Metric> parse_metric(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "roc_auc") return Metric::RocAuc;
    if (t == "pr_auc") return Metric::PrAuc;
    if (t == "f1") return Metric::F1;
    return std::nullopt;
}

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::RocAuc: return "roc_auc";
        case Metric::PrAuc: return "pr_auc";
        case Metric::F1: return "f1";
    }
    return "?";
}

bool is_valid_feature_name(std::string_view name) {
    if (name.empty() || name[0] < 'a' || name[0] > 'z') return false;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

std::string to_feature_name(std::string_view text) {
    std::string out;
    bool pending_sep = false;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (pending_sep && !out.empty()) out.push_back('_');
            pending_sep = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_sep = true;
        }
    }
    if (out.empty()) return "feature";
    if (out[0] < 'a' || out[0] > 'z') out = "f_" + out;
    return out;
}

}  // namespace autoct
