#include "autoct/domain/dataset.hpp"

#include "autoct/common/text.hpp"
#include "autoct/domain/errors.hpp"

#include <fstream>
#include <set>

namespace autoct {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw DatasetError("trial CSV line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    bool has_phase = false;
    std::vector<TrialRecord> out;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split(line, ',');
        for (auto& c : cells) c = trim(c);
        if (!have_header) {
            if (cells.size() < 3 || cells[0] != "nct_id" || cells[1] != "label" || cells[2] != "start_date" ||
                cells.size() > 4 || (cells.size() == 4 && cells[3] != "phase")) {
                fail(line_no, "expected header nct_id,label,start_date[,phase]");
            }
            has_phase = cells.size() == 4;
            have_header = true;
            continue;
        }
        const std::size_t expected = has_phase ? 4 : 3;
        if (cells.size() != expected && !(has_phase && cells.size() == 3)) {
            fail(line_no, "expected " + std::to_string(expected) + " columns");
        }
        TrialRecord rec;
        rec.nct_id = cells[0];
        if (rec.nct_id.empty()) fail(line_no, "empty nct_id");
        if (cells[1] == "0") {
            rec.label = 0;
        } else if (cells[1] == "1") {
            rec.label = 1;
        } else {
            fail(line_no, "label must be 0 or 1, got '" + cells[1] + "'");
        }
        if (cells[2].empty()) fail(line_no, "missing start_date for " + rec.nct_id);
        auto date = Date::parse(cells[2]);
        if (!date) fail(line_no, "invalid start_date '" + cells[2] + "'");
        rec.start_date = *date;
        if (has_phase && cells.size() == 4 && !cells[3].empty()) {
            rec.phase = parse_phase(cells[3]);
            if (!rec.phase) fail(line_no, "unknown phase '" + cells[3] + "'");
        }
        if (!seen.insert(rec.nct_id).second) fail(line_no, "duplicate nct_id " + rec.nct_id);
        out.push_back(std::move(rec));
    }
    if (!have_header) throw DatasetError("trial CSV is empty");
    return out;
}

std::vector<TrialRecord> load_trials_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open trial CSV " + path);
    return read_trials_csv(in);
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials) {
    out << "nct_id,label,start_date,phase\n";
    for (const auto& t : trials) {
        out << t.nct_id << ',' << t.label << ',' << t.start_date.to_string() << ',';
        if (t.phase) out << to_string(*t.phase);
        out << '\n';
    }
}

}  // namespace autoct
