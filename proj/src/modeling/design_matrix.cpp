#include "autoct/modeling/design_matrix.hpp"

#include "autoct/common/text.hpp"
#include "autoct/domain/errors.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace autoct {

std::string column_base(const std::string& feature, const std::string& sub) {
    if (sub == "value" || sub == feature) return feature;
    return feature + "." + sub;
}

namespace {

struct Block {
    std::string feature;
    std::string sub;
    FeatureType type;
    std::vector<std::string> categories;
    std::size_t first_column;
};

std::vector<Block> layout(const PlanSet& plans, std::vector<std::string>& columns,
                          std::vector<std::string>& owners) {
    std::vector<Block> blocks;
    for (const auto& [name, plan] : plans) {
        for (const auto& [sub, type] : plan.feature_type) {
            Block b{name, sub, type, {}, columns.size()};
            const std::string base = column_base(name, sub);
            if (is_categorical(type)) {
                if (auto it = plan.possible_values.find(sub); it != plan.possible_values.end()) {
                    b.categories = it->second;
                }
                for (const auto& c : b.categories) columns.push_back(base + "=" + c);
            } else {
                columns.push_back(base);
            }
            columns.push_back(base + "__missing");
            owners.resize(columns.size(), name);
            blocks.push_back(std::move(b));
        }
    }
    std::set<std::string> seen;
    for (const auto& c : columns) {
        if (!seen.insert(c).second) throw DatasetError("duplicate design column " + c);
    }
    return blocks;
}

/// Writes one sub-feature's cells; returns false when the value is unusable.
bool fill(const Block& b, const FeatureValue& v, Eigen::MatrixXd& m, Eigen::Index r) {
    auto row = m.row(r);
    const auto col = static_cast<Eigen::Index>(b.first_column);
    switch (b.type) {
        case FeatureType::Integer:
        case FeatureType::Float:
            if (const auto* i = std::get_if<std::int64_t>(&v)) {
                row(col) = static_cast<double>(*i);
                return true;
            }
            if (const auto* d = std::get_if<double>(&v)) {
                row(col) = *d;
                return true;
            }
            return false;
        case FeatureType::Boolean:
            if (const auto* f = std::get_if<bool>(&v)) {
                row(col) = *f ? 1.0 : 0.0;
                return true;
            }
            return false;
        case FeatureType::Categorical:
        case FeatureType::Multicategorical: {
            std::vector<std::string> chosen;
            if (const auto* s = std::get_if<std::string>(&v)) {
                chosen.push_back(*s);
            } else if (const auto* m = std::get_if<std::vector<std::string>>(&v)) {
                chosen = *m;
            } else {
                return false;
            }
            std::vector<Eigen::Index> hits;
            for (const auto& c : chosen) {
                auto it = std::find(b.categories.begin(), b.categories.end(), c);
                if (it == b.categories.end()) return false;
                hits.push_back(col + static_cast<Eigen::Index>(it - b.categories.begin()));
            }
            for (auto h : hits) row(h) = 1.0;
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<std::string> design_columns(const PlanSet& plans) {
    std::vector<std::string> columns;
    std::vector<std::string> owners;
    (void)layout(plans, columns, owners);
    return columns;
}

DesignMatrix encode(const PlanSet& plans, std::vector<FeatureValueSet> value_sets) {
    std::sort(value_sets.begin(), value_sets.end(),
              [](const FeatureValueSet& a, const FeatureValueSet& b) { return a.nct_id < b.nct_id; });
    DesignMatrix m;
    const auto blocks = layout(plans, m.columns, m.column_feature);
    m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(value_sets.size()),
                                     static_cast<Eigen::Index>(m.columns.size()));
    for (std::size_t r = 0; r < value_sets.size(); ++r) {
        const auto& vs = value_sets[r];
        if (r > 0 && vs.nct_id == value_sets[r - 1].nct_id) throw DatasetError("duplicate row " + vs.nct_id);
        m.row_ids.push_back(vs.nct_id);
        const auto ri = static_cast<Eigen::Index>(r);
        auto row = m.values.row(ri);
        for (const auto& b : blocks) {
            const FeatureValue* value = nullptr;
            if (auto f = vs.values.find(b.feature); f != vs.values.end()) {
                if (auto s = f->second.find(b.sub); s != f->second.end() && s->second) value = &*s->second;
            }
            const auto missing_col = static_cast<Eigen::Index>(
                b.first_column + (is_categorical(b.type) ? b.categories.size() : 1));
            if (value == nullptr || !fill(b, *value, m.values, ri)) {
                row.segment(static_cast<Eigen::Index>(b.first_column),
                            missing_col - static_cast<Eigen::Index>(b.first_column))
                    .setZero();
                row(missing_col) = 1.0;
            }
        }
    }
    return m;
}

DesignMatrix select_rows(const DesignMatrix& m, const std::vector<std::string>& ids) {
    std::set<std::string> wanted(ids.begin(), ids.end());
    DesignMatrix out;
    out.columns = m.columns;
    out.column_feature = m.column_feature;
    std::vector<Eigen::Index> keep;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (wanted.contains(m.row_ids[r])) {
            keep.push_back(static_cast<Eigen::Index>(r));
            out.row_ids.push_back(m.row_ids[r]);
        }
    }
    out.values.resize(static_cast<Eigen::Index>(keep.size()), m.values.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) out.values.row(static_cast<Eigen::Index>(i)) = m.values.row(keep[i]);
    return out;
}

void write_design_csv(std::ostream& out, const DesignMatrix& m) {
    out << "nct_id";
    for (const auto& c : m.columns) out << ',' << csv_field(c);
    out << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << csv_field(m.row_ids[r]);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out << ',' << format_exact(m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
        out << '\n';
    }
}

DesignMatrix read_design_csv(std::istream& in, const PlanSet& plans) {
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto rows = parse_csv(buf.str());
    if (rows.empty() || rows[0].empty() || rows[0][0] != "nct_id") throw DatasetError("feature CSV lacks a header");
    DesignMatrix m;
    (void)layout(plans, m.columns, m.column_feature);
    if (std::vector<std::string>(rows[0].begin() + 1, rows[0].end()) != m.columns) {
        throw DatasetError("feature CSV columns do not match the plan set");
    }
    m.values.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(m.columns.size()));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != m.columns.size() + 1) {
            throw DatasetError("feature CSV row " + std::to_string(r + 1) + " has the wrong width");
        }
        m.row_ids.push_back(rows[r][0]);
        for (std::size_t c = 0; c < m.columns.size(); ++c) {
            m.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) =
                std::strtod(rows[r][c + 1].c_str(), nullptr);
        }
    }
    return m;
}

std::map<std::string, double> aggregate_by_feature(const DesignMatrix& m, const std::vector<double>& per_column) {
    if (per_column.size() != m.cols()) throw std::invalid_argument("aggregate_by_feature: width mismatch");
    std::map<std::string, double> out;
    for (std::size_t c = 0; c < m.cols(); ++c) out[m.column_feature[c]] += per_column[c];
    return out;
}

}  // namespace autoct
