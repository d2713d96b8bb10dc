#include "budget/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace budget {
namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    out.push_back(cell);
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace

TabularDataset TabularDataset::select_rows(const std::vector<std::size_t>& idx) const {
    TabularDataset out;
    out.name = name;
    out.task = task;
    out.schema = schema;
    out.n_features = n_features;
    out.label_names = label_names;
    out.rows.reserve(idx.size() * n_features);
    out.labels.reserve(idx.size());
    for (std::size_t r : idx) {
        out.rows.insert(out.rows.end(), rows.begin() + r * n_features,
                        rows.begin() + (r + 1) * n_features);
        out.labels.push_back(labels[r]);
        if (!raw_label_values.empty()) out.raw_label_values.push_back(raw_label_values[r]);
    }
    return out;
}

TabularDataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    std::vector<std::vector<std::string>> cells;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        cells.push_back(split_csv_line(line));
    }
    if (cells.size() < 2) throw std::runtime_error("csv has no data rows: " + path);

    const auto& header = cells[0];
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) label_idx = i;
    }
    if (label_idx == header.size()) {
        throw std::runtime_error("label column not found: " + label_column);
    }
    const std::size_t n = cells.size() - 1;
    for (std::size_t r = 1; r <= n; ++r) {
        if (cells[r].size() != header.size()) {
            throw std::runtime_error("row " + std::to_string(r) + " has wrong cell count");
        }
    }

    TabularDataset ds;
    ds.name = path;
    // Labels: dense ids in lexicographic order of original values.
    {
        std::set<std::string> distinct;
        for (std::size_t r = 1; r <= n; ++r) {
            if (cells[r][label_idx].empty()) {
                throw std::runtime_error("missing label value in row " + std::to_string(r));
            }
            distinct.insert(cells[r][label_idx]);
        }
        if (distinct.size() < 2) throw std::runtime_error("single-class dataset: " + path);
        ds.label_names.assign(distinct.begin(), distinct.end());
        std::map<std::string, int> id;
        for (std::size_t i = 0; i < ds.label_names.size(); ++i) id[ds.label_names[i]] = int(i);
        for (std::size_t r = 1; r <= n; ++r) ds.labels.push_back(id[cells[r][label_idx]]);
        bool all_numeric = true;
        std::vector<double> raw(n);
        for (std::size_t r = 1; r <= n && all_numeric; ++r) {
            all_numeric = parse_double(cells[r][label_idx], raw[r - 1]);
        }
        if (all_numeric) ds.raw_label_values = std::move(raw);
    }
    ds.task = ds.label_names.size() == 2 ? Task::Binary : Task::Multiclass;

    // Feature columns in header order; a column is numeric when every
    // non-empty cell parses as a finite number.
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_idx) feature_cols.push_back(c);
    }
    ds.n_features = feature_cols.size();
    ds.rows.assign(n * ds.n_features, 0.0);
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
        const std::size_t c = feature_cols[f];
        bool numeric = true;
        bool has_missing = false;
        for (std::size_t r = 1; r <= n; ++r) {
            double v;
            if (cells[r][c].empty()) has_missing = true;
            else if (!parse_double(cells[r][c], v)) numeric = false;
        }
        ColumnSchema col;
        col.name = header[c];
        if (numeric) {
            col.kind = ColumnKind::Numeric;
            std::vector<double> present;
            for (std::size_t r = 1; r <= n; ++r) {
                double v;
                if (parse_double(cells[r][c], v)) present.push_back(v);
            }
            if (present.empty()) {
                throw std::runtime_error("column '" + col.name + "' has no parseable values");
            }
            const double imputed = median_of(present);
            for (std::size_t r = 1; r <= n; ++r) {
                double v;
                ds.rows[(r - 1) * ds.n_features + f] =
                    parse_double(cells[r][c], v) ? v : imputed;
            }
        } else {
            col.kind = ColumnKind::Categorical;
            std::set<std::string> distinct;
            for (std::size_t r = 1; r <= n; ++r) {
                if (!cells[r][c].empty()) distinct.insert(cells[r][c]);
            }
            if (has_missing) distinct.insert(kMissingCategory);
            col.categories.assign(distinct.begin(), distinct.end());
            std::map<std::string, double> code;
            for (std::size_t i = 0; i < col.categories.size(); ++i) {
                code[col.categories[i]] = double(i);
            }
            for (std::size_t r = 1; r <= n; ++r) {
                const std::string& cell = cells[r][c];
                ds.rows[(r - 1) * ds.n_features + f] =
                    cell.empty() ? code[kMissingCategory] : code[cell];
            }
        }
        ds.schema.push_back(std::move(col));
    }
    ColumnSchema label_col;
    label_col.name = header[label_idx];
    label_col.kind = ColumnKind::Label;
    ds.schema.push_back(std::move(label_col));
    return ds;
}

TabularDataset binarize_regression(const TabularDataset& dataset) {
    if (dataset.raw_label_values.size() != dataset.n_rows()) {
        throw std::runtime_error("binarize_regression: labels are not continuous");
    }
    const double med = median_of(dataset.raw_label_values);
    TabularDataset out = dataset;
    out.task = Task::BinarizedRegression;
    out.label_names = {"le_median", "gt_median"};
    out.raw_label_values.clear();
    bool any_high = false;
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
        const bool high = dataset.raw_label_values[i] > med;
        out.labels[i] = high ? 1 : 0;
        any_high |= high;
    }
    if (!any_high) {
        throw std::runtime_error("binarize_regression: degenerate median split (all labels equal)");
    }
    return out;
}

EligibilityReport validate_eligibility(const TabularDataset& dataset) {
    EligibilityReport rep;
    rep.eligible = true;
    if (dataset.n_rows() < 3000) {
        rep.eligible = false;
        rep.reasons.push_back("too few rows: " + std::to_string(dataset.n_rows()) + " < 3000");
    }
    if (dataset.n_features >= 50) {
        rep.eligible = false;
        rep.reasons.push_back("too many features: " + std::to_string(dataset.n_features) +
                              " >= 50");
    }
    return rep;
}

DatasetSplit subsample_and_split(const TabularDataset& dataset, std::size_t n_total,
                                 std::size_t n_test, std::uint64_t seed) {
    if (n_total > dataset.n_rows()) {
        throw std::runtime_error("subsample_and_split: n_total exceeds dataset size");
    }
    if (n_test >= n_total) {
        throw std::runtime_error("subsample_and_split: n_test must be smaller than n_total");
    }
    Rng rng(mix64(seed, 0x5117u));
    auto sampled = rng.sample_without_replacement(dataset.n_rows(), n_total);
    std::vector<std::size_t> test_idx(sampled.begin(), sampled.begin() + n_test);
    std::vector<std::size_t> train_idx(sampled.begin() + n_test, sampled.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    DatasetSplit split;
    split.source_name = dataset.name;
    split.train = dataset.select_rows(train_idx);
    split.test = dataset.select_rows(test_idx);
    return split;
}

PilotStudy draw_pilot(const DatasetSplit& split, std::size_t m, std::uint64_t seed) {
    if (m < kMinPilotSize) {
        throw std::runtime_error("draw_pilot: pilot size below minimum of " +
                                 std::to_string(kMinPilotSize));
    }
    if (m > split.train.n_rows()) {
        throw std::runtime_error("draw_pilot: pilot size exceeds training set");
    }
    Rng rng(mix64(seed, 0x9107u));
    auto idx = rng.sample_without_replacement(split.train.n_rows(), m);
    std::sort(idx.begin(), idx.end());
    PilotStudy pilot;
    pilot.data = split.train.select_rows(idx);
    pilot.m = m;
    pilot.seed = seed;
    return pilot;
}

TabularDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed,
                                  const std::string& name) {
    if (spec.classes < 2) throw std::runtime_error("generate_synthetic: classes must be >= 2");
    if (spec.d < 1) throw std::runtime_error("generate_synthetic: d must be >= 1");
    if (spec.separation < 0.0) throw std::runtime_error("generate_synthetic: negative separation");
    if (spec.label_noise < 0.0 || spec.label_noise > 1.0) {
        throw std::runtime_error("generate_synthetic: label_noise outside [0,1]");
    }
    if (spec.n < spec.classes) throw std::runtime_error("generate_synthetic: n < classes");

    Rng rng(mix64(seed, 0x51317u));
    // Class centroids: random unit directions scaled by separation.
    std::vector<std::vector<double>> centroids(spec.classes, std::vector<double>(spec.d));
    for (auto& c : centroids) {
        double norm2 = 0.0;
        for (auto& v : c) {
            v = rng.normal();
            norm2 += v * v;
        }
        const double norm = std::sqrt(std::max(norm2, 1e-300));
        for (auto& v : c) v = v / norm * spec.separation;
    }

    TabularDataset ds;
    ds.name = name;
    ds.task = spec.classes == 2 ? Task::Binary : Task::Multiclass;
    ds.n_features = spec.d;
    for (std::size_t f = 0; f < spec.d; ++f) {
        ColumnSchema col;
        col.name = "f" + std::to_string(f);
        col.kind = ColumnKind::Numeric;
        ds.schema.push_back(std::move(col));
    }
    ColumnSchema label_col;
    label_col.name = "label";
    label_col.kind = ColumnKind::Label;
    ds.schema.push_back(std::move(label_col));
    for (std::size_t c = 0; c < spec.classes; ++c) ds.label_names.push_back("c" + std::to_string(c));

    ds.labels.resize(spec.n);
    ds.rows.resize(spec.n * spec.d);
    for (std::size_t i = 0; i < spec.n; ++i) {
        // First C rows get one row per class so no class is ever empty.
        const int label = i < spec.classes ? int(i) : int(rng.uniform_index(spec.classes));
        ds.labels[i] = label;
        for (std::size_t f = 0; f < spec.d; ++f) {
            ds.rows[i * spec.d + f] = centroids[label][f] + rng.normal();
        }
    }
    const std::size_t n_flip = std::size_t(std::llround(spec.label_noise * double(spec.n)));
    if (n_flip > 0) {
        auto idx = rng.sample_without_replacement(spec.n, n_flip);
        for (std::size_t i : idx) {
            const int shift = 1 + int(rng.uniform_index(spec.classes - 1));
            ds.labels[i] = (ds.labels[i] + shift) % int(spec.classes);
        }
    }
    return ds;
}

void save_dataset(const TabularDataset& dataset, const std::string& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write: " + csv_path);
    for (std::size_t c = 0; c < dataset.schema.size(); ++c) {
        if (c) out << ',';
        out << csv_escape(dataset.schema[c].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
        for (std::size_t f = 0; f < dataset.n_features; ++f) {
            const auto& col = dataset.schema[f];
            if (f) out << ',';
            if (col.kind == ColumnKind::Categorical) {
                out << csv_escape(col.categories.at(std::size_t(dataset.at(r, f))));
            } else {
                out << format_double(dataset.at(r, f));
            }
        }
        out << ',' << csv_escape(dataset.label_names[std::size_t(dataset.labels[r])]) << '\n';
    }

    json side;
    side["name"] = dataset.name;
    side["task"] = dataset.task == Task::Binary ? "binary"
                   : dataset.task == Task::Multiclass ? "multiclass"
                                                      : "binarized-regression";
    side["label_names"] = dataset.label_names;
    side["columns"] = json::array();
    for (const auto& col : dataset.schema) {
        json jc;
        jc["name"] = col.name;
        jc["kind"] = col.kind == ColumnKind::Numeric ? "numeric"
                     : col.kind == ColumnKind::Categorical ? "categorical"
                                                           : "label";
        if (col.kind == ColumnKind::Categorical) jc["categories"] = col.categories;
        side["columns"].push_back(jc);
    }
    std::ofstream sout(csv_path + ".schema.json");
    if (!sout) throw std::runtime_error("cannot write schema sidecar for " + csv_path);
    sout << side.dump(2) << '\n';
}

TabularDataset load_dataset(const std::string& csv_path) {
    std::ifstream sin(csv_path + ".schema.json");
    if (!sin) throw std::runtime_error("missing schema sidecar for " + csv_path);
    json side = json::parse(sin);

    TabularDataset ds;
    ds.name = side.at("name").get<std::string>();
    const std::string task = side.at("task").get<std::string>();
    ds.task = task == "binary" ? Task::Binary
              : task == "multiclass" ? Task::Multiclass
                                     : Task::BinarizedRegression;
    ds.label_names = side.at("label_names").get<std::vector<std::string>>();
    for (const auto& jc : side.at("columns")) {
        ColumnSchema col;
        col.name = jc.at("name").get<std::string>();
        const std::string kind = jc.at("kind").get<std::string>();
        col.kind = kind == "numeric" ? ColumnKind::Numeric
                   : kind == "categorical" ? ColumnKind::Categorical
                                           : ColumnKind::Label;
        if (col.kind == ColumnKind::Categorical) {
            col.categories = jc.at("categories").get<std::vector<std::string>>();
        }
        ds.schema.push_back(std::move(col));
    }
    ds.n_features = ds.schema.size() - 1;

    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open: " + csv_path);
    std::string line;
    std::getline(in, line);  // header; schema sidecar is authoritative
    std::map<std::string, int> label_id;
    for (std::size_t i = 0; i < ds.label_names.size(); ++i) label_id[ds.label_names[i]] = int(i);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != ds.schema.size()) {
            throw std::runtime_error("stored dataset row has wrong cell count: " + csv_path);
        }
        for (std::size_t f = 0; f < ds.n_features; ++f) {
            const auto& col = ds.schema[f];
            if (col.kind == ColumnKind::Categorical) {
                auto it = std::find(col.categories.begin(), col.categories.end(), cells[f]);
                if (it == col.categories.end()) {
                    throw std::runtime_error("unknown category '" + cells[f] + "' in " + csv_path);
                }
                ds.rows.push_back(double(it - col.categories.begin()));
            } else {
                double v;
                if (!parse_double(cells[f], v)) {
                    throw std::runtime_error("bad numeric cell '" + cells[f] + "' in " + csv_path);
                }
                ds.rows.push_back(v);
            }
        }
        auto it = label_id.find(cells.back());
        if (it == label_id.end()) {
            throw std::runtime_error("unknown label '" + cells.back() + "' in " + csv_path);
        }
        ds.labels.push_back(it->second);
    }
    return ds;
}

}  // namespace budget
