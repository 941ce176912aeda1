#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbrff/rff.hpp"
#include "gbrff/rng.hpp"

namespace gbrff {

struct Dataset {
    Matrix x;           // n x d
    Vector y;           // entries in {-1, +1}
    std::string name;
    std::vector<std::string> feature_names;

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index dim() const { return x.cols(); }
};

// Binarization recipe: which raw class values map to -1 and which to +1.
// The two sets must be disjoint and jointly cover every class present.
struct DatasetSpec {
    std::string name;
    std::string source_path;
    std::string label_column;
    std::set<std::string> negative_classes;
    std::set<std::string> positive_classes;
};

struct SplitPlan {
    std::uint64_t seed = 0;
    double train_fraction = 0.3;
    int n_repeats = 20;
    int fold_count = 5;
};

struct IndexSplit {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

struct FoldSplit {
    std::vector<Eigen::Index> fit;
    std::vector<Eigen::Index> val;
};

inline DatasetSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("spec parse failure in " + path + ": " + e.what());
    }
    DatasetSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.source_path = j.at("source_path").get<std::string>();
    spec.label_column = j.at("label_column").get<std::string>();
    for (const auto& v : j.at("negative_classes"))
        spec.negative_classes.insert(v.get<std::string>());
    for (const auto& v : j.at("positive_classes"))
        spec.positive_classes.insert(v.get<std::string>());
    for (const auto& c : spec.negative_classes)
        if (spec.positive_classes.count(c))
            throw std::runtime_error("spec " + spec.name + ": class '" + c +
                                     "' appears in both label sets");
    return spec;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Load the CSV named by the spec (resolved against `base_dir` when
// relative) and map raw class values onto {-1, +1} labels.
inline Dataset load_and_binarize(const DatasetSpec& spec,
                                 const std::string& base_dir = ".") {
    namespace fs = std::filesystem;
    fs::path path(spec.source_path);
    if (path.is_relative()) path = fs::path(base_dir) / path;

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("format error in " + path.string() + " line 1: empty file");
    std::vector<std::string> header = detail::split_csv_line(detail::trim(line));

    Eigen::Index label_col = -1;
    std::vector<std::string> feature_names;
    std::vector<Eigen::Index> feature_cols;
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(header.size()); ++c) {
        if (detail::trim(header[c]) == spec.label_column) {
            label_col = c;
        } else {
            feature_cols.push_back(c);
            feature_names.push_back(detail::trim(header[c]));
        }
    }
    if (label_col < 0)
        throw std::runtime_error("format error in " + path.string() +
                                 " line 1: label column '" + spec.label_column + "' not found");

    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        auto fields = detail::split_csv_line(trimmed);
        if (fields.size() != header.size())
            throw std::runtime_error("format error in " + path.string() + " line " +
                                     std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        std::string raw_class = detail::trim(fields[label_col]);
        double label;
        if (spec.negative_classes.count(raw_class)) {
            label = -1.0;
        } else if (spec.positive_classes.count(raw_class)) {
            label = +1.0;
        } else {
            throw std::runtime_error("spec coverage error in " + path.string() + " line " +
                                     std::to_string(line_no) + ": class '" + raw_class +
                                     "' not in either label set of spec " + spec.name);
        }
        std::vector<double> row;
        row.reserve(feature_cols.size());
        for (Eigen::Index c : feature_cols) {
            const std::string cell = detail::trim(fields[c]);
            std::size_t consumed = 0;
            double v;
            try {
                v = std::stod(cell, &consumed);
            } catch (const std::exception&) {
                throw std::runtime_error("format error in " + path.string() + " line " +
                                         std::to_string(line_no) + ": non-numeric value '" +
                                         cell + "'");
            }
            if (consumed != cell.size())
                throw std::runtime_error("format error in " + path.string() + " line " +
                                         std::to_string(line_no) + ": non-numeric value '" +
                                         cell + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
        labels.push_back(label);
    }
    if (rows.empty())
        throw std::runtime_error("format error in " + path.string() + ": no data rows");

    Dataset ds;
    ds.name = spec.name;
    ds.feature_names = std::move(feature_names);
    ds.x.resize(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(feature_cols.size()));
    ds.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
        for (Eigen::Index c = 0; c < ds.x.cols(); ++c) ds.x(i, c) = rows[i][c];
        ds.y[i] = labels[i];
    }
    return ds;
}

// Per-feature affine transform fitted on one dataset (mean 0, population
// variance 1) and applied to others. Constant features map to 0.
struct Scaler {
    Vector mean;
    Vector scale;               // population std; 1.0 for constant features
    std::vector<bool> constant; // constant columns are mapped to 0

    static Scaler fit(const Matrix& x) {
        Scaler s;
        s.mean = x.colwise().mean();
        Matrix centered = x.rowwise() - s.mean.transpose();
        Vector var = centered.array().square().colwise().mean();
        s.scale.resize(var.size());
        s.constant.assign(static_cast<std::size_t>(var.size()), false);
        for (Eigen::Index c = 0; c < var.size(); ++c) {
            s.scale[c] = var[c] > 0.0 ? std::sqrt(var[c]) : 1.0;
            if (!(var[c] > 0.0)) s.constant[static_cast<std::size_t>(c)] = true;
        }
        return s;
    }

    Matrix apply(const Matrix& x) const {
        Matrix out = (x.rowwise() - mean.transpose()).array().rowwise() /
                     scale.transpose().array();
        for (Eigen::Index c = 0; c < out.cols(); ++c)
            if (constant[static_cast<std::size_t>(c)]) out.col(c).setZero();
        return out;
    }

    Vector apply(const Vector& x) const {
        Vector out = (x - mean).array() / scale.array();
        for (Eigen::Index c = 0; c < out.size(); ++c)
            if (constant[static_cast<std::size_t>(c)]) out[c] = 0.0;
        return out;
    }
};

// Fit statistics on `train` and transform train plus every dataset in
// `others` in place.
inline Scaler standardize(Dataset& train, std::vector<Dataset*> others = {}) {
    if (train.n() < 1) throw std::invalid_argument("standardize: empty training set");
    Scaler s = Scaler::fit(train.x);
    train.x = s.apply(train.x);
    for (Dataset* d : others)
        if (d) d->x = s.apply(d->x);
    return s;
}

// n_repeats random train/test partitions; train size floor(fraction * n).
inline std::vector<IndexSplit> make_splits(Eigen::Index n, const SplitPlan& plan) {
    if (n < 2) throw std::invalid_argument("make_splits: need n >= 2");
    if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0))
        throw std::invalid_argument("make_splits: train_fraction must be in (0, 1)");
    if (plan.n_repeats < 1) throw std::invalid_argument("make_splits: n_repeats < 1");
    const auto train_size =
        static_cast<Eigen::Index>(std::floor(plan.train_fraction * static_cast<double>(n)));
    if (train_size < 1)
        throw std::invalid_argument("make_splits: train split would be empty");

    std::vector<IndexSplit> splits;
    splits.reserve(static_cast<std::size_t>(plan.n_repeats));
    for (int r = 0; r < plan.n_repeats; ++r) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        Rng rng(derive_seed(plan.seed, static_cast<std::uint64_t>(r)));
        rng.shuffle(idx);
        IndexSplit s;
        s.train.assign(idx.begin(), idx.begin() + train_size);
        s.test.assign(idx.begin() + train_size, idx.end());
        splits.push_back(std::move(s));
    }
    return splits;
}

// Shuffled contiguous folds of near-equal size (sizes differ by at most
// one, larger folds first).
inline std::vector<FoldSplit> make_folds(const std::vector<Eigen::Index>& train_indices,
                                         int fold_count, std::uint64_t seed) {
    if (fold_count < 2) throw std::invalid_argument("make_folds: fold_count < 2");
    if (static_cast<std::size_t>(fold_count) > train_indices.size())
        throw std::invalid_argument("make_folds: fold_count exceeds index count");

    std::vector<Eigen::Index> shuffled = train_indices;
    Rng rng(seed);
    rng.shuffle(shuffled);

    const std::size_t base = shuffled.size() / static_cast<std::size_t>(fold_count);
    const std::size_t rem = shuffled.size() % static_cast<std::size_t>(fold_count);
    std::vector<FoldSplit> folds;
    folds.reserve(static_cast<std::size_t>(fold_count));
    std::size_t pos = 0;
    for (int f = 0; f < fold_count; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < rem ? 1 : 0);
        FoldSplit fold;
        fold.val.assign(shuffled.begin() + pos, shuffled.begin() + pos + size);
        fold.fit.assign(shuffled.begin(), shuffled.begin() + pos);
        fold.fit.insert(fold.fit.end(), shuffled.begin() + pos + size, shuffled.end());
        folds.push_back(std::move(fold));
        pos += size;
    }
    return folds;
}

inline Dataset subset(const Dataset& ds, const std::vector<Eigen::Index>& indices) {
    Dataset out;
    out.name = ds.name;
    out.feature_names = ds.feature_names;
    out.x.resize(static_cast<Eigen::Index>(indices.size()), ds.dim());
    out.y.resize(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.x.row(static_cast<Eigen::Index>(i)) = ds.x.row(indices[i]);
        out.y[static_cast<Eigen::Index>(i)] = ds.y[indices[i]];
    }
    return out;
}

}  // namespace gbrff
