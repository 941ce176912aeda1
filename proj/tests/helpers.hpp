#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "gbrff/data.hpp"
#include "gbrff/rng.hpp"

namespace testutil {

// Two Gaussian blobs at +-center on every coordinate.
inline gbrff::Dataset make_blobs(Eigen::Index n, Eigen::Index d, double center,
                                 std::uint64_t seed) {
    gbrff::Dataset ds;
    ds.name = "blobs";
    ds.x.resize(n, d);
    ds.y.resize(n);
    gbrff::Rng rng(seed);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double label = i % 2 == 0 ? 1.0 : -1.0;
        ds.y[i] = label;
        for (Eigen::Index j = 0; j < d; ++j) ds.x(i, j) = label * center + rng.normal();
    }
    return ds;
}

// Write a dataset as CSV plus a matching spec file; returns the spec path.
inline std::string write_dataset(const gbrff::Dataset& ds, const std::string& dir,
                                 const std::string& name) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::string csv_path = (fs::path(dir) / (name + ".csv")).string();
    std::ofstream csv(csv_path);
    for (Eigen::Index j = 0; j < ds.dim(); ++j) csv << "f" << (j + 1) << ",";
    csv << "label\n";
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        for (Eigen::Index j = 0; j < ds.dim(); ++j) csv << ds.x(i, j) << ",";
        csv << (ds.y[i] > 0 ? "pos" : "neg") << "\n";
    }
    const std::string spec_path = (fs::path(dir) / (name + ".json")).string();
    std::ofstream spec(spec_path);
    spec << "{\n"
         << "  \"name\": \"" << name << "\",\n"
         << "  \"source_path\": \"" << csv_path << "\",\n"
         << "  \"label_column\": \"label\",\n"
         << "  \"negative_classes\": [\"neg\"],\n"
         << "  \"positive_classes\": [\"pos\"]\n"
         << "}\n";
    return spec_path;
}

inline std::string temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("gbrff_test_" + tag);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace testutil
