#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <set>

#include "gbrff/boosting.hpp"
#include "gbrff/data.hpp"
#include "helpers.hpp"

using namespace gbrff;
namespace fs = std::filesystem;

#ifndef GBRFF_SOURCE_DIR
#define GBRFF_SOURCE_DIR "."
#endif

namespace {

std::string write_file(const std::string& dir, const std::string& name,
                       const std::string& content) {
    fs::create_directories(dir);
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_and_binarize maps raw classes onto {-1, +1}") {
    const std::string dir = testutil::temp_dir("data");
    write_file(dir, "toy.csv",
               "a,label,b\n"
               "1.0,x,2.0\n"
               "3.5,y,4.5\n"
               "0.5,x,1.5\n");
    write_file(dir, "toy.json",
               "{\"name\":\"toy\",\"source_path\":\"toy.csv\",\"label_column\":\"label\","
               "\"negative_classes\":[\"x\"],\"positive_classes\":[\"y\"]}");
    Dataset ds = load_and_binarize(load_spec((fs::path(dir) / "toy.json").string()), dir);
    REQUIRE(ds.n() == 3);
    REQUIRE(ds.dim() == 2);
    CHECK(ds.y[0] == -1.0);
    CHECK(ds.y[1] == 1.0);
    CHECK(ds.x(1, 0) == 3.5);
    CHECK(ds.x(1, 1) == 4.5);
    CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("unknown raw classes raise a spec coverage error") {
    const std::string dir = testutil::temp_dir("data_cov");
    write_file(dir, "bad.csv", "a,label\n1.0,x\n2.0,z\n");
    write_file(dir, "bad.json",
               "{\"name\":\"bad\",\"source_path\":\"bad.csv\",\"label_column\":\"label\","
               "\"negative_classes\":[\"x\"],\"positive_classes\":[\"y\"]}");
    try {
        load_and_binarize(load_spec((fs::path(dir) / "bad.json").string()), dir);
        FAIL("expected spec coverage error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(std::string(e.what()).find("'z'") != std::string::npos);
    }
}

TEST_CASE("parse failures carry line numbers") {
    const std::string dir = testutil::temp_dir("data_parse");
    write_file(dir, "bad.csv", "a,label\n1.0,x\noops,x\n");
    write_file(dir, "bad.json",
               "{\"name\":\"bad\",\"source_path\":\"bad.csv\",\"label_column\":\"label\","
               "\"negative_classes\":[\"x\"],\"positive_classes\":[\"y\"]}");
    try {
        load_and_binarize(load_spec((fs::path(dir) / "bad.json").string()), dir);
        FAIL("expected format error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("overlapping label sets are rejected") {
    const std::string dir = testutil::temp_dir("data_overlap");
    write_file(dir, "bad.json",
               "{\"name\":\"bad\",\"source_path\":\"bad.csv\",\"label_column\":\"label\","
               "\"negative_classes\":[\"x\"],\"positive_classes\":[\"x\"]}");
    CHECK_THROWS_AS(load_spec((fs::path(dir) / "bad.json").string()), std::runtime_error);
}

TEST_CASE("wine loads with the published shape and mean label") {
    const std::string spec_path = std::string(GBRFF_SOURCE_DIR) + "/specs/wine.json";
    if (!fs::exists(spec_path)) SKIP("wine spec not present");
    Dataset wine = load_and_binarize(load_spec(spec_path), GBRFF_SOURCE_DIR);
    REQUIRE(wine.n() == 178);
    REQUIRE(wine.dim() == 13);
    // 59 positives (class 1) of 178
    CHECK(init_h0(wine.y) == Catch::Approx((59.0 - 119.0) / 178.0).epsilon(1e-12));
}

TEST_CASE("standardize centers and scales on the training statistics") {
    Dataset train = testutil::make_blobs(50, 4, 1.0, 3);
    train.x.col(2).setConstant(7.5);  // constant feature
    Dataset other = testutil::make_blobs(10, 4, 1.0, 4);
    const Vector held_out = other.x.row(0).transpose();
    const Vector mean = train.x.colwise().mean();
    Vector stddev(4);
    for (Eigen::Index c = 0; c < 4; ++c)
        stddev[c] = std::sqrt((train.x.col(c).array() - mean[c]).square().mean());

    standardize(train, {&other});

    for (Eigen::Index c = 0; c < 4; ++c) {
        CHECK(std::abs(train.x.col(c).mean()) < 1e-10);
        if (c == 2) {
            CHECK(train.x.col(c).isZero(0.0));
            CHECK(other.x.col(c).isZero(0.0));
        } else {
            CHECK(train.x.col(c).array().square().mean() == Catch::Approx(1.0).margin(1e-10));
            CHECK(other.x(0, c) == Catch::Approx((held_out[c] - mean[c]) / stddev[c]).margin(1e-12));
        }
    }

    // idempotent on already-standardized data
    Dataset again = train;
    standardize(again);
    CHECK((again.x - train.x).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("make_splits follows the floor convention and partitions [0, n)") {
    SplitPlan plan;
    plan.seed = 5;
    plan.train_fraction = 0.3;
    plan.n_repeats = 20;
    auto splits = make_splits(178, plan);
    REQUIRE(splits.size() == 20);
    for (const auto& s : splits) {
        REQUIRE(s.train.size() == 53);
        REQUIRE(s.test.size() == 125);
        std::set<Eigen::Index> seen(s.train.begin(), s.train.end());
        seen.insert(s.test.begin(), s.test.end());
        REQUIRE(seen.size() == 178);
        REQUIRE(*seen.begin() == 0);
        REQUIRE(*seen.rbegin() == 177);
    }
    auto again = make_splits(178, plan);
    for (std::size_t r = 0; r < splits.size(); ++r) REQUIRE(splits[r].train == again[r].train);

    plan.train_fraction = 0.001;
    CHECK_THROWS_AS(make_splits(10, plan), std::invalid_argument);
}

TEST_CASE("make_folds produces near-equal shuffled folds") {
    std::vector<Eigen::Index> ten(10), eleven(11);
    for (Eigen::Index i = 0; i < 11; ++i) {
        if (i < 10) ten[static_cast<std::size_t>(i)] = i * 3;
        eleven[static_cast<std::size_t>(i)] = i;
    }

    auto folds10 = make_folds(ten, 5, 1);
    REQUIRE(folds10.size() == 5);
    for (const auto& f : folds10) {
        REQUIRE(f.val.size() == 2);
        REQUIRE(f.fit.size() == 8);
    }

    auto folds11 = make_folds(eleven, 5, 2);
    std::multiset<std::size_t> sizes;
    std::set<Eigen::Index> covered;
    for (const auto& f : folds11) {
        sizes.insert(f.val.size());
        covered.insert(f.val.begin(), f.val.end());
    }
    REQUIRE(sizes == std::multiset<std::size_t>{3, 2, 2, 2, 2});
    REQUIRE(covered.size() == 11);

    CHECK_THROWS_AS(make_folds(ten, 11, 0), std::invalid_argument);
}
