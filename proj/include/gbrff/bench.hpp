#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "gbrff/boosting.hpp"
#include "gbrff/data.hpp"
#include "gbrff/pbrff.hpp"

namespace gbrff {

enum class Method { gbrff, gbrff_random, pbrff };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::gbrff: return "gbrff";
        case Method::gbrff_random: return "gbrff_random";
        case Method::pbrff: return "pbrff";
    }
    return "?";
}

inline Method method_from_name(const std::string& s) {
    if (s == "gbrff") return Method::gbrff;
    if (s == "gbrff_random") return Method::gbrff_random;
    if (s == "pbrff") return Method::pbrff;
    throw std::invalid_argument("unknown method: " + s);
}

// Hyperparameter grids. Iteration order is documented and fixed: for the
// boosting methods c is the outer loop and v the inner one; for pbrff
// beta is the outer loop and C the inner one. Grid-search ties go to the
// first point in this order.
struct Grids {
    std::vector<double> c;     // gbrff temperature
    std::vector<double> v;     // gbrff learning rate
    std::vector<double> beta;  // pbrff temperature
    std::vector<double> C;     // pbrff linear regularization

    static Grids full() {
        Grids g;
        g.c.push_back(0.0);
        for (int e = 0; e <= 10; ++e) g.c.push_back(std::pow(2.0, e));
        g.v = {1.0, 0.5, 0.1, 0.05, 0.01};
        for (int e = -3; e <= 3; ++e) g.beta.push_back(std::pow(10.0, e));
        for (int e = -3; e <= 3; ++e) g.C.push_back(std::pow(10.0, e));
        return g;
    }

    // CI-friendly profile
    static Grids fast() {
        Grids g;
        g.c = {0.0, 32.0};
        g.v = {1.0, 0.1};
        g.beta = {1e-2, 1.0};
        g.C = {1e-1, 10.0};
        return g;
    }
};

struct HyperParams {
    double c = 0.0;
    double v = 1.0;
    double beta = 1.0;
    double C = 1.0;

    std::string describe(Method m) const {
        char buf[80];
        if (m == Method::pbrff)
            std::snprintf(buf, sizeof(buf), "beta=%g;C=%g", beta, C);
        else
            std::snprintf(buf, sizeof(buf), "c=%g;v=%g", c, v);
        return buf;
    }
};

struct ExperimentConfig {
    std::vector<std::string> spec_paths;
    std::string dataset_dir = ".";
    std::vector<Method> methods = {Method::gbrff, Method::pbrff};
    Grids grids = Grids::full();
    std::vector<int> budgets = {200};  // t_rounds for boosting, n_L for pbrff
    int k_features = 100;
    SplitPlan plan;
    std::uint64_t seed = 0;
    std::string output_path = "results";
    int worker_count = 1;
    bool zero_timings = false;  // deterministic result files
};

struct RunRecord {
    std::string dataset;
    Method method = Method::gbrff;
    int split_index = 0;
    std::string chosen_hyperparameters;
    double test_accuracy = 0.0;
    double train_time_seconds = 0.0;
    int landmark_budget = 0;
};

struct SummaryRow {
    std::string dataset;
    Method method = Method::gbrff;
    int landmark_budget = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double rank = 0.0;
};

struct SweepRow {
    int landmark_budget = 0;
    Method method = Method::gbrff;
    double mean_accuracy = 0.0;
    int win_count = 0;
};

struct BenchmarkResult {
    std::vector<RunRecord> records;
    std::vector<SummaryRow> summary;
    std::vector<SweepRow> sweep;
    std::map<Method, double> average_rank;
    std::vector<std::string> errors;  // isolated per-dataset failures
};

namespace detail {

inline double accuracy_gbrff(const Ensemble& ens, const Dataset& ds) {
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        if (predict(ens, ds.x.row(i).transpose()) == ds.y[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(ds.n());
}

inline double accuracy_pbrff(const PbrffModel& model, const Dataset& ds) {
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < ds.n(); ++i)
        if (predict_pbrff(model, ds.x.row(i).transpose()) == ds.y[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(ds.n());
}

// Fit one model on `train` and score it on `test`.
inline double fit_and_score(Method m, const Dataset& train, const Dataset& test,
                            const HyperParams& hp, int budget, int k_features,
                            std::uint64_t seed) {
    if (m == Method::pbrff) {
        PbrffModel model = fit_pbrff(train, budget, k_features, hp.beta, hp.C, seed);
        return accuracy_pbrff(model, test);
    }
    GbrffConfig cfg;
    cfg.t_rounds = budget;
    cfg.k_features = k_features;
    cfg.c = hp.c;
    cfg.v = hp.v;
    cfg.landmark_mode = m == Method::gbrff_random ? LandmarkMode::random : LandmarkMode::learned;
    cfg.seed = seed;
    Ensemble ens = fit(train, cfg);
    return accuracy_gbrff(ens, test);
}

inline std::vector<HyperParams> grid_points(Method m, const Grids& grids) {
    std::vector<HyperParams> points;
    if (m == Method::pbrff) {
        for (double beta : grids.beta)
            for (double C : grids.C) {
                HyperParams hp;
                hp.beta = beta;
                hp.C = C;
                points.push_back(hp);
            }
    } else {
        for (double c : grids.c)
            for (double v : grids.v) {
                HyperParams hp;
                hp.c = c;
                hp.v = v;
                points.push_back(hp);
            }
    }
    return points;
}

inline std::string fixed6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

template <typename Fn>
inline void run_parallel(std::size_t task_count, int workers, Fn fn) {
    if (workers <= 1 || task_count <= 1) {
        for (std::size_t i = 0; i < task_count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= task_count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(workers, static_cast<int>(task_count));
    pool.reserve(static_cast<std::size_t>(n));
    for (int w = 0; w < n; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
}

}  // namespace detail

// 5-fold (or plan-specified) cross-validated grid search on the training
// set. Returns the point with the highest mean validation accuracy,
// first-in-order on ties.
inline HyperParams grid_search_cv(const Dataset& train, Method method, const Grids& grids,
                                  const SplitPlan& plan, int budget, int k_features,
                                  std::uint64_t seed) {
    std::vector<Eigen::Index> indices(static_cast<std::size_t>(train.n()));
    for (Eigen::Index i = 0; i < train.n(); ++i) indices[static_cast<std::size_t>(i)] = i;
    auto folds = make_folds(indices, plan.fold_count, derive_seed(seed, "folds"));

    struct Fold {
        Dataset fit_set;
        Dataset val_set;
        std::uint64_t seed;
    };
    std::vector<Fold> prepared;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        Fold fold;
        fold.fit_set = subset(train, folds[f].fit);
        fold.val_set = subset(train, folds[f].val);
        standardize(fold.fit_set, {&fold.val_set});
        fold.seed = derive_seed(derive_seed(seed, "cv"), static_cast<std::uint64_t>(f));
        prepared.push_back(std::move(fold));
    }

    auto points = detail::grid_points(method, grids);
    if (points.empty()) throw std::invalid_argument("grid_search_cv: empty grid");
    double best_score = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t p = 0; p < points.size(); ++p) {
        double mean = 0.0;
        for (const auto& fold : prepared)
            mean += detail::fit_and_score(method, fold.fit_set, fold.val_set, points[p],
                                          budget, k_features, fold.seed);
        mean /= static_cast<double>(prepared.size());
        if (mean > best_score) {
            best_score = mean;
            best_idx = p;
        }
    }
    return points[best_idx];
}

namespace detail {

struct Task {
    std::size_t dataset_idx;
    int split_idx;
    Method method;
    int budget;
};

// Aggregate one record stream into per-(dataset, method, budget) summary
// rows with average ranks per budget, plus sweep rows.
inline void aggregate(BenchmarkResult& result, const std::vector<std::string>& dataset_names) {
    auto& records = result.records;
    std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
        return std::tie(a.landmark_budget, a.dataset, a.method, a.split_index) <
               std::tie(b.landmark_budget, b.dataset, b.method, b.split_index);
    });

    std::map<std::tuple<int, std::string, Method>, std::vector<double>> groups;
    for (const auto& r : records)
        groups[{r.landmark_budget, r.dataset, r.method}].push_back(r.test_accuracy);

    for (const auto& [key, accs] : groups) {
        SummaryRow row;
        row.landmark_budget = std::get<0>(key);
        row.dataset = std::get<1>(key);
        row.method = std::get<2>(key);
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= static_cast<double>(accs.size());
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        var /= static_cast<double>(accs.size());
        row.mean_accuracy = mean;
        row.std_accuracy = std::sqrt(var);
        result.summary.push_back(row);
    }

    // per-dataset ranks within each budget (ties share the average rank)
    std::map<std::pair<int, std::string>, std::vector<SummaryRow*>> by_dataset;
    for (auto& row : result.summary)
        by_dataset[{row.landmark_budget, row.dataset}].push_back(&row);
    std::map<std::pair<int, Method>, std::pair<double, int>> rank_acc;
    for (auto& [key, rows] : by_dataset) {
        std::vector<SummaryRow*> sorted = rows;
        std::sort(sorted.begin(), sorted.end(), [](const SummaryRow* a, const SummaryRow* b) {
            return a->mean_accuracy > b->mean_accuracy;
        });
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j + 1 < sorted.size() &&
                   sorted[j + 1]->mean_accuracy == sorted[i]->mean_accuracy)
                ++j;
            const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t t = i; t <= j; ++t) sorted[t]->rank = shared;
            i = j + 1;
        }
        for (auto* row : rows) {
            auto& acc = rank_acc[{row->landmark_budget, row->method}];
            acc.first += row->rank;
            acc.second += 1;
        }
    }
    // average rank across datasets, pooled over budgets
    std::map<Method, std::pair<double, int>> pooled;
    for (const auto& [key, acc] : rank_acc) {
        pooled[key.second].first += acc.first;
        pooled[key.second].second += acc.second;
    }
    for (const auto& [m, acc] : pooled)
        result.average_rank[m] = acc.first / static_cast<double>(acc.second);

    // per-budget aggregates: mean accuracy across datasets and dataset win counts
    std::map<int, std::vector<const SummaryRow*>> by_budget;
    for (const auto& row : result.summary) by_budget[row.landmark_budget].push_back(&row);
    for (const auto& [budget, rows] : by_budget) {
        std::map<Method, std::pair<double, int>> means;
        std::map<Method, int> wins;
        for (const auto* row : rows) {
            means[row->method].first += row->mean_accuracy;
            means[row->method].second += 1;
            wins[row->method] += 0;
        }
        for (const std::string& ds : dataset_names) {
            double best = -1.0;
            for (const auto* row : rows)
                if (row->dataset == ds) best = std::max(best, row->mean_accuracy);
            if (best < 0.0) continue;
            for (const auto* row : rows)
                if (row->dataset == ds && row->mean_accuracy == best) wins[row->method] += 1;
        }
        for (const auto& [m, acc] : means) {
            SweepRow s;
            s.landmark_budget = budget;
            s.method = m;
            s.mean_accuracy = acc.first / static_cast<double>(acc.second);
            s.win_count = wins[m];
            result.sweep.push_back(s);
        }
    }
    std::sort(result.sweep.begin(), result.sweep.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.landmark_budget, a.method) < std::tie(b.landmark_budget, b.method);
    });
}

}  // namespace detail

// Full benchmark protocol: for every dataset, split, method and budget,
// standardize on the training split, grid-search by cross-validation,
// refit on the full training split with the chosen point and score the
// test split. Per-dataset failures are isolated and reported.
inline BenchmarkResult run_benchmark(const ExperimentConfig& cfg) {
    BenchmarkResult result;

    std::vector<Dataset> datasets;
    std::vector<std::string> names;
    for (const auto& spec_path : cfg.spec_paths) {
        try {
            DatasetSpec spec = load_spec(spec_path);
            Dataset ds = load_and_binarize(spec, cfg.dataset_dir);
            names.push_back(ds.name);
            datasets.push_back(std::move(ds));
        } catch (const std::exception& e) {
            result.errors.push_back(std::string("dataset skipped: ") + e.what());
            std::cerr << "warning: " << e.what() << "\n";
        }
    }

    std::vector<detail::Task> tasks;
    std::vector<std::vector<IndexSplit>> splits(datasets.size());
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        SplitPlan plan = cfg.plan;
        plan.seed = derive_seed(derive_seed(cfg.seed, "splits"), names[d]);
        splits[d] = make_splits(datasets[d].n(), plan);
        for (int s = 0; s < cfg.plan.n_repeats; ++s)
            for (Method m : cfg.methods)
                for (int budget : cfg.budgets) tasks.push_back({d, s, m, budget});
    }

    std::vector<RunRecord> records(tasks.size());
    std::vector<std::string> task_errors(tasks.size());
    detail::run_parallel(tasks.size(), cfg.worker_count, [&](std::size_t i) {
        const auto& task = tasks[i];
        try {
            const Dataset& full = datasets[task.dataset_idx];
            const IndexSplit& split = splits[task.dataset_idx][static_cast<std::size_t>(task.split_idx)];
            Dataset train = subset(full, split.train);
            Dataset test = subset(full, split.test);
            standardize(train, {&test});

            const std::uint64_t task_seed = derive_seed(
                derive_seed(derive_seed(derive_seed(cfg.seed, names[task.dataset_idx]),
                                        static_cast<std::uint64_t>(task.split_idx)),
                            method_name(task.method)),
                static_cast<std::uint64_t>(task.budget));

            const auto start = std::chrono::steady_clock::now();
            // grid search sees the raw (unstandardized) train split and
            // re-standardizes inside each fold
            Dataset raw_train = subset(full, split.train);
            HyperParams chosen = grid_search_cv(raw_train, task.method, cfg.grids, cfg.plan,
                                                task.budget, cfg.k_features,
                                                derive_seed(task_seed, "grid"));
            const double acc = detail::fit_and_score(task.method, train, test, chosen,
                                                     task.budget, cfg.k_features,
                                                     derive_seed(task_seed, "final"));
            const auto stop = std::chrono::steady_clock::now();

            RunRecord rec;
            rec.dataset = names[task.dataset_idx];
            rec.method = task.method;
            rec.split_index = task.split_idx;
            rec.chosen_hyperparameters = chosen.describe(task.method);
            rec.test_accuracy = acc;
            rec.train_time_seconds =
                cfg.zero_timings ? 0.0
                                 : std::chrono::duration<double>(stop - start).count();
            rec.landmark_budget = task.budget;
            records[i] = std::move(rec);
        } catch (const std::exception& e) {
            task_errors[i] = e.what();
        }
    });

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!task_errors[i].empty()) {
            result.errors.push_back("task failed (" + names[tasks[i].dataset_idx] + ", split " +
                                    std::to_string(tasks[i].split_idx) + "): " + task_errors[i]);
            std::cerr << "warning: " << result.errors.back() << "\n";
        } else {
            result.records.push_back(std::move(records[i]));
        }
    }

    detail::aggregate(result, names);
    return result;
}

// Landmark-count sweep: same protocol as run_benchmark with an ascending
// budget list shared by all methods.
inline BenchmarkResult landmark_sweep(const ExperimentConfig& cfg) {
    if (!std::is_sorted(cfg.budgets.begin(), cfg.budgets.end()))
        throw std::invalid_argument("landmark_sweep: budgets must be sorted ascending");
    return run_benchmark(cfg);
}

// Write per-run, summary and sweep CSVs with a fixed column order and
// 6-decimal accuracy formatting. Re-emitting identical records yields
// identical bytes.
inline void emit_results(const BenchmarkResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);

    auto open = [&](const std::string& name) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
        if (!out)
            throw std::runtime_error("I/O failure: cannot write " +
                                     (fs::path(out_dir) / name).string());
        return out;
    };

    {
        auto out = open("runs.csv");
        out << "dataset,method,split_index,chosen_hyperparameters,test_accuracy,"
               "train_time_seconds,landmark_budget\n";
        for (const auto& r : result.records)
            out << r.dataset << ',' << method_name(r.method) << ',' << r.split_index << ','
                << r.chosen_hyperparameters << ',' << detail::fixed6(r.test_accuracy) << ','
                << detail::fixed6(r.train_time_seconds) << ',' << r.landmark_budget << '\n';
        if (!out) throw std::runtime_error("I/O failure writing runs.csv in " + out_dir);
    }
    {
        auto out = open("summary.csv");
        out << "dataset,method,landmark_budget,mean_accuracy,std_accuracy,rank\n";
        for (const auto& row : result.summary)
            out << row.dataset << ',' << method_name(row.method) << ',' << row.landmark_budget
                << ',' << detail::fixed6(row.mean_accuracy) << ','
                << detail::fixed6(row.std_accuracy) << ',' << detail::fixed6(row.rank) << '\n';
        for (const auto& [m, rank] : result.average_rank)
            out << "average_rank," << method_name(m) << ",,,," << detail::fixed6(rank) << '\n';
        if (!out) throw std::runtime_error("I/O failure writing summary.csv in " + out_dir);
    }
    {
        auto out = open("sweep.csv");
        out << "landmark_budget,method,mean_accuracy,win_count\n";
        for (const auto& row : result.sweep)
            out << row.landmark_budget << ',' << method_name(row.method) << ','
                << detail::fixed6(row.mean_accuracy) << ',' << row.win_count << '\n';
        if (!out) throw std::runtime_error("I/O failure writing sweep.csv in " + out_dir);
    }
}

}  // namespace gbrff
