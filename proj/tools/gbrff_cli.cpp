// Benchmark and model CLI for the GBRFF / PBRFF kernel-learning library.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gbrff/bench.hpp"
#include "gbrff/model_io.hpp"

namespace fs = std::filesystem;

namespace {

// The six smallest benchmark datasets, used by the --fast profile.
const std::vector<std::string> kSmallDatasets = {"wine",  "sonar", "glass",
                                                 "newthyroid", "heart", "bupa"};

struct CommonOpts {
    std::vector<std::string> specs;
    std::string dataset_dir = ".";
    std::vector<std::string> methods = {"gbrff", "pbrff"};
    int rounds = 200;
    int landmarks = 200;
    int k_features = 100;
    std::uint64_t seed = 0;
    int workers = 1;
    bool fast = false;
    std::string out = "results";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--spec", o.specs, "Dataset spec file(s)")->required();
    cmd->add_option("--dataset-dir", o.dataset_dir, "Base directory for dataset CSV paths");
    cmd->add_option("--method", o.methods, "Methods: gbrff, gbrff_random, pbrff");
    cmd->add_option("--rounds", o.rounds, "Boosting rounds T");
    cmd->add_option("--landmarks", o.landmarks, "PBRFF landmark count n_L");
    cmd->add_option("--k-features", o.k_features, "Random features per kernel (K)");
    cmd->add_option("--seed", o.seed, "Experiment seed");
    cmd->add_option("--workers", o.workers, "Worker thread count");
    cmd->add_flag("--fast", o.fast,
                  "Desk-scale profile: shrunk grids, 5 splits, 6 smallest datasets, "
                  "zeroed timing column");
    cmd->add_option("--out", o.out, "Output directory for result CSVs");
}

std::string spec_name(const std::string& path) {
    return gbrff::load_spec(path).name;
}

gbrff::ExperimentConfig make_config(const CommonOpts& o) {
    gbrff::ExperimentConfig cfg;
    cfg.spec_paths = o.specs;
    if (o.fast) {
        std::vector<std::string> kept;
        for (const auto& p : o.specs) {
            try {
                if (std::find(kSmallDatasets.begin(), kSmallDatasets.end(), spec_name(p)) !=
                    kSmallDatasets.end())
                    kept.push_back(p);
            } catch (const std::exception& e) {
                std::cerr << "warning: " << e.what() << "\n";
            }
        }
        if (!kept.empty()) cfg.spec_paths = kept;
        cfg.grids = gbrff::Grids::fast();
        cfg.plan.n_repeats = 5;
        cfg.zero_timings = true;
    }
    cfg.dataset_dir = o.dataset_dir;
    cfg.methods.clear();
    for (const auto& m : o.methods) cfg.methods.push_back(gbrff::method_from_name(m));
    cfg.k_features = o.k_features;
    cfg.seed = o.seed;
    cfg.output_path = o.out;
    cfg.worker_count = o.workers;
    return cfg;
}

int report(const gbrff::BenchmarkResult& result, const std::string& out_dir) {
    gbrff::emit_results(result, out_dir);
    for (const auto& row : result.summary)
        std::cout << row.dataset << " " << gbrff::method_name(row.method) << " budget "
                  << row.landmark_budget << ": " << 100.0 * row.mean_accuracy << " +- "
                  << 100.0 * row.std_accuracy << "\n";
    for (const auto& [m, rank] : result.average_rank)
        std::cout << "average rank " << gbrff::method_name(m) << ": " << rank << "\n";
    std::cout << "results written to " << out_dir << "\n";
    return result.errors.empty() ? 0 : 1;
}

int run_bench(const CommonOpts& o) {
    gbrff::ExperimentConfig cfg = make_config(o);
    cfg.budgets = {o.rounds};
    return report(gbrff::run_benchmark(cfg), cfg.output_path);
}

int run_sweep(const CommonOpts& o, std::vector<int> budgets) {
    gbrff::ExperimentConfig cfg = make_config(o);
    std::sort(budgets.begin(), budgets.end());
    cfg.budgets = budgets;
    return report(gbrff::landmark_sweep(cfg), cfg.output_path);
}

struct FitOpts {
    CommonOpts common;
    std::string model_out;
    double c = 0.0, v = 1.0, beta = 1.0, C = 1.0;
    bool standardize = false;
};

int run_fit(const FitOpts& o) {
    if (o.common.specs.size() != 1)
        throw std::runtime_error("fit: exactly one --spec is required");
    gbrff::DatasetSpec spec = gbrff::load_spec(o.common.specs[0]);
    gbrff::Dataset train = gbrff::load_and_binarize(spec, o.common.dataset_dir);
    if (o.standardize) {
        gbrff::Scaler scaler = gbrff::standardize(train);
        std::ofstream out(o.model_out + ".scaler");
        gbrff::save_scaler(scaler, out);
    }
    const std::string method = o.common.methods.empty() ? "gbrff" : o.common.methods[0];
    if (method == "pbrff") {
        gbrff::PbrffModel model = gbrff::fit_pbrff(train, o.common.landmarks,
                                                   o.common.k_features, o.beta, o.C,
                                                   o.common.seed);
        gbrff::save_pbrff_file(model, o.model_out);
    } else {
        gbrff::GbrffConfig cfg;
        cfg.t_rounds = o.common.rounds;
        cfg.k_features = o.common.k_features;
        cfg.c = o.c;
        cfg.v = o.v;
        cfg.seed = o.common.seed;
        cfg.landmark_mode = method == "gbrff_random" ? gbrff::LandmarkMode::random
                                                     : gbrff::LandmarkMode::learned;
        gbrff::Ensemble ens = gbrff::fit(train, cfg);
        gbrff::save_ensemble_file(ens, o.model_out);
    }
    std::cout << "model written to " << o.model_out << "\n";
    return 0;
}

struct PredictOpts {
    CommonOpts common;
    std::string model_in;
};

int run_predict(const PredictOpts& o) {
    if (o.common.specs.size() != 1)
        throw std::runtime_error("predict: exactly one --spec is required");
    gbrff::DatasetSpec spec = gbrff::load_spec(o.common.specs[0]);
    gbrff::Dataset ds = gbrff::load_and_binarize(spec, o.common.dataset_dir);
    if (fs::exists(o.model_in + ".scaler")) {
        std::ifstream in(o.model_in + ".scaler");
        ds.x = gbrff::load_scaler(in).apply(ds.x);
    }

    std::vector<double> preds(static_cast<std::size_t>(ds.n()));
    std::ifstream probe(o.model_in);
    if (!probe) throw std::runtime_error("cannot open model file: " + o.model_in);
    std::string tag;
    probe >> tag;
    if (tag == "pbrff-model-v1") {
        gbrff::PbrffModel model = gbrff::load_pbrff_file(o.model_in);
        for (Eigen::Index i = 0; i < ds.n(); ++i)
            preds[static_cast<std::size_t>(i)] =
                gbrff::predict_pbrff(model, ds.x.row(i).transpose());
    } else {
        gbrff::Ensemble ens = gbrff::load_ensemble_file(o.model_in);
        for (Eigen::Index i = 0; i < ds.n(); ++i)
            preds[static_cast<std::size_t>(i)] = gbrff::predict(ens, ds.x.row(i).transpose());
    }

    Eigen::Index correct = 0;
    std::ofstream out(o.common.out);
    if (!out) throw std::runtime_error("I/O failure: cannot write " + o.common.out);
    out << "index,prediction,label\n";
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const double p = preds[static_cast<std::size_t>(i)];
        if (p == ds.y[i]) ++correct;
        out << i << ',' << static_cast<int>(p) << ',' << static_cast<int>(ds.y[i]) << '\n';
    }
    std::cout << "accuracy " << static_cast<double>(correct) / static_cast<double>(ds.n())
              << " over " << ds.n() << " points; predictions written to " << o.common.out
              << "\n";
    return 0;
}

bool check_line(const std::string& name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    return ok;
}

// Numeric self-checks: analytic gradient vs finite differences, exact
// line search vs brute force, RFF approximation vs the exact kernel.
int run_check(std::uint64_t seed) {
    using namespace gbrff;
    bool all_ok = true;
    Rng rng(seed);

    {
        bool ok = true;
        for (int trial = 0; trial < 20 && ok; ++trial) {
            const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.index(30));
            const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(8));
            const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.index(15));
            Matrix points(n, d);
            Vector resid(n), landmark(d);
            for (Eigen::Index i = 0; i < n; ++i) {
                resid[i] = rng.normal();
                for (Eigen::Index j = 0; j < d; ++j) points(i, j) = rng.normal();
            }
            for (Eigen::Index j = 0; j < d; ++j) landmark[j] = rng.normal();
            RffSet rff = sample_rff(k, d, rng.index(1u << 30));
            Vector grad = landmark_gradient(rff, resid, points, landmark);
            const double h = 1e-5;
            for (Eigen::Index j = 0; j < d; ++j) {
                Vector lp = landmark, lm = landmark;
                lp[j] += h;
                lm[j] -= h;
                const double fd = (landmark_loss(rff, resid, points, lp) -
                                   landmark_loss(rff, resid, points, lm)) / (2.0 * h);
                const double denom = std::max(1.0, std::abs(fd));
                if (std::abs(grad[j] - fd) / denom > 1e-5) ok = false;
            }
        }
        all_ok &= check_line("gradient matches central finite differences", ok);
    }
    {
        bool ok = true;
        for (int trial = 0; trial < 50 && ok; ++trial) {
            const Eigen::Index n = 30;
            Vector r(n), hvec(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                r[i] = rng.normal();
                hvec[i] = rng.normal();
            }
            const double alpha = optimal_step(r, hvec);
            const double base = (r - alpha * hvec).squaredNorm();
            for (double eps : {1e-3, -1e-3})
                if ((r - (alpha + eps) * hvec).squaredNorm() < base - 1e-12) ok = false;
        }
        all_ok &= check_line("line-search step is a 1-D minimizer", ok);
    }
    {
        const Eigen::Index k = 10000, d = 3;
        RffSet rff = sample_rff(k, d, derive_seed(seed, "check-rff"));
        SimplexWeights uniform = SimplexWeights::uniform(k);
        Vector zero = Vector::Zero(d);
        double max_err = 0.0;
        Rng shifts(derive_seed(seed, "check-shifts"));
        for (int trial = 0; trial < 20; ++trial) {
            Vector delta(d);
            for (Eigen::Index j = 0; j < d; ++j) delta[j] = shifts.normal();
            if (delta.norm() > 3.0) delta *= 3.0 * shifts.uniform() / delta.norm();
            max_err = std::max(max_err, std::abs(kernel_value(rff, uniform, delta, zero) -
                                                 gaussian_kernel_exact(delta)));
        }
        all_ok &= check_line("RFF approximation within 0.05 of the exact Gaussian kernel", max_err <= 0.05);
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gradient-boosted random Fourier feature kernel learning"};
    app.require_subcommand(1);

    CommonOpts bench_opts, sweep_opts;
    FitOpts fit_opts;
    PredictOpts predict_opts;
    std::vector<int> budgets = {1, 2, 3, 5, 10, 15, 25, 50, 100, 200};
    std::uint64_t check_seed = 0;

    auto* bench = app.add_subcommand("bench", "Mean test accuracy protocol over random splits");
    add_common(bench, bench_opts);

    auto* sweep = app.add_subcommand("sweep", "Accuracy as a function of the landmark budget");
    add_common(sweep, sweep_opts);
    sweep->add_option("--budgets", budgets, "Landmark/round budgets");

    auto* fitc = app.add_subcommand("fit", "Fit a single model on a full dataset");
    add_common(fitc, fit_opts.common);
    fitc->add_option("--model-out", fit_opts.model_out, "Model output path")->required();
    fitc->add_option("--c", fit_opts.c, "GBRFF pseudo-posterior temperature");
    fitc->add_option("--v", fit_opts.v, "GBRFF learning rate");
    fitc->add_option("--beta", fit_opts.beta, "PBRFF posterior temperature");
    fitc->add_option("--C", fit_opts.C, "PBRFF linear regularization");
    fitc->add_flag("--standardize", fit_opts.standardize,
                   "Standardize features; stores the scaler next to the model");

    auto* predict = app.add_subcommand("predict", "Predict a dataset with a saved model");
    add_common(predict, predict_opts.common);
    predict->add_option("--model-in", predict_opts.model_in, "Model input path")->required();

    auto* check = app.add_subcommand("check", "Run numeric self-checks");
    check->add_option("--seed", check_seed, "Check seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench->parsed()) return run_bench(bench_opts);
        if (sweep->parsed()) return run_sweep(sweep_opts, budgets);
        if (fitc->parsed()) return run_fit(fit_opts);
        if (predict->parsed()) return run_predict(predict_opts);
        if (check->parsed()) return run_check(check_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
