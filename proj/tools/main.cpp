#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssd/data.hpp"
#include "ssd/error.hpp"
#include "ssd/harness.hpp"
#include "ssd/reference.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double to_double(const std::string& s, const char* what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = std::string::npos;
    }
    if (used != s.size()) throw ssd::ConfigError(std::string("bad ") + what + " value '" + s + "'");
    return v;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& item : split(text, ',')) {
        const double v = to_double(item, "--counts");
        if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw ssd::ConfigError("--counts entries must be positive integers");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::vector<std::pair<double, double>> parse_ranges(const std::string& text) {
    std::vector<std::pair<double, double>> out;
    for (const auto& item : split(text, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() == 1) {
            const double v = to_double(parts[0], "--alpha-ranges");
            out.emplace_back(v, v);
        } else if (parts.size() == 2) {
            out.emplace_back(to_double(parts[0], "--alpha-ranges"), to_double(parts[1], "--alpha-ranges"));
        } else {
            throw ssd::ConfigError("--alpha-ranges entries look like lo:hi");
        }
    }
    return out;
}

const char* kind_name(ssd::ExitCode code) {
    switch (code) {
        case ssd::ExitCode::config:
            return "config";
        case ssd::ExitCode::numeric:
            return "numeric";
        case ssd::ExitCode::non_convergence:
            return "non_convergence";
        default:
            return "ok";
    }
}

int fail(ssd::ExitCode code, const std::string& message) {
    std::cerr << json{{"error", kind_name(code)}, {"message", message}}.dump() << '\n';
    return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic steepest descent experiments for linear multi-class classifiers"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
    std::string gen_kind, gen_out, counts_text, ranges_text;
    ssd::GaussianSpec gspec;
    std::size_t max_retries = 20;
    std::uint64_t gen_seed = 0;
    gen->add_option("kind", gen_kind, "gaussian or skewed")->required()->check(CLI::IsMember({"gaussian", "skewed"}));
    gen->add_option("--out", gen_out, "Output dataset path")->required();
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--k", gspec.k, "Classes (gaussian)");
    gen->add_option("--per-class", gspec.per_class, "Samples per class (gaussian)");
    gen->add_option("--d", gspec.d, "Dimension (gaussian)");
    gen->add_option("--sigma", gspec.sigma, "Noise standard deviation (gaussian)");
    gen->add_option("--max-retries", max_retries, "Separability retries (gaussian)");
    gen->add_option("--counts", counts_text, "Per-class counts, e.g. 6,3,3,2,1 (skewed)");
    gen->add_option("--alpha-ranges", ranges_text, "Per-class scale ranges lo:hi,... (skewed)");

    // margin
    auto* margin = app.add_subcommand("margin", "Solve for the max-margin direction");
    std::string margin_dataset, margin_norm, margin_out;
    double margin_tol = 1e-4;
    std::size_t margin_iters = 200000;
    margin->add_option("--dataset", margin_dataset, "Dataset path")->required();
    margin->add_option("--norm", margin_norm, "Geometry, e.g. ew:2, ew:inf, sch:inf")->required();
    margin->add_option("--tol", margin_tol, "Duality-gap tolerance");
    margin->add_option("--max-iters", margin_iters, "Iteration budget per temperature stage");
    margin->add_option("--out", margin_out, "Where to write W*");

    // train
    auto* train = app.add_subcommand("train", "Run one configuration and write its metrics CSV");
    std::string train_config, train_out;
    std::optional<std::uint64_t> train_seed;
    train->add_option("--config", train_config, "JSON config")->required();
    train->add_option("--seed", train_seed, "Override the config seed");
    train->add_option("--out", train_out, "Override out_csv");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run every config in a directory");
    std::string sweep_dir, sweep_out;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    sweep->add_option("--config", sweep_dir, "Directory of JSON configs")->required();
    sweep->add_option("--out", sweep_out, "Summary JSON path")->required();
    sweep->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

    // persample
    auto* persample = app.add_subcommand("persample", "Batch-size-one run on scale-skewed data");
    std::string ps_config, ps_out;
    std::optional<std::uint64_t> ps_seed;
    persample->add_option("--config", ps_config, "JSON config")->required();
    persample->add_option("--seed", ps_seed, "Override the config seed");
    persample->add_option("--out", ps_out, "Override out_csv");

    // fit-rate
    auto* fit = app.add_subcommand("fit-rate", "Fit log(gap) against log(t)");
    std::string fit_csv;
    double t_lo = 1000.0, t_hi = 20000.0;
    fit->add_option("--csv", fit_csv, "Metrics CSV")->required();
    fit->add_option("--t-lo", t_lo, "Window start");
    fit->add_option("--t-hi", t_hi, "Window end");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(ssd::ExitCode::config, e.what());
    }

    try {
        if (*gen) {
            ssd::Dataset ds = [&] {
                if (gen_kind == "gaussian") {
                    gspec.seed = gen_seed;
                    return ssd::gen_gaussian(gspec, max_retries);
                }
                if (counts_text.empty() || ranges_text.empty()) {
                    throw ssd::ConfigError("skewed data needs --counts and --alpha-ranges");
                }
                ssd::SkewedSpec sspec;
                sspec.counts = parse_counts(counts_text);
                sspec.alpha_ranges = parse_ranges(ranges_text);
                sspec.seed = gen_seed;
                return ssd::gen_skewed(sspec);
            }();
            ssd::write_dataset(gen_out, ds);
            std::cout << json{{"out", gen_out}, {"n", ds.n()}, {"d", ds.d()}, {"k", ds.k()}, {"r_bound", ds.r_bound()}}
                             .dump()
                      << '\n';
        } else if (*margin) {
            const ssd::Dataset ds = ssd::read_dataset(margin_dataset);
            const auto sol = ssd::max_margin(ds, ssd::NormSpec::parse(margin_norm), margin_tol, margin_iters);
            if (!margin_out.empty()) ssd::write_matrix(margin_out, sol.w_star);
            std::cout << json{{"gamma", sol.gamma},
                              {"certificate_gap", sol.certificate_gap},
                              {"iterations_used", sol.iterations_used}}
                             .dump()
                      << '\n';
        } else if (*train || *persample) {
            const bool per = persample->parsed();
            ssd::TrainConfig cfg = ssd::load_train_config(per ? ps_config : train_config);
            if (const auto& s = per ? ps_seed : train_seed) cfg.opt.seed = *s;
            if (const auto& o = per ? ps_out : train_out; !o.empty()) cfg.out_csv = o;
            if (per) {
                std::cout << ssd::persample_cmd(cfg).to_json() << '\n';
            } else {
                const auto res = ssd::train_cmd(cfg);
                const auto& last = res.rows.back();
                std::cout << json{{"out_csv", cfg.out_csv.string()},
                                  {"rows", res.rows.size()},
                                  {"gamma", res.targets.gamma},
                                  {"final_gap", last.gap_to_gamma},
                                  {"final_cos_wstar", last.cos_wstar}}
                                 .dump()
                          << '\n';
            }
        } else if (*sweep) {
            const auto entries = ssd::sweep_cmd(sweep_dir, sweep_out, jobs);
            std::size_t failed = 0;
            for (const auto& e : entries) failed += e.ok ? 0 : 1;
            std::cout << json{{"summary", sweep_out}, {"runs", entries.size()}, {"failed", failed}}.dump() << '\n';
        } else if (*fit) {
            const auto f = ssd::fit_rate(fs::path(fit_csv), t_lo, t_hi);
            std::cout << json{{"t_lo", f.t_lo},     {"t_hi", f.t_hi}, {"slope", f.slope},
                              {"intercept", f.intercept}, {"r2", f.r2},   {"rows", f.rows_used}}
                             .dump()
                      << '\n';
        }
    } catch (const ssd::Error& e) {
        return fail(e.code(), e.what());
    } catch (const std::invalid_argument& e) {
        return fail(ssd::ExitCode::config, e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(ssd::ExitCode::config, e.what());
    } catch (const std::exception& e) {
        return fail(ssd::ExitCode::numeric, e.what());
    }
    return 0;
}
