#include "ssd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ssd/error.hpp"
#include "ssd/model.hpp"

namespace ssd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

double parse_field(std::string_view text) {
    const std::string s(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("bad CSV field '" + s + "'");
    return v;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    if (!out) throw ConfigError("write failed for " + path.string());
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

bool read_switch(const json& v, const char* key) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer()) {
        const auto i = v.get<long long>();
        if (i == 0 || i == 1) return i == 1;
    }
    throw ConfigError(std::string("config key '") + key + "' must be a boolean or 0/1");
}

double read_number(const json& v, const char* key) {
    if (!v.is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
    return v.get<double>();
}

std::uint64_t read_count(const json& v, const char* key) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError(std::string("config key '") + key + "' must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::string read_string(const json& v, const char* key) {
    if (!v.is_string()) throw ConfigError(std::string("config key '") + key + "' must be a string");
    return v.get<std::string>();
}

/// Solver results shared by runs over the same dataset and geometry.
class TargetCache {
public:
    MaxMarginSolution get(const std::string& key, const Dataset& ds, const NormSpec& spec, double tol) {
        {
            std::lock_guard lock(mu_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        MaxMarginSolution sol = max_margin(ds, spec, tol);
        std::lock_guard lock(mu_);
        return cache_.emplace(key, std::move(sol)).first->second;
    }

private:
    std::mutex mu_;
    std::map<std::string, MaxMarginSolution> cache_;
};

Targets resolve_targets(const TrainConfig& cfg, const Dataset& ds, TargetCache* cache) {
    Targets targets;
    const NormSpec& spec = cfg.opt.norm;
    if (cfg.wstar_path) {
        Mat w = read_matrix(*cfg.wstar_path);
        if (w.rows() != ds.k() || w.cols() != ds.d()) throw ConfigError("wstar shape does not match the dataset");
        const double scale = norm(w, spec);
        if (scale == 0.0) throw ConfigError("wstar is zero");
        targets.w_star = w * (1.0 / scale);
        targets.gamma = cfg.gamma ? *cfg.gamma : margin_report(targets.w_star, ds, spec).unnormalized_min;
    } else {
        std::string key = fs::weakly_canonical(cfg.dataset_path).string() + "|" + spec.to_string() + "|";
        append_number(key, cfg.margin_tol);
        const MaxMarginSolution sol =
            cache ? cache->get(key, ds, spec, cfg.margin_tol) : max_margin(ds, spec, cfg.margin_tol);
        targets.w_star = sol.w_star;
        targets.gamma = cfg.gamma ? *cfg.gamma : sol.gamma;
    }
    switch (cfg.wbar) {
        case BiasSource::none:
            break;
        case BiasSource::sign:
            targets.w_bar = bias_matrix(ds, BiasKind::sign);
            break;
        case BiasSource::normalized:
            targets.w_bar = bias_matrix(ds, BiasKind::normalized);
            break;
        case BiasSource::file:
            targets.w_bar = read_matrix(*cfg.wbar_path);
            if (targets.w_bar->rows() != ds.k() || targets.w_bar->cols() != ds.d()) {
                throw ConfigError("wbar shape does not match the dataset");
            }
            break;
    }
    return targets;
}

Mat resolve_w0(const TrainConfig& cfg, const Dataset& ds) {
    if (!cfg.w0_path) return Mat(ds.k(), ds.d());
    Mat w0 = read_matrix(*cfg.w0_path);
    if (w0.rows() != ds.k() || w0.cols() != ds.d()) throw ConfigError("w0 shape does not match the dataset");
    return w0;
}

TrainResult train_with(const TrainConfig& cfg, TargetCache* cache) {
    const Dataset ds = read_dataset(cfg.dataset_path);
    const Mat w0 = resolve_w0(cfg, ds);
    try {
        cfg.opt.validate(ds.n());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const Targets targets = resolve_targets(cfg, ds, cache);
    TrainResult result = run_logged(cfg.opt, ds, w0, targets, cfg.log_every);
    if (!cfg.out_csv.empty()) write_metrics_csv(cfg.out_csv, result.rows);
    return result;
}

}  // namespace

double safe_cosine(const Mat& a, const Mat& b) {
    if (a.is_zero() || b.is_zero()) return 0.0;
    return frobenius_cosine(a, b);
}

MetricRow compute_row(std::uint64_t t, std::uint64_t epoch, double eta, const Mat& w, const Mat& signal,
                      const Dataset& ds, const OptimizerConfig& cfg, const Targets& targets) {
    MetricRow row;
    row.t = t;
    row.epoch = epoch;
    row.eta = eta;
    row.loss = loss(w, ds, cfg.loss);
    row.proxy_g = proxy_g(w, ds, cfg.loss);
    const MarginReport rep = margin_report(w, ds, cfg.norm);
    row.min_margin = rep.unnormalized_min;
    row.weight_norm = rep.weight_norm;
    row.norm_margin = rep.normalized;
    row.gap_to_gamma = targets.gamma - rep.normalized;
    row.cos_wstar = safe_cosine(w, targets.w_star);
    if (targets.w_bar) row.cos_wbar = safe_cosine(w, *targets.w_bar);
    row.dualnorm_signal = dual_norm(signal, cfg.norm);
    return row;
}

std::string format_row(const MetricRow& row) {
    std::string out = std::to_string(row.t) + "," + std::to_string(row.epoch);
    for (double v : {row.eta, row.loss, row.proxy_g, row.min_margin, row.weight_norm, row.norm_margin,
                     row.gap_to_gamma, row.cos_wstar}) {
        out += ',';
        append_number(out, v);
    }
    out += ',';
    if (row.cos_wbar) append_number(out, *row.cos_wbar);
    out += ',';
    append_number(out, row.dualnorm_signal);
    return out;
}

MetricRow parse_row(std::string_view line) {
    std::vector<std::string_view> f;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (f.size() != 12) throw ConfigError("CSV row has " + std::to_string(f.size()) + " fields, expected 12");
    MetricRow row;
    row.t = static_cast<std::uint64_t>(parse_field(f[0]));
    row.epoch = static_cast<std::uint64_t>(parse_field(f[1]));
    row.eta = parse_field(f[2]);
    row.loss = parse_field(f[3]);
    row.proxy_g = parse_field(f[4]);
    row.min_margin = parse_field(f[5]);
    row.weight_norm = parse_field(f[6]);
    row.norm_margin = parse_field(f[7]);
    row.gap_to_gamma = parse_field(f[8]);
    row.cos_wstar = parse_field(f[9]);
    if (!f[10].empty()) row.cos_wbar = parse_field(f[10]);
    row.dualnorm_signal = parse_field(f[11]);
    return row;
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricRow>& rows) {
    std::string text(kCsvHeader);
    text += '\n';
    for (const auto& row : rows) {
        text += format_row(row);
        text += '\n';
    }
    write_file(path, text);
}

std::vector<MetricRow> read_metrics_csv(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ConfigError(path.string() + ": unexpected CSV header");
    std::vector<MetricRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(parse_row(line));
    }
    return rows;
}

TrainConfig parse_train_config(std::string_view json_text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    static const std::set<std::string> known = {
        "norm",       "loss",     "batch_size", "momentum", "beta1",      "vr",         "c",
        "a",          "eta0",     "epochs",     "seed",     "dataset_path", "w0",       "out_csv",
        "log_every",  "gamma",    "wstar_path", "margin_tol", "newton_schulz", "wbar"};
    for (const auto& item : doc.items()) {
        if (!known.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
    }
    for (const char* key : {"norm", "batch_size", "epochs", "c", "dataset_path"}) {
        if (!doc.contains(key)) throw ConfigError(std::string("config is missing '") + key + "'");
    }

    TrainConfig cfg;
    OptimizerConfig& opt = cfg.opt;
    opt.norm = NormSpec::parse(read_string(doc["norm"], "norm"));
    if (doc.contains("loss")) opt.loss = parse_loss(read_string(doc["loss"], "loss"));
    opt.batch_size = read_count(doc["batch_size"], "batch_size");
    if (doc.contains("momentum")) opt.momentum = read_switch(doc["momentum"], "momentum");
    if (doc.contains("beta1")) opt.beta1 = read_number(doc["beta1"], "beta1");
    if (doc.contains("vr")) opt.vr = read_switch(doc["vr"], "vr");
    opt.schedule.c = read_number(doc["c"], "c");
    opt.schedule.a = doc.contains("a") ? read_number(doc["a"], "a") : 0.5;
    opt.schedule.eta0 = doc.contains("eta0") ? read_number(doc["eta0"], "eta0") : opt.schedule.c;
    opt.epochs = read_count(doc["epochs"], "epochs");
    if (doc.contains("seed")) opt.seed = read_count(doc["seed"], "seed");
    if (doc.contains("newton_schulz")) opt.steepest.newton_schulz = read_switch(doc["newton_schulz"], "newton_schulz");
    try {
        opt.schedule.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(opt.beta1 >= 0.0 && opt.beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
    if (opt.batch_size == 0 || opt.epochs == 0) throw ConfigError("batch_size and epochs must be positive");

    cfg.dataset_path = resolve(base_dir, read_string(doc["dataset_path"], "dataset_path"));
    if (doc.contains("w0")) {
        const std::string w0 = read_string(doc["w0"], "w0");
        if (w0 != "zeros") cfg.w0_path = resolve(base_dir, w0);
    }
    if (doc.contains("out_csv")) cfg.out_csv = resolve(base_dir, read_string(doc["out_csv"], "out_csv"));
    if (doc.contains("log_every")) {
        cfg.log_every = read_count(doc["log_every"], "log_every");
        if (cfg.log_every == 0) throw ConfigError("log_every must be positive");
    }
    if (doc.contains("gamma")) cfg.gamma = read_number(doc["gamma"], "gamma");
    if (doc.contains("wstar_path")) cfg.wstar_path = resolve(base_dir, read_string(doc["wstar_path"], "wstar_path"));
    if (doc.contains("margin_tol")) {
        cfg.margin_tol = read_number(doc["margin_tol"], "margin_tol");
        if (!(cfg.margin_tol > 0.0)) throw ConfigError("margin_tol must be positive");
    }
    if (doc.contains("wbar")) {
        const std::string wbar = read_string(doc["wbar"], "wbar");
        if (wbar == "sign") {
            cfg.wbar = BiasSource::sign;
        } else if (wbar == "normalized") {
            cfg.wbar = BiasSource::normalized;
        } else {
            cfg.wbar = BiasSource::file;
            cfg.wbar_path = resolve(base_dir, wbar);
        }
    }
    return cfg;
}

TrainConfig load_train_config(const fs::path& path) {
    TrainConfig cfg = parse_train_config(read_file(path), path.parent_path());
    if (cfg.out_csv.empty()) cfg.out_csv = fs::path(path).replace_extension(".csv");
    return cfg;
}

TrainResult run_logged(const OptimizerConfig& cfg, const Dataset& ds, const Mat& w0, const Targets& targets,
                       std::size_t log_every) {
    if (log_every == 0) throw std::invalid_argument("log_every must be positive");
    cfg.validate(ds.n());
    const std::uint64_t total = static_cast<std::uint64_t>(cfg.epochs) * cfg.steps_per_epoch(ds.n());
    TrainResult result;
    result.targets = targets;
    const TrainState state = run(cfg, ds, w0, [&](const StepEvent& ev) {
        if (ev.t % log_every == 0 || ev.t == total) {
            result.rows.push_back(compute_row(ev.t, ev.epoch, ev.eta, ev.w, ev.signal, ds, cfg, targets));
        }
    });
    result.final_w = state.w;
    return result;
}

TrainResult train_cmd(const TrainConfig& cfg) { return train_with(cfg, nullptr); }

std::vector<SweepEntry> sweep_cmd(const fs::path& config_dir, const fs::path& summary_path, std::size_t jobs) {
    if (!fs::is_directory(config_dir)) throw ConfigError(config_dir.string() + " is not a directory");
    std::vector<fs::path> configs;
    for (const auto& entry : fs::directory_iterator(config_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") configs.push_back(entry.path());
    }
    std::sort(configs.begin(), configs.end());
    if (!summary_path.empty()) {
        const auto summary = fs::weakly_canonical(summary_path);
        std::erase_if(configs, [&](const fs::path& p) { return fs::weakly_canonical(p) == summary; });
    }

    std::vector<SweepEntry> entries(configs.size());
    TargetCache cache;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            SweepEntry& e = entries[i];
            e.name = configs[i].stem().string();
            try {
                const TrainResult res = train_with(load_train_config(configs[i]), &cache);
                if (res.rows.empty()) throw NumericError("run produced no rows");
                e.final_gap = res.rows.back().gap_to_gamma;
                e.final_cos_wstar = res.rows.back().cos_wstar;
                try {
                    e.slope = fit_rate(res.rows, 1000.0, static_cast<double>(res.rows.back().t)).slope;
                } catch (const ConfigError&) {
                    e.slope.reset();
                }
                e.ok = true;
            } catch (const std::exception& ex) {
                e.ok = false;
                e.error = ex.what();
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, configs.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    if (!summary_path.empty()) {
        json summary = json::object();
        for (const auto& e : entries) {
            if (e.ok) {
                summary[e.name] = {{"final_gap", e.final_gap},
                                   {"final_cos_wstar", e.final_cos_wstar},
                                   {"slope", e.slope ? json(*e.slope) : json(nullptr)}};
            } else {
                summary[e.name] = {{"error", e.error}};
            }
        }
        write_file(summary_path, summary.dump(2) + "\n");
    }
    return entries;
}

std::string PersampleVerdict::to_json() const {
    return json{{"final_loss", final_loss}, {"final_cos_wbar", final_cos_wbar}, {"final_cos_wstar", final_cos_wstar}}
        .dump();
}

bool is_scale_skewed(const Dataset& ds) {
    if (ds.d() != ds.k()) return false;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto x = ds.sample(i);
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j == ds.label(i) ? !(x[j] > 0.0) : x[j] != 0.0) return false;
        }
    }
    return true;
}

PersampleVerdict persample_cmd(const TrainConfig& given) {
    TrainConfig cfg = given;
    const OptimizerConfig& opt = cfg.opt;
    if (opt.batch_size != 1) throw ConfigError("persample requires batch_size = 1");
    if (opt.momentum || opt.vr) throw ConfigError("persample requires momentum = 0 and vr = 0");
    const bool sign_geometry = opt.norm == NormSpec::entrywise(kInf);
    if (!sign_geometry && opt.norm != NormSpec::entrywise(2.0) && opt.norm != NormSpec::schatten(kInf)) {
        throw ConfigError("persample requires norm ew:inf, ew:2 or sch:inf");
    }
    if (cfg.w0_path && !read_matrix(*cfg.w0_path).is_zero()) throw ConfigError("persample requires w0 = zeros");
    if (!is_scale_skewed(read_dataset(cfg.dataset_path))) {
        throw ConfigError("persample requires an orthogonal scale-skewed dataset");
    }
    cfg.wbar = sign_geometry ? BiasSource::sign : BiasSource::normalized;

    const TrainResult res = train_with(cfg, nullptr);
    if (res.rows.empty()) throw NumericError("run produced no rows");
    PersampleVerdict verdict;
    verdict.final_loss = res.rows.back().loss;
    verdict.final_cos_wbar = res.rows.back().cos_wbar.value_or(0.0);
    verdict.final_cos_wstar = res.rows.back().cos_wstar;
    if (!cfg.out_csv.empty()) write_file(cfg.out_csv.string() + ".verdict.json", verdict.to_json() + "\n");
    return verdict;
}

SlopeFit fit_rate(const std::vector<MetricRow>& rows, double t_lo, double t_hi) {
    if (!(t_lo < t_hi)) throw ConfigError("fit_rate: window needs t_lo < t_hi");
    SlopeFit fit;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    std::vector<double> xs, ys;
    for (const auto& row : rows) {
        const double t = static_cast<double>(row.t);
        if (t < t_lo || t > t_hi || t <= 0.0) continue;
        if (!(row.gap_to_gamma > 0.0) || !std::isfinite(row.gap_to_gamma)) continue;
        xs.push_back(std::log(t));
        ys.push_back(std::log(row.gap_to_gamma));
    }
    fit.rows_used = xs.size();
    if (xs.size() < 20) {
        throw ConfigError("fit_rate: only " + std::to_string(xs.size()) + " rows with positive gap in the window");
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("fit_rate: all rows share one t");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

SlopeFit fit_rate(const fs::path& csv, double t_lo, double t_hi) { return fit_rate(read_metrics_csv(csv), t_lo, t_hi); }

}  // namespace ssd
