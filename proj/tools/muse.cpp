// muse: watermark tabular data by multi-sample selection, detect the
// watermark with a calibrated one-tailed test, and measure robustness
// and fidelity. All reports are single JSON documents on stdout; tables
// travel through --in/--out CSV paths.

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "muse/muse.hpp"

using nlohmann::json;

namespace {

int g_log_level = 1;  // 0 error, 1 warn, 2 info, 3 debug

void log_at(int level, const std::string& tag, const std::string& msg) {
    if (level <= g_log_level) std::cerr << "[" << tag << "] " << msg << "\n";
}
void log_warn(const std::string& msg) { log_at(1, "warn", msg); }
void log_info(const std::string& msg) { log_at(2, "info", msg); }

int level_from_name(const std::string& name) {
    if (name == "error") return 0;
    if (name == "info") return 2;
    if (name == "debug") return 3;
    return 1;  // warn
}

// JSON flavor of a CLI11 config file: top-level keys are global options,
// nested objects hold per-subcommand flags. CLI arguments win.
class ConfigJSON : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool,
                          std::string) const override {
        json j = to_json(app, default_also);
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        try {
            input >> j;
        } catch (const json::exception& e) {
            throw CLI::ConfigError(std::string("config is not valid JSON: ") +
                                   e.what());
        }
        return walk(j, "", {});
    }

private:
    static json to_json(const CLI::App* app, bool default_also) {
        json j = json::object();
        for (const CLI::Option* opt : app->get_options({})) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            const std::string& name = opt->get_lnames()[0];
            if (opt->get_type_size() != 0) {
                if (opt->count() == 1) j[name] = opt->results().at(0);
                else if (opt->count() > 1) j[name] = opt->results();
                else if (default_also && !opt->get_default_str().empty())
                    j[name] = opt->get_default_str();
            } else if (opt->count() > 0) {
                j[name] = true;
            }
        }
        for (const CLI::App* sub : app->get_subcommands({}))
            j[sub->get_name()] = to_json(sub, default_also);
        return j;
    }

    static std::vector<CLI::ConfigItem> walk(const json& j,
                                             const std::string& name,
                                             std::vector<std::string> prefix) {
        std::vector<CLI::ConfigItem> out;
        if (j.is_object()) {
            if (!name.empty()) prefix.push_back(name);
            for (auto it = j.cbegin(); it != j.cend(); ++it) {
                auto sub = walk(it.value(), it.key(), prefix);
                out.insert(out.end(), sub.begin(), sub.end());
            }
            return out;
        }
        if (name.empty())
            throw CLI::ConfigError("top-level config values must be objects");
        CLI::ConfigItem item;
        item.name = name;
        item.parents = std::move(prefix);
        if (j.is_boolean()) {
            item.inputs = {j.get<bool>() ? "true" : "false"};
        } else if (j.is_string()) {
            item.inputs = {j.get<std::string>()};
        } else if (j.is_number()) {
            item.inputs = {j.dump()};
        } else if (j.is_array()) {
            for (const auto& el : j)
                item.inputs.push_back(el.is_string() ? el.get<std::string>()
                                                     : el.dump());
        } else {
            throw CLI::ConfigError("cannot convert config key '" + name + "'");
        }
        out.push_back(std::move(item));
        return out;
    }
};

muse::Table load_table(const std::string& path, const std::string& schema_path) {
    std::optional<muse::Schema> schema;
    if (!schema_path.empty()) schema = muse::load_schema(schema_path);
    return muse::load_csv(path, schema);
}

// "adaptive", "adaptive:<n>", or "fixed:<i,j,k>" (0-based indices).
muse::SelectionStrategy parse_strategy(const std::string& spec,
                                       const muse::Table& reference,
                                       std::size_t ecdf_max_points) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "adaptive") {
        std::size_t n = arg.empty() ? 3 : std::stoul(arg);
        return muse::make_adaptive_strategy(reference, n, ecdf_max_points);
    }
    if (kind == "fixed") {
        muse::FixedSelection f;
        std::stringstream ss(arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) f.columns.push_back(std::stoul(tok));
        }
        muse::SelectionStrategy s = f;
        muse::validate(s);
        return s;
    }
    throw muse::InvalidConfig("unknown strategy '" + spec +
                              "' (expected adaptive[:n] or fixed:i,j,...)");
}

json strategy_summary(const muse::SelectionStrategy& s) {
    if (const auto* f = std::get_if<muse::FixedSelection>(&s))
        return {{"type", "fixed"}, {"columns", f->columns}};
    const auto& a = std::get<muse::AdaptiveSelection>(s);
    return {{"type", "adaptive"},
            {"n_columns", a.n_columns},
            {"eligible", a.eligible}};
}

void emit(const json& report) { std::cout << report.dump(2) << "\n"; }

json detection_to_json(const muse::DetectionReport& r) {
    return {{"n_scored", r.n_scored},
            {"score_sum", r.score_sum},
            {"mean_score", r.mean_score},
            {"z", r.z},
            {"p_value", r.p_value},
            {"decision", r.decision},
            {"alpha", r.alpha},
            {"masked_excluded", r.masked_excluded}};
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
    double alpha = 1e-4;
    std::uint64_t rows = 0;
};

void run_calibrate(const CalibrateArgs& a) {
    muse::CalibrationResult r = muse::required_samples({a.alpha, a.rows});
    emit({{"subcommand", "calibrate"},
          {"alpha", a.alpha},
          {"rows", a.rows},
          {"m", r.m},
          {"fpr_bound", r.fpr_bound},
          {"min_valid_rows", muse::min_valid_rows(a.alpha)}});
}

// -------------------------------------------------------------------- embed

struct EmbedArgs {
    std::string key;
    std::uint64_t m = 0;
    double alpha = 0.0;
    bool have_m = false, have_alpha = false;
    std::string strategy = "adaptive:3";
    std::string score = "bernoulli";
    bool mask = false;
    bool keep_remainder = false;
    std::uint64_t seed = 42;
    std::size_t ecdf_max_points = 10000;
    std::string in, sampler, source, schema;
    std::size_t rows = 0;
    std::string out, bundle_path;
};

void run_embed(const EmbedArgs& a) {
    const bool pool_mode = !a.in.empty();
    muse::Table reference = load_table(pool_mode ? a.in : a.source, a.schema);

    muse::EmbedConfig cfg{
        muse::WatermarkKey(a.key),
        parse_strategy(a.strategy, reference, a.ecdf_max_points),
        muse::score_kind_from_string(a.score),
        a.have_m ? std::optional<std::uint64_t>(a.m) : std::nullopt,
        a.have_alpha ? std::optional<double>(a.alpha) : std::nullopt,
        a.mask,
        a.keep_remainder,
        a.seed};

    muse::Table wm;
    muse::EmbedReport report;
    if (pool_mode) {
        std::tie(wm, report) = muse::embed_from_pool(reference, cfg);
    } else {
        auto sampler = muse::make_sampler(a.sampler, reference);
        std::tie(wm, report) = muse::embed_streaming(*sampler, a.rows, cfg);
    }
    if (report.dropped_remainder > 0)
        log_warn(std::to_string(report.dropped_remainder) +
                 " remainder row(s) not divisible by m were dropped; pass "
                 "--keep-remainder to append them unwatermarked");

    muse::save_csv(wm, a.out);
    if (!a.bundle_path.empty()) {
        muse::DetectorBundle bundle{cfg.key, cfg.strategy, cfg.score_kind,
                                    cfg.masking, 1};
        muse::save_bundle(bundle, a.bundle_path);
    }

    emit({{"subcommand", "embed"},
          {"seed", a.seed},
          {"mode", pool_mode ? "pool" : "streaming"},
          {"m_used", report.m_used},
          {"rows_out", report.rows_out},
          {"table_rows", wm.n_rows()},
          {"masked_rows", report.masked_rows},
          {"ties_broken", report.ties_broken},
          {"dropped_remainder", report.dropped_remainder},
          {"score", a.score},
          {"masking", a.mask},
          {"strategy", strategy_summary(cfg.strategy)},
          {"out", a.out},
          {"bundle", a.bundle_path}});
}

// ------------------------------------------------------------------- detect

struct DetectArgs {
    std::string bundle_path, in, reference, schema;
    double alpha = 0.05;
};

void run_detect(const DetectArgs& a) {
    muse::DetectorBundle bundle = muse::load_bundle(a.bundle_path);
    muse::Table suspect = load_table(a.in, a.schema);
    muse::DetectionReport report = muse::detect(bundle, suspect, a.alpha);
    json j = detection_to_json(report);
    j["subcommand"] = "detect";
    j["in"] = a.in;
    if (!a.reference.empty()) {
        muse::Table ref = load_table(a.reference, a.schema);
        j["beats_reference"] = muse::compare_tables(bundle, suspect, ref);
    }
    emit(j);
}

// ------------------------------------------------------------------- attack

struct AttackArgs {
    std::string kind;
    double fraction = 0.0;
    std::uint64_t seed = 42;
    std::string replacement_sampler = "bootstrap";
    std::string in, source, schema, out;
};

void run_attack(const AttackArgs& a) {
    muse::Table table = load_table(a.in, a.schema);
    muse::AttackSpec spec;
    spec.kind = muse::attack_kind_from_string(a.kind);
    spec.fraction = a.fraction;
    spec.seed = a.seed;
    std::unique_ptr<muse::RowSampler> sampler;
    if (!a.source.empty()) {
        sampler = muse::make_sampler(a.replacement_sampler,
                                     load_table(a.source, a.schema));
        spec.replacement = sampler.get();
    }
    muse::Table attacked = muse::apply_attack(table, spec);
    muse::save_csv(attacked, a.out);
    emit({{"subcommand", "attack"},
          {"kind", a.kind},
          {"fraction", a.fraction},
          {"seed", a.seed},
          {"rows", attacked.n_rows()},
          {"out", a.out}});
}

// ----------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string real, synth, schema;
};

void run_evaluate(const EvaluateArgs& a) {
    muse::Table real_t = load_table(a.real, a.schema);
    muse::Table synth = load_table(a.synth, a.schema);
    muse::FidelityReport r = muse::fidelity_report(real_t, synth);
    json per_column = json::array();
    for (const auto& [name, d] : r.per_column)
        per_column.push_back({{"name", name}, {"distance", d}});
    json per_pair = json::array();
    for (const auto& [x, y, d] : r.per_pair)
        per_pair.push_back({{"a", x}, {"b", y}, {"distance", d}});
    json skipped = json::array();
    for (const auto& [x, y] : r.skipped_pairs)
        skipped.push_back({{"a", x}, {"b", y}});
    emit({{"subcommand", "evaluate"},
          {"real", a.real},
          {"synth", a.synth},
          {"marginal", r.marginal},
          {"correlation", r.correlation},
          {"per_column", per_column},
          {"per_pair", per_pair},
          {"skipped_pairs", skipped}});
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkArgs {
    std::string key;
    std::uint64_t m = 2;
    std::string strategy = "adaptive:3";
    std::string score = "bernoulli";
    bool mask = false;
    std::string sampler = "independent";
    std::string source, schema;
    std::size_t rows = 500;
    std::size_t trials = 20;
    double alpha = 0.05;
    std::uint64_t seed = 42;
    std::size_t threads = 1;
    std::size_t ecdf_max_points = 10000;
    std::string out;
};

struct BenchCell {
    muse::AttackKind kind;
    double fraction;
    std::vector<std::uint64_t> seeds;
    std::vector<double> z_wm;
    std::vector<double> z_nowm;
    double auc = 0.0, tpr = 0.0;
};

void run_benchmark(const BenchmarkArgs& a) {
    static const double kFractions[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    static const muse::AttackKind kKinds[] = {
        muse::AttackKind::RowShuffle, muse::AttackKind::RowDelete,
        muse::AttackKind::ColumnDelete, muse::AttackKind::CellDelete,
        muse::AttackKind::ValueAlter};

    muse::Table source = load_table(a.source, a.schema);
    auto sampler = muse::make_sampler(a.sampler, source);
    muse::EmbedConfig cfg{muse::WatermarkKey(a.key),
                          parse_strategy(a.strategy, source, a.ecdf_max_points),
                          muse::score_kind_from_string(a.score),
                          a.m,
                          std::nullopt,
                          a.mask,
                          false,
                          a.seed};
    muse::DetectorBundle bundle{cfg.key, cfg.strategy, cfg.score_kind,
                                cfg.masking, 1};

    std::vector<BenchCell> cells;
    for (muse::AttackKind kind : kKinds)
        for (double f : kFractions) cells.push_back({kind, f, {}, {}, {}});

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= cells.size()) return;
            BenchCell& cell = cells[c];
            for (std::size_t t = 0; t < a.trials; ++t) {
                std::uint64_t trial_seed =
                    muse::rng_at(a.seed, c * a.trials + t);
                cell.seeds.push_back(trial_seed);

                muse::EmbedConfig ecfg = cfg;
                ecfg.seed = trial_seed;
                auto [wm, rep] = muse::embed_streaming(*sampler, a.rows, ecfg);
                muse::AttackSpec spec{cell.kind, cell.fraction,
                                      trial_seed ^ 0x5eedULL, sampler.get()};
                muse::Table attacked = muse::apply_attack(wm, spec);
                cell.z_wm.push_back(
                    muse::detect(bundle, attacked, a.alpha).z);

                muse::Table nowm =
                    sampler->sample_rows(a.rows, trial_seed ^ 0x6e6f776dULL);
                cell.z_nowm.push_back(muse::detect(bundle, nowm, a.alpha).z);
            }
            muse::RocCurve curve = muse::roc(cell.z_wm, cell.z_nowm);
            cell.auc = curve.auc;
            cell.tpr = muse::tpr_at_fpr(curve, 0.001);
        }
    };
    std::size_t n_threads = std::max<std::size_t>(1, a.threads);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::ofstream csv(a.out);
    if (!csv) throw muse::IoError("cannot open " + a.out + " for writing");
    csv << "attack,fraction,seed,z,auc,tpr_at_001fpr\n";
    json summary = json::array();
    for (const BenchCell& cell : cells) {
        for (std::size_t t = 0; t < cell.seeds.size(); ++t)
            csv << muse::to_string(cell.kind) << ',' << cell.fraction << ','
                << cell.seeds[t] << ',' << cell.z_wm[t] << ',' << cell.auc
                << ',' << cell.tpr << "\n";
        summary.push_back({{"attack", muse::to_string(cell.kind)},
                           {"fraction", cell.fraction},
                           {"auc", cell.auc},
                           {"tpr_at_001fpr", cell.tpr}});
    }
    emit({{"subcommand", "benchmark"},
          {"seed", a.seed},
          {"rows", a.rows},
          {"m", a.m},
          {"trials", a.trials},
          {"alpha", a.alpha},
          {"out", a.out},
          {"cells", summary}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular data watermarking by multi-sample selection"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "JSON config file mirroring the flags");
    app.config_formatter(std::make_shared<ConfigJSON>());

    std::string log_level = "warn";
    if (const char* env = std::getenv("MUSE_LOG")) log_level = env;
    g_log_level = level_from_name(log_level);
    app.add_option("--log-level", log_level,
                   "error, warn, info or debug (or MUSE_LOG)")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
        ->each([](const std::string& s) { g_log_level = level_from_name(s); });

    // Global defaults; a subcommand's own --seed/--threads win.
    std::uint64_t global_seed = 42;
    std::size_t global_threads = 1;
    auto* gseed = app.add_option("--seed", global_seed, "default rng seed");
    auto* gthreads =
        app.add_option("--threads", global_threads, "default worker count");
    auto inherit = [](const CLI::Option* sub_opt, const CLI::Option* global_opt,
                      auto& target, const auto& global_value) {
        if (sub_opt->count() == 0 && global_opt->count() > 0)
            target = global_value;
    };

    CalibrateArgs cal;
    auto* c = app.add_subcommand("calibrate",
                                 "Repeated samples m for a target FPR");
    c->add_option("--alpha", cal.alpha, "target false positive rate")
        ->required();
    c->add_option("--rows", cal.rows, "watermarked table size N")->required();
    c->callback([&] { run_calibrate(cal); });

    EmbedArgs emb;
    auto* e = app.add_subcommand("embed", "Generate a watermarked table");
    e->add_option("--key", emb.key, "secret watermark key")->required();
    auto* em = e->add_option("--m", emb.m, "candidates per output row (>=2)");
    auto* ea = e->add_option("--alpha", emb.alpha,
                             "target FPR; calibrates m automatically");
    em->excludes(ea);
    e->add_option("--strategy", emb.strategy,
                  "adaptive[:n] or fixed:i,j,... (0-based columns)");
    e->add_option("--score", emb.score, "bernoulli or uniform");
    e->add_flag("--mask", emb.mask, "repeated column masking");
    e->add_flag("--keep-remainder", emb.keep_remainder,
                "append pool remainder rows unwatermarked");
    auto* eseed = e->add_option("--seed", emb.seed, "rng seed");
    e->add_option("--ecdf-max-points", emb.ecdf_max_points,
                  "ECDF subsampling cap");
    auto* ein = e->add_option("--in", emb.in, "pre-allocated candidate pool CSV");
    auto* esam = e->add_option("--sampler", emb.sampler,
                               "bootstrap or independent (streaming mode)");
    e->add_option("--source", emb.source, "sampler source CSV");
    e->add_option("--schema", emb.schema, "JSON schema sidecar");
    auto* erows = e->add_option("--rows", emb.rows,
                                "output rows (streaming mode)");
    ein->excludes(esam);
    esam->needs(erows);
    e->add_option("--out", emb.out, "watermarked CSV path")->required();
    e->add_option("--bundle", emb.bundle_path, "detector bundle JSON path");
    e->callback([&] {
        if (emb.in.empty() && emb.sampler.empty())
            throw CLI::ValidationError("embed",
                                       "need --in or --sampler/--source");
        if (!emb.sampler.empty() && emb.source.empty())
            throw CLI::ValidationError("embed", "--sampler needs --source");
        emb.have_m = em->count() > 0;
        emb.have_alpha = ea->count() > 0;
        if (!emb.have_m && !emb.have_alpha)
            throw CLI::ValidationError("embed", "need --m or --alpha");
        inherit(eseed, gseed, emb.seed, global_seed);
        run_embed(emb);
    });

    DetectArgs det;
    auto* d = app.add_subcommand("detect", "Test a table for the watermark");
    d->add_option("--bundle", det.bundle_path, "detector bundle JSON")
        ->required();
    d->add_option("--in", det.in, "suspect CSV")->required();
    d->add_option("--alpha", det.alpha, "significance level");
    d->add_option("--reference", det.reference,
                  "unwatermarked reference CSV for the paired rule");
    d->add_option("--schema", det.schema, "JSON schema sidecar");
    d->callback([&] { run_detect(det); });

    AttackArgs att;
    auto* t = app.add_subcommand("attack", "Perturb a table");
    t->add_option("--kind", att.kind,
                  "row_shuffle, row_delete, column_delete, cell_delete, "
                  "value_alter")
        ->required();
    t->add_option("--fraction", att.fraction, "attack intensity in [0,1]")
        ->required();
    auto* tseed = t->add_option("--seed", att.seed, "rng seed");
    t->add_option("--replacement-sampler", att.replacement_sampler,
                  "bootstrap or independent");
    t->add_option("--source", att.source, "replacement sampler source CSV");
    t->add_option("--in", att.in, "input CSV")->required();
    t->add_option("--schema", att.schema, "JSON schema sidecar");
    t->add_option("--out", att.out, "output CSV")->required();
    t->callback([&] {
        inherit(tseed, gseed, att.seed, global_seed);
        run_attack(att);
    });

    EvaluateArgs ev;
    auto* v = app.add_subcommand("evaluate", "Fidelity of synth vs real");
    v->add_option("--real", ev.real, "reference CSV")->required();
    v->add_option("--synth", ev.synth, "synthetic CSV")->required();
    v->add_option("--schema", ev.schema, "JSON schema sidecar");
    v->callback([&] { run_evaluate(ev); });

    BenchmarkArgs ben;
    auto* b = app.add_subcommand(
        "benchmark", "Attack-grid robustness sweep (CSV of z/auc/tpr)");
    b->add_option("--key", ben.key, "secret watermark key")->required();
    b->add_option("--m", ben.m, "candidates per output row");
    b->add_option("--strategy", ben.strategy, "adaptive[:n] or fixed:i,j,...");
    b->add_option("--score", ben.score, "bernoulli or uniform");
    b->add_flag("--mask", ben.mask, "repeated column masking");
    b->add_option("--sampler", ben.sampler, "bootstrap or independent");
    b->add_option("--source", ben.source, "sampler source CSV")->required();
    b->add_option("--schema", ben.schema, "JSON schema sidecar");
    b->add_option("--rows", ben.rows, "rows per generated table");
    b->add_option("--trials", ben.trials, "tables per grid cell");
    b->add_option("--alpha", ben.alpha, "detection significance level");
    auto* bseed = b->add_option("--seed", ben.seed, "rng seed");
    auto* bthreads =
        b->add_option("--threads", ben.threads, "parallel grid workers");
    b->add_option("--ecdf-max-points", ben.ecdf_max_points,
                  "ECDF subsampling cap");
    b->add_option("--out", ben.out, "long-format CSV path")->required();
    b->callback([&] {
        inherit(bseed, gseed, ben.seed, global_seed);
        inherit(bthreads, gthreads, ben.threads, global_threads);
        run_benchmark(ben);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const muse::MuseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
