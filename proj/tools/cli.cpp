#include "cli.hpp"
#include "config.hpp"

#include "offmoo/io.hpp"
#include "offmoo/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <set>

namespace offmoo::cli {

namespace fs = std::filesystem;

namespace {

// Exclusive ownership of a run directory for the lifetime of a command.
class DirLock {
public:
    explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
        fs::create_directories(dir);
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f) throw Error("run directory " + dir.string() + " is locked by another command (" + path_.string() + ")");
        std::fclose(f);
    }
    ~DirLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    fs::path path_;
};

struct Options {
    std::string config_file;
    std::string task;
    std::string out;
    std::string method;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double percentile = -1.0;
    std::size_t pop_size = 0;
    std::size_t generations = 0;
    double remove_top = -1.0;
    std::size_t size = 0;

    std::string instance;
    std::string data;
    std::string eval_data;
    std::string model;
    std::string batch;
    std::string report;
    std::vector<std::string> inputs;
    bool svg = false;
};

RunConfig resolve_config(const Options& o) {
    RunConfig cfg;
    if (!o.config_file.empty()) apply_config_file(cfg, o.config_file);
    if (!o.task.empty()) cfg.task = o.task;
    if (o.seed_set) cfg.seed = o.seed;
    if (!o.method.empty()) cfg.method = o.method;
    if (o.percentile >= 0.0) cfg.percentile = o.percentile;
    if (o.pop_size > 0) cfg.search.pop_size = o.pop_size;
    if (o.generations > 0) cfg.search_generations = o.generations;
    if (o.remove_top >= 0.0) cfg.remove_top_percent = o.remove_top;
    if (o.size > 0) cfg.instance_size = o.size;
    return cfg;
}

fs::path resolve_out(const Options& o, const RunConfig& cfg) {
    if (!o.out.empty()) return o.out;
    const char* root = std::getenv(kOutputRootEnv);
    if (!root || !*root) throw ConfigError(std::string("--out not given and ") + kOutputRootEnv + " is not set");
    if (cfg.task.empty()) throw ConfigError("--out not given and no task to name the output directory");
    return fs::path(root) / cfg.task;
}

fs::path pick(const std::string& given, const fs::path& fallback) { return given.empty() ? fallback : fs::path(given); }

void require_task(const RunConfig& cfg) {
    if (cfg.task.empty()) throw ConfigError("no task given (use --task or the config key 'task')");
}

void add_config_provenance(std::map<std::string, std::string>& prov, const RunConfig& cfg) {
    for (const auto& [k, v] : cfg.entries()) prov["config." + k] = v;
}

CombinatorialInstance instance_for(const TaskSpec& task, const RunConfig& cfg) {
    const std::size_t n = cfg.instance_size > 0 ? cfg.instance_size : task.dims;
    return generate_instance(instance_kind_for(task), n, cfg.seed, cfg.instance_size > 0);
}

int cmd_gen_instance(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    require_task(cfg);
    const TaskSpec task = task_by_name(cfg.task);
    if (!task.combinatorial()) throw CapabilityError("task " + task.name + " has no instance");
    const fs::path dir = resolve_out(o, cfg);
    DirLock lock(dir);
    const CombinatorialInstance inst = instance_for(task, cfg);
    save_instance(inst, dir / "instance.json");
    out << "instance " << to_string(inst.kind) << " n=" << inst.n << " -> " << (dir / "instance.json").string() << "\n";
    return 0;
}

int cmd_collect(const Options& o, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve_config(o);
    require_task(cfg);
    const fs::path dir = resolve_out(o, cfg);
    DirLock lock(dir);
    const TaskSpec task = task_by_name(cfg.task);
    std::optional<CombinatorialInstance> inst;
    if (task.combinatorial()) {
        const fs::path file = pick(o.instance, dir / "instance.json");
        if (fs::exists(file)) inst = load_instance(file);
        else if (!o.instance.empty()) throw Error("instance file not found: " + file.string());
        else inst = instance_for(task, cfg);
    }
    const Problem problem(task, inst);
    cfg.collection.seed = cfg.seed;
    std::vector<std::string> warnings;
    const OfflineDataset ds = collect_dataset(problem, cfg.collection, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    save_dataset(ds, dir / "dataset");
    out << "collected " << ds.size() << " points for " << ds.task << " -> " << (dir / "dataset").string() << "\n";
    return 0;
}

int cmd_build_train(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const fs::path dir = resolve_out(o, cfg);
    DirLock lock(dir);
    const OfflineDataset full = load_dataset(pick(o.data, dir / "dataset"));
    const OfflineDataset ds = build_training_set(full, cfg.remove_top_percent);
    save_dataset(ds, dir / "train");
    out << "training set keeps " << ds.size() << " of " << full.size() << " points -> " << (dir / "train").string()
        << "\n";
    return 0;
}

TrainConfig train_config_for(const RunConfig& cfg, const MethodSpec& m) {
    TrainConfig t = cfg.train;
    t.seed = cfg.seed;
    t.mtl = m.mtl;
    t.keep_fraction = m.prune ? cfg.prune_keep_fraction : 1.0;
    return t;
}

int cmd_train(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const MethodSpec method = parse_method(cfg.method);
    if (method.gp) throw ConfigError("the gp method is fitted by the search command; nothing to train");
    const fs::path dir = resolve_out(o, cfg);
    DirLock lock(dir);
    const OfflineDataset ds = load_dataset(pick(o.data, dir / "train"));
    const TrainConfig tcfg = train_config_for(cfg, method);
    const TrainResult r = train(method.kind, ds, tcfg);
    const fs::path file = pick(o.model, dir / "model.json");
    save_checkpoint(r.model, tcfg, file);
    out << "trained " << method.name() << " on " << ds.size() << " points, final loss " << r.trace.loss.back()
        << ", elites loss " << r.trace.elites_loss.back() << " -> " << file.string() << "\n";
    return 0;
}

int cmd_search(const Options& o, std::ostream& out) {
    RunConfig cfg = resolve_config(o);
    const MethodSpec method = parse_method(cfg.method);
    const fs::path dir = resolve_out(o, cfg);
    DirLock lock(dir);
    const OfflineDataset ds = load_dataset(pick(o.data, dir / "train"));
    const Problem problem = problem_for(ds);

    SearchConfig scfg = cfg.search;
    scfg.seed = cfg.seed;
    scfg.generations = cfg.search_generations > 0 ? cfg.search_generations
                                                  : (method.gp ? kGpSearchGenerations : kNnSearchGenerations);
    CandidateBatch batch;
    if (method.gp) {
        GpConfig g = cfg.gp;
        g.fit.seed = cfg.seed;
        const GpSurrogate gp = fit_gp_surrogate(ds, g);
        batch = offline_search(gp_objectives(gp, g.beta), ds, problem, scfg);
    } else {
        const MlpSurrogate model = load_checkpoint(pick(o.model, dir / "model.json"));
        if (model.task != ds.task) throw ConfigError("model was trained on " + model.task + ", dataset is " + ds.task);
        if (model.input_dim() != problem.task().space.dim() || model.outputs() != ds.objectives()) {
            throw DimensionError("model shape does not match the task");
        }
        batch = offline_search(nn_objectives(model), ds, problem, scfg);
    }
    batch.provenance["method"] = method.name();
    batch.provenance["task"] = ds.task;
    batch.provenance["generations"] = std::to_string(scfg.generations);
    add_config_provenance(batch.provenance, cfg);
    const fs::path file = pick(o.batch, dir / "batch.json");
    write_text_file(file, batch_to_json(batch));
    out << "search produced " << batch.genotypes.size() << " candidates (front " << batch.front_size
        << (batch.collapse ? ", collapsed" : "") << ") -> " << file.string() << "\n";
    return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const fs::path dir = resolve_out(o, cfg);
    DirLock lock(dir);
    const CandidateBatch batch = batch_from_json(read_text_file(pick(o.batch, dir / "batch.json")));
    const OfflineDataset ds = load_dataset(pick(o.eval_data, dir / "train"));
    if (batch.task != ds.task) throw ConfigError("batch task " + batch.task + " does not match dataset " + ds.task);
    const Problem problem = problem_for(ds);
    EvalReport r = evaluate_batch(problem, ds, batch, cfg.percentile);
    r.provenance["percentile"] = format_double(cfg.percentile);
    const fs::path file = pick(o.report, dir / "report.json");
    write_text_file(file, report_to_json(r));
    out << "HV@" << cfg.percentile << " = " << format_double(r.hv) << " (HV@100 " << format_double(r.hv_100)
        << ", HV@50 " << format_double(r.hv_50) << ", D(best) " << format_double(r.d_best_hv) << ")";
    if (r.igd) out << " IGD " << format_double(*r.igd);
    out << " -> " << file.string() << "\n";
    return 0;
}

int cmd_report(const Options& o, std::ostream& out) {
    if (o.inputs.empty()) throw ConfigError("report needs report files");
    std::vector<RunRecord> records;
    std::set<std::pair<std::string, std::uint64_t>> best_seen;
    std::map<std::string, std::map<std::string, std::pair<std::uint64_t, PointSet>>> scatter;
    for (const auto& path : o.inputs) {
        const EvalReport r = report_from_json(read_text_file(path));
        auto field = [&](const std::string& k) {
            const auto it = r.provenance.find(k);
            if (it == r.provenance.end()) throw SchemaError(path + ": report provenance lacks '" + k + "'");
            return it->second;
        };
        const std::string method = field("method");
        const std::uint64_t seed = std::stoull(field("seed"));
        records.push_back({method, r.task, seed, r.hv});
        if (best_seen.insert({r.task, seed}).second) records.push_back({"D(best)", r.task, seed, r.d_best_hv});
        auto& slot = scatter[r.task][method];
        if (slot.second.empty() || seed < slot.first) slot = {seed, r.objectives};
    }
    const RankTable table = build_rank_table(records);
    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    DirLock lock(dir);
    write_text_file(dir / "rank_table.csv", rank_table_csv(table));
    const std::string text = rank_table_text(table);
    write_text_file(dir / "rank_table.txt", text);
    if (o.svg) {
        for (const auto& [task, methods] : scatter) {
            std::vector<std::pair<std::string, PointSet>> series;
            for (const auto& [m, s] : methods) {
                if (!s.second.empty() && s.second.front().size() >= 2) series.emplace_back(m, s.second);
            }
            if (!series.empty()) write_text_file(dir / ("scatter_" + task + ".svg"), scatter_svg(series, task));
        }
    }
    out << text;
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Offline multi-objective optimization pipeline"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("--task", o.task, "task name, e.g. zdt1, dtlz2, mo_kp_50");
        c->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) {
            o.seed = s;
            o.seed_set = true;
        }, "seed");
        c->add_option("--out", o.out, "run directory");
        c->add_option("--config", o.config_file, "key = value configuration file")->check(CLI::ExistingFile);
    };

    auto* gen = app.add_subcommand("gen-instance", "generate a combinatorial instance");
    common(gen);
    gen->add_option("--size", o.size, "custom instance size");

    auto* collect = app.add_subcommand("collect", "collect an offline dataset with MOEAs");
    common(collect);
    collect->add_option("--instance", o.instance, "instance file");
    collect->add_option("--size", o.size, "custom instance size");

    auto* build = app.add_subcommand("build-train", "remove the best points to form the training set");
    common(build);
    build->add_option("--data", o.data, "collected dataset directory");
    build->add_option("--remove-top", o.remove_top, "percentage of best points to remove");

    auto* trn = app.add_subcommand("train", "train a network surrogate");
    common(trn);
    trn->add_option("--method", o.method, "surrogate method");
    trn->add_option("--data", o.data, "training set directory");
    trn->add_option("--model", o.model, "checkpoint to write");

    auto* srch = app.add_subcommand("search", "search the surrogate for a candidate batch");
    common(srch);
    srch->add_option("--method", o.method, "surrogate method");
    srch->add_option("--data", o.data, "training set directory");
    srch->add_option("--model", o.model, "checkpoint to read");
    srch->add_option("--batch", o.batch, "batch file to write");
    srch->add_option("--pop-size", o.pop_size, "population and batch size");
    srch->add_option("--generations", o.generations, "search generations");

    auto* eval = app.add_subcommand("evaluate", "score a batch with the true objectives");
    common(eval);
    eval->add_option("--percentile", o.percentile, "percentile P in (0, 100]");
    eval->add_option("--batch", o.batch, "batch file to read");
    eval->add_option("--data", o.eval_data, "training set directory (evaluation normalization and D(best))");
    eval->add_option("--report", o.report, "report file to write");

    auto* rep = app.add_subcommand("report", "rank methods across tasks from report files");
    rep->add_option("--out", o.out, "directory for the rank table");
    rep->add_flag("--svg", o.svg, "also write objective-space scatter plots");
    rep->add_option("reports", o.inputs, "report JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*gen) return cmd_gen_instance(o, out);
        if (*collect) return cmd_collect(o, out, err);
        if (*build) return cmd_build_train(o, out);
        if (*trn) return cmd_train(o, out);
        if (*srch) return cmd_search(o, out);
        if (*eval) return cmd_evaluate(o, out);
        if (*rep) return cmd_report(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace offmoo::cli
