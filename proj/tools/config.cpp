#include "config.hpp"

#include "offmoo/io.hpp"

#include <charconv>
#include <sstream>

namespace offmoo::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

std::string join_algorithms(const std::vector<Algorithm>& a) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + to_string(a[i]);
    return s;
}

}  // namespace

std::string MethodSpec::name() const {
    if (gp) return "gp";
    std::string s = to_string(kind);
    if (mtl != MtlKind::none) s += "+" + to_string(mtl);
    if (prune) s += "+prune";
    return s;
}

MethodSpec parse_method(const std::string& text) {
    MethodSpec m;
    const auto parts = split(text, '+');
    if (parts.empty() || parts.front().empty()) throw ConfigError("empty method");
    if (parts.front() == "gp") {
        if (parts.size() > 1) throw ConfigError("the gp method takes no modifiers");
        m.gp = true;
        return m;
    }
    m.kind = model_kind_from_string(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) {
        if (parts[i] == "prune") m.prune = true;
        else if (parts[i] == "gradnorm" || parts[i] == "pcgrad") m.mtl = mtl_kind_from_string(parts[i]);
        else throw ConfigError("unknown method modifier: " + parts[i]);
    }
    if (m.kind == ModelKind::multiple && m.mtl != MtlKind::none) {
        throw ConfigError("multi-task techniques apply to end_to_end and multi_head only");
    }
    return m;
}

RunConfig::RunConfig() {
    collection.max_size = 10000;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const std::string& v = value;
    if (key == "task") task = v;
    else if (key == "seed") seed = to_u64(key, v);
    else if (key == "seeds") {
        seeds.clear();
        for (const auto& s : split(v, ',')) seeds.push_back(to_u64(key, s));
        if (seeds.empty()) throw ConfigError("seeds must not be empty");
    }
    else if (key == "instance_size") instance_size = to_u64(key, v);
    else if (key == "algorithms") {
        collection.algorithms.clear();
        for (const auto& s : split(v, ',')) collection.algorithms.push_back(algorithm_from_string(s));
    }
    else if (key == "runs") collection.runs = to_u64(key, v);
    else if (key == "collect_pop_size") collection.pop_size = to_u64(key, v);
    else if (key == "collect_generations") collection.generations = to_u64(key, v);
    else if (key == "amateur_p") collection.amateur_p = to_double(key, v);
    else if (key == "collect_every") collection.collect_every = to_u64(key, v);
    else if (key == "max_size") collection.max_size = to_u64(key, v);
    else if (key == "remove_top_percent") remove_top_percent = to_double(key, v);
    else if (key == "method") method = v;
    else if (key == "epochs") train.epochs = to_u64(key, v);
    else if (key == "batch_size") train.batch_size = to_u64(key, v);
    else if (key == "lr") train.lr = to_double(key, v);
    else if (key == "decay") train.decay = to_double(key, v);
    else if (key == "hidden") train.hidden = to_u64(key, v);
    else if (key == "gradnorm_alpha") train.gradnorm_alpha = to_double(key, v);
    else if (key == "prune_keep_fraction") prune_keep_fraction = to_double(key, v);
    else if (key == "gp_points") gp.points = to_u64(key, v);
    else if (key == "beta") gp.beta = to_double(key, v);
    else if (key == "search_algorithm") search.algorithm = algorithm_from_string(v);
    else if (key == "pop_size") search.pop_size = to_u64(key, v);
    else if (key == "search_generations") search_generations = to_u64(key, v);
    else if (key == "percentile") percentile = to_double(key, v);
    else if (key == "sbx_eta") collection.ops.sbx_eta = search.ops.sbx_eta = to_double(key, v);
    else if (key == "sbx_prob") collection.ops.sbx_prob = search.ops.sbx_prob = to_double(key, v);
    else if (key == "pm_eta") collection.ops.pm_eta = search.ops.pm_eta = to_double(key, v);
    else if (key == "pm_prob") collection.ops.pm_prob = search.ops.pm_prob = to_double(key, v);
    else throw ConfigError("unknown config key: " + key);
}

std::map<std::string, std::string> RunConfig::entries() const {
    std::string seed_list;
    for (std::size_t i = 0; i < seeds.size(); ++i) seed_list += (i ? "," : "") + std::to_string(seeds[i]);
    return {
        {"task", task},
        {"seed", std::to_string(seed)},
        {"seeds", seed_list},
        {"instance_size", std::to_string(instance_size)},
        {"algorithms", join_algorithms(collection.algorithms)},
        {"runs", std::to_string(collection.runs)},
        {"collect_pop_size", std::to_string(collection.pop_size)},
        {"collect_generations", std::to_string(collection.generations)},
        {"amateur_p", format_double(collection.amateur_p)},
        {"collect_every", std::to_string(collection.collect_every)},
        {"max_size", std::to_string(collection.max_size)},
        {"remove_top_percent", format_double(remove_top_percent)},
        {"method", method},
        {"epochs", std::to_string(train.epochs)},
        {"batch_size", std::to_string(train.batch_size)},
        {"lr", format_double(train.lr)},
        {"decay", format_double(train.decay)},
        {"hidden", std::to_string(train.hidden)},
        {"gradnorm_alpha", format_double(train.gradnorm_alpha)},
        {"prune_keep_fraction", format_double(prune_keep_fraction)},
        {"gp_points", std::to_string(gp.points)},
        {"beta", format_double(gp.beta)},
        {"search_algorithm", to_string(search.algorithm)},
        {"pop_size", std::to_string(search.pop_size)},
        {"search_generations", std::to_string(search_generations)},
        {"percentile", format_double(percentile)},
        {"sbx_eta", format_double(search.ops.sbx_eta)},
        {"sbx_prob", format_double(search.ops.sbx_prob)},
        {"pm_eta", format_double(search.ops.pm_eta)},
        {"pm_prob", format_double(search.ops.pm_prob)},
    };
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    apply_config_text(cfg, read_text_file(path));
}

}  // namespace offmoo::cli
