#pragma once

#include "offmoo/datagen.hpp"
#include "offmoo/gp.hpp"
#include "offmoo/nn.hpp"
#include "offmoo/search.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace offmoo::cli {

/// A surrogate method: a network layout with optional multi-task technique
/// and data pruning, or the GP-LCB baseline. Written as e.g. "multiple",
/// "multi_head+gradnorm", "end_to_end+pcgrad+prune", "gp".
struct MethodSpec {
    bool gp = false;
    ModelKind kind = ModelKind::multiple;
    MtlKind mtl = MtlKind::none;
    bool prune = false;

    std::string name() const;
};

MethodSpec parse_method(const std::string& text);

struct RunConfig {
    std::string task;
    std::uint64_t seed = 1000;
    std::vector<std::uint64_t> seeds{1000, 2000, 3000, 4000, 5000};
    /// Instance size for combinatorial tasks; 0 takes the size in the task name.
    std::size_t instance_size = 0;

    CollectionConfig collection;
    double remove_top_percent = 40.0;

    std::string method = "multiple";
    TrainConfig train;
    /// Keep fraction used when the method asks for pruning.
    double prune_keep_fraction = 0.5;
    GpConfig gp;

    SearchConfig search;
    /// 0 selects the per-method default (50 for networks, 500 for GP).
    std::size_t search_generations = 0;

    double percentile = 100.0;

    RunConfig();

    /// Applies one key = value setting; unknown keys raise ConfigError.
    void set(const std::string& key, const std::string& value);
    /// Every setting as key = value text, in a fixed order.
    std::map<std::string, std::string> entries() const;
};

/// Parses "key = value" lines; '#' starts a comment.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

}  // namespace offmoo::cli
