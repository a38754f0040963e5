#pragma once

#include "offmoo/datagen.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

namespace fixture {

// Dataset assembled directly from genotypes, scored by the task oracle.
inline offmoo::OfflineDataset make_dataset(const offmoo::Problem& problem, std::vector<offmoo::Genotype> xs) {
    offmoo::OfflineDataset ds;
    ds.task = problem.task().name;
    ds.instance = problem.instance();
    ds.y_raw = problem.evaluate_all(xs);
    ds.x = std::move(xs);
    ds.stats = offmoo::fit_norm_stats(ds.y_raw);
    ds.eval_stats = ds.stats;
    ds.y_norm = ds.stats.normalize(ds.y_raw);
    ds.reference = offmoo::nadir_reference(ds.y_raw);
    return ds;
}

inline offmoo::OfflineDataset random_dataset(const offmoo::Problem& problem, std::size_t n, std::uint64_t seed) {
    offmoo::Rng rng(seed);
    std::vector<offmoo::Genotype> xs;
    xs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) xs.push_back(problem.sample(rng));
    return make_dataset(problem, std::move(xs));
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("offmoo_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::FILE* f = std::fopen(p.string().c_str(), "rb");
    if (!f) return {};
    std::string out;
    char buf[65536];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
    return out;
}

}  // namespace fixture
