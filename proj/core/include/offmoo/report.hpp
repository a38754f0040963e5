#pragma once

#include "offmoo/common.hpp"

#include <map>
#include <string>
#include <vector>

namespace offmoo {

/// One scored run: a method on a task under one seed.
struct RunRecord {
    std::string method;
    std::string task;
    std::uint64_t seed = 0;
    double hv = 0.0;
};

struct CellStats {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation over seeds
    std::size_t count = 0;
};

struct RankTable {
    std::vector<std::string> methods;  // sorted
    std::vector<std::string> tasks;    // sorted
    std::map<std::pair<std::string, std::string>, CellStats> cells;  // (method, task)
    std::map<std::pair<std::string, std::string>, double> task_ranks;
    std::map<std::string, double> average_rank;
};

/// Competition ranks where higher values are better; ties share the mean of
/// the ranks they span.
std::vector<double> rank_descending(const std::vector<double>& values);

/// Throws ConfigError when fewer than two methods are present or when some
/// method lacks a task another method has.
RankTable build_rank_table(const std::vector<RunRecord>& records);

std::string rank_table_csv(const RankTable& table);
std::string rank_table_text(const RankTable& table);

/// Scatter plot of the first two objectives of each named point set.
std::string scatter_svg(const std::vector<std::pair<std::string, PointSet>>& series, const std::string& title);

}  // namespace offmoo
