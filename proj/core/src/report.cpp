#include "offmoo/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

namespace offmoo {

std::vector<double> rank_descending(const std::vector<double>& values) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

RankTable build_rank_table(const std::vector<RunRecord>& records) {
    RankTable t;
    std::set<std::string> methods;
    std::set<std::string> tasks;
    std::map<std::pair<std::string, std::string>, std::vector<double>> values;
    for (const auto& r : records) {
        methods.insert(r.method);
        tasks.insert(r.task);
        values[{r.method, r.task}].push_back(r.hv);
    }
    if (methods.size() < 2) throw ConfigError("report needs at least two methods");
    t.methods.assign(methods.begin(), methods.end());
    t.tasks.assign(tasks.begin(), tasks.end());

    std::string gaps;
    for (const auto& m : t.methods) {
        for (const auto& task : t.tasks) {
            if (!values.count({m, task})) gaps += " " + m + "/" + task;
        }
    }
    if (!gaps.empty()) throw ConfigError("inconsistent task sets across methods; missing:" + gaps);

    for (const auto& [key, v] : values) {
        CellStats c;
        c.count = v.size();
        c.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - c.mean) * (x - c.mean);
        c.std = std::sqrt(ss / static_cast<double>(v.size()));
        t.cells[key] = c;
    }
    for (const auto& m : t.methods) t.average_rank[m] = 0.0;
    for (const auto& task : t.tasks) {
        std::vector<double> means;
        for (const auto& m : t.methods) means.push_back(t.cells.at({m, task}).mean);
        const std::vector<double> r = rank_descending(means);
        for (std::size_t i = 0; i < t.methods.size(); ++i) {
            t.task_ranks[{t.methods[i], task}] = r[i];
            t.average_rank[t.methods[i]] += r[i] / static_cast<double>(t.tasks.size());
        }
    }
    return t;
}

std::string rank_table_csv(const RankTable& t) {
    std::string out = "method";
    for (const auto& task : t.tasks) out += "," + task + "_mean," + task + "_std," + task + "_rank";
    out += ",average_rank\n";
    for (const auto& m : t.methods) {
        out += m;
        for (const auto& task : t.tasks) {
            const CellStats& c = t.cells.at({m, task});
            out += "," + format_double(c.mean) + "," + format_double(c.std) + "," +
                   format_double(t.task_ranks.at({m, task}));
        }
        out += "," + format_double(t.average_rank.at(m)) + "\n";
    }
    return out;
}

std::string rank_table_text(const RankTable& t) {
    std::string out;
    char buf[128];
    for (const auto& task : t.tasks) {
        out += task + "\n";
        for (const auto& m : t.methods) {
            const CellStats& c = t.cells.at({m, task});
            std::snprintf(buf, sizeof buf, "  %-28s %.4f +- %.4f  (rank %.1f)\n", m.c_str(), c.mean, c.std,
                          t.task_ranks.at({m, task}));
            out += buf;
        }
    }
    out += "average rank\n";
    for (const auto& m : t.methods) {
        std::snprintf(buf, sizeof buf, "  %-28s %.2f\n", m.c_str(), t.average_rank.at(m));
        out += buf;
    }
    return out;
}

std::string scatter_svg(const std::vector<std::pair<std::string, PointSet>>& series, const std::string& title) {
    constexpr double kW = 480.0;
    constexpr double kH = 400.0;
    constexpr double kPad = 50.0;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& [name, pts] : series) {
        for (const auto& p : pts) {
            if (p.size() < 2) throw DimensionError("scatter_svg needs at least two objectives");
            x0 = std::min(x0, p[0]);
            x1 = std::max(x1, p[0]);
            y0 = std::min(y0, p[1]);
            y1 = std::max(y1, p[1]);
        }
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    auto sx = [&](double v) { return kPad + (v - x0) / (x1 - x0) * (kW - 2 * kPad); };
    auto sy = [&](double v) { return kH - kPad - (v - y0) / (y1 - y0) * (kH - 2 * kPad); };

    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n"
                  "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
                  kW, kH);
    out += buf;
    out += "<text x=\"" + std::to_string(static_cast<int>(kW / 2)) + "\" y=\"24\" text-anchor=\"middle\">" + title +
           "</text>\n";
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.0f\" y=\"%.0f\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" stroke=\"black\"/>\n", kPad,
                  kPad, kW - 2 * kPad, kH - 2 * kPad);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\">%.3g</text>\n"
                  "<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n"
                  "<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n"
                  "<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n",
                  kPad, kH - kPad + 16, x0, kW - kPad, kH - kPad + 16, x1, kPad - 4, kH - kPad, y0, kPad - 4,
                  kPad + 4, y1);
    out += buf;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % (sizeof colors / sizeof colors[0])];
        for (const auto& p : series[s].second) {
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", sx(p[0]),
                          sy(p[1]), color);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, "<text x=\"%.0f\" y=\"%.0f\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                      kW - kPad - 120, kPad + 16 + 16 * static_cast<double>(s), color, series[s].first.c_str());
        out += buf;
    }
    out += "</svg>\n";
    return out;
}

}  // namespace offmoo
