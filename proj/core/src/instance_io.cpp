#include "offmoo/io.hpp"
#include "offmoo/problems.hpp"

#include <nlohmann/json.hpp>

namespace offmoo {

using nlohmann::json;

namespace {

json pairs_to_json(const std::vector<std::array<double, 2>>& v) {
    json arr = json::array();
    for (const auto& p : v) arr.push_back({p[0], p[1]});
    return arr;
}

std::vector<std::array<double, 2>> pairs_from_json(const json& j) {
    std::vector<std::array<double, 2>> out;
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2) throw SchemaError("instance: expected [x, y] pairs");
        out.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return out;
}

}  // namespace

std::string instance_to_json(const CombinatorialInstance& inst) {
    json payload = json::object();
    switch (inst.kind) {
    case InstanceKind::tsp:
        payload["coords_a"] = pairs_to_json(inst.coords_a);
        payload["coords_b"] = pairs_to_json(inst.coords_b);
        break;
    case InstanceKind::cvrp:
        payload["coords"] = pairs_to_json(inst.coords_a);
        payload["demands"] = inst.demands;
        payload["capacity"] = inst.capacity;
        break;
    case InstanceKind::kp:
        payload["weights"] = inst.weights;
        payload["values"] = pairs_to_json(inst.values);
        payload["capacity"] = inst.capacity;
        break;
    case InstanceKind::portfolio:
        payload["mean_returns"] = inst.mean_returns;
        payload["covariance"] = inst.covariance;
        break;
    }
    json j = {{"kind", to_string(inst.kind)}, {"n", inst.n}, {"seed", inst.seed}, {"payload", payload}};
    return j.dump(2) + "\n";
}

CombinatorialInstance instance_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("instance: invalid JSON: ") + e.what());
    }
    try {
        CombinatorialInstance inst;
        inst.kind = instance_kind_from_string(j.at("kind").get<std::string>());
        inst.n = j.at("n").get<std::size_t>();
        inst.seed = j.at("seed").get<std::uint64_t>();
        const json& p = j.at("payload");
        switch (inst.kind) {
        case InstanceKind::tsp:
            inst.coords_a = pairs_from_json(p.at("coords_a"));
            inst.coords_b = pairs_from_json(p.at("coords_b"));
            if (inst.coords_a.size() != inst.n || inst.coords_b.size() != inst.n) {
                throw SchemaError("instance: tsp coordinate count mismatch");
            }
            break;
        case InstanceKind::cvrp:
            inst.coords_a = pairs_from_json(p.at("coords"));
            inst.demands = p.at("demands").get<std::vector<int>>();
            inst.capacity = p.at("capacity").get<double>();
            if (inst.coords_a.size() != inst.n + 1 || inst.demands.size() != inst.n) {
                throw SchemaError("instance: cvrp payload size mismatch");
            }
            break;
        case InstanceKind::kp:
            inst.weights = p.at("weights").get<std::vector<double>>();
            inst.values = pairs_from_json(p.at("values"));
            inst.capacity = p.at("capacity").get<double>();
            if (inst.weights.size() != inst.n || inst.values.size() != inst.n) {
                throw SchemaError("instance: kp payload size mismatch");
            }
            break;
        case InstanceKind::portfolio:
            inst.mean_returns = p.at("mean_returns").get<std::vector<double>>();
            inst.covariance = p.at("covariance").get<std::vector<std::vector<double>>>();
            if (inst.mean_returns.size() != inst.n || inst.covariance.size() != inst.n) {
                throw SchemaError("instance: portfolio payload size mismatch");
            }
            break;
        }
        return inst;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("instance: ") + e.what());
    }
}

void save_instance(const CombinatorialInstance& inst, const std::filesystem::path& path) {
    write_text_file(path, instance_to_json(inst));
}

CombinatorialInstance load_instance(const std::filesystem::path& path) {
    return instance_from_json(read_text_file(path));
}

}  // namespace offmoo
