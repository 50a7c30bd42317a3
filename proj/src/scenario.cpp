#include "feedermarket/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fm {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw ScenarioError("unknown field '" + key + "' in " + where);
}

json solver_to_json(const SolverConfig& cfg) {
    json j;
    if (cfg.eta > 0.0)
        j["eta"] = cfg.eta;
    else
        j["eta"] = "auto";
    j["epsilon"] = cfg.epsilon;
    j["max_iters"] = cfg.max_iters;
    j["lambda_init"] = cfg.lambda_init;
    j["step2_selection"] = to_string(cfg.step2_selection);
    j["step2_response"] = to_string(cfg.step2_response);
    return j;
}

SolverConfig solver_from_json(const json& j) {
    check_keys(j, {"eta", "epsilon", "max_iters", "lambda_init", "step2_selection",
                   "step2_response"},
               "solver");
    SolverConfig cfg;
    if (j.contains("eta")) {
        if (j["eta"].is_string()) {
            if (j["eta"] != "auto") throw ScenarioError("solver.eta must be a number or \"auto\"");
            cfg.eta = 0.0;
        } else {
            cfg.eta = j["eta"].get<double>();
        }
    }
    if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
    if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
    if (j.contains("lambda_init")) cfg.lambda_init = j["lambda_init"].get<double>();
    if (j.contains("step2_selection"))
        cfg.step2_selection = step2_selection_from_string(j["step2_selection"].get<std::string>());
    if (j.contains("step2_response"))
        cfg.step2_response = step2_response_from_string(j["step2_response"].get<std::string>());
    return cfg;
}

}  // namespace

void validate(const Scenario& sc) {
    std::set<int> areas(sc.areas.begin(), sc.areas.end());
    if (areas.size() != sc.areas.size()) throw ScenarioError("duplicate area ids");
    std::set<PlayerId> ids;
    auto check_id = [&](const PlayerId& id, int area) {
        if (id.empty()) throw ScenarioError("player with empty id");
        if (!ids.insert(id).second) throw ScenarioError("duplicate player id " + id);
        if (!areas.count(area))
            throw ScenarioError("player " + id + " references unknown area " +
                                std::to_string(area));
    };
    for (const auto& c : sc.consumers) {
        check_id(c.id, c.area);
        if (!(c.mu > 0.0)) throw ScenarioError("consumer " + c.id + ": mu must be > 0");
        if (!(c.omega > 0.0)) throw ScenarioError("consumer " + c.id + ": omega must be > 0");
        if (c.d_min < 0.0 || c.d_min > c.d_max)
            throw ScenarioError("consumer " + c.id + ": need 0 <= d_min <= d_max");
    }
    for (const auto& p : sc.prosumers) {
        check_id(p.id, p.area);
        if (!(p.a > 0.0)) throw ScenarioError("prosumer " + p.id + ": a must be > 0");
        if (p.b < 0.0) throw ScenarioError("prosumer " + p.id + ": b must be >= 0");
        if (p.gamma < 0.0) throw ScenarioError("prosumer " + p.id + ": gamma must be >= 0");
        if (p.s_min < 0.0 || p.s_min > p.s_max)
            throw ScenarioError("prosumer " + p.id + ": need 0 <= s_min <= s_max");
    }
    try {
        fm::validate(sc.solver);
    } catch (const std::domain_error& e) {
        throw ScenarioError(e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ScenarioError("parse error in " + path.string() + ": " + e.what());
    }

    check_keys(j, {"name", "areas", "prosumers", "consumers", "solver"}, "scenario");
    Scenario sc;
    try {
        sc.name = j.value("name", path.stem().string());
        sc.areas = j.at("areas").get<std::vector<int>>();
        for (const auto& jp : j.at("prosumers")) {
            check_keys(jp, {"id", "area", "a", "b", "gamma", "s_min", "s_max"}, "prosumer");
            ProsumerParams p;
            p.id = jp.at("id").get<PlayerId>();
            p.area = jp.at("area").get<int>();
            p.a = jp.at("a").get<double>();
            p.b = jp.at("b").get<double>();
            p.gamma = jp.value("gamma", 0.0);
            p.s_min = jp.value("s_min", 0.0);
            p.s_max = jp.at("s_max").get<double>();
            sc.prosumers.push_back(std::move(p));
        }
        for (const auto& jc : j.at("consumers")) {
            check_keys(jc, {"id", "area", "omega", "mu", "d_min", "d_max"}, "consumer");
            ConsumerParams c;
            c.id = jc.at("id").get<PlayerId>();
            c.area = jc.at("area").get<int>();
            c.omega = jc.at("omega").get<double>();
            c.mu = jc.at("mu").get<double>();
            c.d_min = jc.value("d_min", 0.0);
            c.d_max = jc.at("d_max").get<double>();
            sc.consumers.push_back(std::move(c));
        }
        if (j.contains("solver")) sc.solver = solver_from_json(j["solver"]);
    } catch (const json::exception& e) {
        throw ScenarioError("invalid scenario " + path.string() + ": " + e.what());
    }
    validate(sc);
    return sc;
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
    json j;
    j["name"] = sc.name;
    j["areas"] = sc.areas;
    j["prosumers"] = json::array();
    for (const auto& p : sc.prosumers)
        j["prosumers"].push_back({{"id", p.id},
                                  {"area", p.area},
                                  {"a", p.a},
                                  {"b", p.b},
                                  {"gamma", p.gamma},
                                  {"s_min", p.s_min},
                                  {"s_max", p.s_max}});
    j["consumers"] = json::array();
    for (const auto& c : sc.consumers)
        j["consumers"].push_back({{"id", c.id},
                                  {"area", c.area},
                                  {"omega", c.omega},
                                  {"mu", c.mu},
                                  {"d_min", c.d_min},
                                  {"d_max", c.d_max}});
    j["solver"] = solver_to_json(sc.solver);

    std::ofstream out(path);
    if (!out) throw ScenarioError("cannot write scenario file " + path.string());
    out << j.dump(2) << '\n';
}

Scenario generate_population(const PopulationSpec& spec) {
    if (spec.num_areas < 1) throw std::domain_error("generate_population: need >= 1 area");
    if (spec.sellers < 0 || spec.buyers < 0 || spec.sellers + spec.buyers == 0)
        throw std::domain_error("generate_population: need positive player counts");
    auto check_range = [](const Range& r, const char* name, bool strictly_positive) {
        if (r.hi < r.lo || (strictly_positive ? !(r.lo > 0.0) : r.lo < 0.0))
            throw std::domain_error(std::string("generate_population: invalid range ") + name);
    };
    check_range(spec.a, "a", true);
    check_range(spec.mu, "mu", true);
    check_range(spec.omega, "omega", true);
    check_range(spec.b, "b", false);
    check_range(spec.caps, "caps", false);

    std::mt19937_64 rng(spec.seed);
    auto draw = [&](const Range& r) {
        return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
    };

    const int width = static_cast<int>(std::to_string(std::max(spec.sellers, spec.buyers)).size());
    auto make_id = [&](char prefix, int n) {
        std::ostringstream os;
        os << prefix;
        std::string num = std::to_string(n);
        os << std::string(width - static_cast<int>(num.size()), '0') << num;
        return os.str();
    };

    Scenario sc;
    sc.name = spec.name;
    sc.solver = spec.solver;
    for (int a = 1; a <= spec.num_areas; ++a) sc.areas.push_back(a);
    for (int i = 0; i < spec.sellers; ++i) {
        ProsumerParams p;
        p.id = make_id('P', i + 1);
        p.area = i % spec.num_areas + 1;
        p.a = draw(spec.a);
        p.b = draw(spec.b);
        p.gamma = 0.0;
        p.s_min = 0.0;
        p.s_max = draw(spec.caps);
        sc.prosumers.push_back(std::move(p));
    }
    for (int i = 0; i < spec.buyers; ++i) {
        ConsumerParams c;
        c.id = make_id('C', i + 1);
        c.area = i % spec.num_areas + 1;
        c.omega = draw(spec.omega);
        c.mu = draw(spec.mu);
        c.d_min = 0.0;
        c.d_max = draw(spec.caps);
        sc.consumers.push_back(std::move(c));
    }
    validate(sc);
    return sc;
}

}  // namespace fm
