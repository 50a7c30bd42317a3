#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "feedermarket/clearing.hpp"
#include "feedermarket/oracle.hpp"
#include "feedermarket/results.hpp"
#include "feedermarket/runtime.hpp"
#include "feedermarket/scenario.hpp"

namespace py = pybind11;
using namespace fm;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Feeder-based local energy market clearing";

    py::register_exception<OneSidedMarket>(m, "OneSidedMarket");
    py::register_exception<ScenarioError>(m, "ScenarioError");
    py::register_exception<ProtocolError>(m, "ProtocolError");

    py::enum_<Step2Selection>(m, "Step2Selection")
        .value("paper_rule", Step2Selection::paper_rule)
        .value("all_residual", Step2Selection::all_residual);
    py::enum_<Step2Response>(m, "Step2Response")
        .value("coupled", Step2Response::coupled)
        .value("literal", Step2Response::literal);

    py::class_<ConsumerParams>(m, "ConsumerParams")
        .def(py::init([](PlayerId id, int area, double omega, double mu, double d_min,
                         double d_max) {
                 return ConsumerParams{std::move(id), area, omega, mu, d_min, d_max};
             }),
             py::arg("id"), py::arg("area"), py::arg("omega"), py::arg("mu"),
             py::arg("d_min") = 0.0, py::arg("d_max") = 0.0)
        .def_readwrite("id", &ConsumerParams::id)
        .def_readwrite("area", &ConsumerParams::area)
        .def_readwrite("omega", &ConsumerParams::omega)
        .def_readwrite("mu", &ConsumerParams::mu)
        .def_readwrite("d_min", &ConsumerParams::d_min)
        .def_readwrite("d_max", &ConsumerParams::d_max)
        .def("knee", &ConsumerParams::knee);

    py::class_<ProsumerParams>(m, "ProsumerParams")
        .def(py::init([](PlayerId id, int area, double a, double b, double gamma, double s_min,
                         double s_max) {
                 return ProsumerParams{std::move(id), area, a, b, gamma, s_min, s_max};
             }),
             py::arg("id"), py::arg("area"), py::arg("a"), py::arg("b"), py::arg("gamma") = 0.0,
             py::arg("s_min") = 0.0, py::arg("s_max") = 0.0)
        .def_readwrite("id", &ProsumerParams::id)
        .def_readwrite("area", &ProsumerParams::area)
        .def_readwrite("a", &ProsumerParams::a)
        .def_readwrite("b", &ProsumerParams::b)
        .def_readwrite("gamma", &ProsumerParams::gamma)
        .def_readwrite("s_min", &ProsumerParams::s_min)
        .def_readwrite("s_max", &ProsumerParams::s_max);

    py::class_<PlayerAllocation>(m, "PlayerAllocation")
        .def_readonly("id", &PlayerAllocation::id)
        .def_readonly("q_intra", &PlayerAllocation::q_intra)
        .def_readonly("q_inter", &PlayerAllocation::q_inter)
        .def_readonly("q_total", &PlayerAllocation::q_total);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("eta", &SolverConfig::eta)
        .def_readwrite("epsilon", &SolverConfig::epsilon)
        .def_readwrite("max_iters", &SolverConfig::max_iters)
        .def_readwrite("lambda_init", &SolverConfig::lambda_init)
        .def_readwrite("step2_selection", &SolverConfig::step2_selection)
        .def_readwrite("step2_response", &SolverConfig::step2_response);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("name", &Scenario::name)
        .def_readwrite("areas", &Scenario::areas)
        .def_readwrite("consumers", &Scenario::consumers)
        .def_readwrite("prosumers", &Scenario::prosumers)
        .def_readwrite("solver", &Scenario::solver);

    py::class_<PopulationSpec>(m, "PopulationSpec")
        .def(py::init<>())
        .def_readwrite("name", &PopulationSpec::name)
        .def_readwrite("num_areas", &PopulationSpec::num_areas)
        .def_readwrite("sellers", &PopulationSpec::sellers)
        .def_readwrite("buyers", &PopulationSpec::buyers)
        .def_readwrite("seed", &PopulationSpec::seed)
        .def_readwrite("solver", &PopulationSpec::solver);

    py::class_<TrajectoryPoint>(m, "TrajectoryPoint")
        .def_readonly("iteration", &TrajectoryPoint::iteration)
        .def_readonly("lambda_", &TrajectoryPoint::lambda)
        .def_readonly("supply", &TrajectoryPoint::supply)
        .def_readonly("demand", &TrajectoryPoint::demand);

    py::class_<ClearingOutcome>(m, "ClearingOutcome")
        .def_readonly("price", &ClearingOutcome::price)
        .def_readonly("iterations", &ClearingOutcome::iterations)
        .def_readonly("converged", &ClearingOutcome::converged)
        .def_readonly("one_sided", &ClearingOutcome::one_sided)
        .def_readonly("wall_time", &ClearingOutcome::wall_time)
        .def_readonly("traded", &ClearingOutcome::traded)
        .def_readonly("seller_quantities", &ClearingOutcome::seller_quantities)
        .def_readonly("buyer_quantities", &ClearingOutcome::buyer_quantities)
        .def_readonly("trajectory", &ClearingOutcome::trajectory);

    py::class_<TwoStepOutcome>(m, "TwoStepOutcome")
        .def_readonly("area_outcomes", &TwoStepOutcome::area_outcomes)
        .def_readonly("inter_outcome", &TwoStepOutcome::inter_outcome)
        .def_readonly("consumer_allocations", &TwoStepOutcome::consumer_allocations)
        .def_readonly("prosumer_allocations", &TwoStepOutcome::prosumer_allocations)
        .def_readonly("welfare", &TwoStepOutcome::welfare)
        .def_readonly("traded_energy", &TwoStepOutcome::traded_energy)
        .def_readonly("composed_time", &TwoStepOutcome::composed_time)
        .def("converged", &TwoStepOutcome::converged);

    py::class_<EquilibriumResult>(m, "EquilibriumResult")
        .def_readonly("price", &EquilibriumResult::price)
        .def_readonly("traded", &EquilibriumResult::traded)
        .def_readonly("residual", &EquilibriumResult::residual)
        .def_readonly("bracket_width", &EquilibriumResult::bracket_width);

    m.def("utility_value", &utility_value, py::arg("consumer"), py::arg("d"));
    m.def("cost_value", &cost_value, py::arg("prosumer"), py::arg("s"));
    m.def("consumer_surplus", &consumer_surplus);
    m.def("prosumer_surplus", &prosumer_surplus);
    m.def("consumer_best_response", &consumer_best_response, py::arg("consumer"),
          py::arg("lambda_"), py::arg("committed"), py::arg("lo"), py::arg("hi"));
    m.def("prosumer_best_response", &prosumer_best_response, py::arg("prosumer"),
          py::arg("lambda_"), py::arg("committed"), py::arg("lo"), py::arg("hi"));
    m.def("social_welfare", &social_welfare, py::arg("demands"), py::arg("supplies"));

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("save_scenario", &save_scenario, py::arg("scenario"), py::arg("path"));
    m.def("generate_population", &generate_population, py::arg("spec"));
    m.def("validate_scenario", [](const Scenario& sc) { validate(sc); });

    m.def("run_2smc", &run_2smc, py::arg("scenario"), py::arg("config"));
    m.def("run_1smc", &run_1smc, py::arg("scenario"), py::arg("config"));
    m.def("run_distributed", &run_distributed, py::arg("scenario"), py::arg("config"));

    m.def(
        "bisect_equilibrium",
        [](const Scenario& sc, double tol_price, double tol_qty) {
            std::vector<SellerSlot> sellers;
            std::vector<BuyerSlot> buyers;
            for (const auto& p : sc.prosumers) sellers.push_back({p, 0.0, p.s_min, p.s_max});
            for (const auto& c : sc.consumers) buyers.push_back({c, 0.0, c.d_min, c.d_max});
            return bisect_equilibrium(sellers, buyers, tol_price, tol_qty);
        },
        py::arg("scenario"), py::arg("tol_price") = 1e-6, py::arg("tol_qty") = 1e-3,
        "Single-price equilibrium of the whole scenario by bisection");

    m.def(
        "write_results",
        [](const Scenario& sc, const TwoStepOutcome& out, const std::filesystem::path& dir) {
            write_results(sc, out, dir);
        },
        py::arg("scenario"), py::arg("outcome"), py::arg("dir"));
}
