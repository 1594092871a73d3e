#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "patrol/error.hpp"
#include "patrol/evaluator.hpp"
#include "patrol/generators.hpp"
#include "patrol/graph.hpp"
#include "patrol/optimizer.hpp"
#include "patrol/strategy.hpp"
#include "patrol/version.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace patrol;

namespace {

// Documents cross the boundary through Python's json module.
py::object to_py(const json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

json from_py(const py::handle& obj) {
    return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

std::vector<int> mem_vector(const PatrollingGraph& g, const py::object& mem) {
    if (py::isinstance<py::int_>(mem)) return std::vector<int>(g.n_vertices(), mem.cast<int>());
    std::vector<int> out(g.n_vertices(), 0);
    for (const auto& [key, value] : mem.cast<py::dict>()) out[g.vertex(key.cast<std::string>())] = value.cast<int>();
    return out;
}

AttackTimeRule attack_rule(const std::string& s) {
    if (s == "standard") return AttackTimeRule::standard;
    if (s == "extended") return AttackTimeRule::extended;
    throw ValidationError("unknown attack-time rule " + s);
}

BetaRule beta_rule(const std::string& s) {
    if (s == "perfect") return BetaRule::perfect;
    if (s == "uniform") return BetaRule::uniform;
    throw ValidationError("unknown detection rule " + s);
}

OptimizerConfig make_config(const py::kwargs& kw) {
    OptimizerConfig cfg;
    for (const auto& [key, value] : kw) {
        const auto k = key.cast<std::string>();
        if (k == "delta") cfg.delta = value.cast<double>();
        else if (k == "threshold") cfg.threshold = value.cast<double>();
        else if (k == "max_iters") cfg.max_iters = value.cast<int>();
        else if (k == "patience") cfg.patience = value.cast<int>();
        else if (k == "step_scale") cfg.step_scale = value.cast<double>();
        else if (k == "margin") cfg.softening.margin = value.cast<double>();
        else if (k == "temperature") cfg.softening.temperature = value.cast<double>();
        else if (k == "eps_support") cfg.softening.eps_support = value.cast<double>();
        else if (k == "normalization") {
            const auto s = value.cast<std::string>();
            if (s == "full") cfg.normalization = Normalization::full;
            else if (s == "pivot") cfg.normalization = Normalization::pivot;
            else throw ValidationError("unknown normalization " + s);
        } else if (k == "gradient") {
            const auto s = value.cast<std::string>();
            if (s == "adjoint") cfg.route = GradientRoute::adjoint;
            else if (s == "forward") cfg.route = GradientRoute::forward;
            else throw ValidationError("unknown gradient route " + s);
        } else {
            throw ValidationError("unknown optimizer option " + k);
        }
    }
    cfg.validate();
    return cfg;
}

py::object slot_json(const PatrollingGraph& g, const StrategyIndex& idx, int e) {
    const Slot& s = idx.slot(e);
    const MemPair a = idx.pair(s.src), b = idx.pair(s.dst);
    return py::make_tuple(py::make_tuple(g.id(a.vertex), a.memory + 1), py::make_tuple(g.id(b.vertex), b.memory + 1));
}

}  // namespace

PYBIND11_MODULE(_patrolsynth, m) {
    m.doc() = "Regular patrolling strategy synthesis";
    m.attr("__version__") = std::string(kVersion);

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<PatrollingGraph>(m, "Graph")
        .def_static("from_json", [](const std::string& text) { return parse_graph(text); })
        .def_static("from_dict", [](const py::dict& d) { return graph_from_json(from_py(d)); })
        .def("to_json", [](const PatrollingGraph& g) { return serialize_graph(g); })
        .def("to_dict", [](const PatrollingGraph& g) { return to_py(graph_to_json(g)); })
        .def_property_readonly("n_vertices", &PatrollingGraph::n_vertices)
        .def_property_readonly("n_edges", &PatrollingGraph::n_edges)
        .def_property_readonly("n_targets", &PatrollingGraph::n_targets)
        .def_property_readonly("ids", &PatrollingGraph::ids)
        .def_property_readonly("alpha_max", &PatrollingGraph::alpha_max)
        .def("strongly_connected", [](const PatrollingGraph& g) { return strongly_connected(g); })
        .def("__repr__", [](const PatrollingGraph& g) {
            return "<Graph vertices=" + std::to_string(g.n_vertices()) +
                   " targets=" + std::to_string(g.n_targets()) + " edges=" + std::to_string(g.n_edges()) + ">";
        });

    m.def("gen_office", [](int floors, std::optional<double> detection, std::optional<int> attack_time) {
        return gen_office(floors, OfficeOverrides{detection, attack_time});
    }, py::arg("floors") = 1, py::arg("detection") = py::none(), py::arg("attack_time") = py::none());
    m.def("gen_office_tight", &gen_office_tight);
    m.def("gen_grid", [](int n, int k, std::uint64_t seed, const std::string& attack, const std::string& beta) {
        GridSpec spec;
        spec.n = n;
        spec.k = k;
        spec.seed = seed;
        spec.attack_time_rule = attack_rule(attack);
        spec.beta_rule = beta_rule(beta);
        return gen_grid(spec);
    }, py::arg("n") = 4, py::arg("k") = 10, py::arg("seed") = 0, py::arg("attack_rule") = "standard",
       py::arg("beta_rule") = "perfect");
    m.def("gen_points", [](const std::vector<Point>& points, std::uint64_t seed, const std::string& attack,
                           const std::string& beta) {
        PointSpec spec;
        spec.seed = seed;
        spec.attack_time_rule = attack_rule(attack);
        spec.beta_rule = beta_rule(beta);
        return gen_points_complete(points, spec);
    }, py::arg("points"), py::arg("seed") = 0, py::arg("attack_rule") = "extended", py::arg("beta_rule") = "uniform");

    m.def("uniform_strategy", [](const PatrollingGraph& g, const py::object& mem) {
        const StrategyIndex idx(g, mem_vector(g, mem));
        return to_py(strategy_to_json(g, idx, uniform_strategy(idx)));
    }, py::arg("graph"), py::arg("mem") = 1);
    m.def("random_strategy", [](const PatrollingGraph& g, const py::object& mem, std::uint64_t seed) {
        const StrategyIndex idx(g, mem_vector(g, mem));
        return to_py(strategy_to_json(g, idx, random_strategy(idx, seed)));
    }, py::arg("graph"), py::arg("mem") = 1, py::arg("seed") = 0);

    m.def("evaluate", [](const PatrollingGraph& g, const py::dict& strategy, double margin, double eps_support) {
        const auto [idx, s] = strategy_from_json(g, from_py(strategy));
        const ProtectionTable t = protection_table(g, idx, s, {.gradients = false});
        const RvalReport r = hard_value(t, g, idx, s, eps_support, margin);
        return to_py(report_to_json(g, idx, t, r));
    }, py::arg("graph"), py::arg("strategy"), py::arg("margin") = 0.0, py::arg("eps_support") = 1e-6);

    m.def("protection_table", [](const PatrollingGraph& g, const py::dict& strategy) {
        const auto [idx, s] = strategy_from_json(g, from_py(strategy));
        const ProtectionTable t = protection_table(g, idx, s, {.gradients = false});
        py::list slots, targets, values;
        for (int e = 0; e < static_cast<int>(idx.n_slots()); ++e) slots.append(slot_json(g, idx, e));
        const auto tv = g.target_vertices();
        for (std::size_t ti = 0; ti < tv.size(); ++ti) {
            targets.append(g.id(tv[ti]));
            py::list row;
            for (int e = 0; e < static_cast<int>(idx.n_slots()); ++e) row.append(t.value(e, static_cast<int>(ti)));
            values.append(row);
        }
        py::dict out;
        out["slots"] = slots;
        out["targets"] = targets;
        out["values"] = values;
        return out;
    }, py::arg("graph"), py::arg("strategy"));

    m.def("optimize", [](const PatrollingGraph& g, const py::dict& initial, const py::kwargs& kw) {
        const OptimizerConfig cfg = make_config(kw);
        const auto [idx, s] = strategy_from_json(g, from_py(initial));
        OptRun run;
        {
            py::gil_scoped_release release;
            run = optimize(g, idx, s, cfg);
        }
        py::list trace;
        for (const auto& p : run.trace) trace.append(p.value);
        py::dict out;
        out["value"] = run.final_value;
        out["strategy"] = to_py(strategy_to_json(g, idx, run.final_strategy));
        out["trace"] = trace;
        out["iterations"] = run.iterations;
        return out;
    }, py::arg("graph"), py::arg("initial"));

    m.def("solve", [](const PatrollingGraph& g, const py::object& mem, int restarts, std::uint64_t seed,
                      int threads, const py::kwargs& kw) {
        const OptimizerConfig cfg = make_config(kw);
        const std::vector<int> mv = mem_vector(g, mem);
        BestResult res;
        {
            py::gil_scoped_release release;
            res = regstar(g, mv, restarts, cfg, seed, threads);
        }
        const StrategyIndex idx(g, mv);
        py::dict out;
        out["value"] = res.best.final_value;
        out["strategy"] = to_py(strategy_to_json(g, idx, res.best.final_strategy));
        out["iterations"] = res.best.iterations;
        out["best_restart"] = res.best_restart;
        out["all_values"] = res.all_values;
        out["close_fraction"] = res.close_fraction;
        return out;
    }, py::arg("graph"), py::arg("mem") = 1, py::arg("restarts") = 10, py::arg("seed") = 0, py::arg("threads") = 1);
}
