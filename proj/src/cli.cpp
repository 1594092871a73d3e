#include "patrol/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "patrol/error.hpp"
#include "patrol/evaluator.hpp"
#include "patrol/generators.hpp"
#include "patrol/optimizer.hpp"
#include "patrol/oracle.hpp"
#include "patrol/rng.hpp"
#include "patrol/version.hpp"

namespace patrol {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": malformed JSON: " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + path);
    f << text;
}

std::string iso_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

std::string graph_hash(const PatrollingGraph& g) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : graph_to_json(g).dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

PatrollingGraph load_graph(const std::string& path) { return graph_from_json(read_json(path)); }

struct OptimizerFlags {
    OptimizerConfig cfg;
    std::string normalization = "full";
    std::string route = "adjoint";

    void attach(CLI::App* app) {
        app->add_option("--delta", cfg.delta, "Step schedule decay in (0,1)");
        app->add_option("--threshold", cfg.threshold, "Stop when the value gain is at most this");
        app->add_option("--max-iters", cfg.max_iters, "Iteration cap per run");
        app->add_option("--patience", cfg.patience, "Iterations without best-value gain before stopping (1: stop on the first non-improving step)");
        app->add_option("--step-scale", cfg.step_scale, "Base step multiplier");
        app->add_option("--margin", cfg.softening.margin, "Softening margin (cost units)");
        app->add_option("--temperature", cfg.softening.temperature, "Softening temperature");
        app->add_option("--eps-support", cfg.softening.eps_support, "Support threshold");
        app->add_option("--normalization", normalization, "full or pivot")
            ->check(CLI::IsMember({"full", "pivot"}));
        app->add_option("--gradient", route, "adjoint or forward")
            ->check(CLI::IsMember({"adjoint", "forward"}));
    }

    OptimizerConfig resolve() {
        cfg.normalization = normalization == "pivot" ? Normalization::pivot : Normalization::full;
        cfg.route = route == "forward" ? GradientRoute::forward : GradientRoute::adjoint;
        cfg.validate();
        return cfg;
    }
};

json config_json(const OptimizerConfig& c) {
    return {{"delta", c.delta},
            {"threshold", c.threshold},
            {"patience", c.patience},
            {"max_iters", c.max_iters},
            {"step_scale", c.step_scale},
            {"margin", c.softening.margin},
            {"temperature", c.softening.temperature},
            {"eps_support", c.softening.eps_support},
            {"normalization", c.normalization == Normalization::full ? "full" : "pivot"},
            {"gradient", c.route == GradientRoute::adjoint ? "adjoint" : "forward"}};
}

struct GenerateFlags {
    std::string family;
    int n = 4, k = 10, floors = 1, random_points = 0, box = 100;
    std::uint64_t seed = 0;
    std::string attack_rule, beta_rule, points_file;
    std::optional<double> detection;
    std::optional<int> attack_time;

    void attach(CLI::App* app) {
        app->add_option("--family", family, "grid, points or office")
            ->required()
            ->check(CLI::IsMember({"grid", "points", "office"}));
        app->add_option("--n", n, "Grid side");
        app->add_option("--k", k, "Number of grid targets");
        app->add_option("--seed", seed, "Instance seed");
        app->add_option("--attack-rule", attack_rule, "standard or extended")
            ->check(CLI::IsMember({"standard", "extended"}));
        app->add_option("--beta-rule", beta_rule, "perfect or uniform")
            ->check(CLI::IsMember({"perfect", "uniform"}));
        app->add_option("--points", points_file, "JSON file with [[x,y],...] coordinates");
        app->add_option("--random-points", random_points, "Number of random points");
        app->add_option("--box", box, "Side of the random point box");
        app->add_option("--floors", floors, "Office floors (1-3)");
        app->add_option("--detection", detection, "Override detection probability");
        app->add_option("--attack-time", attack_time, "Override attack time");
    }

    std::string describe() const {
        std::ostringstream ss;
        if (family == "grid") ss << "n=" << n << ";k=" << k << ";seed=" << seed;
        else if (family == "office") ss << "floors=" << floors;
        else if (!points_file.empty()) ss << "points=" << points_file;
        else ss << "random_points=" << random_points << ";box=" << box << ";seed=" << seed;
        if (detection) ss << ";detection=" << *detection;
        if (attack_time) ss << ";attack_time=" << *attack_time;
        return ss.str();
    }

    PatrollingGraph build() const {
        if (family == "office") return gen_office(floors, OfficeOverrides{detection, attack_time});
        PointSpec spec;
        spec.seed = seed;
        const bool grid = family == "grid";
        spec.attack_time_rule = (attack_rule.empty() ? !grid : attack_rule == "extended")
                                    ? AttackTimeRule::extended
                                    : AttackTimeRule::standard;
        spec.beta_rule = (beta_rule.empty() ? !grid : beta_rule == "uniform") ? BetaRule::uniform
                                                                              : BetaRule::perfect;
        std::vector<Point> pts;
        if (grid) {
            pts = grid_points(n, k, seed);
        } else if (!points_file.empty()) {
            json doc = read_json(points_file);
            const json& arr = doc.is_object() && doc.contains("points") ? doc["points"] : doc;
            if (!arr.is_array()) throw ValidationError("points file must hold an array of [x,y]");
            for (const json& p : arr) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
                    !p[1].is_number_integer())
                    throw ValidationError("point must be [x,y] with integer coordinates");
                pts.emplace_back(p[0].get<int>(), p[1].get<int>());
            }
        } else if (random_points > 0) {
            pts = patrol::random_points(random_points, box, seed);
        } else {
            throw UsageError("points family needs --points FILE or --random-points N");
        }
        PatrollingGraph g = gen_points_complete(pts, spec);
        if (!detection && !attack_time) return g;
        json doc = graph_to_json(g);
        for (json& v : doc["vertices"]) {
            if (detection) v["target"]["detection"] = *detection;
            if (attack_time) v["target"]["attack_time"] = *attack_time;
        }
        return graph_from_json(doc);
    }
};

double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

int cmd_check(const PatrollingGraph& g, const StrategyIndex& index, const Strategy& s,
              std::int64_t mc_samples, std::uint64_t seed, int mc_entries, double fd_step,
              const std::string& out_path, std::ostream& out) {
    EvalOptions opts;
    ProtectionTable table = protection_table(g, index, s, opts);
    const auto& targets = g.target_vertices();
    double max_value_err = 0.0, max_grad_err = 0.0;
    std::size_t skipped_fd = 0;
    for (int t = 0; t < static_cast<int>(targets.size()); ++t) {
        for (int e = 0; e < static_cast<int>(index.n_slots()); ++e) {
            const double brute = brute_protection(g, index, s, e, targets[t]);
            max_value_err = std::max(max_value_err, std::abs(brute - table.value(e, t)));
            const auto fd = fd_gradient(
                [&](const Strategy& x) { return brute_protection(g, index, x, e, targets[t]); }, s,
                fd_step);
            const auto& grad = table.grad(e, t);
            for (int j = 0; j < static_cast<int>(index.n_slots()); ++j) {
                // Perturbing a slot across zero changes the support; skip those.
                if (s[j] < 2.0 * fd_step) {
                    ++skipped_fd;
                    continue;
                }
                max_grad_err = std::max(max_grad_err, relative_error(grad.get(j), fd[j]));
            }
        }
    }

    // Monte-Carlo on the entries with the largest protection values plus the worst case.
    RvalReport rep = hard_value(table, g, index, s, SofteningConfig{}.eps_support);
    std::vector<std::pair<int, int>> picks{{rep.worst_slot, rep.worst_target}};
    std::vector<std::tuple<double, int, int>> ranked;
    for (int t = 0; t < static_cast<int>(targets.size()); ++t)
        for (int e = 0; e < static_cast<int>(index.n_slots()); ++e)
            if (s[e] > 0.0 && table.value(e, t) > 0.0) ranked.emplace_back(-table.value(e, t), e, t);
    std::sort(ranked.begin(), ranked.end());
    for (const auto& [v, e, t] : ranked) {
        if (static_cast<int>(picks.size()) >= mc_entries) break;
        if (std::find(picks.begin(), picks.end(), std::make_pair(e, t)) == picks.end())
            picks.emplace_back(e, t);
    }
    json mc = json::array();
    double max_z = 0.0;
    for (std::size_t i = 0; i < picks.size() && mc_samples > 0; ++i) {
        const auto [e, t] = picks[i];
        const McEstimate est = mc_protection(g, index, s, e, targets[t], mc_samples,
                                             derive_seed(seed, i));
        const double diff = est.mean - table.value(e, t);
        double z = 0.0;
        if (est.std_error > 0.0) z = diff / est.std_error;
        else if (std::abs(diff) > 1e-9) z = std::copysign(INFINITY, diff);
        max_z = std::max(max_z, std::abs(z));
        mc.push_back({{"slot", e},
                      {"target", g.id(targets[t])},
                      {"analytic", table.value(e, t)},
                      {"mc_mean", est.mean},
                      {"mc_stderr", est.std_error},
                      {"z", std::isfinite(z) ? json(z) : json("inf")}});
    }
    const bool pass = max_value_err <= 1e-9 && max_grad_err <= 1e-5 && max_z <= 4.0;
    json report = {{"max_value_error", max_value_err},
                   {"max_grad_rel_error", max_grad_err},
                   {"fd_skipped", skipped_fd},
                   {"mc", mc},
                   {"max_abs_z", std::isfinite(max_z) ? json(max_z) : json("inf")},
                   {"pass", pass}};
    write_text(out_path, report.dump(2) + "\n", out);
    return pass ? exit_code::ok : exit_code::numeric;
}

}  // namespace

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Strategy synthesis for adversarial patrolling games", "patrolsynth"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    auto* gen = app.add_subcommand("generate", "Write an instance graph as JSON");
    GenerateFlags gen_flags;
    std::string gen_out;
    gen_flags.attach(gen);
    gen->add_option("-o,--output", gen_out, "Output path (default stdout)");

    auto* solve = app.add_subcommand("solve", "Multi-restart gradient ascent");
    std::string solve_graph, solve_out, solve_strategy_out, solve_manifest;
    int solve_mem = 1, solve_restarts = 10, solve_threads = 1;
    std::uint64_t solve_seed = 0;
    bool solve_timing = false;
    OptimizerFlags solve_opt;
    solve->add_option("graph", solve_graph, "Graph JSON")->required();
    solve->add_option("--mem", solve_mem, "Memory elements per vertex")->check(CLI::PositiveNumber);
    solve->add_option("--restarts", solve_restarts, "Number of random restarts")
        ->check(CLI::PositiveNumber);
    solve->add_option("--seed", solve_seed, "Driver seed");
    solve->add_option("--threads", solve_threads, "Worker threads");
    solve->add_option("-o,--output", solve_out, "Run-result JSON path (default stdout)");
    solve->add_option("--strategy-out", solve_strategy_out, "Best strategy JSON path");
    solve->add_option("--manifest", solve_manifest, "Run manifest path");
    solve->add_flag("--timing", solve_timing, "Include wall time in the run result");
    solve_opt.attach(solve);

    auto* eval = app.add_subcommand("eval", "Evaluate a strategy");
    std::string eval_graph, eval_strategy, eval_out;
    SofteningConfig eval_soft;
    eval->add_option("graph", eval_graph, "Graph JSON")->required();
    eval->add_option("strategy", eval_strategy, "Strategy JSON")->required();
    eval->add_option("--margin", eval_soft.margin, "Report candidates within this margin");
    eval->add_option("--eps-support", eval_soft.eps_support, "Support threshold");
    eval->add_option("-o,--output", eval_out, "Report path (default stdout)");

    auto* check = app.add_subcommand("check", "Validate the evaluator against the oracles");
    std::string check_graph, check_strategy, check_out;
    std::int64_t check_samples = 100000;
    std::uint64_t check_seed = 0;
    int check_entries = 8;
    double check_h = 1e-6;
    check->add_option("graph", check_graph, "Graph JSON")->required();
    check->add_option("strategy", check_strategy, "Strategy JSON")->required();
    check->add_option("--mc-samples", check_samples, "Monte-Carlo walks per checked entry");
    check->add_option("--mc-entries", check_entries, "Number of entries checked by Monte-Carlo");
    check->add_option("--seed", check_seed, "Monte-Carlo seed");
    check->add_option("--fd-step", check_h, "Finite-difference step");
    check->add_option("-o,--output", check_out, "Report path (default stdout)");

    auto* bench = app.add_subcommand("bench", "Per-memory-size experiment table as CSV");
    GenerateFlags bench_flags;
    std::vector<int> bench_ms{1, 2, 3, 4};
    int bench_restarts = 50, bench_threads = 1;
    std::uint64_t bench_seed = 0;
    std::string bench_out;
    OptimizerFlags bench_opt;
    bench_flags.attach(bench);
    bench->add_option("--m", bench_ms, "Memory sizes")->delimiter(',');
    bench->add_option("--restarts", bench_restarts, "Restarts per memory size")
        ->check(CLI::PositiveNumber);
    bench->add_option("--driver-seed", bench_seed, "Driver seed");
    bench->add_option("--threads", bench_threads, "Worker threads");
    bench->add_option("-o,--output", bench_out, "CSV path (default stdout)");
    bench_opt.attach(bench);

    std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }

    try {
        if (gen->parsed()) {
            const PatrollingGraph g = gen_flags.build();
            write_text(gen_out, serialize_graph(g) + "\n", out);
            return exit_code::ok;
        }
        if (solve->parsed()) {
            const std::string started_at = iso_now();
            const PatrollingGraph g = load_graph(solve_graph);
            OptimizerConfig cfg = solve_opt.resolve();
            const std::vector<int> mem(g.n_vertices(), solve_mem);
            const auto t0 = std::chrono::steady_clock::now();
            BestResult res = regstar(g, mem, solve_restarts, cfg, solve_seed, solve_threads);
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const StrategyIndex index(g, mem);
            json strategy = strategy_to_json(g, index, res.best.final_strategy);
            json result = {{"best",
                            {{"value", res.best.final_value},
                             {"strategy", strategy},
                             {"iters", res.best.iterations}}},
                           {"all_values", res.all_values},
                           {"close_fraction", res.close_fraction}};
            if (solve_timing) result["wall_time_s"] = wall;
            write_text(solve_out, result.dump(2) + "\n", out);
            if (!solve_strategy_out.empty())
                write_text(solve_strategy_out, strategy.dump(2) + "\n", out);

            std::string manifest_path = solve_manifest;
            if (manifest_path.empty())
                manifest_path = (solve_out.empty() || solve_out == "-")
                                    ? std::string("run.manifest.json")
                                    : solve_out + ".manifest.json";
            json cmdline = json::array();
            for (const auto& a : argv) cmdline.push_back(a);
            json manifest = {{"command_line", cmdline},
                             {"config", config_json(cfg)},
                             {"seed", solve_seed},
                             {"restarts", solve_restarts},
                             {"mem", solve_mem},
                             {"threads", solve_threads},
                             {"graph_hash", graph_hash(g)},
                             {"version", kVersion},
                             {"started_at", started_at},
                             {"finished_at", iso_now()},
                             {"wall_time_s", wall}};
            write_text(manifest_path, manifest.dump(2) + "\n", out);
            return exit_code::ok;
        }
        if (eval->parsed()) {
            const PatrollingGraph g = load_graph(eval_graph);
            auto [index, s] = strategy_from_json(g, read_json(eval_strategy));
            EvalOptions opts;
            opts.gradients = false;
            const ProtectionTable table = protection_table(g, index, s, opts);
            const RvalReport rep = hard_value(table, g, index, s, eval_soft.eps_support, eval_soft.margin);
            json report = report_to_json(g, index, table, rep);
            report["warnings"] = evaluation_warnings(index, s, eval_soft.eps_support);
            write_text(eval_out, report.dump(2) + "\n", out);
            return exit_code::ok;
        }
        if (check->parsed()) {
            const PatrollingGraph g = load_graph(check_graph);
            auto [index, s] = strategy_from_json(g, read_json(check_strategy));
            return cmd_check(g, index, s, check_samples, check_seed, check_entries, check_h,
                             check_out, out);
        }
        if (bench->parsed()) {
            const PatrollingGraph g = bench_flags.build();
            OptimizerConfig cfg = bench_opt.resolve();
            std::ostringstream csv;
            csv << "family,params,m,restarts,best,close_pct,iters_avg,time_s_avg\n";
            for (int m : bench_ms) {
                const std::vector<int> mem(g.n_vertices(), m);
                BestResult res = regstar(g, mem, bench_restarts, cfg, bench_seed, bench_threads);
                double iters = 0.0, secs = 0.0;
                for (std::size_t i = 0; i < res.all_values.size(); ++i) {
                    iters += res.all_iterations[i];
                    secs += res.all_times_s[i];
                }
                const double n = static_cast<double>(res.all_values.size());
                csv << bench_flags.family << ",\"" << bench_flags.describe() << "\"," << m << ","
                    << bench_restarts << "," << std::setprecision(10) << res.best.final_value
                    << "," << 100.0 * res.close_fraction << "," << iters / n << "," << secs / n
                    << "\n";
            }
            write_text(bench_out, csv.str(), out);
            return exit_code::ok;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::validation;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::numeric;
    }
    return exit_code::usage;
}

}  // namespace patrol
