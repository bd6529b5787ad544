#include "repemp/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "repemp/envemp.hpp"
#include "repemp/executor.hpp"
#include "repemp/kernels.hpp"
#include "repemp/toml.hpp"

namespace repemp {

using nlohmann::ordered_json;

namespace {

std::string fmt_bits(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

void write_output(const ordered_json& j, const std::string& out_path) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write output file: " + out_path);
        out << text;
    }
}

bool wants_csv(const std::string& path) {
    return path.size() > 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

std::string csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// One row per report; columns mirror the JSON fields (policy omitted).
std::string reports_to_csv(const std::vector<std::pair<std::string, EmpowermentReport>>& rows) {
    std::string out =
        "library,estimator,n_inputs,n_eff,dropped,diversity_bits,uncertainty_bits,mi_bits,"
        "capacity_bits\n";
    for (const auto& [name, r] : rows) {
        out += name + "," + to_string(r.estimator) + "," + std::to_string(r.n_inputs) + "," +
               std::to_string(r.n_eff) + "," + std::to_string(r.dropped) + "," +
               csv_number(r.diversity_bits) + "," + csv_number(r.uncertainty_bits) + "," +
               csv_number(r.mi_bits) + "," +
               (r.capacity_bits ? csv_number(*r.capacity_bits) : std::string()) + "\n";
    }
    return out;
}

void write_text_file(const std::string& text, const std::string& out_path) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + out_path);
    out << text;
}

struct CommonOpts {
    std::string scenario_path;
    std::string estimator; // empty = scenario default
    int horizon = -1;      // -1 = scenario default
    long long seed = -1;   // -1 = scenario default
    std::string out_path;
    int bits_precision = 3;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool scenario_required) {
    auto* s = cmd->add_option("--scenario", opts.scenario_path, "scenario TOML file");
    if (scenario_required) s->required();
    cmd->add_option("--estimator", opts.estimator, "uniform or capacity")
        ->check(CLI::IsMember({"uniform", "capacity"}));
    cmd->add_option("--horizon", opts.horizon, "operation-sequence horizon T")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", opts.seed, "run seed (echoed into reports)");
    cmd->add_option("--out", opts.out_path, "write the JSON report to this file");
    cmd->add_option("--bits-precision", opts.bits_precision,
                    "decimals for printed bit values (tables only)");
}

Scenario load_checked(const CommonOpts& opts) {
    Scenario s = load_scenario(opts.scenario_path);
    const auto issues = validate(s);
    if (!issues.empty()) {
        std::string msg = "scenario validation failed:";
        for (const auto& i : issues) msg += "\n  - " + i;
        throw ScenarioError(msg);
    }
    if (opts.horizon >= 0) s.horizon = opts.horizon;
    if (opts.seed >= 0) s.seed = static_cast<unsigned long long>(opts.seed);
    if (!opts.estimator.empty()) {
        s.estimator = opts.estimator == "capacity" ? Estimator::Capacity : Estimator::Uniform;
        s.curator.estimator = s.estimator;
    }
    return s;
}

const Library& find_library(const Scenario& s, const std::string& id) {
    auto it = s.libraries.find(id);
    if (it == s.libraries.end()) throw ScenarioError("unknown library '" + id + "'");
    return it->second;
}

void print_report_text(const std::string& name, const EmpowermentReport& r, int precision) {
    std::cout << name << ": estimator=" << to_string(r.estimator) << " inputs=" << r.n_inputs
              << " n_eff=" << r.n_eff;
    if (r.dropped) std::cout << " dropped=" << r.dropped;
    std::cout << "\n  diversity   " << fmt_bits(r.diversity_bits, precision) << " bits"
              << "\n  uncertainty " << fmt_bits(r.uncertainty_bits, precision) << " bits"
              << "\n  repemp      " << fmt_bits(r.mi_bits, precision) << " bits";
    if (r.capacity_bits)
        std::cout << "\n  capacity    " << fmt_bits(*r.capacity_bits, precision) << " bits";
    std::cout << "\n";
}

int cmd_eval(const CommonOpts& opts, const std::string& library_id,
             const std::string& grid_path) {
    std::string name;
    EmpowermentReport r;
    ordered_json j;
    if (!grid_path.empty()) {
        GridMDP mdp = load_grid(grid_path);
        const int T = opts.horizon >= 0 ? opts.horizon : mdp.horizon;
        r = env_empowerment(mdp, mdp.start, T);
        name = "grid";
        j = report_to_json(r);
        j["grid"] = grid_path;
        j["horizon"] = T;
    } else {
        Scenario s = load_checked(opts);
        const Library& lib = find_library(s, library_id);
        r = rep_emp(lib, s.ops_context(), s.channel_options(), s.estimator);
        name = library_id;
        j = report_to_json(r);
        j["library"] = library_id;
    }
    print_report_text(name, r, opts.bits_precision);
    if (!opts.out_path.empty()) {
        if (wants_csv(opts.out_path)) write_text_file(reports_to_csv({{name, r}}), opts.out_path);
        else write_output(j, opts.out_path);
    }
    return 0;
}

ordered_json compare_table(const Scenario& s, const std::vector<std::string>& ids,
                           Estimator estimator, int precision,
                           std::vector<std::pair<std::string, EmpowermentReport>>* csv_rows) {
    struct Row {
        std::string id;
        EmpowermentReport report;
    };
    std::vector<Row> rows;
    for (const auto& id : ids)
        rows.push_back({id, rep_emp(find_library(s, id), s.ops_context(), s.channel_options(),
                                    estimator)});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.report.mi_bits != b.report.mi_bits) return a.report.mi_bits > b.report.mi_bits;
        return a.id < b.id;
    });
    if (csv_rows)
        for (const auto& r : rows) csv_rows->push_back({r.id, r.report});

    std::size_t width = 7;
    for (const auto& r : rows) width = std::max(width, r.id.size());
    std::printf("%-*s  %11s  %11s  %11s  %6s\n", static_cast<int>(width), "library", "diversity",
                "uncertainty", "repemp", "n_eff");
    for (const auto& r : rows)
        std::printf("%-*s  %11s  %11s  %11s  %6zu\n", static_cast<int>(width), r.id.c_str(),
                    fmt_bits(r.report.diversity_bits, precision).c_str(),
                    fmt_bits(r.report.uncertainty_bits, precision).c_str(),
                    fmt_bits(r.report.mi_bits, precision).c_str(), r.report.n_eff);

    ordered_json table = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json row = report_to_json(r.report);
        row["library"] = r.id;
        table.push_back(std::move(row));
    }
    return table;
}

int cmd_compare(const CommonOpts& opts, const std::vector<std::string>& ids) {
    if (ids.size() < 2) throw ScenarioError("compare needs at least 2 libraries");
    Scenario s = load_checked(opts);

    ordered_json out;
    std::vector<std::pair<std::string, EmpowermentReport>> csv_rows;
    out["scenario"] = s.name;
    std::cout << "estimator: uniform\n";
    out["uniform"] = compare_table(s, ids, Estimator::Uniform, opts.bits_precision, &csv_rows);
    if (s.estimator == Estimator::Capacity) {
        std::cout << "estimator: capacity\n";
        out["capacity"] =
            compare_table(s, ids, Estimator::Capacity, opts.bits_precision, &csv_rows);
    }
    if (!opts.out_path.empty()) {
        if (wants_csv(opts.out_path)) write_text_file(reports_to_csv(csv_rows), opts.out_path);
        else write_output(out, opts.out_path);
    }
    return 0;
}

int cmd_run(const CommonOpts& opts) {
    Scenario s = load_checked(opts);
    if (s.tasks.empty()) throw ScenarioError("run: scenario has no tasks");

    const auto t0 = std::chrono::steady_clock::now();
    int failed = 0;
    ordered_json report = run_scenario(s, s.estimator, &failed);
    const auto t1 = std::chrono::steady_clock::now();

    write_output(report, opts.out_path);
    std::cerr << "run: " << s.tasks.size() << " tasks, " << failed << " failed, "
              << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
              << " ms\n";
    return failed ? 4 : 0;
}

int cmd_validate(const CommonOpts& opts) {
    Scenario s = load_scenario(opts.scenario_path);
    const auto issues = validate(s);
    if (issues.empty()) {
        std::cout << "ok: " << opts.scenario_path << "\n";
        return 0;
    }
    for (const auto& i : issues) std::cout << "problem: " << i << "\n";
    return 2;
}

} // namespace

ordered_json report_to_json(const EmpowermentReport& r) {
    ordered_json j;
    j["estimator"] = to_string(r.estimator);
    j["n_inputs"] = r.n_inputs;
    j["n_eff"] = r.n_eff;
    j["dropped"] = r.dropped;
    j["diversity_bits"] = r.diversity_bits;
    j["uncertainty_bits"] = r.uncertainty_bits;
    j["mi_bits"] = r.mi_bits;
    if (r.capacity_bits) j["capacity_bits"] = *r.capacity_bits;
    else j["capacity_bits"] = nullptr;
    j["achieving_policy"] = r.achieving_policy.weights;
    return j;
}

ordered_json run_scenario(const Scenario& s, Estimator estimator, int* failed_tasks) {
    ordered_json report;
    report["scenario"] = s.name;
    report["seed"] = s.seed;
    report["estimator"] = to_string(estimator);

    Library current; // the curator's durable library
    int failed = 0;
    ordered_json tasks = ordered_json::array();

    for (const auto& task : s.tasks) {
        ordered_json tj;
        tj["index"] = task.index;
        tj["target"] = melody_to_json(task.target);
        try {
            // candidates offered with this task; already-integrated ids are
            // not offered twice
            Library candidates;
            for (const auto& id : task.candidates) {
                if (current.contains(id)) continue;
                const Program* p = s.pool.find(id);
                if (!p) throw ScenarioError("unknown candidate '" + id + "'");
                candidates.add(*p, task.index);
            }

            // the executor works on a task-local variant; the curator owns
            // the durable library
            Library working = current;
            for (const auto& p : candidates.programs()) working.add(p, task.index);
            auto [tuned, episode] = use_improve(working, task, s);
            (void)tuned;

            ordered_json ej;
            ordered_json actions = ordered_json::array();
            for (const auto& a : episode.actions) actions.push_back(a.label());
            ej["actions"] = std::move(actions);
            ej["action_count"] = episode.actions.size();
            ej["produced"] = melody_to_json(episode.produced);
            ej["reward"] = episode.reward;
            ej["usage"] = episode.usage;
            ej["tuning_ops_used"] = episode.tuning_ops_used;
            ej["cycle_rewards"] = episode.cycle_rewards;
            tj["episode"] = std::move(ej);

            Library filtered =
                relevance_filter(candidates, episode, s.curator.relevance_threshold);
            tj["filtered_candidates"] = filtered.ids();

            CuratorState state{current, filtered, task.index};
            CurateResult result = curate_step(state, s, s.curator.estimator);
            tj["curator_action"] = result.action.label();
            tj["curator_report"] = report_to_json(result.report);
            current = std::move(result.library);
            tj["library_after"] = current.ids();
        } catch (const std::exception& e) {
            tj["error"] = e.what();
            ++failed;
        }
        tasks.push_back(std::move(tj));
    }

    report["tasks"] = std::move(tasks);
    report["final_library"] = library_to_json(current);
    report["stats"] = {{"tasks_total", s.tasks.size()}, {"tasks_failed", failed}};
    if (failed_tasks) *failed_tasks = failed;
    return report;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"representational empowerment over symbolic program libraries"};
    app.require_subcommand(1);

    CommonOpts eval_opts, compare_opts, run_opts, validate_opts;
    std::string eval_library, eval_grid;
    std::vector<std::string> compare_ids;

    CLI::App* eval = app.add_subcommand("eval", "empowerment report for one library");
    add_common(eval, eval_opts, false);
    eval->add_option("--library", eval_library, "library id from the scenario");
    eval->add_option("--grid", eval_grid, "grid scenario file (environmental baseline)");

    CLI::App* compare = app.add_subcommand("compare", "rank libraries by RepEmp");
    add_common(compare, compare_opts, true);
    compare->add_option("--library", compare_ids, "library ids (repeatable)")->required();

    CLI::App* run = app.add_subcommand("run", "curator/executor loop over the task stream");
    add_common(run, run_opts, true);

    CLI::App* val = app.add_subcommand("validate", "check a scenario file");
    add_common(val, validate_opts, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    try {
        if (eval->parsed()) {
            if (eval_grid.empty() && eval_opts.scenario_path.empty())
                throw ScenarioError("eval needs --scenario or --grid");
            if (eval_grid.empty() && eval_library.empty())
                throw ScenarioError("eval needs --library");
            return cmd_eval(eval_opts, eval_library, eval_grid);
        }
        if (compare->parsed()) return cmd_compare(compare_opts, compare_ids);
        if (run->parsed()) return cmd_run(run_opts);
        if (val->parsed()) return cmd_validate(validate_opts);
    } catch (const EnumerationCapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const toml::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace repemp
