// campctl: command-line driver for CSI discovery, selector training,
// evaluation, sweeps and result summaries.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "camp/harness.hpp"

namespace {

struct Args {
    std::string domain = "gridworld";
    std::string profile = "paper";
    std::optional<std::string> planner;
    std::optional<double> lambda;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_train;
    std::optional<int> n_test;
    std::optional<int> runs;
    std::optional<std::string> cost_channel;
    std::optional<double> seconds_per_expansion;
    std::vector<std::string> methods;
    std::optional<std::string> context;
    std::string out;
    std::string in;
    std::string sweep_kind = "lambda";
    std::vector<double> grid;
    int run = 0;
};

camp::ExperimentConfig build_config(const Args& a) {
    using namespace camp;
    ExperimentConfig cfg = default_config(parse_domain(a.domain), parse_profile(a.profile));
    if (a.planner) cfg.planner.kind = parse_planner_kind(*a.planner);
    if (a.lambda) cfg.lambda = *a.lambda;
    if (a.seed) cfg.seed = *a.seed;
    if (a.n_train) cfg.n_train = *a.n_train;
    if (a.n_test) cfg.n_test = *a.n_test;
    if (a.runs) cfg.runs = *a.runs;
    if (a.cost_channel) cfg.cost.channel = parse_cost_channel(*a.cost_channel);
    if (a.seconds_per_expansion) cfg.cost.seconds_per_expansion = *a.seconds_per_expansion;
    if (!a.methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
    }
    if (a.context) {
        const auto probe = sample_tasks(cfg, 0, true, 1);
        const auto contexts = context_space(cfg, *probe.front().task.mdp);
        const auto vars = probe.front().task.mdp->all_vars();
        const Context wanted = parse_context(*a.context, vars);
        std::size_t i = 0;
        while (i < contexts.size() && contexts[i].to_string(vars) != wanted.to_string(vars)) ++i;
        if (i == contexts.size()) throw std::invalid_argument("context not in the context space: " + *a.context);
        cfg.forced_context = i;
    }
    return cfg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

void emit_results(const std::vector<camp::ResultRow>& rows, const std::string& out_path) {
    if (!out_path.empty()) {
        auto out = open_out(out_path);
        camp::write_csv(out, rows);
        std::cerr << "wrote " << rows.size() << " rows to " << out_path << '\n';
    } else {
        camp::write_csv(std::cout, rows);
    }
    camp::write_summary(std::cerr, camp::summarize(rows));
}

int discover_csi(const Args& a) {
    using namespace camp;
    const auto cfg = build_config(a);
    const auto tasks = sample_tasks(cfg, a.run, true, cfg.n_train);
    CsiCache cache(cfg.csi, derive_seed(run_seed(cfg, a.run), "csi"));
    std::ostringstream text;
    for (const auto& dt : tasks) {
        const auto& mdp = *dt.task.mdp;
        std::vector<CsiSet> sets;
        for (const auto& ctx : context_space(cfg, mdp)) sets.push_back(cache.get(dt.task.model_key, mdp, ctx));
        text << "# task " << dt.task.id << '\n';
        write_csi_records(text, sets, mdp.all_vars());
    }
    if (a.out.empty()) {
        std::cout << text.str();
    } else {
        open_out(a.out) << text.str();
    }
    std::cerr << "learned " << cache.misses() << " CSI sets over " << tasks.size() << " tasks\n";
    return 0;
}

int train(const Args& a) {
    using namespace camp;
    const auto cfg = build_config(a);
    const auto tasks = sample_tasks(cfg, a.run, true, cfg.n_train);
    if (tasks.empty()) throw std::invalid_argument("--n-train must be positive");
    const std::uint64_t seed = run_seed(cfg, a.run);
    CsiCache cache(cfg.csi, derive_seed(seed, "csi"));
    ScoreOptions so;
    so.planner = cfg.planner;
    so.lambda = cfg.lambda;
    so.n_rollouts = cfg.score_rollouts;
    so.cost = cfg.cost;
    std::vector<Task> plain;
    for (const auto& dt : tasks) plain.push_back(dt.task);
    const auto& mdp = *plain.front().mdp;
    const auto contexts = context_space(cfg, mdp);
    auto trained =
        train_selector(plain, contexts, cache_provider(cache), so, cfg.selector_train, derive_seed(seed, "selector"));

    const std::string prefix = a.out.empty() ? "selector" : a.out;
    {
        auto out = open_out(prefix + ".labels.csv");
        write_label_table(out, trained.labels, contexts, mdp.all_vars());
    }
    {
        auto out = open_out(prefix + ".model");
        trained.selector.classifier.save(out);
    }
    {
        auto out = open_out(prefix + ".tasks");
        write_task_manifest(out, tasks);
    }
    std::cerr << "selector: " << contexts.size() << " contexts, loss " << trained.training.final_loss << " after "
              << trained.training.epochs << " epochs" << (trained.training.converged ? "" : " (not converged)")
              << "\nwrote " << prefix << ".labels.csv, " << prefix << ".model, " << prefix << ".tasks\n";
    return 0;
}

int eval(const Args& a) {
    const auto cfg = build_config(a);
    camp::ExperimentCache cache(cfg.csi, cfg.seed);
    emit_results(camp::run_experiment(cfg, &cache), a.out);
    return 0;
}

int sweep(const Args& a) {
    if (a.grid.empty()) throw std::invalid_argument("--grid needs at least one value");
    const auto cfg = build_config(a);
    camp::ExperimentCache cache(cfg.csi, cfg.seed);
    emit_results(camp::sweep(camp::parse_sweep_kind(a.sweep_kind), a.grid, cfg, &cache), a.out);
    return 0;
}

int report(const Args& a) {
    std::ifstream in(a.in);
    if (!in) throw std::runtime_error("cannot read " + a.in);
    const auto summary = camp::summarize(camp::read_csv(in));
    if (a.out.empty()) {
        camp::write_summary(std::cout, summary);
    } else {
        auto out = open_out(a.out);
        camp::write_summary(out, summary);
    }
    return 0;
}

void add_experiment_options(CLI::App* app, Args& a) {
    app->add_option("--domain", a.domain, "gridworld or dinner")->capture_default_str();
    app->add_option("--profile", a.profile, "paper or fast")->capture_default_str();
    app->add_option("--planner", a.planner, "mcts, bfs-replan, vi or optimal");
    app->add_option("--lambda", a.lambda, "Compute-cost weight");
    app->add_option("--seed", a.seed, "Master seed");
    app->add_option("--n-train", a.n_train, "Training tasks per run");
    app->add_option("--n-test", a.n_test, "Test tasks per run");
    app->add_option("--runs", a.runs, "Independent runs");
    app->add_option("--cost-channel", a.cost_channel, "wallclock or expansions");
    app->add_option("--seconds-per-expansion", a.seconds_per_expansion, "Charge per expansion");
    app->add_option("--methods", a.methods, "Subset of methods")->delimiter(',');
    app->add_option("--context", a.context, "Force one context, e.g. 'agent_room=1'");
    app->add_option("--out", a.out, "Output path");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CAMP experiments"};
    app.set_config("--config", "", "INI/TOML file with option defaults");
    app.require_subcommand(1);
    Args a;

    auto* discover = app.add_subcommand("discover-csi", "Learn CSI sets for every context on the training tasks");
    add_experiment_options(discover, a);
    discover->add_option("--run", a.run, "Run index whose tasks are used");

    auto* train_cmd = app.add_subcommand("train", "Label training tasks and fit the context selector");
    add_experiment_options(train_cmd, a);
    train_cmd->add_option("--run", a.run, "Run index whose tasks are used");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate methods on held-out tasks");
    add_experiment_options(eval_cmd, a);

    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate over a lambda or n_train grid");
    add_experiment_options(sweep_cmd, a);
    sweep_cmd->add_option("--kind", a.sweep_kind, "lambda or n_train")->capture_default_str();
    sweep_cmd->add_option("--grid", a.grid, "Comma-separated values")->delimiter(',')->required();

    auto* report_cmd = app.add_subcommand("report", "Summarise a results CSV");
    report_cmd->add_option("--in", a.in, "Results CSV")->required();
    report_cmd->add_option("--out", a.out, "Summary path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (discover->parsed()) return discover_csi(a);
        if (train_cmd->parsed()) return train(a);
        if (eval_cmd->parsed()) return eval(a);
        if (sweep_cmd->parsed()) return sweep(a);
        if (report_cmd->parsed()) return report(a);
    } catch (const std::exception& e) {
        std::cerr << "campctl: " << e.what() << '\n';
        return EXIT_FAILURE;
    }
    return EXIT_FAILURE;
}
