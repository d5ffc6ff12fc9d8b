#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gemqp/cli_io.hpp"
#include "gemqp/harness.hpp"
#include "gemqp/nonneg_qp.hpp"
#include "gemqp/projection.hpp"
#include "gemqp/qp.hpp"

namespace {

using gemqp::DualMethod;
using gemqp::SolveStatus;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotConverged = 2;

json read_input(const std::string& input_path) {
    if (input_path.empty()) return json::parse(std::cin);
    std::ifstream in(input_path);
    if (!in) throw std::invalid_argument("cannot open input file: " + input_path);
    return json::parse(in);
}

struct SolverFlags {
    double tol_kkt = 1e-10;
    long max_iters = 100000;
    double feas_tol = 1e-8;
    double margin = 0.0;
    std::string solver = "pg";

    void add_to(CLI::App& cmd, bool with_projection_flags) {
        cmd.add_option("--tol-kkt", tol_kkt, "KKT residual tolerance")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd.add_option("--max-iters", max_iters, "iteration limit")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        if (with_projection_flags) {
            cmd.add_option("--feas-tol", feas_tol,
                           "relative feasibility tolerance")
                ->check(CLI::NonNegativeNumber)
                ->capture_default_str();
            cmd.add_option("--margin", margin,
                           "require <g~, g_k> >= margin instead of >= 0")
                ->check(CLI::NonNegativeNumber)
                ->capture_default_str();
        }
        cmd.add_option("--solver", solver, "dual solver")
            ->check(CLI::IsMember({"pg", "bruteforce"}))
            ->capture_default_str();
    }

    DualMethod method() const {
        return solver == "pg" ? DualMethod::projected_gradient
                              : DualMethod::active_set_bruteforce;
    }
};

int run_project(const std::string& input_path, const SolverFlags& flags,
                const CLI::App& cmd) {
    const json doc = read_input(input_path);
    const gemqp::cli::ProjectRequest req =
        gemqp::cli::parse_project_request(doc);

    gemqp::ProjectOptions options;
    if (req.tol_kkt) options.solver.tol_kkt = *req.tol_kkt;
    if (req.max_iters) options.solver.max_iters = *req.max_iters;
    if (req.margin) options.margin = *req.margin;
    if (req.feas_tol) options.feas_tol = *req.feas_tol;
    if (cmd.count("--tol-kkt")) options.solver.tol_kkt = flags.tol_kkt;
    if (cmd.count("--max-iters")) options.solver.max_iters = flags.max_iters;
    if (cmd.count("--feas-tol")) options.feas_tol = flags.feas_tol;
    if (cmd.count("--margin")) options.margin = flags.margin;
    options.method = flags.method();

    const gemqp::GradientSet gradients(req.g, req.memory_gradients);
    try {
        const gemqp::ProjectionResult result = gemqp::project(gradients, options);
        std::cout << gemqp::cli::project_response_json(result).dump() << "\n";
        return kExitOk;
    } catch (const gemqp::ProjectionAborted& aborted) {
        std::cout << gemqp::cli::project_response_json(aborted.partial).dump()
                  << "\n";
        return kExitNotConverged;
    }
}

int solve_generic(const gemqp::cli::GenericQPInput& input, bool dualize_only,
                  const SolverFlags& flags) {
    const gemqp::PrimalQP qp(input.C, input.w, input.A, input.b);
    const gemqp::DualQP dual = gemqp::form_dual(qp);

    if (dualize_only) {
        json doc;
        doc["M"] = gemqp::cli::matrix_json(dual.M);
        doc["q"] = gemqp::cli::vector_json(dual.q);
        doc["constant"] = dual.constant;
        std::cout << doc.dump() << "\n";
        return kExitOk;
    }

    gemqp::SolverResult solved;
    if (qp.num_constraints() == 0) {
        solved.v_star = gemqp::VectorXd(0);
    } else {
        const gemqp::NonnegQP dual_problem(dual.M, dual.q);
        gemqp::SolverConfig config;
        config.tol_kkt = flags.tol_kkt;
        config.max_iters = flags.max_iters;
        solved = flags.method() == DualMethod::projected_gradient
                     ? gemqp::solve_pg(dual_problem, config)
                     : gemqp::solve_active_set_bruteforce(dual_problem);
    }

    const gemqp::VectorXd z = gemqp::stationary_point(qp, solved.v_star);
    const double primal = gemqp::primal_objective(qp, z);
    const double dual_obj = gemqp::dual_value(dual, solved.v_star);

    json doc;
    doc["z_star"] = gemqp::cli::vector_json(z);
    doc["v_star"] = gemqp::cli::vector_json(solved.v_star);
    doc["primal_objective"] = primal;
    doc["dual_objective"] = dual_obj;
    doc["duality_gap"] =
        solved.status == SolveStatus::converged
            ? gemqp::duality_gap(qp, z, solved.v_star)
            : primal - dual_obj;
    doc["kkt_residual"] = gemqp::primal_dual_kkt_residual(qp, z, solved.v_star);
    doc["iterations"] = solved.iterations;
    doc["status"] = gemqp::to_string(solved.status);
    std::cout << doc.dump() << "\n";
    return solved.status == SolveStatus::converged ? kExitOk : kExitNotConverged;
}

int solve_nonneg(const gemqp::cli::NonnegQPInput& input, bool dualize,
                 const SolverFlags& flags) {
    if (dualize)
        throw std::invalid_argument(
            "--dualize requires a generic QP input {C, w, A, b}");
    const gemqp::NonnegQP problem(input.M, input.q);
    gemqp::SolverConfig config;
    config.tol_kkt = flags.tol_kkt;
    config.max_iters = flags.max_iters;
    const gemqp::SolverResult solved =
        flags.method() == DualMethod::projected_gradient
            ? gemqp::solve_pg(problem, config)
            : gemqp::solve_active_set_bruteforce(problem);

    json doc;
    doc["v_star"] = gemqp::cli::vector_json(solved.v_star);
    doc["objective"] = gemqp::objective(problem, solved.v_star);
    doc["kkt_residual"] = solved.kkt_residual;
    doc["iterations"] = solved.iterations;
    doc["status"] = gemqp::to_string(solved.status);
    std::cout << doc.dump() << "\n";
    return solved.status == SolveStatus::converged ? kExitOk : kExitNotConverged;
}

int run_solve(const std::string& input_path, bool dualize, bool certify,
              const SolverFlags& flags) {
    const json doc = read_input(input_path);
    const gemqp::cli::SolveInput input = gemqp::cli::parse_solve_input(doc);
    const bool dualize_only = dualize && !certify;
    if (std::holds_alternative<gemqp::cli::GenericQPInput>(input))
        return solve_generic(std::get<gemqp::cli::GenericQPInput>(input),
                             dualize_only, flags);
    return solve_nonneg(std::get<gemqp::cli::NonnegQPInput>(input), dualize,
                        flags);
}

struct DemoFlags {
    int tasks = 2;
    int dim = 4;
    int steps = 200;
    double lr = 1e-3;
    int memory = 64;
    int batch = 8;
    double conflict = 1.0;
    std::uint64_t seed = 0;
    std::string strategy = "gem";
};

int run_demo(const DemoFlags& flags) {
    constexpr int kExamplesPerTask = 256;
    const std::vector<gemqp::Task> tasks = gemqp::make_synthetic_tasks(
        flags.tasks, flags.dim, kExamplesPerTask, flags.conflict, flags.seed);

    gemqp::ExperimentConfig config;
    config.steps_per_task = flags.steps;
    config.lr = flags.lr;
    config.memory_capacity = flags.memory;
    config.batch_size = flags.batch;
    config.seed = flags.seed;

    const gemqp::Strategy strategy = flags.strategy == "gem"
                                         ? gemqp::Strategy::gem
                                         : gemqp::Strategy::sgd;
    const gemqp::RunMetrics metrics =
        gemqp::run_experiment(tasks, strategy, config);
    gemqp::write_csv(metrics, std::cout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Gradient-projection toolkit: GEM-style gradient projection, small "
        "dense QP duality, and a toy continual-learning demo"};
    app.require_subcommand(1);

    std::string project_input;
    SolverFlags project_flags;
    CLI::App* project_cmd = app.add_subcommand(
        "project", "project a gradient against memory gradients (JSON in/out)");
    project_cmd->add_option("--input", project_input,
                            "JSON request file (default: stdin)");
    project_flags.add_to(*project_cmd, true);

    std::string solve_input;
    SolverFlags solve_flags;
    bool dualize = false;
    bool certify = false;
    CLI::App* solve_cmd = app.add_subcommand(
        "solve", "dualize / solve / certify a QP given as JSON");
    solve_cmd->add_option("--input", solve_input,
                          "JSON problem file (default: stdin)");
    solve_cmd->add_flag("--dualize", dualize, "print the dual data only");
    solve_cmd->add_flag("--certify", certify,
                        "solve the dual and print the full certificate report");
    solve_flags.add_to(*solve_cmd, false);

    DemoFlags demo_flags;
    CLI::App* demo_cmd = app.add_subcommand(
        "demo", "run the synthetic continual-learning experiment (CSV out)");
    demo_cmd->add_option("--tasks", demo_flags.tasks, "number of tasks")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    demo_cmd->add_option("--dim", demo_flags.dim, "feature dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    demo_cmd->add_option("--steps", demo_flags.steps, "steps per task")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    demo_cmd->add_option("--lr", demo_flags.lr, "learning rate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    demo_cmd->add_option("--memory", demo_flags.memory,
                         "memory capacity per task")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    demo_cmd->add_option("--batch", demo_flags.batch, "batch size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    demo_cmd->add_option("--conflict", demo_flags.conflict,
                         "pairwise task conflict in [0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    demo_cmd->add_option("--seed", demo_flags.seed, "random seed")
        ->capture_default_str();
    demo_cmd->add_option("--strategy", demo_flags.strategy, "update strategy")
        ->check(CLI::IsMember({"gem", "sgd"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kExitInputError;
    }

    try {
        if (project_cmd->parsed())
            return run_project(project_input, project_flags, *project_cmd);
        if (solve_cmd->parsed())
            return run_solve(solve_input, dualize, certify, solve_flags);
        return run_demo(demo_flags);
    } catch (const json::exception& err) {
        std::cerr << "error: invalid JSON input: " << err.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitInputError;
    }
}
