#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <ostream>
#include <vector>

#include "gemqp/projection.hpp"

namespace gemqp {

/// One labelled observation of a task.
struct Example {
    VectorXd x;
    double y = 0.0;
    int task_id = 1;
};

/// Per-task ring buffers of the most recently seen examples. Inserting
/// into a full buffer drops the oldest entry.
class EpisodicMemory {
public:
    explicit EpisodicMemory(int capacity_per_task);

    void insert(const Example& example);

    bool has_task(int task_id) const;
    const std::deque<Example>& buffer(int task_id) const;
    std::vector<int> task_ids() const;  // ascending
    int capacity_per_task() const { return capacity_; }

private:
    int capacity_;
    std::map<int, std::deque<Example>> buffers_;
};

/// Linear predictor f(x) = theta^T x under squared-error loss
/// l(f(x), y) = 1/2 (theta^T x - y)^2.
struct LinearModel {
    VectorXd theta;
};

double predict(const LinearModel& model, const VectorXd& x);

double mean_loss(const LinearModel& model, const std::vector<Example>& examples);
double mean_loss(const LinearModel& model, const std::deque<Example>& examples);

/// Gradient of the mean squared-error loss over the given examples,
/// accumulated in container order: (1/n) sum (theta^T x - y) x.
VectorXd task_gradient(const LinearModel& model,
                       const std::vector<Example>& examples);
VectorXd task_gradient(const LinearModel& model,
                       const std::deque<Example>& examples);

struct StepDiagnostics {
    int step = 0;
    int task_id = 0;
    bool projected = false;
    int violations = 0;
    double kkt_residual = 0.0;
    VectorXd g;
    VectorXd g_tilde;
    std::vector<VectorXd> memory_grads;  // one per past task, ascending id
};

struct GemStepResult {
    LinearModel model;
    StepDiagnostics diagnostics;
};

/// theta' = theta - lr * g with g the batch gradient. lr must be positive.
LinearModel sgd_step(const LinearModel& model, const std::vector<Example>& batch,
                     double lr);

/// Computes the batch gradient, projects it so inner products with every
/// past task's memory gradient stay nonnegative, and applies the projected
/// update. Past tasks are those in memory with id below the batch's task.
GemStepResult gem_step(const LinearModel& model,
                       const std::vector<Example>& batch,
                       const EpisodicMemory& memory, double lr,
                       const ProjectOptions& options = {});

struct Task {
    int task_id = 1;
    VectorXd weights;
    std::vector<Example> examples;
};

enum class Strategy { gem, sgd };

struct ExperimentConfig {
    int steps_per_task = 200;
    double lr = 1e-3;
    int memory_capacity = 64;
    int batch_size = 8;
    std::uint64_t seed = 0;
    ProjectOptions projection;
};

struct RunMetrics {
    std::vector<int> task_ids;  // column order of the loss table
    std::vector<std::vector<double>> per_step_task_losses;  // [step][task]
    std::vector<int> violation_counts;                      // per step
    long projection_counts = 0;
};

using StepObserver = std::function<void(const StepDiagnostics&)>;

/// Trains over the tasks in order, one model across all of them, inserting
/// every seen example into the episodic memory and evaluating every task's
/// loss over its full example set after each step. Deterministic: equal
/// inputs and seed give bit-identical metrics. The observer, when set, is
/// invoked after each gem step (strategy gem only).
RunMetrics run_experiment(const std::vector<Task>& tasks, Strategy strategy,
                          const ExperimentConfig& config,
                          const StepObserver& observer = {});

/// Synthetic linear-regression tasks y = w_t^T x + noise (sigma = 0.01).
/// conflict = 0 gives tasks on disjoint coordinate blocks (needs
/// dim >= 2 * num_tasks); conflict in (0, 1] gives unit task weights with
/// pairwise cosine exactly -conflict (realizable only when
/// conflict <= 1/(num_tasks - 1)). Deterministic in seed.
std::vector<Task> make_synthetic_tasks(int num_tasks, int dim,
                                       int examples_per_task, double conflict,
                                       std::uint64_t seed);

/// CSV with header step,task,loss,violations, one row per (step, task),
/// ordered by step then task. Doubles use shortest round-trip formatting.
void write_csv(const RunMetrics& metrics, std::ostream& out);

}  // namespace gemqp
