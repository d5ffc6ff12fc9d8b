#include "gemqp/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gemqp/random.hpp"

namespace gemqp {

namespace {

constexpr double kLabelNoiseSigma = 0.01;

template <typename Container>
double mean_loss_impl(const LinearModel& model, const Container& examples) {
    if (examples.empty())
        throw std::invalid_argument("mean_loss requires at least one example");
    double total = 0.0;
    for (const Example& e : examples) {
        const double r = model.theta.dot(e.x) - e.y;
        total += 0.5 * r * r;
    }
    return total / static_cast<double>(examples.size());
}

template <typename Container>
VectorXd task_gradient_impl(const LinearModel& model,
                            const Container& examples) {
    if (examples.empty())
        throw std::invalid_argument("task_gradient requires at least one example");
    VectorXd grad = VectorXd::Zero(model.theta.size());
    for (const Example& e : examples) {
        if (e.x.size() != model.theta.size())
            throw std::invalid_argument(
                "dimension mismatch: example feature length differs from theta");
        grad += (model.theta.dot(e.x) - e.y) * e.x;
    }
    return grad / static_cast<double>(examples.size());
}

std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

}  // namespace

EpisodicMemory::EpisodicMemory(int capacity_per_task)
    : capacity_(capacity_per_task) {
    if (capacity_ < 1)
        throw std::invalid_argument("memory capacity must be >= 1");
}

void EpisodicMemory::insert(const Example& example) {
    if (example.task_id < 1)
        throw std::invalid_argument("task_id must be >= 1");
    std::deque<Example>& buf = buffers_[example.task_id];
    buf.push_back(example);
    if (static_cast<int>(buf.size()) > capacity_) buf.pop_front();
}

bool EpisodicMemory::has_task(int task_id) const {
    return buffers_.count(task_id) > 0;
}

const std::deque<Example>& EpisodicMemory::buffer(int task_id) const {
    const auto it = buffers_.find(task_id);
    if (it == buffers_.end())
        throw std::out_of_range("no memory buffer for the requested task");
    return it->second;
}

std::vector<int> EpisodicMemory::task_ids() const {
    std::vector<int> ids;
    ids.reserve(buffers_.size());
    for (const auto& [id, buf] : buffers_) ids.push_back(id);
    return ids;
}

double predict(const LinearModel& model, const VectorXd& x) {
    return model.theta.dot(x);
}

double mean_loss(const LinearModel& model, const std::vector<Example>& examples) {
    return mean_loss_impl(model, examples);
}

double mean_loss(const LinearModel& model, const std::deque<Example>& examples) {
    return mean_loss_impl(model, examples);
}

VectorXd task_gradient(const LinearModel& model,
                       const std::vector<Example>& examples) {
    return task_gradient_impl(model, examples);
}

VectorXd task_gradient(const LinearModel& model,
                       const std::deque<Example>& examples) {
    return task_gradient_impl(model, examples);
}

LinearModel sgd_step(const LinearModel& model, const std::vector<Example>& batch,
                     double lr) {
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
    const VectorXd g = task_gradient(model, batch);
    return {model.theta - lr * g};
}

GemStepResult gem_step(const LinearModel& model,
                       const std::vector<Example>& batch,
                       const EpisodicMemory& memory, double lr,
                       const ProjectOptions& options) {
    if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
    if (batch.empty()) throw std::invalid_argument("batch must be nonempty");
    const int current_task = batch.front().task_id;
    for (const Example& e : batch)
        if (e.task_id != current_task)
            throw std::invalid_argument("batch mixes examples of several tasks");

    StepDiagnostics diag;
    diag.task_id = current_task;
    diag.g = task_gradient(model, batch);

    for (int id : memory.task_ids()) {
        if (id >= current_task) continue;
        const auto& buf = memory.buffer(id);
        if (!buf.empty()) diag.memory_grads.push_back(task_gradient(model, buf));
    }

    const GradientSet gs(diag.g, diag.memory_grads);
    const ProjectionResult projection = project(gs, options);
    diag.projected = projection.projected;
    diag.violations = static_cast<int>(projection.violated.size());
    diag.kkt_residual = projection.kkt_residual;
    diag.g_tilde = projection.g_tilde;

    return {{model.theta - lr * diag.g_tilde}, std::move(diag)};
}

RunMetrics run_experiment(const std::vector<Task>& tasks, Strategy strategy,
                          const ExperimentConfig& config,
                          const StepObserver& observer) {
    if (tasks.empty()) throw std::invalid_argument("task stream is empty");
    if (config.steps_per_task < 1)
        throw std::invalid_argument("steps_per_task must be >= 1");
    if (!(config.lr > 0.0)) throw std::invalid_argument("lr must be positive");
    if (config.batch_size < 1)
        throw std::invalid_argument("batch_size must be >= 1");

    const Index dim = tasks.front().examples.front().x.size();
    for (const Task& task : tasks) {
        if (task.examples.empty())
            throw std::invalid_argument("every task needs examples");
        for (const Example& e : task.examples)
            if (e.x.size() != dim)
                throw std::invalid_argument(
                    "dimension mismatch: tasks disagree on feature length");
    }

    DeterministicRng rng(config.seed);
    EpisodicMemory memory(config.memory_capacity);
    LinearModel model{VectorXd::Zero(dim)};

    RunMetrics metrics;
    for (const Task& task : tasks) metrics.task_ids.push_back(task.task_id);

    int step = 0;
    for (const Task& task : tasks) {
        const int n = static_cast<int>(task.examples.size());
        for (int s = 0; s < config.steps_per_task; ++s) {
            ++step;
            std::vector<Example> batch;
            batch.reserve(static_cast<std::size_t>(config.batch_size));
            for (int i = 0; i < config.batch_size; ++i)
                batch.push_back(task.examples[static_cast<std::size_t>(
                    rng.uniform_int(0, n - 1))]);

            int violations = 0;
            if (strategy == Strategy::gem) {
                GemStepResult res =
                    gem_step(model, batch, memory, config.lr, config.projection);
                model = std::move(res.model);
                res.diagnostics.step = step;
                violations = res.diagnostics.violations;
                if (res.diagnostics.projected) ++metrics.projection_counts;
                if (observer) observer(res.diagnostics);
            } else {
                model = sgd_step(model, batch, config.lr);
            }

            for (const Example& e : batch) memory.insert(e);

            std::vector<double> row;
            row.reserve(tasks.size());
            for (const Task& t : tasks) row.push_back(mean_loss(model, t.examples));
            metrics.per_step_task_losses.push_back(std::move(row));
            metrics.violation_counts.push_back(violations);
        }
    }
    return metrics;
}

std::vector<Task> make_synthetic_tasks(int num_tasks, int dim,
                                       int examples_per_task, double conflict,
                                       std::uint64_t seed) {
    if (num_tasks < 1) throw std::invalid_argument("num_tasks must be >= 1");
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (examples_per_task < 1)
        throw std::invalid_argument("examples_per_task must be >= 1");
    if (conflict < 0.0 || conflict > 1.0)
        throw std::invalid_argument("conflict must lie in [0, 1]");

    DeterministicRng rng(seed);
    std::vector<Task> tasks(static_cast<std::size_t>(num_tasks));
    for (int t = 0; t < num_tasks; ++t) {
        tasks[static_cast<std::size_t>(t)].task_id = t + 1;
        tasks[static_cast<std::size_t>(t)].weights = VectorXd::Zero(dim);
    }

    if (conflict == 0.0) {
        // Disjoint coordinate blocks: task gradients are exactly orthogonal.
        if (dim < 2 * num_tasks)
            throw std::invalid_argument(
                "conflict = 0 needs dim >= 2 * num_tasks for disjoint supports");
        const int block = dim / num_tasks;
        for (int t = 0; t < num_tasks; ++t) {
            Task& task = tasks[static_cast<std::size_t>(t)];
            const int lo = t * block;
            VectorXd w_block = rng.normal_vector(block);
            w_block /= w_block.norm();
            task.weights.segment(lo, block) = w_block;
            for (int i = 0; i < examples_per_task; ++i) {
                Example e;
                e.task_id = task.task_id;
                e.x = VectorXd::Zero(dim);
                e.x.segment(lo, block) = rng.normal_vector(block);
                e.y = task.weights.dot(e.x) + kLabelNoiseSigma * rng.normal();
                task.examples.push_back(std::move(e));
            }
        }
        return tasks;
    }

    if (dim < num_tasks)
        throw std::invalid_argument("dim must be >= num_tasks");
    // Realize unit weights with pairwise inner product exactly -conflict:
    // take a symmetric square root of the Gram matrix and rotate it into a
    // random orthonormal frame.
    const Index t_count = num_tasks;
    MatrixXd gram = (1.0 + conflict) * MatrixXd::Identity(t_count, t_count);
    gram.array() -= conflict;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    if (eig.eigenvalues().minCoeff() < -1e-9)
        throw std::invalid_argument(
            "requested pairwise conflict is not realizable for this many tasks");
    const VectorXd sqrt_eigs =
        eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const MatrixXd gram_root =
        eig.eigenvectors() * sqrt_eigs.asDiagonal() * eig.eigenvectors().transpose();

    const MatrixXd raw = rng.normal_matrix(dim, t_count);
    const MatrixXd frame =
        Eigen::HouseholderQR<MatrixXd>(raw).householderQ() *
        MatrixXd::Identity(dim, t_count);
    const MatrixXd weights = frame * gram_root;  // column t = w_t

    for (int t = 0; t < num_tasks; ++t) {
        Task& task = tasks[static_cast<std::size_t>(t)];
        task.weights = weights.col(t);
        for (int i = 0; i < examples_per_task; ++i) {
            Example e;
            e.task_id = task.task_id;
            e.x = rng.normal_vector(dim);
            e.y = task.weights.dot(e.x) + kLabelNoiseSigma * rng.normal();
            task.examples.push_back(std::move(e));
        }
    }
    return tasks;
}

void write_csv(const RunMetrics& metrics, std::ostream& out) {
    out << "step,task,loss,violations\n";
    for (std::size_t s = 0; s < metrics.per_step_task_losses.size(); ++s) {
        const auto& row = metrics.per_step_task_losses[s];
        for (std::size_t t = 0; t < row.size(); ++t) {
            out << (s + 1) << ',' << metrics.task_ids[t] << ','
                << format_double(row[t]) << ',' << metrics.violation_counts[s]
                << '\n';
        }
    }
}

}  // namespace gemqp
