#pragma once

#include <optional>
#include <variant>

#include <json.hpp>

#include "gemqp/projection.hpp"
#include "gemqp/qp.hpp"

namespace gemqp::cli {

using json = nlohmann::json;

/// Parsed `project` input: the gradient data plus any solver settings the
/// document carries. Flags may still override the settings afterwards.
struct ProjectRequest {
    VectorXd g;
    std::vector<VectorXd> memory_gradients;
    std::optional<double> tol_kkt;
    std::optional<long> max_iters;
    std::optional<double> margin;
    std::optional<double> feas_tol;
};

ProjectRequest parse_project_request(const json& doc);

json project_response_json(const ProjectionResult& result);

/// `solve` input is either a generic QP {C, w, A, b} (A, b optional) or a
/// nonnegative QP {M, q}, discriminated by which keys are present.
struct GenericQPInput {
    MatrixXd C;
    VectorXd w;
    MatrixXd A;
    VectorXd b;
};

struct NonnegQPInput {
    MatrixXd M;
    VectorXd q;
};

using SolveInput = std::variant<GenericQPInput, NonnegQPInput>;

SolveInput parse_solve_input(const json& doc);

json vector_json(const VectorXd& v);
json matrix_json(const MatrixXd& m);

VectorXd parse_vector(const json& value, const std::string& name);
MatrixXd parse_matrix(const json& value, const std::string& name);

}  // namespace gemqp::cli
