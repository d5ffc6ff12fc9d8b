#include "gemqp/cli_io.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gemqp::cli {

namespace {

double parse_number(const json& value, const std::string& name) {
    if (!value.is_number()) {
        throw std::invalid_argument(name + " must be a number");
    }
    const double x = value.get<double>();
    if (!std::isfinite(x))
        throw std::invalid_argument(name + " contains a non-finite value");
    return x;
}

}  // namespace

VectorXd parse_vector(const json& value, const std::string& name) {
    if (!value.is_array())
        throw std::invalid_argument(name + " must be an array of numbers");
    VectorXd v(static_cast<Index>(value.size()));
    for (std::size_t i = 0; i < value.size(); ++i) {
        std::ostringstream entry;
        entry << name << "[" << i << "]";
        v(static_cast<Index>(i)) = parse_number(value[i], entry.str());
    }
    return v;
}

MatrixXd parse_matrix(const json& value, const std::string& name) {
    if (!value.is_array())
        throw std::invalid_argument(name + " must be an array of row arrays");
    const Index rows = static_cast<Index>(value.size());
    if (rows == 0) return MatrixXd(0, 0);
    if (!value[0].is_array())
        throw std::invalid_argument(name + " must be an array of row arrays");
    const Index cols = static_cast<Index>(value[0].size());
    MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& row = value[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            std::ostringstream msg;
            msg << "dimension mismatch: row " << i << " of " << name
                << " has length " << row.size() << ", expected " << cols;
            throw std::invalid_argument(msg.str());
        }
        for (Index j = 0; j < cols; ++j) {
            std::ostringstream entry;
            entry << name << "[" << i << "][" << j << "]";
            m(i, j) = parse_number(row[static_cast<std::size_t>(j)], entry.str());
        }
    }
    return m;
}

ProjectRequest parse_project_request(const json& doc) {
    if (!doc.is_object())
        throw std::invalid_argument("request must be a JSON object");
    if (!doc.contains("g"))
        throw std::invalid_argument("request is missing \"g\"");
    if (!doc.contains("memory_gradients"))
        throw std::invalid_argument("request is missing \"memory_gradients\"");

    ProjectRequest req;
    req.g = parse_vector(doc["g"], "g");

    const json& mem = doc["memory_gradients"];
    if (!mem.is_array())
        throw std::invalid_argument("memory_gradients must be an array of arrays");
    for (std::size_t k = 0; k < mem.size(); ++k) {
        std::ostringstream name;
        name << "memory_gradients[" << k << "]";
        VectorXd row = parse_vector(mem[k], name.str());
        if (row.size() != req.g.size()) {
            std::ostringstream msg;
            msg << "dimension mismatch: " << name.str() << " has length "
                << row.size() << ", expected " << req.g.size();
            throw std::invalid_argument(msg.str());
        }
        req.memory_gradients.push_back(std::move(row));
    }

    if (doc.contains("tol_kkt"))
        req.tol_kkt = parse_number(doc["tol_kkt"], "tol_kkt");
    if (doc.contains("max_iters")) {
        if (!doc["max_iters"].is_number_integer())
            throw std::invalid_argument("max_iters must be an integer");
        req.max_iters = doc["max_iters"].get<long>();
    }
    if (doc.contains("margin"))
        req.margin = parse_number(doc["margin"], "margin");
    if (doc.contains("feas_tol"))
        req.feas_tol = parse_number(doc["feas_tol"], "feas_tol");
    return req;
}

json project_response_json(const ProjectionResult& result) {
    json doc;
    doc["g_tilde"] = vector_json(result.g_tilde);
    doc["v_star"] = vector_json(result.v_star);
    doc["violated"] = result.violated;
    doc["projected"] = result.projected;
    doc["kkt_residual"] = result.kkt_residual;
    doc["iterations"] = result.iterations;
    doc["status"] = to_string(result.status);
    return doc;
}

SolveInput parse_solve_input(const json& doc) {
    if (!doc.is_object())
        throw std::invalid_argument("input must be a JSON object");
    const bool generic = doc.contains("C") || doc.contains("w");
    const bool nonneg = doc.contains("M") || doc.contains("q");
    if (generic && nonneg)
        throw std::invalid_argument(
            "input mixes generic-QP keys (C, w) with nonnegative-QP keys (M, q)");
    if (generic) {
        if (!doc.contains("C") || !doc.contains("w"))
            throw std::invalid_argument("generic QP input needs both C and w");
        GenericQPInput input;
        input.C = parse_matrix(doc["C"], "C");
        input.w = parse_vector(doc["w"], "w");
        input.A = doc.contains("A") ? parse_matrix(doc["A"], "A")
                                    : MatrixXd(0, input.C.cols());
        input.b = doc.contains("b") ? parse_vector(doc["b"], "b") : VectorXd(0);
        return input;
    }
    if (nonneg) {
        if (!doc.contains("M") || !doc.contains("q"))
            throw std::invalid_argument("nonnegative QP input needs both M and q");
        NonnegQPInput input;
        input.M = parse_matrix(doc["M"], "M");
        input.q = parse_vector(doc["q"], "q");
        return input;
    }
    throw std::invalid_argument(
        "input must contain either {C, w, A, b} or {M, q}");
}

json vector_json(const VectorXd& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json matrix_json(const MatrixXd& m) {
    json arr = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        arr.push_back(std::move(row));
    }
    return arr;
}

}  // namespace gemqp::cli
