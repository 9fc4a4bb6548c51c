#pragma once

#include "ptc/predictors/serialize.hpp"
#include "ptc/problems/generators.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ptc {

/// Header z_1..z_d,c_1..c_n, then one row per sample with %.17g values.
inline void write_dataset_csv(std::ostream& os, const Dataset& data) {
    for (Index j = 0; j < data.Z.cols(); ++j) os << (j ? "," : "") << "z_" << j + 1;
    for (Index i = 0; i < data.C.cols(); ++i) os << ((data.Z.cols() || i) ? "," : "") << "c_" << i + 1;
    os << '\n';
    for (Index t = 0; t < data.size(); ++t) {
        bool first = true;
        auto put = [&](double v) {
            os << (first ? "" : ",") << format_double(v);
            first = false;
        };
        for (Index j = 0; j < data.Z.cols(); ++j) put(data.Z(t, j));
        for (Index i = 0; i < data.C.cols(); ++i) put(data.C(t, i));
        os << '\n';
    }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

/// Inverse of write_dataset_csv; the column split is taken from the header names.
inline Dataset read_dataset_csv(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), ErrorCode::ParseError, "dataset csv: missing header");
    const auto header = split_csv_line(line);
    Index d = 0;
    Index n = 0;
    for (const auto& h : header) {
        if (h.rfind("z_", 0) == 0) {
            require(n == 0, ErrorCode::ParseError, "dataset csv: z columns must precede c columns");
            ++d;
        } else if (h.rfind("c_", 0) == 0) {
            ++n;
        } else {
            throw Error(ErrorCode::ParseError, "dataset csv: unexpected column '" + h + "'");
        }
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        require(cells.size() == header.size(), ErrorCode::ParseError, "dataset csv: ragged row");
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(c, &used));
                require(used == c.size(), ErrorCode::ParseError, "dataset csv: bad number '" + c + "'");
            } catch (const std::logic_error&) {
                throw Error(ErrorCode::ParseError, "dataset csv: bad number '" + c + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    Dataset data{Matrix(static_cast<Index>(rows.size()), d), Matrix(static_cast<Index>(rows.size()), n)};
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (Index j = 0; j < d; ++j) data.Z(static_cast<Index>(t), j) = rows[t][static_cast<std::size_t>(j)];
        for (Index i = 0; i < n; ++i) data.C(static_cast<Index>(t), i) = rows[t][static_cast<std::size_t>(d + i)];
    }
    return data;
}

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    if (j.empty()) return {};
    const auto rows = static_cast<Index>(j.size());
    const auto cols = static_cast<Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        require(static_cast<Index>(j.at(static_cast<std::size_t>(i)).size()) == cols, ErrorCode::ParseError,
                "meta: ragged matrix");
        for (Index k = 0; k < cols; ++k) m(i, k) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k));
    }
    return m;
}

}  // namespace detail

/// Sidecar: kind, seed, T, d, n, cost_sign, theta, clamped, constraint sets.
inline nlohmann::json instance_meta(const ProblemInstance& inst) {
    nlohmann::json j;
    j["format"] = "ptc-dataset-meta";
    j["version"] = 1;
    j["kind"] = std::string(to_string(inst.model.kind));
    j["seed"] = inst.seed;
    j["T"] = inst.data.size();
    j["d"] = inst.model.d;
    j["n"] = inst.model.n;
    j["cost_sign"] = inst.model.cost_sign();
    j["theta"] = detail::matrix_to_json(inst.model.theta);
    j["clamped"] = inst.clamped;
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& c : inst.constraint_sets) {
        nlohmann::json s;
        s["a_eq"] = detail::matrix_to_json(c.a_eq);
        s["b_eq"] = detail::matrix_to_json(Matrix(c.b_eq));
        s["a_ub"] = detail::matrix_to_json(c.a_ub);
        s["b_ub"] = detail::matrix_to_json(Matrix(c.b_ub));
        s["lower"] = detail::matrix_to_json(Matrix(c.lower));
        s["upper"] = detail::matrix_to_json(Matrix(c.upper));
        sets.push_back(std::move(s));
    }
    j["constraint_sets"] = std::move(sets);
    return j;
}

/// Rebuilds model and constraints from a sidecar (the dataset comes from the CSV).
inline ProblemInstance instance_from_meta(const nlohmann::json& j, Dataset data) {
    require(j.value("format", "") == "ptc-dataset-meta", ErrorCode::ParseError, "meta: unknown format");
    ProblemInstance inst;
    inst.model.kind = problem_kind_from_string(j.at("kind").get<std::string>());
    inst.model.d = j.at("d").get<Index>();
    inst.model.n = j.at("n").get<Index>();
    inst.model.theta = detail::matrix_from_json(j.at("theta"));
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.clamped = j.value("clamped", Index{0});
    auto vec = [](const nlohmann::json& v) {
        const Matrix m = detail::matrix_from_json(v);
        return Vector(Eigen::Map<const Vector>(m.data(), m.size()));
    };
    for (const auto& s : j.at("constraint_sets")) {
        Constraints c;
        c.a_eq = detail::matrix_from_json(s.at("a_eq"));
        c.b_eq = vec(s.at("b_eq"));
        c.a_ub = detail::matrix_from_json(s.at("a_ub"));
        c.b_ub = vec(s.at("b_ub"));
        c.lower = vec(s.at("lower"));
        c.upper = vec(s.at("upper"));
        inst.constraint_sets.push_back(std::move(c));
    }
    require(data.covariate_dim() == inst.model.d && data.objective_dim() == inst.model.n,
            ErrorCode::DimensionMismatch, "meta: dataset shape disagrees with sidecar");
    inst.data = std::move(data);
    return inst;
}

}  // namespace ptc
