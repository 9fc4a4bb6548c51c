#pragma once

// Versioned text records for fitted models. Layout (see docs/FORMATS.md):
//
//   ptc-record 1 <type>
//   text <key> <value>
//   scalar <key> <value>
//   matrix <key> <rows> <cols>
//   <rows lines of cols values, %.17g>
//   end
//
// Several records may follow each other in one stream.

#include "ptc/predictors/predictor.hpp"
#include "ptc/predictors/quantile.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace ptc {

inline constexpr int kRecordVersion = 1;

struct Record {
    std::string type;
    std::map<std::string, std::string> text;
    std::map<std::string, double> scalars;
    std::map<std::string, Matrix> matrices;

    const Matrix& matrix(const std::string& key) const {
        auto it = matrices.find(key);
        require(it != matrices.end(), ErrorCode::ParseError, "record '" + type + "' lacks matrix '" + key + "'");
        return it->second;
    }
    Vector vector(const std::string& key) const {
        const Matrix& m = matrix(key);
        return Eigen::Map<const Vector>(m.data(), m.size());
    }
    double scalar(const std::string& key) const {
        auto it = scalars.find(key);
        require(it != scalars.end(), ErrorCode::ParseError, "record '" + type + "' lacks scalar '" + key + "'");
        return it->second;
    }
    const std::string& str(const std::string& key) const {
        auto it = text.find(key);
        require(it != text.end(), ErrorCode::ParseError, "record '" + type + "' lacks field '" + key + "'");
        return it->second;
    }
    void put(const std::string& key, const Vector& v) { matrices[key] = Matrix(v); }
    void put(const std::string& key, const Matrix& m) { matrices[key] = m; }
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_record(std::ostream& os, const Record& r) {
    os << "ptc-record " << kRecordVersion << ' ' << r.type << '\n';
    for (const auto& [k, v] : r.text) os << "text " << k << ' ' << v << '\n';
    for (const auto& [k, v] : r.scalars) os << "scalar " << k << ' ' << format_double(v) << '\n';
    for (const auto& [k, m] : r.matrices) {
        os << "matrix " << k << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_double(m(i, j));
            os << '\n';
        }
    }
    os << "end\n";
}

inline Record read_record(std::istream& is) {
    std::string line;
    while (std::getline(is, line) && line.empty()) {
    }
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    Record r;
    head >> magic >> version >> r.type;
    require(magic == "ptc-record", ErrorCode::ParseError, "not a ptc record");
    require(version == kRecordVersion, ErrorCode::ParseError, "unsupported record version " + std::to_string(version));
    while (std::getline(is, line)) {
        if (line == "end") return r;
        std::istringstream ls(line);
        std::string tag;
        std::string key;
        ls >> tag >> key;
        if (tag == "text") {
            std::string value;
            std::getline(ls >> std::ws, value);
            r.text[key] = value;
        } else if (tag == "scalar") {
            std::string value;
            ls >> value;
            r.scalars[key] = std::stod(value);
        } else if (tag == "matrix") {
            Index rows = 0;
            Index cols = 0;
            ls >> rows >> cols;
            require(ls && rows >= 0 && cols >= 0, ErrorCode::ParseError, "bad matrix header for '" + key + "'");
            Matrix m(rows, cols);
            for (Index i = 0; i < rows; ++i) {
                for (Index j = 0; j < cols; ++j) {
                    std::string tok;
                    require(static_cast<bool>(is >> tok), ErrorCode::ParseError, "truncated matrix '" + key + "'");
                    m(i, j) = std::stod(tok);
                }
            }
            std::getline(is, line);
            r.matrices[key] = std::move(m);
        } else {
            throw Error(ErrorCode::ParseError, "unknown record line '" + line + "'");
        }
    }
    throw Error(ErrorCode::ParseError, "record '" + r.type + "' is not terminated");
}

namespace detail {

inline void put_mlp(Record& r, const Mlp& net) {
    r.scalars["layers"] = static_cast<double>(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        r.put("w" + std::to_string(l), net.layers[l].weight);
        r.put("b" + std::to_string(l), net.layers[l].bias);
    }
    r.put("input_shift", net.input_shift);
    r.put("input_scale", net.input_scale);
    r.put("output_shift", net.output_shift);
    r.put("output_scale", net.output_scale);
}

inline Mlp get_mlp(const Record& r) {
    Mlp net;
    const auto layers = static_cast<std::size_t>(r.scalar("layers"));
    for (std::size_t l = 0; l < layers; ++l) {
        net.layers.push_back({r.matrix("w" + std::to_string(l)), r.vector("b" + std::to_string(l))});
    }
    net.input_shift = r.vector("input_shift");
    net.input_scale = r.vector("input_scale");
    net.output_shift = r.vector("output_shift");
    net.output_scale = r.vector("output_scale");
    return net;
}

}  // namespace detail

inline Record to_record(const Predictor& p) {
    Record r;
    r.type = "predictor";
    r.text["kind"] = std::string(to_string(p.kind));
    r.scalars["input_dim"] = static_cast<double>(p.input_dim);
    r.scalars["output_dim"] = static_cast<double>(p.output_dim);
    switch (p.kind) {
    case PredictorKind::Linear:
        r.put("weights", p.weights);
        r.put("intercept", p.intercept);
        break;
    case PredictorKind::KernelRidgeRbf:
        r.put("support", p.support);
        r.put("dual", p.dual);
        r.put("offset", p.offset);
        r.scalars["sigma"] = p.sigma;
        break;
    case PredictorKind::Mlp:
        detail::put_mlp(r, p.net);
        break;
    }
    return r;
}

inline Predictor predictor_from_record(const Record& r) {
    require(r.type == "predictor", ErrorCode::ParseError, "expected predictor record, got '" + r.type + "'");
    Predictor p;
    p.kind = predictor_kind_from_string(r.str("kind"));
    p.input_dim = static_cast<Index>(r.scalar("input_dim"));
    p.output_dim = static_cast<Index>(r.scalar("output_dim"));
    switch (p.kind) {
    case PredictorKind::Linear:
        p.weights = r.matrix("weights");
        p.intercept = r.vector("intercept");
        break;
    case PredictorKind::KernelRidgeRbf:
        p.support = r.matrix("support");
        p.dual = r.matrix("dual");
        p.offset = r.vector("offset");
        p.sigma = r.scalar("sigma");
        break;
    case PredictorKind::Mlp:
        p.net = detail::get_mlp(r);
        break;
    }
    return p;
}

inline Record to_record(const QuantileModel& q) {
    Record r;
    r.type = "quantile-model";
    r.text["kind"] = std::string(to_string(q.kind));
    r.scalars["alpha"] = q.alpha;
    r.scalars["floor"] = q.floor;
    r.scalars["input_dim"] = static_cast<double>(q.input_dim);
    r.scalars["output_dim"] = static_cast<double>(q.output_dim);
    if (q.kind == QuantileKind::LinearPinball) {
        r.put("input_shift", q.input_shift);
        r.put("input_scale", q.input_scale);
        r.put("weights", q.weights);
        r.put("intercept", q.intercept);
    } else {
        detail::put_mlp(r, q.net);
    }
    return r;
}

inline QuantileModel quantile_from_record(const Record& r) {
    require(r.type == "quantile-model", ErrorCode::ParseError, "expected quantile-model record, got '" + r.type + "'");
    QuantileModel q;
    q.kind = quantile_kind_from_string(r.str("kind"));
    q.alpha = r.scalar("alpha");
    q.floor = r.scalar("floor");
    q.input_dim = static_cast<Index>(r.scalar("input_dim"));
    q.output_dim = static_cast<Index>(r.scalar("output_dim"));
    if (q.kind == QuantileKind::LinearPinball) {
        q.input_shift = r.vector("input_shift");
        q.input_scale = r.vector("input_scale");
        q.weights = r.matrix("weights");
        q.intercept = r.vector("intercept");
    } else {
        q.net = detail::get_mlp(r);
    }
    return q;
}

inline void save_predictor(std::ostream& os, const Predictor& p) { write_record(os, to_record(p)); }
inline Predictor load_predictor(std::istream& is) { return predictor_from_record(read_record(is)); }

}  // namespace ptc
