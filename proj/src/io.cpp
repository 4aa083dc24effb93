// io.cpp — JSON ingestion with path-labeled schema errors
#include "qms/io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace qms::io {

namespace {

Complex complex_from_json(const Json& j, const std::string& path)
{
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw SchemaError(path, "expected a complex scalar as [re, im]");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

} // namespace

Json complex_to_json(const Complex& z)
{
    return Json::array({z.real(), z.imag()});
}

Json matrix_to_json(const Matrix& m)
{
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& path)
{
    if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty matrix");
    const Index rows = static_cast<Index>(j.size());
    Index cols = -1;
    Matrix m;
    for (Index r = 0; r < rows; ++r) {
        const Json& row = j[static_cast<size_t>(r)];
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        if (!row.is_array()) throw SchemaError(row_path, "expected a matrix row");
        if (cols < 0) {
            cols = static_cast<Index>(row.size());
            m.resize(rows, cols);
        }
        if (static_cast<Index>(row.size()) != cols)
            throw SchemaError(row_path, "ragged matrix rows");
        for (Index c = 0; c < cols; ++c)
            m(r, c) = complex_from_json(row[static_cast<size_t>(c)],
                                        row_path + "[" + std::to_string(c) + "]");
    }
    return m;
}

Json model_to_json(const GkslModel& model)
{
    Json j;
    j["dim"] = model.dim;
    j["hamiltonian"] = matrix_to_json(model.hamiltonian);
    Json jumps = Json::array();
    for (const Matrix& l : model.jumps) jumps.push_back(matrix_to_json(l));
    j["jumps"] = std::move(jumps);
    if (!model.labels.empty()) j["labels"] = model.labels;
    return j;
}

GkslModel model_from_json(const Json& j)
{
    if (!j.is_object()) throw SchemaError("$", "expected a model object");
    if (!j.contains("dim") || !j["dim"].is_number_integer())
        throw SchemaError("$.dim", "expected a positive integer");
    GkslModel model;
    model.dim = j["dim"].get<Index>();
    if (model.dim <= 0) throw SchemaError("$.dim", "expected a positive integer");
    if (!j.contains("hamiltonian"))
        throw SchemaError("$.hamiltonian", "missing");
    model.hamiltonian = matrix_from_json(j["hamiltonian"], "$.hamiltonian");
    if (model.hamiltonian.rows() != model.dim || model.hamiltonian.cols() != model.dim)
        throw SchemaError("$.hamiltonian", "expected a dim x dim matrix");
    if (j.contains("jumps")) {
        if (!j["jumps"].is_array()) throw SchemaError("$.jumps", "expected an array of matrices");
        for (size_t k = 0; k < j["jumps"].size(); ++k) {
            const std::string path = "$.jumps[" + std::to_string(k) + "]";
            Matrix l = matrix_from_json(j["jumps"][k], path);
            if (l.rows() != model.dim || l.cols() != model.dim)
                throw SchemaError(path, "expected a dim x dim matrix");
            model.jumps.push_back(std::move(l));
        }
    }
    if (j.contains("labels")) {
        if (!j["labels"].is_array()) throw SchemaError("$.labels", "expected an array of strings");
        for (size_t k = 0; k < j["labels"].size(); ++k) {
            if (!j["labels"][k].is_string())
                throw SchemaError("$.labels[" + std::to_string(k) + "]", "expected a string");
            model.labels.push_back(j["labels"][k].get<std::string>());
        }
    }
    return model;
}

namespace {

Json parse_file(const std::string& file_path)
{
    std::ifstream in(file_path);
    if (!in) throw ValidationError("cannot open file: " + file_path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("JSON parse error in " + file_path + ": " + e.what());
    }
    return j;
}

} // namespace

GkslModel load_model(const std::string& file_path)
{
    return model_from_json(parse_file(file_path));
}

Matrix state_from_json(const Json& j)
{
    if (!j.is_object()) throw SchemaError("$", "expected a state object");
    if (!j.contains("matrix")) throw SchemaError("$.matrix", "missing");
    Matrix m = matrix_from_json(j["matrix"], "$.matrix");
    if (j.contains("dim")) {
        const Index d = j["dim"].get<Index>();
        if (m.rows() != d || m.cols() != d)
            throw SchemaError("$.matrix", "expected a dim x dim matrix");
    }
    if (m.rows() != m.cols()) throw SchemaError("$.matrix", "expected a square matrix");
    return m;
}

Matrix load_state(const std::string& file_path)
{
    return state_from_json(parse_file(file_path));
}

std::string model_hash(const GkslModel& model)
{
    const std::string canonical = model_to_json(model).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << "fnv1a:" << std::hex << h;
    return out.str();
}

} // namespace qms::io
