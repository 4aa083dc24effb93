// io.hpp — JSON model/state ingestion and serialization. Complex scalars are
// 2-element arrays [re, im]; matrices are row-major nested arrays.
#pragma once

#include <string>

#include <json.hpp>

#include "qms/model.hpp"

namespace qms::io {

using Json = nlohmann::ordered_json;

// Schema errors carry a JSON-path location, e.g. "$.jumps[2][0][1]".
class SchemaError : public ValidationError {
public:
    SchemaError(const std::string& path, const std::string& what)
        : ValidationError(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

Json complex_to_json(const Complex& z);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& path);

Json model_to_json(const GkslModel& model);
GkslModel model_from_json(const Json& j);
GkslModel load_model(const std::string& file_path);

Matrix state_from_json(const Json& j); // {"dim": d, "matrix": [...]}
Matrix load_state(const std::string& file_path);

// FNV-1a 64 over the canonical (compact) model serialization.
std::string model_hash(const GkslModel& model);

} // namespace qms::io
