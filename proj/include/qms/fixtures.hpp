// fixtures.hpp — Bundled reference models
#pragma once

#include <string>
#include <vector>

#include "qms/model.hpp"

namespace qms::fixtures {

struct Fixture {
    std::string name;
    std::string note;
    GkslModel model;
};

const std::vector<Fixture>& all();
const Fixture& get(const std::string& name); // throws ValidationError on unknown name
std::vector<std::string> names();

} // namespace qms::fixtures
