#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flatsph/dichotomy.hpp"

namespace flatsph::reproduce {

struct Check {
  std::string name;
  bool passed = false;
  bool ambiguous = false;
  std::string detail;
};

struct Row {
  std::string id;
  std::string statement;
  std::vector<Check> checks;
  bool passed() const;
  bool ambiguous() const;
};

// One row per dichotomy result: rank one, p = 2 regular, p = 2 type D,
// p = 2 type A, p = 3 regular.
Row rank_one_row(const dichotomy::ScanOptions& options);
Row regular_p2_row(const dichotomy::ScanOptions& options);
Row type_d_row(const dichotomy::ScanOptions& options);
Row type_a_row(const dichotomy::ScanOptions& options);
Row regular_p3_row(const dichotomy::ScanOptions& options);

std::vector<Row> reproduce_all(const dichotomy::ScanOptions& options);

nlohmann::json to_json(const std::vector<Row>& rows);

}  // namespace flatsph::reproduce
