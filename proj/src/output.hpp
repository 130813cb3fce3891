#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace risnet::app {

// A CSV table; cells are preformatted so column order and text are stable.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string fmt(double v);
std::string fmt(long v);

void write_csv(std::ostream& os, const Table& t);
void write_json(std::ostream& os, const nlohmann::json& j);

}  // namespace risnet::app
