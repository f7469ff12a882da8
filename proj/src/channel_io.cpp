#include "dbx/channel_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dbx {

namespace {

Mat parse_matrix(const nlohmann::json& j, const std::string& field) {
  if (!j.contains(field))
    throw ParseError("channel spec: missing field \"" + field + "\"");
  const auto& m = j.at(field);
  if (!m.is_array() || m.empty())
    throw ParseError("channel spec: \"" + field + "\" must be a non-empty array of rows");
  Mat rows;
  for (size_t r = 0; r < m.size(); ++r) {
    const auto& row = m.at(r);
    if (!row.is_array())
      throw ParseError("channel spec: " + field + " row " + std::to_string(r) +
                       " is not an array");
    Vec v;
    for (const auto& cell : row) {
      if (!cell.is_number())
        throw ParseError("channel spec: " + field + " row " + std::to_string(r) +
                         " holds a non-numeric entry");
      v.push_back(cell.get<double>());
    }
    rows.push_back(std::move(v));
  }
  ValidationReport rep = validate_kernel(rows);
  if (!rep.ok())
    throw ParseError("channel spec: " + field + ": " + rep.to_string());
  return rows;
}

}  // namespace

ChannelSpec parse_channel_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("channel spec: invalid JSON: ") + e.what());
  }
  ChannelSpec spec;
  Mat w1 = parse_matrix(j, "w1");
  Mat w2 = parse_matrix(j, "w2");
  if (w1[0].size() != w2.size())
    throw ParseError("channel spec: w1 has " + std::to_string(w1[0].size()) +
                     " outputs but w2 has " + std::to_string(w2.size()) + " inputs");
  spec.channel = DegradedPair(StochasticMatrix(std::move(w1)),
                              StochasticMatrix(std::move(w2)));
  if (j.contains("name") && j.at("name").is_string())
    spec.name = j.at("name").get<std::string>();
  return spec;
}

ChannelSpec load_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open channel file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_channel_json(ss.str());
}

std::string channel_to_json(const DegradedPair& ch, const std::string& name) {
  nlohmann::json j;
  if (!name.empty()) j["name"] = name;
  j["w1"] = ch.w1().rows();
  j["w2"] = ch.w2().rows();
  return j.dump(2);
}

void CsvTable::add_row(const Vec& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(fmt17(v));
  rows_.push_back(std::move(cells));
}

void CsvTable::add_row_raw(std::vector<std::string> cells) {
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  for (size_t i = 0; i < header_.size(); ++i) {
    if (i) os << ',';
    os << header_[i];
  }
  os << '\n';
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << row[i];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace dbx
