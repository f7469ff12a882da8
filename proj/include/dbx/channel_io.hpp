#pragma once
// Channel-spec files (JSON, explicit row-major matrices, no symbol labels)
// and plot-ready CSV tables. All numeric text is printed with 17 significant
// digits so emitted values round-trip exactly.

#include <string>
#include <vector>

#include "dbx/common.hpp"
#include "dbx/prob.hpp"

namespace dbx {

struct ChannelSpec {
  DegradedPair channel;
  std::string name;
};

// Throws ParseError with line/field diagnostics (offending row named).
ChannelSpec parse_channel_json(const std::string& text);
ChannelSpec load_channel_file(const std::string& path);
std::string channel_to_json(const DegradedPair& ch, const std::string& name);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(const Vec& values);
  void add_row_raw(std::vector<std::string> cells);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace dbx
