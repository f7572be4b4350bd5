#pragma once

// Panel files: CSV with a header row, an optional leading label column, then
// the X block and the Y block as integer categories 1..q. Block membership
// comes from "X:" / "Y:" header prefixes or from --px / --py.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ordlatent/error.hpp"
#include "ordlatent/model.hpp"

namespace ordlatent::cli {

class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, int column, const std::string& what);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

struct PanelOptions {
  std::optional<int> p_x;
  std::optional<int> p_y;
  std::optional<int> q;  // inferred as the largest observed code when unset
  bool shared_thresholds = true;
};

struct Panel {
  OrdinalDataset data;
  std::string label_header;         // empty when the file has no label column
  std::vector<std::string> labels;  // one per row, or empty
  std::vector<std::string> names;   // variable names without the block prefix

  /// Row label, or the 1-based row number when the file has none.
  std::string label(int i) const;
};

Panel parse_panel(std::istream& in, const std::string& source, const PanelOptions& opts);
Panel read_panel(const std::string& path, const PanelOptions& opts);

void write_panel(std::ostream& out, const Panel& panel);

/// Panel with an "id" label column 1..n and names X1.., Y1...
Panel make_panel(OrdinalDataset data);

}  // namespace ordlatent::cli
