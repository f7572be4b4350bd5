#include "cli/panel.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "cli/csv.hpp"

namespace ordlatent::cli {

ParseError::ParseError(const std::string& source, int line, int column, const std::string& what)
    : Error(source + ":" + std::to_string(line) + (column > 0 ? ":" + std::to_string(column) : std::string()) +
            ": " + what),
      line_(line),
      column_(column) {}

std::string Panel::label(int i) const {
  return labels.empty() ? std::to_string(i + 1) : labels[static_cast<std::size_t>(i)];
}

namespace {

enum class Prefix { none, x, y };

Prefix prefix_of(const std::string& h) {
  if (h.size() >= 2 && h[1] == ':') {
    if (h[0] == 'X' || h[0] == 'x') return Prefix::x;
    if (h[0] == 'Y' || h[0] == 'y') return Prefix::y;
  }
  return Prefix::none;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

Panel parse_panel(std::istream& in, const std::string& source, const PanelOptions& opts) {
  std::vector<std::pair<int, std::string>> lines;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    strip_line(line, number == 1);
    if (trim(line).empty()) continue;
    lines.emplace_back(number, line);
  }
  if (lines.empty()) throw ParseError(source, 1, 0, "file is empty");

  auto fields_of = [&](const std::pair<int, std::string>& l) {
    try {
      return split_csv(l.second);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, l.first, 0, e.what());
    }
  };
  const int header_line = lines.front().first;
  std::vector<std::string> header = fields_of(lines.front());
  for (auto& h : header) h = trim(h);
  const int cols = static_cast<int>(header.size());

  bool has_label = false;
  int p_x = 0;
  int p_y = 0;
  const bool prefixed = std::any_of(header.begin(), header.end(), [](const auto& h) { return prefix_of(h) != Prefix::none; });
  if (prefixed) {
    has_label = prefix_of(header[0]) == Prefix::none;
    for (int j = has_label ? 1 : 0; j < cols; ++j) {
      const Prefix p = prefix_of(header[j]);
      if (p == Prefix::none) throw ParseError(source, header_line, j + 1, "column '" + header[j] + "' lacks an X: or Y: prefix");
      if (p == Prefix::x && p_y > 0) throw ParseError(source, header_line, j + 1, "X columns must precede Y columns");
      (p == Prefix::x ? p_x : p_y) += 1;
    }
    if ((opts.p_x && *opts.p_x != p_x) || (opts.p_y && *opts.p_y != p_y)) {
      throw ParseError(source, header_line, 0,
                       "header declares " + std::to_string(p_x) + " X and " + std::to_string(p_y) +
                           " Y columns, which contradicts --px/--py");
    }
  } else {
    if (!opts.p_x || !opts.p_y) {
      throw ParseError(source, header_line, 0, "header has no X:/Y: prefixes; pass --px and --py");
    }
    p_x = *opts.p_x;
    p_y = *opts.p_y;
    if (cols == p_x + p_y + 1) {
      has_label = true;
    } else if (cols != p_x + p_y) {
      throw ParseError(source, header_line, 0,
                       "expected " + std::to_string(p_x + p_y) + " category columns (plus an optional label), found " +
                           std::to_string(cols) + " columns");
    }
  }
  if (p_x < 1 || p_y < 1) throw ParseError(source, header_line, 0, "both blocks need at least one column");
  if (opts.q && *opts.q < 2) throw InvalidArgument("--q must be at least 2");

  Panel panel{OrdinalDataset(ModelConfig{1, 1, 2, true}, 1, {0, 0}), {}, {}, {}};
  const int first = has_label ? 1 : 0;
  if (has_label) panel.label_header = header[0];
  for (int j = first; j < cols; ++j) panel.names.push_back(prefixed ? trim(header[j].substr(2)) : header[j]);

  const int p = p_x + p_y;
  std::vector<int> codes;
  int max_code = 1;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const int number = lines[r].first;
    const auto fields = fields_of(lines[r]);
    if (static_cast<int>(fields.size()) != cols) {
      throw ParseError(source, number, 0,
                       "expected " + std::to_string(cols) + " fields, found " + std::to_string(fields.size()));
    }
    if (has_label) panel.labels.push_back(fields[0]);
    for (int j = first; j < cols; ++j) {
      const std::string cell = trim(fields[j]);
      int value = 0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      const std::string where = " in column '" + header[j] + "'";
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw ParseError(source, number, j + 1, "'" + cell + "'" + where + " is not an integer");
      }
      if (value < 1 || (opts.q && value > *opts.q)) {
        throw ParseError(source, number, j + 1,
                         "value " + cell + where + " outside 1.." + (opts.q ? std::to_string(*opts.q) : "q"));
      }
      max_code = std::max(max_code, value);
      codes.push_back(value - 1);
    }
  }
  const int n = static_cast<int>(codes.size()) / p;
  if (n < 1) throw ParseError(source, header_line, 0, "no data rows");
  const ModelConfig config{p_x, p_y, opts.q ? *opts.q : std::max(max_code, 2), opts.shared_thresholds};
  panel.data = OrdinalDataset(config, n, std::move(codes));
  return panel;
}

Panel read_panel(const std::string& path, const PanelOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return parse_panel(in, path, opts);
}

void write_panel(std::ostream& out, const Panel& panel) {
  const ModelConfig& c = panel.data.config();
  std::vector<std::string> header;
  if (!panel.label_header.empty() || !panel.labels.empty()) header.push_back(panel.label_header);
  for (int l = 0; l < c.num_variables(); ++l) {
    header.push_back((l < c.p_x ? "X:" : "Y:") + panel.names[static_cast<std::size_t>(l)]);
  }
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << csv_field(header[j]);
  out << '\n';
  for (int i = 0; i < panel.data.n(); ++i) {
    bool first = true;
    if (header.size() > static_cast<std::size_t>(c.num_variables())) {
      out << csv_field(panel.label(i));
      first = false;
    }
    for (int l = 0; l < c.num_variables(); ++l) {
      out << (first ? "" : ",") << panel.data.at(i, l) + 1;
      first = false;
    }
    out << '\n';
  }
}

Panel make_panel(OrdinalDataset data) {
  const ModelConfig c = data.config();
  Panel panel{std::move(data), "id", {}, {}};
  for (int i = 0; i < panel.data.n(); ++i) panel.labels.push_back(std::to_string(i + 1));
  for (int l = 0; l < c.num_variables(); ++l) {
    panel.names.push_back(l < c.p_x ? "X" + std::to_string(l + 1) : "Y" + std::to_string(l - c.p_x + 1));
  }
  return panel;
}

}  // namespace ordlatent::cli
